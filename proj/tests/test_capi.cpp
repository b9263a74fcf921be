// Exercises the shared library exclusively through the C header.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "latticewalk.h"

namespace {

struct Record {
  int64_t trial;
  int step;
  double time;
  int coin;
  bool operator==(const Record&) const = default;
};

std::vector<Record> collect(const lw_records* records) {
  int64_t count = 0;
  REQUIRE(lw_records_count(records, &count) == LW_OK);
  std::vector<Record> out;
  for (int64_t i = 0; i < count; ++i) {
    Record r{};
    REQUIRE(lw_records_entry(records, i, &r.trial, &r.step, &r.time, &r.coin) ==
            LW_OK);
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("version and error message plumbing") {
  CHECK(std::string(lw_version()) == "1.0.0");

  lw_schedule* schedule = nullptr;
  CHECK(lw_schedule_named("grover", &schedule) == LW_ERR_DOMAIN);
  CHECK(std::string(lw_error_message()).find("grover") != std::string::npos);
  CHECK(lw_schedule_named(nullptr, &schedule) == LW_ERR_DOMAIN);
}

TEST_CASE("schedule construction and properties") {
  lw_schedule* hadamard = nullptr;
  REQUIRE(lw_schedule_named("hadamard", &hadamard) == LW_OK);
  int separable = 0, staged = 0;
  CHECK(lw_schedule_separable(hadamard, &separable) == LW_OK);
  CHECK(separable == 1);
  CHECK(lw_schedule_has_staged(hadamard, &staged) == LW_OK);
  CHECK(staged == 0);
  lw_schedule_free(hadamard);

  const double q = 3.14159265358979312 / 8.0;
  const double theta[4] = {q, q, q, q};
  lw_schedule* angled = nullptr;
  REQUIRE(lw_schedule_angles(theta, 3.14159265358979312, 0.0, LW_EOM_DIAGONAL,
                             1, &angled) == LW_OK);
  CHECK(lw_schedule_has_staged(angled, &staged) == LW_OK);
  CHECK(staged == 1);
  CHECK(lw_schedule_separable(angled, &separable) == LW_OK);
  CHECK(separable == 0);  // diagonal controlled phase entangles
  lw_schedule_free(angled);

  lw_schedule* bad = nullptr;
  CHECK(lw_schedule_angles(theta, 0.0, 0.0, 99, 0, &bad) == LW_ERR_DOMAIN);
}

TEST_CASE("state evolution through the C surface") {
  lw_schedule* schedule = nullptr;
  REQUIRE(lw_schedule_named("hadamard", &schedule) == LW_OK);
  lw_state* state = nullptr;
  REQUIRE(lw_state_localized(0, 0, -1, -1, &state) == LW_OK);

  int steps = -1;
  CHECK(lw_state_step_count(state, &steps) == LW_OK);
  CHECK(steps == 0);

  REQUIRE(lw_state_evolve(state, schedule, 1, LW_ORDER_COMBINED) == LW_OK);
  CHECK(lw_state_step_count(state, &steps) == LW_OK);
  CHECK(steps == 1);

  double norm = 0.0;
  CHECK(lw_state_norm(state, &norm) == LW_OK);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));

  int64_t entries = 0;
  REQUIRE(lw_state_entry_count(state, &entries) == LW_OK);
  REQUIRE(entries == 4);
  // Entries arrive sorted by label; each has modulus 1/2.
  for (int64_t i = 0; i < entries; ++i) {
    int x1, x2, c1, c2;
    double re, im;
    REQUIRE(lw_state_entry(state, i, &x1, &x2, &c1, &c2, &re, &im) == LW_OK);
    CHECK(std::abs(std::hypot(re, im) - 0.5) < 1e-12);
    CHECK(x1 == c1);
    CHECK(x2 == c2);
  }

  lw_dist* dist = nullptr;
  REQUIRE(lw_state_position_dist(state, &dist) == LW_OK);
  int64_t positions = 0;
  CHECK(lw_dist_entry_count(dist, &positions) == LW_OK);
  CHECK(positions == 4);
  double s = 0.0;
  CHECK(lw_similarity(dist, dist, &s) == LW_OK);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));

  lw_dist_free(dist);
  lw_state_free(state);
  lw_schedule_free(schedule);

  lw_state* invalid = nullptr;
  CHECK(lw_state_localized(0, 0, 0, 0, &invalid) == LW_ERR_DOMAIN);
}

TEST_CASE("states can be rebuilt from raw amplitudes") {
  const double s = 1.0 / std::sqrt(2.0);
  const int x1[2] = {0, 0}, x2[2] = {0, 0};
  const int c1[2] = {-1, +1}, c2[2] = {-1, +1};
  const double re[2] = {s, s}, im[2] = {0.0, 0.0};
  lw_state* bell = nullptr;
  REQUIRE(lw_state_from_entries(2, x1, x2, c1, c2, re, im, &bell) == LW_OK);
  double bits = 0.0;
  CHECK(lw_state_entropy(bell, &bits) == LW_OK);
  CHECK(bits == doctest::Approx(1.0).epsilon(1e-9));
  lw_state_free(bell);

  const double bad_re[2] = {1.0, 1.0};
  lw_state* bad = nullptr;
  CHECK(lw_state_from_entries(2, x1, x2, c1, c2, bad_re, im, &bad) ==
        LW_ERR_DOMAIN);
}

TEST_CASE("distribution builder and metrics") {
  lw_dist* dist = nullptr;
  REQUIRE(lw_dist_new(0, &dist) == LW_OK);
  CHECK(lw_dist_add(dist, 0, 0, 0, 0, 3.0) == LW_OK);
  CHECK(lw_dist_add(dist, 1, 1, 0, 0, 1.0) == LW_OK);
  CHECK(lw_dist_add(dist, 1, -1, 0, 0, 0.0) == LW_OK);
  CHECK(lw_dist_add(dist, 0, 0, -1, -1, 1.0) == LW_ERR_DOMAIN);

  double value = 0.0;
  CHECK(lw_confinement(dist, &value) == LW_ERR_DOMAIN);  // not finalized yet
  REQUIRE(lw_dist_finalize(dist, 1) == LW_OK);
  CHECK(lw_dist_finalize(dist, 1) == LW_ERR_DOMAIN);

  CHECK(lw_confinement(dist, &value) == LW_OK);
  CHECK(value == doctest::Approx(1.0).epsilon(1e-12));

  int64_t marginal = 0;
  CHECK(lw_marginal_count(dist, 1, &marginal) == LW_OK);
  CHECK(marginal == 2);
  int x = 0;
  CHECK(lw_marginal_entry(dist, 2, 0, &x, &value) == LW_OK);
  CHECK(x == -1);
  CHECK(value == doctest::Approx(0.0).epsilon(1e-15));
  lw_dist_free(dist);
}

TEST_CASE("similarity requires normalized inputs") {
  lw_dist* p = nullptr;
  REQUIRE(lw_dist_new(0, &p) == LW_OK);
  REQUIRE(lw_dist_add(p, 0, 0, 0, 0, 0.5) == LW_OK);
  REQUIRE(lw_dist_finalize(p, 0) == LW_OK);  // left unnormalized
  double s = 0.0;
  CHECK(lw_similarity(p, p, &s) == LW_ERR_DOMAIN);
  CHECK(std::strlen(lw_error_message()) > 0);
  lw_dist_free(p);
}

TEST_CASE("entropy lower bound through the C surface") {
  lw_schedule* schedule = nullptr;
  REQUIRE(lw_schedule_named("controlled_xz", &schedule) == LW_OK);
  lw_state* state = nullptr;
  REQUIRE(lw_state_localized(0, 0, -1, -1, &state) == LW_OK);
  REQUIRE(lw_state_evolve(state, schedule, 3, LW_ORDER_COMBINED) == LW_OK);

  double exact = 0.0;
  REQUIRE(lw_state_entropy(state, &exact) == LW_OK);

  lw_dist* probs = nullptr;
  REQUIRE(lw_state_coin_dist(state, &probs) == LW_OK);
  lw_phase_model* model = nullptr;
  REQUIRE(lw_phase_model_from_state(state, &model) == LW_OK);

  double bound = 0.0;
  double phases[3] = {9.0, 9.0, 9.0};
  REQUIRE(lw_entropy_lower_bound(probs, model, 8, 2, &bound, phases) == LW_OK);
  CHECK(bound <= exact + 1e-9);
  CHECK(bound >= 0.0);
  CHECK(phases[0] != 9.0);

  lw_phase_model_free(model);
  lw_dist_free(probs);
  lw_state_free(state);
  lw_schedule_free(schedule);
}

TEST_CASE("timing helpers and the overlap check") {
  lw_timing timing{};
  lw_timing_paper(&timing);
  CHECK(timing.t_min_ns == doctest::Approx(676.0));

  double t = 0.0;
  CHECK(lw_arrival_time(-1, -1, 1, &timing, &t) == LW_OK);
  CHECK(t == doctest::Approx(725.53).epsilon(1e-12));
  CHECK(lw_arrival_time(0, 0, 1, &timing, &t) == LW_ERR_DOMAIN);

  int ok = 0;
  lw_collision collision{};
  CHECK(lw_check_overlap(&timing, 12, &ok, &collision) == LW_OK);
  CHECK(ok == 1);

  timing.t_min_ns = 100.0;
  CHECK(lw_check_overlap(&timing, 12, &ok, &collision) == LW_OK);
  CHECK(ok == 0);
  CHECK(collision.step_b == collision.step_a + 1);
}

TEST_CASE("detection pipeline through the C surface") {
  lw_schedule* schedule = nullptr;
  REQUIRE(lw_schedule_named("hadamard", &schedule) == LW_OK);
  lw_timing timing{};
  lw_timing_paper(&timing);
  lw_loss loss{};
  lw_loss_lossless(&loss);

  lw_records* records = nullptr;
  REQUIRE(lw_simulate(schedule, &loss, &timing, 2, 20000, 5, 2, &records) ==
          LW_OK);
  int64_t entered = 0;
  CHECK(lw_records_entered(records, &entered) == LW_OK);
  CHECK(entered == 20000);
  int64_t alive = 0;
  CHECK(lw_records_alive_after(records, 1, &alive) == LW_OK);
  CHECK(alive == 20000);
  CHECK(lw_records_alive_after(records, 3, &alive) == LW_ERR_DOMAIN);

  // Determinism across thread counts, via the C surface.
  lw_records* again = nullptr;
  REQUIRE(lw_simulate(schedule, &loss, &timing, 2, 20000, 5, 7, &again) ==
          LW_OK);
  CHECK(collect(records) == collect(again));
  lw_records_free(again);

  const std::string path = "capi_records_tmp.txt";
  REQUIRE(lw_records_write(records, path.c_str()) == LW_OK);
  lw_records* reread = nullptr;
  REQUIRE(lw_records_read(path.c_str(), &reread) == LW_OK);
  CHECK(collect(reread) == collect(records));
  std::remove(path.c_str());

  const double calibration[4] = {1.0, 1.0, 1.0, 1.0};
  lw_dist* reconstructed = nullptr;
  int64_t unassigned = -1;
  REQUIRE(lw_reconstruct(records, &timing, 2, calibration, &reconstructed,
                         &unassigned) == LW_OK);
  CHECK(unassigned == 0);

  lw_state* ideal = nullptr;
  REQUIRE(lw_state_localized(0, 0, -1, -1, &ideal) == LW_OK);
  REQUIRE(lw_state_evolve(ideal, schedule, 2, LW_ORDER_COMBINED) == LW_OK);
  lw_dist* ideal_dist = nullptr;
  REQUIRE(lw_state_position_dist(ideal, &ideal_dist) == LW_OK);
  double s = 0.0;
  CHECK(lw_similarity(ideal_dist, reconstructed, &s) == LW_OK);
  CHECK(s > 0.999);

  double expected[2] = {0.0, 0.0};
  CHECK(lw_expected_events(schedule, &loss, 2, 20000, expected) == LW_OK);
  CHECK(expected[0] == doctest::Approx(20000.0));

  lw_dist_free(ideal_dist);
  lw_state_free(ideal);
  lw_dist_free(reconstructed);
  lw_records_free(records);
  lw_schedule_free(schedule);

  CHECK(lw_records_read("missing_file_xyz.txt", &reread) == LW_ERR_IO);
}

TEST_CASE("oracle helpers stay consistent with the walk") {
  lw_schedule* schedule = nullptr;
  REQUIRE(lw_schedule_named("nonlinear_cz_diagonal", &schedule) == LW_OK);
  double diff = 1.0;
  CHECK(lw_oracle_dense_diff(schedule, 0, 0, -1, -1, 5, &diff) == LW_OK);
  CHECK(diff < 1e-12);
  CHECK(lw_oracle_isomorphism_diff("nonlinear_cz_diagonal", 6, &diff) == LW_OK);
  CHECK(diff < 1e-12);
  CHECK(lw_oracle_dense_diff(schedule, 0, 0, -1, -1, 20, &diff) ==
        LW_ERR_DOMAIN);
  lw_schedule_free(schedule);
}
