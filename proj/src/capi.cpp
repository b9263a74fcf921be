#include "latticewalk.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "latticewalk/analysis.hpp"
#include "latticewalk/coin.hpp"
#include "latticewalk/errors.hpp"
#include "latticewalk/hardware.hpp"
#include "latticewalk/oracle.hpp"
#include "latticewalk/walk.hpp"

namespace lw = latticewalk;

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs the body, translating exceptions to status codes.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const lw::NumericViolation& e) {
    return fail(LW_ERR_NUMERIC, e.what());
  } catch (const std::domain_error& e) {
    return fail(LW_ERR_DOMAIN, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(LW_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LW_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LW_ERR_INTERNAL, e.what());
  }
}

int require(bool condition, const char* message) {
  return condition ? LW_OK : fail(LW_ERR_DOMAIN, message);
}

lw::TimingConfig to_timing(const lw_timing& t) {
  lw::TimingConfig out;
  out.t_min_ns = t.t_min_ns;
  out.dtau1_ns = t.dtau1_ns;
  out.dtau2_ns = t.dtau2_ns;
  out.pulse_width_ns = t.pulse_width_ns;
  out.eom_delay_ns = t.eom_delay_ns;
  out.axis_swap = t.axis_swap != 0;
  return out;
}

lw::LossModel to_loss(const lw_loss& l) {
  lw::LossModel out;
  out.input_coupling = l.input_coupling;
  out.outcouple_minus = l.outcouple_minus;
  out.outcouple_plus = l.outcouple_plus;
  out.step_survival = l.step_survival;
  for (int i = 0; i < 4; ++i) {
    out.detection_efficiency[i] = l.detection_efficiency[i];
  }
  return out;
}

}  // namespace

struct lw_schedule {
  lw::CoinSchedule schedule;
};

struct lw_state {
  lw::WalkState state;
};

struct lw_dist {
  // Builder stage: weights collected by lw_dist_add until finalized.
  bool coin_resolved = false;
  bool finalized = false;
  lw::Distribution::PositionMap position_builder;
  lw::Distribution::CoinMap coin_builder;
  lw::Distribution dist;
};

struct lw_phase_model {
  std::map<lw::BasisLabel, double> phases;
  lw::PhaseModel model = lw::PhaseModel::from_map({});
};

struct lw_records {
  lw::DetectionRun run;
};

namespace {

int require_finalized(const lw_dist* dist) {
  if (!dist) return fail(LW_ERR_DOMAIN, "null argument");
  if (!dist->finalized) {
    return fail(LW_ERR_DOMAIN, "distribution is not finalized");
  }
  return LW_OK;
}

}  // namespace

extern "C" {

const char* lw_version(void) { return "1.0.0"; }

const char* lw_error_message(void) { return g_last_error.c_str(); }

void lw_timing_paper(lw_timing* out) {
  const auto t = lw::TimingConfig::paper();
  *out = {t.t_min_ns, t.dtau1_ns, t.dtau2_ns, t.pulse_width_ns,
          t.eom_delay_ns, t.axis_swap ? 1 : 0};
}

void lw_loss_paper(lw_loss* out) {
  const auto l = lw::LossModel::paper();
  *out = {l.input_coupling,
          l.outcouple_minus,
          l.outcouple_plus,
          l.step_survival,
          {l.detection_efficiency[0], l.detection_efficiency[1],
           l.detection_efficiency[2], l.detection_efficiency[3]}};
}

void lw_loss_lossless(lw_loss* out) {
  const auto l = lw::LossModel::lossless();
  *out = {l.input_coupling,
          l.outcouple_minus,
          l.outcouple_plus,
          l.step_survival,
          {l.detection_efficiency[0], l.detection_efficiency[1],
           l.detection_efficiency[2], l.detection_efficiency[3]}};
}

int lw_schedule_named(const char* name, lw_schedule** out) {
  if (int rc = require(name && out, "null argument")) return rc;
  return guarded([&] {
    *out = new lw_schedule{lw::named_coin(lw::parse_named_coin(name))};
    return LW_OK;
  });
}

int lw_schedule_angles(const double theta[4], double eom_phase,
                       double eom_crosstalk, int eom_scope, int staged,
                       lw_schedule** out) {
  if (int rc = require(theta && out, "null argument")) return rc;
  return guarded([&] {
    lw::EomRule rule;
    switch (eom_scope) {
      case LW_EOM_NONE: rule.scope = lw::EomRule::Scope::none; break;
      case LW_EOM_EVERYWHERE: rule.scope = lw::EomRule::Scope::everywhere; break;
      case LW_EOM_DIAGONAL: rule.scope = lw::EomRule::Scope::diagonal; break;
      default:
        return fail(LW_ERR_DOMAIN, "invalid EOM scope");
    }
    rule.phase = eom_phase;
    rule.crosstalk = eom_crosstalk;
    const lw::HwpAngleSet angles{theta[0], theta[1], theta[2], theta[3]};
    *out = new lw_schedule{staged ? lw::staged_schedule(angles, rule)
                                  : lw::angle_schedule(angles, rule)};
    return LW_OK;
  });
}

void lw_schedule_free(lw_schedule* schedule) { delete schedule; }

int lw_schedule_separable(const lw_schedule* schedule, int* out) {
  if (int rc = require(schedule && out, "null argument")) return rc;
  *out = schedule->schedule.separable() ? 1 : 0;
  return LW_OK;
}

int lw_schedule_has_staged(const lw_schedule* schedule, int* out) {
  if (int rc = require(schedule && out, "null argument")) return rc;
  *out = schedule->schedule.has_staged() ? 1 : 0;
  return LW_OK;
}

int lw_state_localized(int x1, int x2, int c1, int c2, lw_state** out) {
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    *out = new lw_state{lw::WalkState::localized(x1, x2, c1, c2)};
    return LW_OK;
  });
}

int lw_state_from_entries(int64_t count, const int* x1, const int* x2,
                          const int* c1, const int* c2, const double* re,
                          const double* im, lw_state** out) {
  if (int rc = require(x1 && x2 && c1 && c2 && re && im && out,
                       "null argument")) {
    return rc;
  }
  if (count < 1) return fail(LW_ERR_DOMAIN, "state needs at least one entry");
  return guarded([&] {
    lw::WalkState::AmplitudeMap amps;
    for (int64_t i = 0; i < count; ++i) {
      amps[{x1[i], x2[i], c1[i], c2[i]}] += lw::Complex(re[i], im[i]);
    }
    *out = new lw_state{lw::WalkState::from_amplitudes(std::move(amps))};
    return LW_OK;
  });
}

void lw_state_free(lw_state* state) { delete state; }

int lw_state_evolve(lw_state* state, const lw_schedule* schedule, int steps,
                    int order) {
  if (int rc = require(state && schedule, "null argument")) return rc;
  if (int rc = require(order == LW_ORDER_COMBINED || order == LW_ORDER_STAGED,
                       "invalid evolution order")) {
    return rc;
  }
  return guarded([&] {
    state->state = lw::evolve(state->state, schedule->schedule, steps,
                              order == LW_ORDER_STAGED
                                  ? lw::EvolutionOrder::staged
                                  : lw::EvolutionOrder::combined);
    return LW_OK;
  });
}

int lw_state_step_count(const lw_state* state, int* out) {
  if (int rc = require(state && out, "null argument")) return rc;
  *out = state->state.step_count();
  return LW_OK;
}

int lw_state_norm(const lw_state* state, double* out) {
  if (int rc = require(state && out, "null argument")) return rc;
  *out = state->state.norm();
  return LW_OK;
}

int lw_state_entry_count(const lw_state* state, int64_t* out) {
  if (int rc = require(state && out, "null argument")) return rc;
  *out = static_cast<int64_t>(state->state.support_size());
  return LW_OK;
}

int lw_state_entry(const lw_state* state, int64_t index, int* x1, int* x2,
                   int* c1, int* c2, double* re, double* im) {
  if (int rc = require(state && x1 && x2 && c1 && c2 && re && im,
                       "null argument")) {
    return rc;
  }
  const auto& amps = state->state.amplitudes();
  if (index < 0 || index >= static_cast<int64_t>(amps.size())) {
    return fail(LW_ERR_DOMAIN, "state entry index out of range");
  }
  auto it = amps.begin();
  std::advance(it, index);
  *x1 = it->first.x1;
  *x2 = it->first.x2;
  *c1 = it->first.c1;
  *c2 = it->first.c2;
  *re = it->second.real();
  *im = it->second.imag();
  return LW_OK;
}

int lw_state_entropy(const lw_state* state, double* bits) {
  if (int rc = require(state && bits, "null argument")) return rc;
  return guarded([&] {
    *bits = lw::von_neumann_entropy(state->state).value_bits;
    return LW_OK;
  });
}

int lw_state_position_dist(const lw_state* state, lw_dist** out) {
  if (int rc = require(state && out, "null argument")) return rc;
  return guarded([&] {
    auto* d = new lw_dist;
    d->finalized = true;
    d->dist = state->state.position_distribution();
    *out = d;
    return LW_OK;
  });
}

int lw_state_coin_dist(const lw_state* state, lw_dist** out) {
  if (int rc = require(state && out, "null argument")) return rc;
  return guarded([&] {
    auto* d = new lw_dist;
    d->finalized = true;
    d->coin_resolved = true;
    d->dist = state->state.coin_resolved_distribution();
    *out = d;
    return LW_OK;
  });
}

int lw_dist_new(int coin_resolved, lw_dist** out) {
  if (int rc = require(out != nullptr, "null argument")) return rc;
  auto* d = new lw_dist;
  d->coin_resolved = coin_resolved != 0;
  *out = d;
  return LW_OK;
}

int lw_dist_add(lw_dist* dist, int x1, int x2, int c1, int c2, double weight) {
  if (int rc = require(dist != nullptr, "null argument")) return rc;
  if (dist->finalized) {
    return fail(LW_ERR_DOMAIN, "distribution is already finalized");
  }
  return guarded([&] {
    if (dist->coin_resolved) {
      lw::coin_index(c1, c2);
      dist->coin_builder[{x1, x2, c1, c2}] += weight;
    } else {
      if (c1 != 0 || c2 != 0) {
        return fail(LW_ERR_DOMAIN,
                    "pass c1 = c2 = 0 for position-only distributions");
      }
      dist->position_builder[{x1, x2}] += weight;
    }
    return LW_OK;
  });
}

int lw_dist_finalize(lw_dist* dist, int normalize) {
  if (int rc = require(dist != nullptr, "null argument")) return rc;
  if (dist->finalized) {
    return fail(LW_ERR_DOMAIN, "distribution is already finalized");
  }
  return guarded([&] {
    dist->dist =
        dist->coin_resolved
            ? lw::Distribution::from_coin_resolved(
                  std::move(dist->coin_builder), normalize != 0)
            : lw::Distribution::from_positions(
                  std::move(dist->position_builder), normalize != 0);
    dist->finalized = true;
    return LW_OK;
  });
}

void lw_dist_free(lw_dist* dist) { delete dist; }

int lw_dist_entry_count(const lw_dist* dist, int64_t* out) {
  if (int rc = require_finalized(dist)) return rc;
  if (int rc = require(out != nullptr, "null argument")) return rc;
  *out = static_cast<int64_t>(dist->dist.positions().size());
  return LW_OK;
}

int lw_dist_entry(const lw_dist* dist, int64_t index, int* x1, int* x2,
                  double* weight) {
  if (int rc = require_finalized(dist)) return rc;
  if (int rc = require(x1 && x2 && weight, "null argument")) return rc;
  const auto& positions = dist->dist.positions();
  if (index < 0 || index >= static_cast<int64_t>(positions.size())) {
    return fail(LW_ERR_DOMAIN, "distribution entry index out of range");
  }
  auto it = positions.begin();
  std::advance(it, index);
  *x1 = it->first.first;
  *x2 = it->first.second;
  *weight = it->second;
  return LW_OK;
}

int lw_dist_coin_entry_count(const lw_dist* dist, int64_t* out) {
  if (int rc = require_finalized(dist)) return rc;
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    *out = static_cast<int64_t>(dist->dist.coin_weights().size());
    return LW_OK;
  });
}

int lw_dist_coin_entry(const lw_dist* dist, int64_t index, int* x1, int* x2,
                       int* c1, int* c2, double* weight) {
  if (int rc = require_finalized(dist)) return rc;
  if (int rc = require(x1 && x2 && c1 && c2 && weight, "null argument")) {
    return rc;
  }
  return guarded([&] {
    const auto& weights = dist->dist.coin_weights();
    if (index < 0 || index >= static_cast<int64_t>(weights.size())) {
      return fail(LW_ERR_DOMAIN, "coin entry index out of range");
    }
    auto it = weights.begin();
    std::advance(it, index);
    *x1 = it->first.x1;
    *x2 = it->first.x2;
    *c1 = it->first.c1;
    *c2 = it->first.c2;
    *weight = it->second;
    return LW_OK;
  });
}

int lw_similarity(const lw_dist* p, const lw_dist* q, double* out) {
  if (int rc = require_finalized(p)) return rc;
  if (int rc = require_finalized(q)) return rc;
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    *out = lw::similarity(p->dist, q->dist);
    return LW_OK;
  });
}

int lw_confinement(const lw_dist* dist, double* out) {
  if (int rc = require_finalized(dist)) return rc;
  if (int rc = require(out != nullptr, "null argument")) return rc;
  *out = lw::diagonal_confinement(dist->dist);
  return LW_OK;
}

int lw_factorization_residual(const lw_dist* dist, double* out) {
  if (int rc = require_finalized(dist)) return rc;
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    *out = lw::factorization_residual(dist->dist);
    return LW_OK;
  });
}

int lw_marginal_count(const lw_dist* dist, int axis, int64_t* out) {
  if (int rc = require_finalized(dist)) return rc;
  if (int rc = require(out != nullptr, "null argument")) return rc;
  return guarded([&] {
    *out = static_cast<int64_t>(lw::marginal(dist->dist, axis).size());
    return LW_OK;
  });
}

int lw_marginal_entry(const lw_dist* dist, int axis, int64_t index, int* x,
                      double* weight) {
  if (int rc = require_finalized(dist)) return rc;
  if (int rc = require(x && weight, "null argument")) return rc;
  return guarded([&] {
    const auto m = lw::marginal(dist->dist, axis);
    if (index < 0 || index >= static_cast<int64_t>(m.size())) {
      return fail(LW_ERR_DOMAIN, "marginal index out of range");
    }
    auto it = m.begin();
    std::advance(it, index);
    *x = it->first;
    *weight = it->second;
    return LW_OK;
  });
}

int lw_phase_model_new(lw_phase_model** out) {
  if (int rc = require(out != nullptr, "null argument")) return rc;
  *out = new lw_phase_model;
  return LW_OK;
}

int lw_phase_model_add(lw_phase_model* model, int x1, int x2, int c1, int c2,
                       double phase) {
  if (int rc = require(model != nullptr, "null argument")) return rc;
  return guarded([&] {
    lw::coin_index(c1, c2);
    model->phases[{x1, x2, c1, c2}] = phase;
    model->model = lw::PhaseModel::from_map(model->phases);
    return LW_OK;
  });
}

int lw_phase_model_from_state(const lw_state* state, lw_phase_model** out) {
  if (int rc = require(state && out, "null argument")) return rc;
  return guarded([&] {
    auto* model = new lw_phase_model;
    model->model = lw::PhaseModel::from_state(state->state);
    model->phases = model->model.phases();
    *out = model;
    return LW_OK;
  });
}

void lw_phase_model_free(lw_phase_model* model) { delete model; }

int lw_entropy_lower_bound(const lw_dist* probabilities,
                           const lw_phase_model* model, int grid, int threads,
                           double* bits, double phases_out[3]) {
  if (int rc = require_finalized(probabilities)) return rc;
  if (int rc = require(model && bits, "null argument")) return rc;
  return guarded([&] {
    lw::LowerBoundOptions options;
    if (grid > 0) options.grid_points_per_axis = grid;
    options.threads = threads;
    const auto report =
        lw::entropy_lower_bound(probabilities->dist, model->model, options);
    *bits = report.value_bits;
    if (phases_out && !report.optimizer_trace.empty()) {
      const auto& best = report.optimizer_trace.back();
      for (int i = 0; i < 3; ++i) phases_out[i] = best.phases[i];
    }
    return LW_OK;
  });
}

int lw_arrival_time(int x1, int x2, int step, const lw_timing* timing,
                    double* out) {
  if (int rc = require(timing && out, "null argument")) return rc;
  return guarded([&] {
    *out = lw::arrival_time(x1, x2, step, to_timing(*timing));
    return LW_OK;
  });
}

int lw_check_overlap(const lw_timing* timing, int n_max, int* ok,
                     lw_collision* collision) {
  if (int rc = require(timing && ok, "null argument")) return rc;
  return guarded([&] {
    const auto report = lw::check_no_overlap(to_timing(*timing), n_max);
    *ok = report.ok ? 1 : 0;
    if (!report.ok && collision) {
      const auto& c = *report.first_collision;
      *collision = {c.step_a, c.step_b, c.x1_a, c.x2_a,
                    c.x1_b,   c.x2_b,   c.time_a_ns, c.time_b_ns};
    }
    return LW_OK;
  });
}

int lw_simulate(const lw_schedule* schedule, const lw_loss* loss,
                const lw_timing* timing, int n_steps, int64_t trials,
                uint64_t seed, int threads, lw_records** out) {
  if (int rc = require(schedule && loss && timing && out, "null argument")) {
    return rc;
  }
  return guarded([&] {
    *out = new lw_records{lw::simulate_detections(
        schedule->schedule, to_loss(*loss), to_timing(*timing), n_steps,
        trials, seed, threads)};
    return LW_OK;
  });
}

void lw_records_free(lw_records* records) { delete records; }

int lw_records_count(const lw_records* records, int64_t* out) {
  if (int rc = require(records && out, "null argument")) return rc;
  *out = static_cast<int64_t>(records->run.records.size());
  return LW_OK;
}

int lw_records_entry(const lw_records* records, int64_t index,
                     int64_t* trial_id, int* step, double* arrival_time_ns,
                     int* coin_state) {
  if (int rc = require(records && trial_id && step && arrival_time_ns &&
                           coin_state,
                       "null argument")) {
    return rc;
  }
  if (index < 0 ||
      index >= static_cast<int64_t>(records->run.records.size())) {
    return fail(LW_ERR_DOMAIN, "record index out of range");
  }
  const auto& r = records->run.records[static_cast<std::size_t>(index)];
  *trial_id = r.trial_id;
  *step = r.step;
  *arrival_time_ns = r.arrival_time_ns;
  *coin_state = r.coin_state;
  return LW_OK;
}

int lw_records_entered(const lw_records* records, int64_t* out) {
  if (int rc = require(records && out, "null argument")) return rc;
  *out = records->run.entered;
  return LW_OK;
}

int lw_records_alive_after(const lw_records* records, int step, int64_t* out) {
  if (int rc = require(records && out, "null argument")) return rc;
  if (step < 1 ||
      step > static_cast<int>(records->run.alive_after_step.size())) {
    return fail(LW_ERR_DOMAIN, "step out of range");
  }
  *out = records->run.alive_after_step[static_cast<std::size_t>(step - 1)];
  return LW_OK;
}

int lw_records_write(const lw_records* records, const char* path) {
  if (int rc = require(records && path, "null argument")) return rc;
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) return fail(LW_ERR_IO, std::string("cannot open ") + path);
    lw::write_records(out, records->run.records);
    out.flush();
    if (!out) return fail(LW_ERR_IO, std::string("failed writing ") + path);
    return LW_OK;
  });
}

int lw_records_read(const char* path, lw_records** out) {
  if (int rc = require(path && out, "null argument")) return rc;
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(LW_ERR_IO, std::string("cannot open ") + path);
    auto* records = new lw_records;
    try {
      records->run.records = lw::read_records(in);
    } catch (...) {
      delete records;
      throw;
    }
    *out = records;
    return LW_OK;
  });
}

int lw_reconstruct(const lw_records* records, const lw_timing* timing,
                   int step, const double calibration[4], lw_dist** out,
                   int64_t* unassigned) {
  if (int rc = require(records && timing && calibration && out,
                       "null argument")) {
    return rc;
  }
  return guarded([&] {
    const std::array<double, 4> calib{calibration[0], calibration[1],
                                      calibration[2], calibration[3]};
    auto reconstruction = lw::reconstruct_distribution(
        records->run.records, to_timing(*timing), step, calib);
    auto* d = new lw_dist;
    d->finalized = true;
    d->coin_resolved = true;
    d->dist = std::move(reconstruction.dist);
    *out = d;
    if (unassigned) *unassigned = reconstruction.unassigned;
    return LW_OK;
  });
}

int lw_expected_events(const lw_schedule* schedule, const lw_loss* loss,
                       int n_steps, int64_t trials, double* out) {
  if (int rc = require(schedule && loss && out, "null argument")) return rc;
  return guarded([&] {
    const auto expected = lw::expected_events(schedule->schedule,
                                              to_loss(*loss), n_steps, trials);
    for (int n = 0; n < n_steps; ++n) out[n] = expected[static_cast<std::size_t>(n)];
    return LW_OK;
  });
}

int lw_oracle_dense_diff(const lw_schedule* schedule, int x1, int x2, int c1,
                         int c2, int steps, double* out) {
  if (int rc = require(schedule && out, "null argument")) return rc;
  return guarded([&] {
    const auto dense = lw::oracle::dense_evolve({x1, x2, c1, c2},
                                                schedule->schedule, steps);
    const auto sparse = lw::evolve(lw::WalkState::localized(x1, x2, c1, c2),
                                   schedule->schedule, steps);
    const auto dense_map = dense.to_amplitude_map();
    double worst = 0.0;
    for (const auto& [label, amp] : dense_map) {
      const auto it = sparse.amplitudes().find(label);
      const lw::Complex other =
          it == sparse.amplitudes().end() ? lw::Complex(0.0) : it->second;
      worst = std::max(worst, std::abs(amp - other));
    }
    for (const auto& [label, amp] : sparse.amplitudes()) {
      if (!dense_map.count(label)) worst = std::max(worst, std::abs(amp));
    }
    *out = worst;
    return LW_OK;
  });
}

int lw_oracle_isomorphism_diff(const char* name, int steps, double* out) {
  if (int rc = require(name && out, "null argument")) return rc;
  return guarded([&] {
    const auto schedule = lw::named_coin(lw::parse_named_coin(name));
    const auto dist2d =
        lw::evolve(lw::WalkState::localized(0, 0, -1, -1), schedule, steps)
            .position_distribution();

    std::optional<lw::CoinOperator> when_meet;
    if (!schedule.uniform()) when_meet = schedule.coin_at(0, 0, 0);
    // The joint coin is the schedule's off-diagonal operator.
    const lw::CoinOperator joint = schedule.coin_at(0, 1, 0);
    const auto two = lw::oracle::two_walker_evolve(
        lw::oracle::two_walker_localized(0, -1, 0, -1), joint, when_meet,
        steps);
    const auto coincidence = two.coincidence_distribution();

    double worst = 0.0;
    for (const auto& [pos, w] : dist2d.positions()) {
      worst = std::max(worst,
                       std::abs(w - coincidence.at(pos.first, pos.second)));
    }
    for (const auto& [pos, w] : coincidence.positions()) {
      worst = std::max(worst, std::abs(w - dist2d.at(pos.first, pos.second)));
    }
    *out = worst;
    return LW_OK;
  });
}

} /* extern "C" */
