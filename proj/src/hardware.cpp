#include "latticewalk/hardware.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "latticewalk/walk.hpp"

namespace latticewalk {

TimingConfig TimingConfig::paper() {
  TimingConfig t;
  t.t_min_ns = 676.0;
  t.dtau1_ns = 3.11;
  t.dtau2_ns = 46.42;
  t.pulse_width_ns = 0.088;
  return t;
}

LossModel LossModel::paper() {
  LossModel l;
  l.input_coupling = 0.03;
  l.outcouple_minus = 0.12;
  l.outcouple_plus = 0.04;
  l.step_survival = 0.52;
  return l;
}

LossModel LossModel::lossless() { return LossModel{}; }

double arrival_time(int x1, int x2, int n, const TimingConfig& timing) {
  auto check_axis = [n](int x, const char* name) {
    if ((n - x) % 2 != 0) {
      throw std::domain_error(std::string(name) + " = " + std::to_string(x) +
                              " violates parity after " + std::to_string(n) +
                              " steps");
    }
    if (std::abs(x) > n) {
      throw std::domain_error(std::string(name) + " = " + std::to_string(x) +
                              " is unreachable after " + std::to_string(n) +
                              " steps");
    }
  };
  check_axis(x1, "x1");
  check_axis(x2, "x2");
  // +1 is the shorter path on each axis; every -1 move adds one delay.
  const double k1 = (n - x1) / 2;
  const double k2 = (n - x2) / 2;
  const double d1 = timing.axis_swap ? timing.dtau2_ns : timing.dtau1_ns;
  const double d2 = timing.axis_swap ? timing.dtau1_ns : timing.dtau2_ns;
  return n * timing.effective_t_min() + k1 * d1 + k2 * d2;
}

OverlapReport check_no_overlap(const TimingConfig& timing, int n_max) {
  if (n_max < 1) throw std::domain_error("n_max must be >= 1");

  struct Bin {
    double time;
    int step, x1, x2;
  };
  std::vector<Bin> bins;
  for (int n = 1; n <= n_max; ++n) {
    for (int x1 = -n; x1 <= n; x1 += 2) {
      for (int x2 = -n; x2 <= n; x2 += 2) {
        bins.push_back({arrival_time(x1, x2, n, timing), n, x1, x2});
      }
    }
  }

  OverlapReport report;
  auto collide = [&](const Bin& a, const Bin& b) {
    OverlapReport::Collision c;
    c.step_a = a.step; c.x1_a = a.x1; c.x2_a = a.x2; c.time_a_ns = a.time;
    c.step_b = b.step; c.x1_b = b.x1; c.x2_b = b.x2; c.time_b_ns = b.time;
    report.ok = false;
    report.first_collision = c;
  };

  // Bins of consecutive steps may not interleave.
  for (int n = 1; n < n_max; ++n) {
    Bin latest{-1.0, 0, 0, 0}, earliest{0.0, 0, 0, 0};
    for (const auto& b : bins) {
      if (b.step == n && b.time > latest.time) latest = b;
    }
    bool first = true;
    for (const auto& b : bins) {
      if (b.step == n + 1 && (first || b.time < earliest.time)) {
        earliest = b;
        first = false;
      }
    }
    if (latest.time >= earliest.time) {
      collide(latest, earliest);
      return report;
    }
  }

  // All bins must be separated by more than one pulse width.
  std::vector<Bin> sorted = bins;
  std::sort(sorted.begin(), sorted.end(),
            [](const Bin& a, const Bin& b) { return a.time < b.time; });
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i + 1].time - sorted[i].time <= timing.pulse_width_ns) {
      collide(sorted[i], sorted[i + 1]);
      return report;
    }
  }
  return report;
}

namespace {

// One detection lottery table per step, built once from the exact walk.
struct StepTable {
  double total_q = 0.0;            // sum of w * outcouple * efficiency
  std::vector<double> cumulative;  // prefix sums of the same
  std::vector<double> times;
  std::vector<int> coin_states;    // 1..4
};

std::vector<StepTable> build_tables(const CoinSchedule& schedule,
                                    const LossModel& loss,
                                    const TimingConfig& timing, int n_steps) {
  std::vector<StepTable> tables;
  tables.reserve(n_steps);
  WalkState state = WalkState::localized(0, 0, -1, -1);
  for (int n = 1; n <= n_steps; ++n) {
    state = evolve(state, schedule, 1);
    StepTable table;
    double acc = 0.0;
    for (const auto& [label, amp] : state.amplitudes()) {
      const int coin = coin_index(label.c1, label.c2);
      const double outcouple =
          label.c1 == -1 ? loss.outcouple_minus : loss.outcouple_plus;
      const double q =
          std::norm(amp) * outcouple * loss.detection_efficiency[coin];
      acc += q;
      table.cumulative.push_back(acc);
      // Click times are logged at 10 ps resolution, matching the record
      // serialization, so files round-trip records bit for bit.
      table.times.push_back(
          std::round(arrival_time(label.x1, label.x2, n, timing) * 100.0) /
          100.0);
      table.coin_states.push_back(coin + 1);
    }
    table.total_q = acc;
    tables.push_back(std::move(table));
  }
  return tables;
}

double unit_double(std::mt19937_64& rng) {
  // 53-bit mantissa; identical on every platform, unlike the standard
  // distribution adaptors.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr std::int64_t kTrialsPerChunk = 8192;

struct ChunkResult {
  std::vector<DetectionRecord> records;
  std::int64_t entered = 0;
  std::vector<std::int64_t> alive;
};

ChunkResult run_chunk(std::int64_t first_trial, std::int64_t count,
                      std::uint64_t seed, std::uint64_t chunk_index,
                      const std::vector<StepTable>& tables,
                      const LossModel& loss) {
  const int n_steps = static_cast<int>(tables.size());
  ChunkResult result;
  result.alive.assign(n_steps, 0);

  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk_index),
                    static_cast<std::uint32_t>(chunk_index >> 32)};
  std::mt19937_64 rng(seq);

  for (std::int64_t t = 0; t < count; ++t) {
    const std::int64_t trial = first_trial + t;
    if (unit_double(rng) >= loss.input_coupling) continue;
    ++result.entered;
    for (int n = 1; n <= n_steps; ++n) {
      const StepTable& table = tables[n - 1];
      // Out-coupling toward the detectors does not interrupt the pulse
      // train, so one trial can click at several steps.
      const double u = unit_double(rng);
      if (u < table.total_q) {
        const auto it = std::lower_bound(table.cumulative.begin(),
                                         table.cumulative.end(), u);
        const auto k = static_cast<std::size_t>(
            std::distance(table.cumulative.begin(), it));
        result.records.push_back(
            {trial, n, table.times[k], table.coin_states[k]});
      }
      if (unit_double(rng) >= loss.step_survival) break;
      ++result.alive[n - 1];
    }
  }
  return result;
}

}  // namespace

DetectionRun simulate_detections(const CoinSchedule& schedule,
                                 const LossModel& loss,
                                 const TimingConfig& timing, int n_steps,
                                 std::int64_t n_trials, std::uint64_t seed,
                                 int threads) {
  if (n_steps < 1) throw std::domain_error("n_steps must be >= 1");
  if (n_trials < 1) throw std::domain_error("n_trials must be >= 1");

  const auto tables = build_tables(schedule, loss, timing, n_steps);
  const std::int64_t n_chunks =
      (n_trials + kTrialsPerChunk - 1) / kTrialsPerChunk;

  std::vector<ChunkResult> chunks(n_chunks);
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp<int>(workers, 1, static_cast<int>(n_chunks));

  auto worker = [&](int w) {
    for (std::int64_t c = w; c < n_chunks; c += workers) {
      const std::int64_t first = c * kTrialsPerChunk;
      const std::int64_t count = std::min(kTrialsPerChunk, n_trials - first);
      chunks[c] = run_chunk(first, count, seed, static_cast<std::uint64_t>(c),
                            tables, loss);
    }
  };
  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  DetectionRun run;
  run.trials = n_trials;
  run.alive_after_step.assign(n_steps, 0);
  std::size_t total = 0;
  for (const auto& c : chunks) total += c.records.size();
  run.records.reserve(total);
  for (auto& c : chunks) {
    // Chunks cover ascending trial ranges, so concatenation keeps the
    // canonical (trial_id, step) order.
    run.records.insert(run.records.end(),
                       std::make_move_iterator(c.records.begin()),
                       std::make_move_iterator(c.records.end()));
    std::vector<DetectionRecord>().swap(c.records);
    run.entered += c.entered;
    for (int n = 0; n < n_steps; ++n) run.alive_after_step[n] += c.alive[n];
  }
  return run;
}

Reconstruction reconstruct_distribution(std::span<const DetectionRecord> records,
                                        const TimingConfig& timing, int step,
                                        const std::array<double, 4>& calibration) {
  if (step < 1) throw std::domain_error("step must be >= 1");
  for (double c : calibration) {
    if (c <= 0.0) {
      throw std::domain_error("calibration efficiencies must be positive");
    }
  }

  struct Bin {
    double time;
    int x1, x2;
  };
  std::vector<Bin> bins;
  for (int x1 = -step; x1 <= step; x1 += 2) {
    for (int x2 = -step; x2 <= step; x2 += 2) {
      bins.push_back({arrival_time(x1, x2, step, timing), x1, x2});
    }
  }
  std::sort(bins.begin(), bins.end(),
            [](const Bin& a, const Bin& b) { return a.time < b.time; });

  Distribution::CoinMap weights;
  std::int64_t assigned = 0, unassigned = 0, seen = 0;
  for (const auto& record : records) {
    if (record.step != step) continue;
    ++seen;
    auto it = std::lower_bound(
        bins.begin(), bins.end(), record.arrival_time_ns,
        [](const Bin& b, double t) { return b.time < t; });
    const Bin* best = nullptr;
    if (it != bins.end()) best = &*it;
    if (it != bins.begin()) {
      const Bin* prev = &*std::prev(it);
      if (!best || std::abs(prev->time - record.arrival_time_ns) <
                       std::abs(best->time - record.arrival_time_ns)) {
        best = prev;
      }
    }
    if (!best || std::abs(best->time - record.arrival_time_ns) >
                     timing.pulse_width_ns / 2.0) {
      ++unassigned;
      continue;
    }
    if (record.coin_state < 1 || record.coin_state > 4) {
      throw std::domain_error("coin_state must be 1..4");
    }
    const auto [c1, c2] = kCoinBasisOrder[record.coin_state - 1];
    weights[{best->x1, best->x2, c1, c2}] +=
        1.0 / calibration[record.coin_state - 1];
    ++assigned;
  }
  if (seen == 0) {
    throw std::domain_error("no records at step " + std::to_string(step));
  }
  if (assigned == 0) {
    throw std::domain_error("no records at step " + std::to_string(step) +
                            " fell into any time bin");
  }

  Reconstruction result{Distribution::from_coin_resolved(std::move(weights),
                                                         /*normalize=*/true),
                        assigned, unassigned};
  return result;
}

std::vector<double> expected_events(const CoinSchedule& schedule,
                                    const LossModel& loss, int n_steps,
                                    std::int64_t n_trials) {
  if (n_steps < 1) throw std::domain_error("n_steps must be >= 1");
  std::vector<double> expected;
  expected.reserve(n_steps);
  WalkState state = WalkState::localized(0, 0, -1, -1);
  double continuing = static_cast<double>(n_trials) * loss.input_coupling;
  for (int n = 1; n <= n_steps; ++n) {
    state = evolve(state, schedule, 1);
    double mass = 0.0;
    for (const auto& [label, amp] : state.amplitudes()) {
      const int coin = coin_index(label.c1, label.c2);
      const double outcouple =
          label.c1 == -1 ? loss.outcouple_minus : loss.outcouple_plus;
      mass += std::norm(amp) * outcouple * loss.detection_efficiency[coin];
    }
    expected.push_back(continuing * mass);
    continuing *= loss.step_survival;
  }
  return expected;
}

void write_records(std::ostream& out, std::span<const DetectionRecord> records) {
  out << "trial_id step arrival_time_ns coin_state\n";
  char line[96];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%" PRId64 " %d %.2f %d\n", r.trial_id,
                  r.step, r.arrival_time_ns, r.coin_state);
    out << line;
  }
}

std::vector<DetectionRecord> read_records(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) ||
      header != "trial_id step arrival_time_ns coin_state") {
    throw std::domain_error("not a detection record file");
  }
  std::vector<DetectionRecord> records;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    DetectionRecord r;
    std::istringstream row(line);
    if (!(row >> r.trial_id >> r.step >> r.arrival_time_ns >> r.coin_state)) {
      throw std::domain_error("malformed record at line " +
                              std::to_string(line_no));
    }
    records.push_back(r);
  }
  return records;
}

}  // namespace latticewalk
