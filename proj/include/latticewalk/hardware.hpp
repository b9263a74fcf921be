#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "latticewalk/coin.hpp"
#include "latticewalk/distribution.hpp"

namespace latticewalk {

// Fiber-loop timing. Positions map to arrival-time bins: one round trip
// takes t_min, and each step's slow branches add dtau1 (x1 axis) and
// dtau2 (x2 axis). The +1 branch is the shorter path on both axes.
// axis_swap exchanges the delay/axis pairing to reproduce the alternative
// reading of the time-bin listing. eom_delay models the modulator's extra
// insertion delay as a constant added to t_min (default off).
struct TimingConfig {
  double t_min_ns = 0.0;
  double dtau1_ns = 0.0;
  double dtau2_ns = 0.0;
  double pulse_width_ns = 0.0;
  double eom_delay_ns = 0.0;
  bool axis_swap = false;

  double effective_t_min() const { return t_min_ns + eom_delay_ns; }

  // The published device: t_min 676 ns, dtau1 3.11 ns, dtau2 46.42 ns,
  // 88 ps pulses.
  static TimingConfig paper();
};

// Per-step loss/detection probabilities. Photons enter through a weak
// beam splitter, may couple out toward the detectors each round trip
// (different fractions in the x1-1 and x1+1 loops), and otherwise keep
// walking with probability step_survival. Detection efficiencies are per
// coin basis state, in coin order.
struct LossModel {
  double input_coupling = 1.0;
  double outcouple_minus = 1.0;
  double outcouple_plus = 1.0;
  double step_survival = 1.0;
  std::array<double, 4> detection_efficiency{1.0, 1.0, 1.0, 1.0};

  // 3% input, 12%/4% out-coupling, 52% survival (EOM off).
  static LossModel paper();
  // Everything passes: every entering photon is recorded at every step.
  static LossModel lossless();
};

// One simulated detector click. coin_state is 1-based (1..4, coin order).
struct DetectionRecord {
  std::int64_t trial_id = 0;
  int step = 0;
  double arrival_time_ns = 0.0;
  int coin_state = 1;
};

// Arrival-time bin of position (x1,x2) after n steps. Requires
// x_i == n (mod 2) and |x_i| <= n.
double arrival_time(int x1, int x2, int n, const TimingConfig& timing);

struct OverlapReport {
  struct Collision {
    int step_a = 0, step_b = 0;
    int x1_a = 0, x2_a = 0, x1_b = 0, x2_b = 0;
    double time_a_ns = 0.0, time_b_ns = 0.0;
  };
  bool ok = true;
  std::optional<Collision> first_collision;
};

// Enumerates every parity-valid position for steps 1..n_max and verifies
// that (a) all bins are pairwise separated by more than the pulse width
// and (b) no step's bins cross into the next step's window. Reports the
// earliest offending pair otherwise.
OverlapReport check_no_overlap(const TimingConfig& timing, int n_max);

// Output of the Monte-Carlo detection run. Records are ordered by
// (trial_id, step). The counters instrument the loss chain: `entered` is
// the number of trials passing the input coupler, alive_after_step[n-1]
// the number still walking after n survival draws.
struct DetectionRun {
  std::vector<DetectionRecord> records;
  std::int64_t trials = 0;
  std::int64_t entered = 0;
  std::vector<std::int64_t> alive_after_step;
};

// Samples detector clicks against the exact unitary walk. Losses act as
// Bernoulli thinning of the ideal probability weights: at each step a
// photon is recorded with probability sum_c w_c * outcouple(c) * eff(c)
// (the component drawn from that mass) and keeps walking with probability
// step_survival, matching classical-light counting statistics. The same
// seed yields the identical record list for any thread count.
DetectionRun simulate_detections(const CoinSchedule& schedule,
                                 const LossModel& loss,
                                 const TimingConfig& timing, int n_steps,
                                 std::int64_t n_trials, std::uint64_t seed,
                                 int threads = 0);

struct Reconstruction {
  Distribution dist;          // coin-resolved, calibrated, normalized
  std::int64_t assigned = 0;
  std::int64_t unassigned = 0;  // records matching no bin within w/2
};

// Inverts arrival_time at the given step (nearest bin within half a pulse
// width), divides counts by the per-coin calibration efficiencies and
// normalizes.
Reconstruction reconstruct_distribution(std::span<const DetectionRecord> records,
                                        const TimingConfig& timing, int step,
                                        const std::array<double, 4>& calibration);

// Deterministic expectation of detections per step (index 0 = step 1):
// trials * input_coupling * survival^(n-1) * out-coupling mass at step n.
std::vector<double> expected_events(const CoinSchedule& schedule,
                                    const LossModel& loss, int n_steps,
                                    std::int64_t n_trials);

// Columnar text serialization: header, then one record per line as
// "trial_id step arrival_time_ns coin_state" with the time fixed to two
// decimals. Reading reverses it exactly.
void write_records(std::ostream& out, std::span<const DetectionRecord> records);
std::vector<DetectionRecord> read_records(std::istream& in);

}  // namespace latticewalk
