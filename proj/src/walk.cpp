#include "latticewalk/walk.hpp"

#include <cmath>
#include <stdexcept>

#include "latticewalk/errors.hpp"

namespace latticewalk {

namespace {

double norm_sq(const WalkState::AmplitudeMap& amps) {
  double n = 0.0;
  for (const auto& [label, a] : amps) n += std::norm(a);
  return n;
}

void assert_normalized(const WalkState::AmplitudeMap& amps, const char* where) {
  const double n = norm_sq(amps);
  if (std::abs(n - 1.0) > kNormTol) {
    throw NumericViolation(std::string(where) + ": state norm^2 drifted to " +
                           std::to_string(n));
  }
}

// Groups amplitudes by position, transforms each 4-vector of coin
// amplitudes by the resolved operator and rebuilds the map. Exact zeros
// produced by destructive interference are dropped; nothing else is.
template <typename Resolver>
WalkState::AmplitudeMap transform_coins(const WalkState::AmplitudeMap& amps,
                                        Resolver&& coin_for) {
  WalkState::AmplitudeMap out;
  auto it = amps.begin();
  while (it != amps.end()) {
    const int x1 = it->first.x1;
    const int x2 = it->first.x2;
    Vec4 v = Vec4::Zero();
    while (it != amps.end() && it->first.x1 == x1 && it->first.x2 == x2) {
      v(coin_index(it->first.c1, it->first.c2)) = it->second;
      ++it;
    }
    const Vec4 w = coin_for(x1, x2).matrix() * v;
    for (int i = 0; i < 4; ++i) {
      if (w(i) != Complex(0.0, 0.0)) {
        out[{x1, x2, kCoinBasisOrder[i].first, kCoinBasisOrder[i].second}] = w(i);
      }
    }
  }
  return out;
}

WalkState::AmplitudeMap shift(const WalkState::AmplitudeMap& amps, bool move_x1,
                              bool move_x2) {
  WalkState::AmplitudeMap out;
  for (const auto& [label, a] : amps) {
    BasisLabel moved = label;
    if (move_x1) moved.x1 += label.c1;
    if (move_x2) moved.x2 += label.c2;
    out[moved] = a;
  }
  return out;
}

}  // namespace

WalkState WalkState::localized(int x1, int x2, int c1, int c2) {
  coin_index(c1, c2);  // validates the coin values
  AmplitudeMap amps;
  amps[{x1, x2, c1, c2}] = Complex(1.0, 0.0);
  return WalkState(std::move(amps), 0);
}

WalkState WalkState::from_amplitudes(AmplitudeMap amplitudes, int step_count) {
  for (const auto& [label, a] : amplitudes) {
    coin_index(label.c1, label.c2);
  }
  const double n = norm_sq(amplitudes);
  if (std::abs(n - 1.0) > kNormTol) {
    throw std::domain_error("amplitudes are not normalized (norm^2 = " +
                            std::to_string(n) + ")");
  }
  return WalkState(std::move(amplitudes), step_count);
}

double WalkState::norm() const { return std::sqrt(norm_sq(amplitudes_)); }

Distribution WalkState::position_distribution() const {
  Distribution::PositionMap weights;
  for (const auto& [label, a] : amplitudes_) {
    weights[{label.x1, label.x2}] += std::norm(a);
  }
  return Distribution::from_positions(std::move(weights));
}

Distribution WalkState::coin_resolved_distribution() const {
  Distribution::CoinMap weights;
  for (const auto& [label, a] : amplitudes_) {
    weights[label] += std::norm(a);
  }
  return Distribution::from_coin_resolved(std::move(weights));
}

WalkState apply_coin(const WalkState& state, const CoinSchedule& schedule,
                     int step_index) {
  auto out = transform_coins(
      state.amplitudes_, [&](int x1, int x2) -> const CoinOperator& {
        return schedule.coin_at(x1, x2, step_index);
      });
  return WalkState(std::move(out), state.step_count_);
}

WalkState apply_step(const WalkState& state) {
  auto out = shift(state.amplitudes_, true, true);
  return WalkState(std::move(out), state.step_count_ + 1);
}

WalkState evolve(const WalkState& state, const CoinSchedule& schedule, int n,
                 EvolutionOrder order) {
  if (n < 0) throw std::domain_error("step count must be >= 0");
  if (order == EvolutionOrder::staged && !schedule.has_staged()) {
    throw std::domain_error("staged evolution requires a staged schedule");
  }

  WalkState::AmplitudeMap amps = state.amplitudes_;
  int steps = state.step_count_;
  for (int k = 0; k < n; ++k) {
    if (order == EvolutionOrder::combined) {
      amps = transform_coins(amps, [&](int x1, int x2) -> const CoinOperator& {
        return schedule.coin_at(x1, x2, steps);
      });
      amps = shift(amps, true, true);
    } else {
      // C2 sees the pre-shift position, so any position-dependent phase is
      // resolved before the x2 move.
      amps = transform_coins(amps, [&](int x1, int x2) -> const CoinOperator& {
        return schedule.stage2_at(x1, x2, steps);
      });
      amps = shift(amps, false, true);
      const CoinOperator& c1 = schedule.stage1();
      amps = transform_coins(
          amps, [&](int, int) -> const CoinOperator& { return c1; });
      amps = shift(amps, true, false);
    }
    ++steps;
    assert_normalized(amps, "evolve");
  }
  return WalkState(std::move(amps), steps);
}

}  // namespace latticewalk
