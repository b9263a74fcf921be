#pragma once

#include <map>

#include "latticewalk/coin.hpp"
#include "latticewalk/distribution.hpp"
#include "latticewalk/walk_types.hpp"

namespace latticewalk {

enum class EvolutionOrder {
  combined,  // (S * C)^n with the schedule's combined coin
  staged,    // hardware order: C2, x2-shift, C1, x1-shift per step
};

// The walker's pure state: a sparse map from basis labels to complex
// amplitudes. States are immutable values; every operation returns a new
// state. Evolution is exact — amplitudes are never pruned or renormalized,
// and the norm is asserted (not repaired) after each step.
class WalkState {
 public:
  using AmplitudeMap = std::map<BasisLabel, Complex>;

  // Amplitude 1 at |x1,x2,c1,c2>. Coin values outside {-1,+1} are rejected.
  static WalkState localized(int x1, int x2, int c1, int c2);

  // Arbitrary superposition; must be normalized within kNormTol.
  static WalkState from_amplitudes(AmplitudeMap amplitudes, int step_count = 0);

  const AmplitudeMap& amplitudes() const { return amplitudes_; }
  int step_count() const { return step_count_; }
  std::size_t support_size() const { return amplitudes_.size(); }
  double norm() const;

  Distribution position_distribution() const;
  Distribution coin_resolved_distribution() const;

 private:
  WalkState(AmplitudeMap amplitudes, int step_count)
      : amplitudes_(std::move(amplitudes)), step_count_(step_count) {}

  friend WalkState apply_coin(const WalkState&, const CoinSchedule&, int);
  friend WalkState apply_step(const WalkState&);
  friend WalkState evolve(const WalkState&, const CoinSchedule&, int,
                          EvolutionOrder);

  AmplitudeMap amplitudes_;
  int step_count_ = 0;
};

// Multiplies the 4-vector of coin amplitudes at every occupied position by
// the operator the schedule resolves there. Positions are untouched.
WalkState apply_coin(const WalkState& state, const CoinSchedule& schedule,
                     int step_index);

// |x1,x2,c1,c2> -> |x1+c1,x2+c2,c1,c2>; a permutation of labels, so the
// norm is preserved exactly. Increments the step count.
WalkState apply_step(const WalkState& state);

// Applies n walk steps. The schedule's step index is the state's running
// step count, so step-dependent schedules see 0,1,2,... from a fresh state.
// Staged order requires a schedule carrying the staged pair.
WalkState evolve(const WalkState& state, const CoinSchedule& schedule, int n,
                 EvolutionOrder order = EvolutionOrder::combined);

}  // namespace latticewalk
