#pragma once

#include <map>
#include <optional>

#include <Eigen/Dense>

#include "latticewalk/coin.hpp"
#include "latticewalk/distribution.hpp"
#include "latticewalk/walk_types.hpp"

// Brute-force reference implementations, kept deliberately independent of
// the sparse walk code: a dense-matrix evolution of the full
// position (x) coin space, and an explicit two-walker line walk whose
// coincidence distribution realizes the 2D <-> two-walker isomorphism.
namespace latticewalk::oracle {

inline constexpr int kDenseMaxSteps = 8;

// Full state vector over the box [-box, box]^2 x 4.
struct DenseState {
  int box = 0;
  int steps = 0;
  Eigen::VectorXcd vector;

  std::size_t index(int x1, int x2, int coin) const;
  std::map<BasisLabel, Complex> to_amplitude_map() const;
  Distribution position_distribution() const;
};

// Builds the full one-step matrix (step * coin) and applies it n times.
// The box is sized n+1 so boundary truncation provably never occurs.
// Refuses n > kDenseMaxSteps.
DenseState dense_evolve(const BasisLabel& initial, const CoinSchedule& schedule,
                        int n);

// Two distinguishable-register walkers on the same line; amplitudes keyed
// by (x1,c1,x2,c2) reusing BasisLabel fields as walker coordinates.
struct TwoWalkerState {
  std::map<BasisLabel, Complex> amplitudes;
  int steps = 0;

  Distribution coincidence_distribution() const;
};

TwoWalkerState two_walker_localized(int x1, int c1, int x2, int c2);

// Each step applies the joint 4x4 coin to (c1,c2) — `when_meet` replaces
// it where both walkers share a position — then shifts both walkers
// simultaneously by their coin values.
TwoWalkerState two_walker_evolve(const TwoWalkerState& initial,
                                 const CoinOperator& joint_coin,
                                 const std::optional<CoinOperator>& when_meet,
                                 int n);

// Standard 1D walk distribution after n steps; coin in the (-1,+1) basis.
std::map<int, double> one_dimensional_walk(int x0, int c0, const Mat2& coin,
                                           int n);

}  // namespace latticewalk::oracle
