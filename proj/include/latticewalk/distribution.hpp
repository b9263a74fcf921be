#pragma once

#include <map>
#include <optional>
#include <utility>

#include "latticewalk/walk_types.hpp"

namespace latticewalk {

inline constexpr double kNormTol = 1e-9;

// Nonnegative weights over lattice positions, optionally resolved by coin
// state. Position weights are always available; when built coin-resolved,
// the position map is the coin-traced sum.
class Distribution {
 public:
  using Position = std::pair<int, int>;
  using PositionMap = std::map<Position, double>;
  using CoinMap = std::map<BasisLabel, double>;

  Distribution() = default;  // empty, total 0

  static Distribution from_positions(PositionMap weights, bool normalize = false);
  static Distribution from_coin_resolved(CoinMap weights, bool normalize = false);

  const PositionMap& positions() const { return positions_; }
  bool coin_resolved() const { return coin_.has_value(); }
  const CoinMap& coin_weights() const;  // throws std::domain_error if absent

  double total() const { return total_; }
  bool normalized(double tol = kNormTol) const;
  double at(int x1, int x2) const;  // 0 for absent positions

 private:
  PositionMap positions_;
  std::optional<CoinMap> coin_;
  double total_ = 0.0;
};

}  // namespace latticewalk
