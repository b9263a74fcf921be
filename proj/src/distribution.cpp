#include "latticewalk/distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace latticewalk {

namespace {

void check_nonnegative(double w) {
  if (w < 0.0 || !std::isfinite(w)) {
    throw std::domain_error("distribution weights must be finite and >= 0");
  }
}

}  // namespace

Distribution Distribution::from_positions(PositionMap weights, bool normalize) {
  Distribution d;
  double total = 0.0;
  for (const auto& [pos, w] : weights) {
    check_nonnegative(w);
    total += w;
  }
  if (normalize) {
    if (total <= 0.0) {
      throw std::domain_error("cannot normalize an empty distribution");
    }
    for (auto& [pos, w] : weights) w /= total;
    total = 1.0;
  }
  d.positions_ = std::move(weights);
  d.total_ = total;
  return d;
}

Distribution Distribution::from_coin_resolved(CoinMap weights, bool normalize) {
  Distribution d;
  double total = 0.0;
  for (const auto& [label, w] : weights) {
    check_nonnegative(w);
    total += w;
  }
  if (normalize) {
    if (total <= 0.0) {
      throw std::domain_error("cannot normalize an empty distribution");
    }
    for (auto& [label, w] : weights) w /= total;
    total = 1.0;
  }
  for (const auto& [label, w] : weights) {
    d.positions_[{label.x1, label.x2}] += w;
  }
  d.coin_ = std::move(weights);
  d.total_ = total;
  return d;
}

const Distribution::CoinMap& Distribution::coin_weights() const {
  if (!coin_) {
    throw std::domain_error("distribution is not coin-resolved");
  }
  return *coin_;
}

bool Distribution::normalized(double tol) const {
  return std::abs(total_ - 1.0) < tol;
}

double Distribution::at(int x1, int x2) const {
  auto it = positions_.find({x1, x2});
  return it == positions_.end() ? 0.0 : it->second;
}

}  // namespace latticewalk
