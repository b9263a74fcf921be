#include "latticewalk/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace latticewalk::oracle {

std::size_t DenseState::index(int x1, int x2, int coin) const {
  const int side = 2 * box + 1;
  return (static_cast<std::size_t>(x1 + box) * side +
          static_cast<std::size_t>(x2 + box)) *
             4 +
         static_cast<std::size_t>(coin);
}

std::map<BasisLabel, Complex> DenseState::to_amplitude_map() const {
  std::map<BasisLabel, Complex> amps;
  for (int x1 = -box; x1 <= box; ++x1) {
    for (int x2 = -box; x2 <= box; ++x2) {
      for (int c = 0; c < 4; ++c) {
        const Complex a = vector(static_cast<Eigen::Index>(index(x1, x2, c)));
        if (a != Complex(0.0, 0.0)) {
          amps[{x1, x2, kCoinBasisOrder[c].first, kCoinBasisOrder[c].second}] = a;
        }
      }
    }
  }
  return amps;
}

Distribution DenseState::position_distribution() const {
  Distribution::PositionMap weights;
  for (int x1 = -box; x1 <= box; ++x1) {
    for (int x2 = -box; x2 <= box; ++x2) {
      double p = 0.0;
      for (int c = 0; c < 4; ++c) {
        p += std::norm(vector(static_cast<Eigen::Index>(index(x1, x2, c))));
      }
      if (p > 0.0) weights[{x1, x2}] = p;
    }
  }
  return Distribution::from_positions(std::move(weights));
}

DenseState dense_evolve(const BasisLabel& initial, const CoinSchedule& schedule,
                        int n) {
  if (n < 0) throw std::domain_error("step count must be >= 0");
  if (n > kDenseMaxSteps) {
    throw std::domain_error(
        "dense oracle refuses n = " + std::to_string(n) + " > " +
        std::to_string(kDenseMaxSteps) +
        ": the full matrix over the (2(n+1)+1)^2 x 4 box would defeat its "
        "purpose as a memory-safe reference");
  }

  DenseState state;
  // One site of slack beyond the farthest reachable coordinate proves
  // truncation never happens.
  state.box = n + 1 + std::max(std::abs(initial.x1), std::abs(initial.x2));
  state.steps = 0;
  const int side = 2 * state.box + 1;
  const std::size_t dim = static_cast<std::size_t>(side) * side * 4;
  state.vector = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  state.vector(static_cast<Eigen::Index>(state.index(
      initial.x1, initial.x2, coin_index(initial.c1, initial.c2)))) = 1.0;

  Eigen::MatrixXcd step_matrix(dim, dim);
  for (int k = 0; k < n; ++k) {
    // Full one-step matrix: coin applied in place, then the shift moves
    // amplitude to (x1+c1, x2+c2). Sources on the box rim never hold
    // amplitude, so their clipped columns are irrelevant.
    step_matrix.setZero();
    for (int x1 = -state.box; x1 <= state.box; ++x1) {
      for (int x2 = -state.box; x2 <= state.box; ++x2) {
        const Mat4& coin = schedule.coin_at(x1, x2, k).matrix();
        for (int out = 0; out < 4; ++out) {
          const int y1 = x1 + kCoinBasisOrder[out].first;
          const int y2 = x2 + kCoinBasisOrder[out].second;
          if (std::abs(y1) > state.box || std::abs(y2) > state.box) continue;
          for (int in = 0; in < 4; ++in) {
            step_matrix(static_cast<Eigen::Index>(state.index(y1, y2, out)),
                        static_cast<Eigen::Index>(state.index(x1, x2, in))) =
                coin(out, in);
          }
        }
      }
    }
    state.vector = (step_matrix * state.vector).eval();
    ++state.steps;
  }
  return state;
}

TwoWalkerState two_walker_localized(int x1, int c1, int x2, int c2) {
  coin_index(c1, c2);
  TwoWalkerState state;
  state.amplitudes[{x1, x2, c1, c2}] = Complex(1.0, 0.0);
  return state;
}

Distribution TwoWalkerState::coincidence_distribution() const {
  Distribution::PositionMap weights;
  for (const auto& [label, a] : amplitudes) {
    weights[{label.x1, label.x2}] += std::norm(a);
  }
  return Distribution::from_positions(std::move(weights));
}

TwoWalkerState two_walker_evolve(const TwoWalkerState& initial,
                                 const CoinOperator& joint_coin,
                                 const std::optional<CoinOperator>& when_meet,
                                 int n) {
  if (n < 0) throw std::domain_error("step count must be >= 0");

  TwoWalkerState state = initial;
  for (int k = 0; k < n; ++k) {
    std::map<BasisLabel, Complex> next;
    auto it = state.amplitudes.begin();
    while (it != state.amplitudes.end()) {
      const int x1 = it->first.x1;
      const int x2 = it->first.x2;
      Vec4 v = Vec4::Zero();
      while (it != state.amplitudes.end() && it->first.x1 == x1 &&
             it->first.x2 == x2) {
        v(coin_index(it->first.c1, it->first.c2)) = it->second;
        ++it;
      }
      const bool meet = when_meet && x1 == x2;
      const Vec4 w = (meet ? *when_meet : joint_coin).matrix() * v;
      for (int i = 0; i < 4; ++i) {
        if (w(i) != Complex(0.0, 0.0)) {
          const auto [c1, c2] = kCoinBasisOrder[i];
          // Both walkers step simultaneously, each by its own coin.
          next[{x1 + c1, x2 + c2, c1, c2}] += w(i);
        }
      }
    }
    state.amplitudes = std::move(next);
    ++state.steps;
  }
  return state;
}

std::map<int, double> one_dimensional_walk(int x0, int c0, const Mat2& coin,
                                           int n) {
  if (c0 != -1 && c0 != 1) {
    throw std::domain_error("1D coin value must be -1 or +1");
  }
  if ((coin * coin.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff() >=
      kUnitaryTol) {
    throw std::domain_error("1D coin must be unitary");
  }

  std::map<std::pair<int, int>, Complex> amps;  // (x, coin index 0/1)
  amps[{x0, c0 == -1 ? 0 : 1}] = Complex(1.0, 0.0);
  for (int k = 0; k < n; ++k) {
    std::map<std::pair<int, int>, Complex> next;
    auto it = amps.begin();
    while (it != amps.end()) {
      const int x = it->first.first;
      Eigen::Vector2cd v = Eigen::Vector2cd::Zero();
      while (it != amps.end() && it->first.first == x) {
        v(it->first.second) = it->second;
        ++it;
      }
      const Eigen::Vector2cd w = coin * v;
      if (w(0) != Complex(0.0, 0.0)) next[{x - 1, 0}] += w(0);
      if (w(1) != Complex(0.0, 0.0)) next[{x + 1, 1}] += w(1);
    }
    amps = std::move(next);
  }

  std::map<int, double> dist;
  for (const auto& [key, a] : amps) dist[key.first] += std::norm(a);
  return dist;
}

}  // namespace latticewalk::oracle
