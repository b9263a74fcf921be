#pragma once

#include <array>
#include <map>
#include <vector>

#include "latticewalk/distribution.hpp"
#include "latticewalk/walk.hpp"

namespace latticewalk {

// Squared Bhattacharyya coefficient (sum_x sqrt(P(x) Q(x)))^2 over the
// union of supports. 1 iff the distributions are equal, 0 for disjoint
// supports. Both inputs must be normalized within kNormTol.
double similarity(const Distribution& p, const Distribution& q);

// sum_x P(x,x): the probability that both virtual particles co-locate.
double diagonal_confinement(const Distribution& p);

// Sums over the other axis; axis is 1 or 2.
std::map<int, double> marginal(const Distribution& p, int axis);

// max_{x1,x2} |P(x1,x2) - P1(x1) P2(x2)| over the product of the marginal
// supports; 0 for exactly separable distributions.
double factorization_residual(const Distribution& p);

struct EntropyReport {
  enum class Kind { exact, lower_bound };

  struct TracePoint {
    std::array<double, 3> phases;  // coin-sector phases for indices 1,2,3
    double entropy_bits;
  };

  double value_bits = 0.0;
  Kind kind = Kind::exact;
  std::vector<TracePoint> optimizer_trace;  // populated for lower_bound
};

// Eigenvalues of the reduced density matrix rho1 = Tr_{x2,c2} |psi><psi|,
// descending, clipped to [0,1]. Clipping beyond 1e-9 raises
// NumericViolation.
std::vector<double> reduced_density_eigenvalues(const WalkState& state);

// Exact von Neumann entropy -sum lambda_i log2 lambda_i across the fixed
// bipartition subsystem 1 = (x1,c1), subsystem 2 = (x2,c2).
EntropyReport von_neumann_entropy(const WalkState& state);

// Relative phases between position/coin states within each coin sector,
// as reconstructed from a theoretical model. Phases between the four coin
// sectors remain free parameters of the lower bound.
class PhaseModel {
 public:
  static PhaseModel from_state(const WalkState& state);
  static PhaseModel from_map(std::map<BasisLabel, double> phases);

  bool contains(const BasisLabel& label) const;
  double at(const BasisLabel& label) const;  // throws std::domain_error
  const std::map<BasisLabel, double>& phases() const { return phases_; }

 private:
  std::map<BasisLabel, double> phases_;
};

struct LowerBoundOptions {
  int grid_points_per_axis = 16;   // coarse grid over [0,2pi)^3
  double tolerance_bits = 1e-6;    // simplex refinement convergence
  int max_refine_iterations = 400;
  int threads = 0;                 // 0 = hardware concurrency
};

// Minimum exact entropy over the three unknown coin-sector phases, for
// candidate states a = sqrt(p) e^{i(model phase + sector phase)}. A grid
// search (which always contains the zero-phase point) is refined by a
// Nelder–Mead simplex; the result is a lower bound on the entropy of any
// state consistent with the given probabilities and model phases.
EntropyReport entropy_lower_bound(const Distribution& probabilities,
                                  const PhaseModel& model,
                                  const LowerBoundOptions& options = {});

}  // namespace latticewalk
