#include "latticewalk/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <thread>
#include <vector>

#include "latticewalk/errors.hpp"

namespace latticewalk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_normalized(const Distribution& p, const char* what) {
  if (!p.normalized()) {
    throw std::domain_error(std::string(what) +
                            ": distribution is not normalized (total = " +
                            std::to_string(p.total()) + ")");
  }
}

// Indexes a bipartite amplitude set: rows are (x1,c1), columns (x2,c2).
struct BipartiteIndex {
  std::vector<std::pair<int, int>> rows;
  std::vector<std::pair<int, int>> cols;
  std::map<std::pair<int, int>, int> row_of;
  std::map<std::pair<int, int>, int> col_of;

  template <typename M>
  explicit BipartiteIndex(const M& labeled) {
    std::set<std::pair<int, int>> r, c;
    for (const auto& [label, v] : labeled) {
      r.insert({label.x1, label.c1});
      c.insert({label.x2, label.c2});
    }
    rows.assign(r.begin(), r.end());
    cols.assign(c.begin(), c.end());
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) row_of[rows[i]] = i;
    for (int j = 0; j < static_cast<int>(cols.size()); ++j) col_of[cols[j]] = j;
  }
};

// Eigenvalues of A A^dagger, descending and clipped to [0,1]. The clip is
// bounded by 1e-9; anything larger means the input was not a state.
std::vector<double> schmidt_eigenvalues(const Eigen::MatrixXcd& a) {
  const Eigen::MatrixXcd rho = a * a.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho,
                                                         Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericViolation("eigenvalue decomposition failed");
  }
  std::vector<double> lam(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + rho.rows());
  double clip = 0.0;
  for (double& v : lam) {
    if (v < 0.0) { clip = std::max(clip, -v); v = 0.0; }
    if (v > 1.0) { clip = std::max(clip, v - 1.0); v = 1.0; }
  }
  if (clip > 1e-9) {
    throw NumericViolation("reduced density eigenvalue clipped by " +
                           std::to_string(clip));
  }
  std::sort(lam.begin(), lam.end(), std::greater<double>());
  return lam;
}

double entropy_bits(const std::vector<double>& lam) {
  double e = 0.0;
  for (double v : lam) {
    if (v > 0.0) e -= v * std::log2(v);  // 0 log 0 := 0
  }
  return e;
}

}  // namespace

double similarity(const Distribution& p, const Distribution& q) {
  require_normalized(p, "similarity");
  require_normalized(q, "similarity");
  // Extended precision keeps clean cases exact, e.g. (sqrt(1/2))^2 = 1/2.
  long double bc = 0.0L;
  for (const auto& [pos, w] : p.positions()) {
    const double v = q.at(pos.first, pos.second);
    if (v > 0.0 && w > 0.0) {
      bc += sqrtl(static_cast<long double>(w) * static_cast<long double>(v));
    }
  }
  return static_cast<double>(bc * bc);
}

double diagonal_confinement(const Distribution& p) {
  double sum = 0.0;
  for (const auto& [pos, w] : p.positions()) {
    if (pos.first == pos.second) sum += w;
  }
  return sum;
}

std::map<int, double> marginal(const Distribution& p, int axis) {
  if (axis != 1 && axis != 2) {
    throw std::domain_error("marginal axis must be 1 or 2");
  }
  std::map<int, double> m;
  for (const auto& [pos, w] : p.positions()) {
    m[axis == 1 ? pos.first : pos.second] += w;
  }
  return m;
}

double factorization_residual(const Distribution& p) {
  const auto m1 = marginal(p, 1);
  const auto m2 = marginal(p, 2);
  double worst = 0.0;
  for (const auto& [x1, w1] : m1) {
    for (const auto& [x2, w2] : m2) {
      worst = std::max(worst, std::abs(p.at(x1, x2) - w1 * w2));
    }
  }
  return worst;
}

std::vector<double> reduced_density_eigenvalues(const WalkState& state) {
  const BipartiteIndex index(state.amplitudes());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(index.rows.size(),
                                              index.cols.size());
  for (const auto& [label, amp] : state.amplitudes()) {
    a(index.row_of.at({label.x1, label.c1}),
      index.col_of.at({label.x2, label.c2})) = amp;
  }
  return schmidt_eigenvalues(a);
}

EntropyReport von_neumann_entropy(const WalkState& state) {
  EntropyReport report;
  report.kind = EntropyReport::Kind::exact;
  report.value_bits = entropy_bits(reduced_density_eigenvalues(state));
  return report;
}

PhaseModel PhaseModel::from_state(const WalkState& state) {
  std::map<BasisLabel, double> phases;
  for (const auto& [label, amp] : state.amplitudes()) {
    phases[label] = std::arg(amp);
  }
  return from_map(std::move(phases));
}

PhaseModel PhaseModel::from_map(std::map<BasisLabel, double> phases) {
  PhaseModel m;
  m.phases_ = std::move(phases);
  return m;
}

bool PhaseModel::contains(const BasisLabel& label) const {
  return phases_.count(label) != 0;
}

double PhaseModel::at(const BasisLabel& label) const {
  auto it = phases_.find(label);
  if (it == phases_.end()) {
    throw std::domain_error("phase model has no entry for the requested label");
  }
  return it->second;
}

namespace {

// Shared data for one lower-bound minimization.
struct BoundProblem {
  std::vector<int> row;      // per entry
  std::vector<int> col;
  std::vector<int> sector;   // coin index 0..3
  std::vector<double> magnitude;
  std::vector<double> base_phase;
  int n_rows = 0;
  int n_cols = 0;

  double entropy_at(const std::array<double, 3>& delta) const {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_rows, n_cols);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double extra = sector[k] == 0 ? 0.0 : delta[sector[k] - 1];
      a(row[k], col[k]) += std::polar(magnitude[k], base_phase[k] + extra);
    }
    return entropy_bits(schmidt_eigenvalues(a));
  }
};

struct Candidate {
  std::array<double, 3> phases{};
  double entropy = 0.0;

  // Min by value; ties broken by lexicographic phase triple so parallel
  // reductions are deterministic.
  bool better_than(const Candidate& other) const {
    if (entropy != other.entropy) return entropy < other.entropy;
    return phases < other.phases;
  }
};

Candidate grid_search(const BoundProblem& problem, int points, int threads) {
  const int total = points * points * points;
  auto evaluate = [&](int flat) {
    const int ia = flat / (points * points);
    const int ib = (flat / points) % points;
    const int ic = flat % points;
    const double h = kTwoPi / points;
    Candidate c;
    c.phases = {ia * h, ib * h, ic * h};
    c.entropy = problem.entropy_at(c.phases);
    return c;
  };

  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, total);

  if (workers == 1) {
    Candidate best = evaluate(0);
    for (int flat = 1; flat < total; ++flat) {
      Candidate c = evaluate(flat);
      if (c.better_than(best)) best = c;
    }
    return best;
  }

  std::vector<Candidate> partial(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      Candidate best;
      bool first = true;
      for (int flat = w; flat < total; flat += workers) {
        Candidate c = evaluate(flat);
        if (first || c.better_than(best)) { best = c; first = false; }
      }
      partial[w] = best;
    });
  }
  for (auto& t : pool) t.join();
  Candidate best = partial[0];
  for (int w = 1; w < workers; ++w) {
    if (partial[w].better_than(best)) best = partial[w];
  }
  return best;
}

// Classic Nelder–Mead in three dimensions; the objective is smooth and
// periodic, so an unconstrained simplex works on the lifted phases.
Candidate refine_simplex(const BoundProblem& problem, const Candidate& start,
                         double step, double tol, int max_iterations,
                         std::vector<EntropyReport::TracePoint>& trace) {
  using Point = std::array<double, 3>;
  struct Vertex { Point x; double f; };
  auto eval = [&](const Point& x) { return problem.entropy_at(x); };

  std::array<Vertex, 4> simplex;
  simplex[0] = {start.phases, start.entropy};
  for (int i = 0; i < 3; ++i) {
    Point x = start.phases;
    x[i] += step;
    simplex[i + 1] = {x, eval(x)};
  }

  Candidate best = start;
  for (int iter = 0; iter < max_iterations; ++iter) {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    if (simplex[0].f < best.entropy) {
      best = {simplex[0].x, simplex[0].f};
      trace.push_back({best.phases, best.entropy});
    }
    if (simplex[3].f - simplex[0].f < tol) break;

    Point centroid{};
    for (int v = 0; v < 3; ++v) {
      for (int i = 0; i < 3; ++i) centroid[i] += simplex[v].x[i] / 3.0;
    }
    auto blend = [&](double coeff) {
      Point x;
      for (int i = 0; i < 3; ++i) {
        x[i] = centroid[i] + coeff * (simplex[3].x[i] - centroid[i]);
      }
      return x;
    };

    const Point reflected = blend(-1.0);
    const double fr = eval(reflected);
    if (fr < simplex[0].f) {
      const Point expanded = blend(-2.0);
      const double fe = eval(expanded);
      simplex[3] = fe < fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
    } else if (fr < simplex[2].f) {
      simplex[3] = {reflected, fr};
    } else {
      const Point contracted = blend(0.5);
      const double fc = eval(contracted);
      if (fc < simplex[3].f) {
        simplex[3] = {contracted, fc};
      } else {
        for (int v = 1; v < 4; ++v) {  // shrink toward the best vertex
          for (int i = 0; i < 3; ++i) {
            simplex[v].x[i] = simplex[0].x[i] +
                              0.5 * (simplex[v].x[i] - simplex[0].x[i]);
          }
          simplex[v].f = eval(simplex[v].x);
        }
      }
    }
  }

  std::sort(simplex.begin(), simplex.end(),
            [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  if (simplex[0].f < best.entropy) {
    best = {simplex[0].x, simplex[0].f};
    trace.push_back({best.phases, best.entropy});
  }
  return best;
}

}  // namespace

EntropyReport entropy_lower_bound(const Distribution& probabilities,
                                  const PhaseModel& model,
                                  const LowerBoundOptions& options) {
  require_normalized(probabilities, "entropy_lower_bound");
  if (!probabilities.coin_resolved()) {
    throw std::domain_error(
        "entropy_lower_bound requires coin-resolved probabilities");
  }
  if (options.grid_points_per_axis < 1) {
    throw std::domain_error("grid must have at least one point per axis");
  }

  BoundProblem problem;
  {
    std::map<BasisLabel, double> weights;
    for (const auto& [label, w] : probabilities.coin_weights()) {
      if (w > 0.0) weights[label] = w;
    }
    const BipartiteIndex index(weights);
    problem.n_rows = static_cast<int>(index.rows.size());
    problem.n_cols = static_cast<int>(index.cols.size());
    for (const auto& [label, w] : weights) {
      if (!model.contains(label)) {
        throw std::domain_error(
            "phase model does not cover the probability support");
      }
      problem.row.push_back(index.row_of.at({label.x1, label.c1}));
      problem.col.push_back(index.col_of.at({label.x2, label.c2}));
      problem.sector.push_back(coin_index(label.c1, label.c2));
      problem.magnitude.push_back(std::sqrt(w));
      problem.base_phase.push_back(model.at(label));
    }
  }

  EntropyReport report;
  report.kind = EntropyReport::Kind::lower_bound;

  const Candidate coarse =
      grid_search(problem, options.grid_points_per_axis, options.threads);
  report.optimizer_trace.push_back({coarse.phases, coarse.entropy});

  const double step = kTwoPi / options.grid_points_per_axis / 2.0;
  const Candidate best =
      refine_simplex(problem, coarse, step, options.tolerance_bits,
                     options.max_refine_iterations, report.optimizer_trace);

  report.value_bits = best.entropy;
  return report;
}

}  // namespace latticewalk
