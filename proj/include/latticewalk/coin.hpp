#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace latticewalk {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

inline constexpr double kUnitaryTol = 1e-12;

// Coin basis order. Index 0..3 corresponds to the encoding
//   |H,a> -> |-1,-1>, |V,a> -> |-1,+1>, |H,b> -> |+1,+1>, |V,b> -> |+1,-1>,
// i.e. the third and fourth slots are swapped relative to a plain
// (c1,c2) tensor ordering. All 4x4 matrices in this library are written
// in this order.
inline constexpr std::array<std::pair<int, int>, 4> kCoinBasisOrder{
    {{-1, -1}, {-1, +1}, {+1, +1}, {+1, -1}}};

// coin index -> Kronecker index (2*i(c1) + i(c2), with i(-1)=0, i(+1)=1).
// An involution: it also maps Kronecker indices back to coin indices.
inline constexpr std::array<int, 4> kCoinToKron{0, 1, 3, 2};

// Index of (c1,c2) in kCoinBasisOrder; throws std::domain_error for
// values outside {-1,+1}.
int coin_index(int c1, int c2);

// Reindex a matrix given in Kronecker order into coin order (and back;
// the permutation is self-inverse).
Mat4 coin_from_kron(const Mat4& kron_ordered);
Mat4 kron_from_coin(const Mat4& coin_ordered);

// Kronecker product of two single-axis coins, returned in coin order.
// Each factor is indexed by coin value (-1, +1).
Mat4 kron2(const Mat2& u1, const Mat2& u2);

// Single-axis Hadamard, |+-1> -> (|1> +- |-1>)/sqrt(2), basis (-1,+1).
Mat2 hadamard2();

bool is_unitary(const Mat4& m, double tol = kUnitaryTol);

// True when the coin factors as U1 (x) U2 across the two axes. Uses the
// realignment rank-1 test on the Kronecker-ordered matrix.
bool is_separable_coin(const Mat4& coin_ordered, double tol = 1e-9);

// A 4x4 unitary acting on the coin space, with a provenance label.
// Unitarity is enforced at construction.
class CoinOperator {
 public:
  CoinOperator(Mat4 matrix, std::string label);

  const Mat4& matrix() const { return matrix_; }
  const std::string& label() const { return label_; }
  bool separable(double tol = 1e-9) const;

 private:
  Mat4 matrix_;
  std::string label_;
};

// The Eq.-style wave-plate matrices. Slot 1 mixes coin indices (1,2),
// slot 2 mixes (3,4), slot 3 mixes (1,4), slot 4 mixes (2,3); slot 4
// carries -cos on index 2 and +cos on index 3. Angles in radians.
CoinOperator hwp_matrix(int slot, double theta);

// Fast-switchable phase element: diag(e^{i phi}, e^{i phi*crosstalk}, 1, 1).
// crosstalk = 0 is the ideal device; 1/3.5 reproduces the leakage of the
// modulator onto the orthogonal polarization.
CoinOperator eom_matrix(double phi, double crosstalk = 0.0);

// Right-to-left product: the last listed operator is applied first.
CoinOperator compose(std::span<const CoinOperator> ops);
CoinOperator compose(std::initializer_list<CoinOperator> ops);

// Half-wave-plate angle settings, radians.
struct HwpAngleSet {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
  double theta4 = 0.0;
};

// Where and how the phase modulator acts.
struct EomRule {
  enum class Scope { none, everywhere, diagonal };
  Scope scope = Scope::none;
  double phase = 0.0;
  double crosstalk = 0.0;
};

// One schedule override: the operator applies where both predicates hold.
// Null predicates match everywhere / every step.
struct ScheduleOverride {
  std::function<bool(int x1, int x2)> position;
  std::function<bool(int step)> step;
  CoinOperator op;
};

// Assigns a coin operator to every (position, step). Resolution picks the
// first matching override, falling back to the default, so exactly one
// operator applies anywhere. Optionally carries the staged pair
// (C1, C2) so the walk can be run in hardware order
// C2 -> x2-shift -> C1 -> x1-shift.
class CoinSchedule {
 public:
  struct Staged {
    CoinOperator stage1;           // position-independent
    CoinOperator stage2_default;   // may be overridden per position/step
    std::vector<ScheduleOverride> stage2_overrides;
  };

  explicit CoinSchedule(CoinOperator default_op,
                        std::vector<ScheduleOverride> overrides = {},
                        std::optional<Staged> staged = std::nullopt);

  const CoinOperator& coin_at(int x1, int x2, int step) const;
  const CoinOperator& default_op() const { return default_op_; }
  bool uniform() const { return overrides_.empty(); }

  bool has_staged() const { return staged_.has_value(); }
  const CoinOperator& stage1() const;
  const CoinOperator& stage2_at(int x1, int x2, int step) const;

  // True when every operator reachable from the schedule is a product
  // U1 (x) U2 across the two coin axes.
  bool separable() const { return separable_; }

 private:
  CoinOperator default_op_;
  std::vector<ScheduleOverride> overrides_;
  std::optional<Staged> staged_;
  bool separable_;
};

enum class NamedCoin {
  hadamard,
  controlled_xz,
  controlled_hadamard_23,
  controlled_hadamard_24,
  nonlinear_cz_diagonal,
};

// Throws std::domain_error for unknown names.
NamedCoin parse_named_coin(std::string_view name);
const char* to_string(NamedCoin name);

// The experiment configurations:
//   hadamard               ideal H (x) H everywhere
//   controlled_xz          assembled plates at theta1=-pi/8, theta2..4=pi/8
//   controlled_hadamard_23 theta2=theta3=0, remaining pi/8
//   controlled_hadamard_24 theta2=theta4=0, remaining pi/8
//   nonlinear_cz_diagonal  H (x) H, with (H (x) H)*diag(-1,1,1,1) where x1=x2
CoinSchedule named_coin(NamedCoin name);

// Combined-coin schedule assembled from plate angles and an EOM rule:
// C = C_HWP3 C_HWP4 C_HWP2 C_HWP1 C_EOM, with the EOM contributing only
// where the rule's scope says so.
CoinSchedule angle_schedule(const HwpAngleSet& angles, const EomRule& eom = {});

// Same assembly, but additionally carrying the staged pair
// C1 = C_HWP3 C_HWP4 and C2 = C_HWP2 C_HWP1 C_EOM for hardware-order runs.
CoinSchedule staged_schedule(const HwpAngleSet& angles, const EomRule& eom = {});

}  // namespace latticewalk
