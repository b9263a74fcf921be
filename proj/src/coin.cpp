#include "latticewalk/coin.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace latticewalk {

namespace {

constexpr double kPi = std::numbers::pi;

std::string angle_label(const char* name, double value) {
  std::ostringstream os;
  os << name << "(" << value << ")";
  return os.str();
}

}  // namespace

int coin_index(int c1, int c2) {
  for (int i = 0; i < 4; ++i) {
    if (kCoinBasisOrder[i].first == c1 && kCoinBasisOrder[i].second == c2) {
      return i;
    }
  }
  throw std::domain_error("coin values must be -1 or +1, got (" +
                          std::to_string(c1) + "," + std::to_string(c2) + ")");
}

Mat4 coin_from_kron(const Mat4& kron_ordered) {
  Mat4 m;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      m(i, j) = kron_ordered(kCoinToKron[i], kCoinToKron[j]);
    }
  }
  return m;
}

Mat4 kron_from_coin(const Mat4& coin_ordered) {
  // kCoinToKron is an involution, so the same reindexing inverts itself.
  return coin_from_kron(coin_ordered);
}

Mat4 kron2(const Mat2& u1, const Mat2& u2) {
  Mat4 k;
  for (int i1 = 0; i1 < 2; ++i1) {
    for (int i2 = 0; i2 < 2; ++i2) {
      for (int j1 = 0; j1 < 2; ++j1) {
        for (int j2 = 0; j2 < 2; ++j2) {
          k(2 * i1 + i2, 2 * j1 + j2) = u1(i1, j1) * u2(i2, j2);
        }
      }
    }
  }
  return coin_from_kron(k);
}

Mat2 hadamard2() {
  const double s = 1.0 / std::sqrt(2.0);
  Mat2 h;
  // Columns are the images of |-1> and |+1|; rows indexed (-1,+1).
  h << -s, s,
        s, s;
  return h;
}

bool is_unitary(const Mat4& m, double tol) {
  return ((m * m.adjoint()) - Mat4::Identity()).cwiseAbs().maxCoeff() < tol;
}

bool is_separable_coin(const Mat4& coin_ordered, double tol) {
  // Realignment: R[(i1,j1),(i2,j2)] = M[(i1,i2),(j1,j2)] is rank one
  // exactly when M = U1 (x) U2.
  const Mat4 k = kron_from_coin(coin_ordered);
  Mat4 r;
  for (int i1 = 0; i1 < 2; ++i1) {
    for (int j1 = 0; j1 < 2; ++j1) {
      for (int i2 = 0; i2 < 2; ++i2) {
        for (int j2 = 0; j2 < 2; ++j2) {
          r(2 * i1 + j1, 2 * i2 + j2) = k(2 * i1 + i2, 2 * j1 + j2);
        }
      }
    }
  }
  Eigen::JacobiSVD<Mat4> svd(r);
  return svd.singularValues()(1) < tol;
}

CoinOperator::CoinOperator(Mat4 matrix, std::string label)
    : matrix_(std::move(matrix)), label_(std::move(label)) {
  if (!is_unitary(matrix_, kUnitaryTol)) {
    throw std::domain_error("coin operator '" + label_ + "' is not unitary");
  }
}

bool CoinOperator::separable(double tol) const {
  return is_separable_coin(matrix_, tol);
}

CoinOperator hwp_matrix(int slot, double theta) {
  const double c = std::cos(2.0 * theta);
  const double s = std::sin(2.0 * theta);
  Mat4 m = Mat4::Identity();
  switch (slot) {
    case 1:
      m(0, 0) = c;  m(0, 1) = s;
      m(1, 0) = s;  m(1, 1) = -c;
      break;
    case 2:
      m(2, 2) = c;  m(2, 3) = s;
      m(3, 2) = s;  m(3, 3) = -c;
      break;
    case 3:
      m(0, 0) = c;  m(0, 3) = s;
      m(3, 0) = s;  m(3, 3) = -c;
      break;
    case 4:
      m(1, 1) = -c; m(1, 2) = s;
      m(2, 1) = s;  m(2, 2) = c;
      break;
    default:
      throw std::domain_error("HWP slot must be 1..4, got " +
                              std::to_string(slot));
  }
  std::ostringstream label;
  label << "HWP" << slot << "(theta=" << theta << ")";
  return CoinOperator(m, label.str());
}

CoinOperator eom_matrix(double phi, double crosstalk) {
  if (crosstalk < 0.0) {
    throw std::domain_error("EOM crosstalk must be nonnegative");
  }
  Mat4 m = Mat4::Identity();
  m(0, 0) = std::polar(1.0, phi);
  m(1, 1) = std::polar(1.0, phi * crosstalk);
  std::ostringstream label;
  label << "EOM(phi=" << phi;
  if (crosstalk != 0.0) label << ", crosstalk=" << crosstalk;
  label << ")";
  return CoinOperator(m, label.str());
}

CoinOperator compose(std::span<const CoinOperator> ops) {
  if (ops.empty()) {
    throw std::domain_error("compose requires at least one operator");
  }
  Mat4 product = Mat4::Identity();
  std::string label = "compose(";
  for (std::size_t i = 0; i < ops.size(); ++i) {
    product = product * ops[i].matrix();
    if (i) label += " ";
    label += ops[i].label();
  }
  label += ")";
  return CoinOperator(product, label);
}

CoinOperator compose(std::initializer_list<CoinOperator> ops) {
  return compose(std::span<const CoinOperator>(ops.begin(), ops.size()));
}

CoinSchedule::CoinSchedule(CoinOperator default_op,
                           std::vector<ScheduleOverride> overrides,
                           std::optional<Staged> staged)
    : default_op_(std::move(default_op)),
      overrides_(std::move(overrides)),
      staged_(std::move(staged)) {
  separable_ = default_op_.separable();
  for (const auto& o : overrides_) {
    separable_ = separable_ && o.op.separable();
  }
}

const CoinOperator& CoinSchedule::coin_at(int x1, int x2, int step) const {
  for (const auto& o : overrides_) {
    const bool pos_ok = !o.position || o.position(x1, x2);
    const bool step_ok = !o.step || o.step(step);
    if (pos_ok && step_ok) return o.op;
  }
  return default_op_;
}

const CoinOperator& CoinSchedule::stage1() const {
  if (!staged_) throw std::domain_error("schedule carries no staged pair");
  return staged_->stage1;
}

const CoinOperator& CoinSchedule::stage2_at(int x1, int x2, int step) const {
  if (!staged_) throw std::domain_error("schedule carries no staged pair");
  for (const auto& o : staged_->stage2_overrides) {
    const bool pos_ok = !o.position || o.position(x1, x2);
    const bool step_ok = !o.step || o.step(step);
    if (pos_ok && step_ok) return o.op;
  }
  return staged_->stage2_default;
}

NamedCoin parse_named_coin(std::string_view name) {
  if (name == "hadamard") return NamedCoin::hadamard;
  if (name == "controlled_xz") return NamedCoin::controlled_xz;
  if (name == "controlled_hadamard_23") return NamedCoin::controlled_hadamard_23;
  if (name == "controlled_hadamard_24") return NamedCoin::controlled_hadamard_24;
  if (name == "nonlinear_cz_diagonal") return NamedCoin::nonlinear_cz_diagonal;
  throw std::domain_error("unknown coin name '" + std::string(name) + "'");
}

const char* to_string(NamedCoin name) {
  switch (name) {
    case NamedCoin::hadamard: return "hadamard";
    case NamedCoin::controlled_xz: return "controlled_xz";
    case NamedCoin::controlled_hadamard_23: return "controlled_hadamard_23";
    case NamedCoin::controlled_hadamard_24: return "controlled_hadamard_24";
    case NamedCoin::nonlinear_cz_diagonal: return "nonlinear_cz_diagonal";
  }
  throw std::domain_error("invalid NamedCoin value");
}

namespace {

CoinOperator assembled_coin(const HwpAngleSet& a, const CoinOperator* eom) {
  // Hardware order per round trip: EOM, HWP1, HWP2 (stage C2), then
  // HWP4, HWP3 (stage C1). As a product: C1 * C2, rightmost first.
  std::vector<CoinOperator> ops;
  ops.push_back(hwp_matrix(3, a.theta3));
  ops.push_back(hwp_matrix(4, a.theta4));
  ops.push_back(hwp_matrix(2, a.theta2));
  ops.push_back(hwp_matrix(1, a.theta1));
  if (eom) ops.push_back(*eom);
  return compose(std::span<const CoinOperator>(ops));
}

CoinOperator stage2_coin(const HwpAngleSet& a, const CoinOperator* eom) {
  std::vector<CoinOperator> ops;
  ops.push_back(hwp_matrix(2, a.theta2));
  ops.push_back(hwp_matrix(1, a.theta1));
  if (eom) ops.push_back(*eom);
  return compose(std::span<const CoinOperator>(ops));
}

bool on_diagonal(int x1, int x2) { return x1 == x2; }

CoinSchedule build_schedule(const HwpAngleSet& angles, const EomRule& eom,
                            bool with_staged) {
  std::optional<CoinOperator> eom_op;
  if (eom.scope != EomRule::Scope::none) {
    eom_op = eom_matrix(eom.phase, eom.crosstalk);
  }

  CoinOperator plain = assembled_coin(angles, nullptr);
  std::vector<ScheduleOverride> overrides;
  CoinOperator default_op = plain;
  if (eom.scope == EomRule::Scope::everywhere) {
    default_op = assembled_coin(angles, &*eom_op);
  } else if (eom.scope == EomRule::Scope::diagonal) {
    overrides.push_back({on_diagonal, nullptr, assembled_coin(angles, &*eom_op)});
  }

  std::optional<CoinSchedule::Staged> staged;
  if (with_staged) {
    CoinSchedule::Staged st{
        compose({hwp_matrix(3, angles.theta3), hwp_matrix(4, angles.theta4)}),
        stage2_coin(angles, nullptr),
        {}};
    if (eom.scope == EomRule::Scope::everywhere) {
      st.stage2_default = stage2_coin(angles, &*eom_op);
    } else if (eom.scope == EomRule::Scope::diagonal) {
      st.stage2_overrides.push_back(
          {on_diagonal, nullptr, stage2_coin(angles, &*eom_op)});
    }
    staged = std::move(st);
  }

  return CoinSchedule(std::move(default_op), std::move(overrides),
                      std::move(staged));
}

}  // namespace

CoinSchedule angle_schedule(const HwpAngleSet& angles, const EomRule& eom) {
  return build_schedule(angles, eom, /*with_staged=*/false);
}

CoinSchedule staged_schedule(const HwpAngleSet& angles, const EomRule& eom) {
  return build_schedule(angles, eom, /*with_staged=*/true);
}

CoinSchedule named_coin(NamedCoin name) {
  const double q = kPi / 8.0;
  switch (name) {
    case NamedCoin::hadamard: {
      // The ideal product coin. The plate product at theta=pi/8 equals it
      // only up to static diagonal phases, which would leak into
      // entanglement measures, so the named coin is the exact H (x) H.
      return CoinSchedule(
          CoinOperator(kron2(hadamard2(), hadamard2()), "hadamard"));
    }
    case NamedCoin::controlled_xz:
      return angle_schedule({-q, q, q, q});
    case NamedCoin::controlled_hadamard_23:
      return angle_schedule({q, 0.0, 0.0, q});
    case NamedCoin::controlled_hadamard_24:
      return angle_schedule({q, 0.0, q, 0.0});
    case NamedCoin::nonlinear_cz_diagonal: {
      CoinOperator hh(kron2(hadamard2(), hadamard2()), "hadamard");
      CoinOperator meet = compose({hh, eom_matrix(kPi, 0.0)});
      std::vector<ScheduleOverride> overrides;
      overrides.push_back({on_diagonal, nullptr, std::move(meet)});
      return CoinSchedule(std::move(hh), std::move(overrides));
    }
  }
  throw std::domain_error("invalid NamedCoin value");
}

}  // namespace latticewalk
