#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "latticewalk/coin.hpp"
#include "latticewalk/walk.hpp"

using namespace latticewalk;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

double max_abs_diff(const Mat4& a, const Mat4& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

Mat4 ideal_hadamard4() { return kron2(hadamard2(), hadamard2()); }

// The product of the four plates in hardware order at angle theta=pi/8.
Mat4 assembled_hadamard4() {
  const double q = kPi / 8.0;
  return compose({hwp_matrix(3, q), hwp_matrix(4, q), hwp_matrix(2, q),
                  hwp_matrix(1, q)})
      .matrix();
}

std::mt19937 rng(20240811);

double random_angle() {
  return std::uniform_real_distribution<double>(-kPi, kPi)(rng);
}

Mat2 random_u2() {
  std::normal_distribution<double> normal;
  Mat2 g;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) g(i, j) = Complex(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<Mat2> qr(g);
  Mat2 q = qr.householderQ();
  return q;
}

}  // namespace

TEST_CASE("coin index follows the fixed basis order") {
  CHECK(coin_index(-1, -1) == 0);
  CHECK(coin_index(-1, +1) == 1);
  CHECK(coin_index(+1, +1) == 2);
  CHECK(coin_index(+1, -1) == 3);
  CHECK_THROWS_AS(coin_index(0, 0), std::domain_error);
  CHECK_THROWS_AS(coin_index(-1, 2), std::domain_error);
}

TEST_CASE("kron reindexing round-trips") {
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    Mat4 m;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) m(i, j) = Complex(normal(rng), normal(rng));
    }
    CHECK(max_abs_diff(coin_from_kron(kron_from_coin(m)), m) == 0.0);
  }
}

TEST_CASE("wave plate matrices match the printed forms") {
  SUBCASE("slot 1 at zero") {
    Mat4 expected = Mat4::Identity();
    expected(1, 1) = -1.0;
    CHECK(max_abs_diff(hwp_matrix(1, 0.0).matrix(), expected) < 1e-15);
  }
  SUBCASE("slot 1 at pi/8 mixes the first two states") {
    const Mat4 m = hwp_matrix(1, kPi / 8).matrix();
    CHECK(std::abs(m(0, 0) - kInvSqrt2) < 1e-15);
    CHECK(std::abs(m(0, 1) - kInvSqrt2) < 1e-15);
    CHECK(std::abs(m(1, 0) - kInvSqrt2) < 1e-15);
    CHECK(std::abs(m(1, 1) + kInvSqrt2) < 1e-15);
    CHECK(std::abs(m(2, 2) - 1.0) < 1e-15);
    CHECK(std::abs(m(3, 3) - 1.0) < 1e-15);
  }
  SUBCASE("slot 3 at pi/8 mixes the outer states") {
    const Mat4 m = hwp_matrix(3, kPi / 8).matrix();
    CHECK(std::abs(m(0, 0) - kInvSqrt2) < 1e-15);
    CHECK(std::abs(m(0, 3) - kInvSqrt2) < 1e-15);
    CHECK(std::abs(m(3, 0) - kInvSqrt2) < 1e-15);
    CHECK(std::abs(m(3, 3) + kInvSqrt2) < 1e-15);
    CHECK(std::abs(m(1, 1) - 1.0) < 1e-15);
    CHECK(std::abs(m(2, 2) - 1.0) < 1e-15);
  }
  SUBCASE("slot 4 carries -cos on index 2 and +cos on index 3") {
    const Mat4 m = hwp_matrix(4, 0.3).matrix();
    CHECK(std::abs(m(1, 1) + std::cos(0.6)) < 1e-15);
    CHECK(std::abs(m(2, 2) - std::cos(0.6)) < 1e-15);
  }
  SUBCASE("invalid slot") {
    CHECK_THROWS_AS(hwp_matrix(0, 0.1), std::domain_error);
    CHECK_THROWS_AS(hwp_matrix(5, 0.1), std::domain_error);
  }
}

TEST_CASE("wave plates are involutions at any angle") {
  for (int slot = 1; slot <= 4; ++slot) {
    for (int trial = 0; trial < 25; ++trial) {
      const Mat4 m = hwp_matrix(slot, random_angle()).matrix();
      CHECK(max_abs_diff(m * m, Mat4::Identity()) < 1e-14);
    }
  }
}

TEST_CASE("phase modulator matrix") {
  SUBCASE("pi phase is the controlled-Z operation") {
    Mat4 expected = Mat4::Identity();
    expected(0, 0) = -1.0;
    CHECK(max_abs_diff(eom_matrix(kPi, 0.0).matrix(), expected) < 1e-15);
  }
  SUBCASE("zero phase is the identity at any crosstalk") {
    CHECK(max_abs_diff(eom_matrix(0.0, 0.0).matrix(), Mat4::Identity()) == 0.0);
    CHECK(max_abs_diff(eom_matrix(0.0, 1.0 / 3.5).matrix(), Mat4::Identity()) <
          1e-15);
  }
  SUBCASE("crosstalk leaks a fraction of the phase onto index 2") {
    const Mat4 m = eom_matrix(kPi, 1.0 / 3.5).matrix();
    CHECK(std::abs(m(0, 0) - std::polar(1.0, kPi)) < 1e-15);
    CHECK(std::abs(m(1, 1) - std::polar(1.0, kPi / 3.5)) < 1e-15);
    CHECK(std::abs(m(2, 2) - 1.0) == 0.0);
    CHECK(std::abs(m(3, 3) - 1.0) == 0.0);
  }
  SUBCASE("negative crosstalk rejected") {
    CHECK_THROWS_AS(eom_matrix(0.1, -0.5), std::domain_error);
  }
}

TEST_CASE("compose multiplies right to left") {
  const CoinOperator a = hwp_matrix(1, 0.2);
  const CoinOperator b = hwp_matrix(3, 0.7);
  CHECK(max_abs_diff(compose({a}).matrix(), a.matrix()) == 0.0);
  CHECK(max_abs_diff(compose({a, b}).matrix(), a.matrix() * b.matrix()) <
        1e-15);
  CHECK(max_abs_diff(compose({a, b}).matrix(), compose({b, a}).matrix()) >
        0.1);
  CHECK_THROWS_AS(compose(std::span<const CoinOperator>{}), std::domain_error);
}

TEST_CASE("every constructed operator is unitary") {
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<CoinOperator> chain;
    for (int k = 0; k < 4; ++k) {
      const int slot = 1 + static_cast<int>(rng() % 4);
      chain.push_back(hwp_matrix(slot, random_angle()));
    }
    chain.push_back(eom_matrix(random_angle(), 1.0 / 3.5));
    const Mat4 m = compose(std::span<const CoinOperator>(chain)).matrix();
    CHECK(max_abs_diff(m * m.adjoint(), Mat4::Identity()) < kUnitaryTol);
  }
}

TEST_CASE("plate product at pi/8 equals H(x)H up to static diagonal phases") {
  const Mat4 assembled = assembled_hadamard4();
  const Mat4 ideal = ideal_hadamard4();

  // Moduli agree entrywise.
  CHECK((assembled.cwiseAbs() - ideal.cwiseAbs()).maxCoeff() < 1e-12);

  // The exact relation: assembled = D1 * (H(x)H) * D2 with the fixed sign
  // gauges below. These phases are invisible in every position
  // distribution but the raw matrices differ, so plain equality fails.
  Mat4 d1 = Mat4::Identity();
  d1(3, 3) = -1.0;
  Mat4 d2 = Mat4::Identity();
  d2(1, 1) = -1.0;
  CHECK(max_abs_diff(assembled, d1 * ideal * d2) < 1e-12);
  CHECK(max_abs_diff(assembled, ideal) > 0.5);

  // Walk distributions cannot tell the two coins apart.
  const CoinSchedule assembled_schedule(
      CoinOperator(assembled, "assembled hadamard"));
  const CoinSchedule ideal_schedule = named_coin(NamedCoin::hadamard);
  for (int n = 1; n <= 4; ++n) {
    const auto pa = evolve(WalkState::localized(0, 0, -1, -1),
                           assembled_schedule, n)
                        .position_distribution();
    const auto pi_ = evolve(WalkState::localized(0, 0, -1, -1),
                            ideal_schedule, n)
                         .position_distribution();
    double worst = 0.0;
    for (const auto& [pos, w] : pa.positions()) {
      worst = std::max(worst, std::abs(w - pi_.at(pos.first, pos.second)));
    }
    for (const auto& [pos, w] : pi_.positions()) {
      worst = std::max(worst, std::abs(w - pa.at(pos.first, pos.second)));
    }
    CAPTURE(n);
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("named hadamard coin is the exact Kronecker square") {
  const CoinSchedule schedule = named_coin(NamedCoin::hadamard);
  CHECK(max_abs_diff(schedule.default_op().matrix(), ideal_hadamard4()) <
        1e-12);
  CHECK(schedule.separable());

  // Its column on the localized input, in coin order.
  const Vec4 column = schedule.default_op().matrix().col(0);
  CHECK(std::abs(column(0) - Complex(0.5)) < 1e-15);
  CHECK(std::abs(column(1) - Complex(-0.5)) < 1e-15);
  CHECK(std::abs(column(2) - Complex(0.5)) < 1e-15);
  CHECK(std::abs(column(3) - Complex(-0.5)) < 1e-15);
}

TEST_CASE("controlled-XZ coin acts as XZ on the c1=-1 sector") {
  const CoinSchedule cxz = named_coin(NamedCoin::controlled_xz);
  CHECK_FALSE(cxz.separable());

  // Relative to the assembled plain-Hadamard plates, the only change is a
  // phase-scaled XZ on coin states 1,2 (the c1=-1 sector):
  //   XZ: |+1> -> |-1>, |-1> -> -|+1>, basis (-1,+1).
  const Mat4 relation =
      assembled_hadamard4().adjoint() * cxz.default_op().matrix();
  const Complex lambda = relation(0, 1);
  CHECK(std::abs(std::abs(lambda) - 1.0) < 1e-12);
  Mat4 expected = Mat4::Zero();
  expected(0, 1) = lambda;
  expected(1, 0) = -lambda;
  expected(2, 2) = 1.0;
  expected(3, 3) = 1.0;
  CHECK(max_abs_diff(relation, expected) < 1e-12);
}

TEST_CASE("controlled-Hadamard settings zero the named plates") {
  const CoinSchedule ch23 = named_coin(NamedCoin::controlled_hadamard_23);
  const CoinSchedule ch24 = named_coin(NamedCoin::controlled_hadamard_24);
  const double q = kPi / 8.0;
  CHECK(max_abs_diff(ch23.default_op().matrix(),
                     compose({hwp_matrix(3, 0.0), hwp_matrix(4, q),
                              hwp_matrix(2, 0.0), hwp_matrix(1, q)})
                         .matrix()) < 1e-15);
  CHECK(max_abs_diff(ch24.default_op().matrix(),
                     compose({hwp_matrix(3, q), hwp_matrix(4, 0.0),
                              hwp_matrix(2, 0.0), hwp_matrix(1, q)})
                         .matrix()) < 1e-15);
  CHECK(max_abs_diff(ch23.default_op().matrix(), ch24.default_op().matrix()) >
        0.1);
}

TEST_CASE("nonlinear coin applies the controlled phase only on the diagonal") {
  const CoinSchedule nl = named_coin(NamedCoin::nonlinear_cz_diagonal);
  Mat4 cz = Mat4::Identity();
  cz(0, 0) = -1.0;
  CHECK(max_abs_diff(nl.coin_at(3, 3, 0).matrix(), ideal_hadamard4() * cz) <
        1e-12);
  CHECK(max_abs_diff(nl.coin_at(3, 1, 0).matrix(), ideal_hadamard4()) < 1e-12);
  CHECK(max_abs_diff(nl.coin_at(-2, -2, 5).matrix(),
                     ideal_hadamard4() * cz) < 1e-12);
  CHECK_FALSE(nl.uniform());
}

TEST_CASE("coin names parse exactly") {
  CHECK(parse_named_coin("hadamard") == NamedCoin::hadamard);
  CHECK(parse_named_coin("controlled_xz") == NamedCoin::controlled_xz);
  CHECK(parse_named_coin("nonlinear_cz_diagonal") ==
        NamedCoin::nonlinear_cz_diagonal);
  CHECK_THROWS_AS(parse_named_coin("grover"), std::domain_error);
  CHECK_THROWS_AS(parse_named_coin(""), std::domain_error);
}

TEST_CASE("staged schedules carry the stage pair") {
  const double q = kPi / 8.0;
  const CoinSchedule staged = staged_schedule(
      {q, q, q, q}, {EomRule::Scope::diagonal, kPi, 0.0});
  REQUIRE(staged.has_staged());
  CHECK(max_abs_diff(staged.stage1().matrix(),
                     compose({hwp_matrix(3, q), hwp_matrix(4, q)}).matrix()) <
        1e-15);
  const Mat4 plain_c2 =
      compose({hwp_matrix(2, q), hwp_matrix(1, q)}).matrix();
  CHECK(max_abs_diff(staged.stage2_at(0, 2, 0).matrix(), plain_c2) < 1e-15);
  const Mat4 diag_c2 =
      (plain_c2 * eom_matrix(kPi, 0.0).matrix()).eval();
  CHECK(max_abs_diff(staged.stage2_at(2, 2, 0).matrix(), diag_c2) < 1e-15);

  const CoinSchedule combined = angle_schedule({q, q, q, q});
  CHECK_FALSE(combined.has_staged());
  CHECK_THROWS_AS(combined.stage1(), std::domain_error);
}

TEST_CASE("separable angle settings are reported separable") {
  // theta1 = theta2 = pi/4 with plates 3 and 4 on axis composes to
  // Z (x) (Z X), a product coin.
  const CoinSchedule schedule = angle_schedule({kPi / 4, kPi / 4, 0.0, 0.0});
  CHECK(schedule.separable());
  CHECK(schedule.default_op().separable());

  Mat2 z = Mat2::Identity();
  z(1, 1) = -1.0;
  Mat2 x = Mat2::Zero();
  x(0, 1) = x(1, 0) = 1.0;
  CHECK(max_abs_diff(schedule.default_op().matrix(), kron2(z, z * x)) < 1e-15);
}

TEST_CASE("separability detection") {
  for (int trial = 0; trial < 15; ++trial) {
    const Mat4 product = kron2(random_u2(), random_u2());
    CHECK(is_separable_coin(product));
  }
  CHECK_FALSE(named_coin(NamedCoin::controlled_xz).default_op().separable());
  CHECK_FALSE(
      named_coin(NamedCoin::nonlinear_cz_diagonal).coin_at(0, 0, 0).separable());
  CHECK(named_coin(NamedCoin::hadamard).default_op().separable());
}

TEST_CASE("non-unitary matrices are rejected at construction") {
  Mat4 bad = Mat4::Identity();
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS(CoinOperator(bad, "bad"), std::domain_error);
}
