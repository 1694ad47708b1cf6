#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cvxpolar/divergences.hpp"
#include "test_support.hpp"

using namespace cvxpolar;
namespace ts = testsupport;

namespace {

ProjectivePoint pt3(double a, double b, double c) {
  return ProjectivePoint(Eigen::Vector3d(a, b, c));
}

Eigen::VectorXd scalar_vec(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("Fenchel-Young gap for the paraboloid") {
  CHECK(fenchel_young(0.5, 0.5, scalar_vec(1.0), scalar_vec(1.0)) == 0.0);
  CHECK(fenchel_young(0.5, 0.0, scalar_vec(1.0), scalar_vec(0.0)) == 0.5);
  CHECK(fenchel_young(0.0, 0.5, scalar_vec(0.0), scalar_vec(1.0)) == 0.5);
}

TEST_CASE("Bregman divergence closed forms") {
  // B_Q(theta1 : theta2) = |theta1 - theta2|^2 / 2
  CHECK(bregman<double>(ts::q_value, ts::q_grad, scalar_vec(2.0), scalar_vec(0.0)) == 2.0);
  CHECK(bregman<double>(ts::q_value, ts::q_grad, scalar_vec(1.3), scalar_vec(1.3)) == 0.0);
  // F = theta^2 + theta + 3: B_F(1 : 0) = 5 - 3 - 1 = 1
  CHECK(bregman<double>(ts::fig2_value, ts::fig2_grad, scalar_vec(1.0), scalar_vec(0.0)) == 1.0);
}

TEST_CASE("Bregman on sampled data matches the callable") {
  const SampledFunction q = ts::sample_q_1d(-3.0, 3.0, 121);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd t1 = scalar_vec(u(rng));
    const Eigen::VectorXd t2 = scalar_vec(u(rng));
    const double sampled = bregman(q, t1, t2);
    const double exact = bregman<double>(ts::q_value, ts::q_grad, t1, t2);
    CHECK(std::abs(sampled - exact) <= 1e-3);  // piecewise-linear interpolation error
  }
  // node queries with stored gradients are exact
  CHECK(bregman(q, scalar_vec(2.0), scalar_vec(0.0)) == 2.0);

  Eigen::MatrixXd pts(2, 2);
  pts << 0, 0, 1, 1;
  Eigen::VectorXd vals(2);
  vals << 0, 1;
  CHECK_THROWS_AS(
      bregman(make_sampled_function<double>(pts, vals), Eigen::VectorXd::Zero(2).eval(),
              Eigen::VectorXd::Zero(2).eval()),
      MissingGradientsError);
}

TEST_CASE("polar Fenchel-Young divergence") {
  CHECK(polar_fenchel_young(pt3(1, 0.5, 1), pt3(1, 0.5, 1)) == 0.0);
  CHECK(polar_fenchel_young(pt3(1, 0.5, 1), pt3(0, 0, 1)) == 0.5);

  // representation invariance through internal normalization
  CHECK(polar_fenchel_young(pt3(2, 1, 2), pt3(0, 0, 3)) == 0.5);
  CHECK(polar_fenchel_young(pt3(-1, -0.5, -1), pt3(-1, -0.5, -1)) == 0.0);

  CHECK_THROWS_AS(polar_fenchel_young(pt3(1, 0.5, 0), pt3(0, 0, 1)), IdealPointError);
  CHECK_THROWS_AS(
      polar_fenchel_young(pt3(1, 0.5, 1), ProjectivePoint(Eigen::Vector4d(0, 0, 0, 1))),
      DimensionMismatchError);
}

TEST_CASE("polar divergence recovers the ordinary Fenchel-Young gap on graphs") {
  // grid pairs on graph Q and graph Q*
  const Eigen::VectorXd thetas = Eigen::VectorXd::LinSpaced(40, -3.0, 3.0);
  const Eigen::VectorXd etas = Eigen::VectorXd::LinSpaced(40, -3.0, 3.0);
  for (double th : thetas) {
    for (double et : etas) {
      const ProjectivePoint a = lift(scalar_vec(th), 0.5 * th * th);
      const ProjectivePoint b = lift(scalar_vec(et), 0.5 * et * et);
      const double direct = 0.5 * th * th + 0.5 * et * et - th * et;
      CHECK(std::abs(polar_fenchel_young(a, b) - direct) <= 1e-10);
      CHECK(polar_fenchel_young(a, b) >= -1e-9);
    }
  }
}

TEST_CASE("zero set of the polar divergence is the polar hyperplane") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double theta = u(rng), ya = u(rng), eta = u(rng);
    const ProjectivePoint a = pt3(theta, ya, 1.0);
    // b on H_[a]: y_b = theta * eta - y_a makes the pairing vanish
    const ProjectivePoint b = pt3(eta, theta * eta - ya, 1.0);
    const double scale = 1.0 + std::abs(theta * eta) + std::abs(ya);
    CHECK(std::abs(polar_fenchel_young(a, b)) <= 1e-12 * scale);
    // and symmetrically a lies on the polar of b
    CHECK(std::abs(polar_fenchel_young(b, a)) <= 1e-12 * scale);
    // off the hyperplane the divergence is bounded away from zero
    const ProjectivePoint off = pt3(eta, theta * eta - ya + 0.5, 1.0);
    CHECK(polar_fenchel_young(a, off) == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("optimality: the divergence vanishes exactly at eta = grad F(theta)") {
  const Eigen::VectorXd thetas = Eigen::VectorXd::LinSpaced(21, -2.0, 2.0);
  for (double th : thetas) {
    const double eta = 2.0 * th + 1.0;  // grad of theta^2 + theta + 3
    const ProjectivePoint a = lift(scalar_vec(th), th * th + th + 3.0);
    const ProjectivePoint b = lift(scalar_vec(eta), ts::fig2_conjugate(eta));
    CHECK(std::abs(polar_fenchel_young(a, b)) <= 1e-9 * (1.0 + eta * eta));
    const ProjectivePoint b_off = lift(scalar_vec(eta + 0.3), ts::fig2_conjugate(eta + 0.3));
    CHECK(polar_fenchel_young(a, b_off) >= 0.3 * 0.3 / 4.0 - 1e-9);
  }
}

TEST_CASE("total Bregman divergence variants") {
  // zero gradient: both variants reduce to the plain divergence
  CHECK(total_bregman<double>(ts::q_value, ts::q_grad, scalar_vec(2.0), scalar_vec(0.0),
                              TotalVariant::Sqrt) == 2.0);
  CHECK(total_bregman<double>(ts::q_value, ts::q_grad, scalar_vec(2.0), scalar_vec(0.0),
                              TotalVariant::PaperTb) == 2.0);
  // Q with theta1=2, theta2=1: B = 1/2, grad = 1
  const double sq = total_bregman<double>(ts::q_value, ts::q_grad, scalar_vec(2.0),
                                          scalar_vec(1.0), TotalVariant::Sqrt);
  CHECK(sq == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(doctest::Approx(0.3536).epsilon(5e-4) == sq);
  const double pa = total_bregman<double>(ts::q_value, ts::q_grad, scalar_vec(2.0),
                                          scalar_vec(1.0), TotalVariant::PaperTb);
  CHECK(pa == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("polar total Fenchel-Young divergence and conformal factors") {
  CHECK(polar_total_fenchel_young(pt3(1, 0.5, 1), pt3(0, 0, 1)) == 0.5);  // kappa(b) = 1
  CHECK(polar_total_fenchel_young(pt3(1, 0.5, 1), pt3(1, 0.5, 1)) == 0.0);
  CHECK(kappa_point(pt3(1, 0.5, 1)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  // optimal pair for F = theta^2 + theta + 3 at theta = 0
  const ProjectivePoint a = pt3(0, 3, 1);
  const ProjectivePoint b = pt3(1, -3, 1);
  CHECK(std::abs(polar_fenchel_young(a, b)) <= 1e-15);
  CHECK(std::abs(polar_total_fenchel_young(a, b)) <= 1e-15);

  const ConformalFactors cf = conformal_factors(a, b);
  CHECK(cf.kappa_b == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cf.kappa_star_a == 1.0);
  CHECK(cf.kappa_b >= 1.0);
  CHECK(cf.kappa_star_a >= 1.0);

  CHECK_THROWS_AS(polar_total_fenchel_young(a, pt3(1, 1, 0)), IdealPointError);
}

TEST_CASE("swap identities hold to rounding") {
  {
    const SwapCheck s = swap_check(pt3(1, 0.5, 1), pt3(0, 0, 1));
    CHECK(s.plain_lhs == 0.5);
    CHECK(s.plain_rhs == 0.5);
  }
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 1 + trial % 3;
    Eigen::VectorXd va(n + 2), vb(n + 2);
    for (Eigen::Index i = 0; i < n + 1; ++i) {
      va[i] = u(rng);
      vb[i] = u(rng);
    }
    va[n + 1] = 1.0;
    vb[n + 1] = 1.0;
    const ProjectivePoint a{va}, b{vb};
    const SwapCheck s = swap_check(a, b);
    CHECK(std::abs(s.plain_lhs - s.plain_rhs) <= 1e-12 * std::max(1.0, std::abs(s.plain_lhs)));
    CHECK(std::abs(s.total_lhs - s.total_rhs) <= 1e-12 * std::max(1.0, std::abs(s.total_lhs)));
    // a == b collapses both sides trivially
    const SwapCheck same = swap_check(a, a);
    CHECK(same.plain_lhs == same.plain_rhs);
  }
}

TEST_CASE("Bregman equals the Fenchel-Young gap at the dual parameter") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd t1 = scalar_vec(u(rng));
    const Eigen::VectorXd t2 = scalar_vec(u(rng));
    const Eigen::VectorXd eta2 = ts::fig2_grad(t2);
    const SmoothConjugate sc =
        conjugate_smooth<double>(ts::fig2_value, ts::fig2_grad, eta2, t1);
    const double fy = fenchel_young(ts::fig2_value(t1), sc.value, t1, eta2);
    const double br = bregman<double>(ts::fig2_value, ts::fig2_grad, t1, t2);
    CHECK(std::abs(fy - br) <= 1e-9);
  }
}

TEST_CASE("divergence reports") {
  // pure point pair: fy coincides with the polar divergence, no Bregman
  {
    const DivergenceReport r = divergence_report(pt3(1, 0.5, 1), pt3(0, 0, 1));
    CHECK(r.fy == 0.5);
    CHECK(r.polar_fy == 0.5);
    CHECK_FALSE(r.bregman.has_value());
    CHECK(r.kappa_b == 1.0);
    CHECK(r.kappa_star_a == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(r.total_sqrt == 0.5);
    CHECK(r.total_paper == 0.5);
  }
  // function-backed report fills every field consistently
  {
    const DivergenceReport r =
        divergence_report<double>(ts::q_value, ts::q_grad, scalar_vec(2.0), scalar_vec(1.0));
    CHECK(r.bregman.has_value());
    CHECK(*r.bregman == 0.5);
    CHECK(std::abs(r.fy - 0.5) <= 1e-12);
    CHECK(std::abs(r.polar_fy - 0.5) <= 1e-12);
    CHECK(r.kappa_b == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(r.total_sqrt == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.total_paper == doctest::Approx(0.25).epsilon(1e-12));
  }
  // sampled-function report agrees with the callable one at grid nodes
  {
    const SampledFunction q = ts::sample_q_1d(-3.0, 3.0, 61);
    const DivergenceReport r = divergence_report(q, scalar_vec(2.0), scalar_vec(1.0));
    CHECK(*r.bregman == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.polar_fy == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("dual point pairs require finite points") {
  const DualPointPair pair = make_dual_point_pair(pt3(1, 0.5, 1), pt3(0, 0, 1));
  const DivergenceReport r = divergence_report(pair);
  CHECK(r.polar_fy == 0.5);
  CHECK_THROWS_AS(make_dual_point_pair(pt3(1, 0.5, 0), pt3(0, 0, 1)), IdealPointError);
  CHECK_THROWS_AS(
      make_dual_point_pair(pt3(1, 0.5, 1), ProjectivePoint(Eigen::Vector4d(0, 0, 0, 1))),
      DimensionMismatchError);
}
