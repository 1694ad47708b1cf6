// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria.  Tolerances are pinned in code next to each check.
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cvxpolar/ctransform.hpp"
#include "cvxpolar/divergences.hpp"
#include "cvxpolar/legendre.hpp"
#include "cvxpolar/polarity.hpp"
#include "cvxpolar/transforms.hpp"
#include "test_support.hpp"

using namespace cvxpolar;
namespace ts = testsupport;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// 1. Self-dual paraboloid: brute-force conjugation on a 10,001-point grid
// over [-5, 5] reproduces Q at interior dual nodes to 1e-6; the smooth
// solver reproduces it to 1e-10.
Outcome criterion_self_dual() {
  const SampledFunction q = ts::sample_q_1d(-5.0, 5.0, 10001, false);
  const Eigen::VectorXd eta = auto_eta_grid_1d(q);
  const ConjugateResult conj = conjugate_bruteforce(q, eta);
  double worst_brute = 0.0;
  for (Eigen::Index j = 1; j + 1 < eta.size(); ++j)
    worst_brute = std::max(worst_brute,
                           std::abs(conj.dual.values[j] - 0.5 * eta[j] * eta[j]));

  double worst_smooth = 0.0;
  for (double e = -4.5; e <= 4.5; e += 0.375) {
    const SmoothConjugate sc =
        conjugate_smooth<double>(ts::q_value, ts::q_grad, Eigen::VectorXd::Constant(1, e),
                                 Eigen::VectorXd::Zero(1).eval());
    worst_smooth = std::max(worst_smooth, std::abs(sc.value - 0.5 * e * e));
  }
  const bool pass = worst_brute <= 1e-6 && worst_smooth <= 1e-10;
  return {pass, "brute " + fmt(worst_brute) + " (tol 1e-6), smooth " + fmt(worst_smooth) +
                    " (tol 1e-10)"};
}

// 2. F(theta) = theta^2 + theta + 3: the smooth conjugate at integer eta in
// [-2, 3] matches the brute-force oracle and (eta^2 - 2 eta - 11)/4 to 1e-8.
Outcome criterion_fig2_conjugate() {
  const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(160001, -4.0, 4.0);
  Eigen::VectorXd values(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    values[i] = theta[i] * theta[i] + theta[i] + 3.0;
  const SampledFunction f = make_sampled_function_1d<double>(theta, values);

  double worst_oracle = 0.0, worst_closed = 0.0;
  for (int e = -2; e <= 3; ++e) {
    const SmoothConjugate sc = conjugate_smooth<double>(
        ts::fig2_value, ts::fig2_grad, Eigen::VectorXd::Constant(1, double(e)),
        Eigen::VectorXd::Zero(1).eval());
    const auto [brute, arg] =
        bruteforce_conjugate_values(f, Eigen::MatrixXd(Eigen::MatrixXd::Constant(1, 1, double(e))));
    worst_oracle = std::max(worst_oracle, std::abs(sc.value - brute[0]));
    worst_closed = std::max(worst_closed, std::abs(sc.value - ts::fig2_conjugate(double(e))));
  }
  const bool pass = worst_oracle <= 1e-8 && worst_closed <= 1e-8;
  return {pass, "vs oracle " + fmt(worst_oracle) + ", vs closed form " + fmt(worst_closed) +
                    " (tol 1e-8)"};
}

// 3. The envelope of the Legendre polar of graph F is graph F*, to 1e-9,
// for Q and the fig2 function on 200 analytic samples.
Outcome criterion_bridge() {
  const Eigen::MatrixXd theta = Eigen::VectorXd::LinSpaced(200, -2.0, 2.0);
  const double dq = verify_legendre_polarity<double>(ts::q_value, ts::q_grad, theta);
  const double df = verify_legendre_polarity<double>(ts::fig2_value, ts::fig2_grad, theta);
  const bool pass = dq <= 1e-9 && df <= 1e-9;
  return {pass, "Q " + fmt(dq) + ", fig2 " + fmt(df) + " (tol 1e-9)"};
}

// 4. Polarity involution round trip on epi Q and the unit disk, under the
// Legendre matrix and 20 seeded random well-conditioned symmetric matrices.
// Sampling is dense enough that the fourth-order tangent stencils resolve
// the near-cusp regions random duals develop.
Outcome criterion_involution() {
  const ConvexBody parab = ts::parabola_body(-2.0, 2.0, 3201);
  const ConvexBody disk = ts::disk_body(8001);
  double worst = 0.0;
  std::mt19937 rng(20240406);
  for (int k = 0; k <= 20; ++k) {
    const CostMatrix c = k == 0 ? CostMatrix::legendre(1)
                                : CostMatrix(ts::random_symmetric_invertible(rng, 3, 1e3));
    worst = std::max(worst, involution_check(c, parab));
    worst = std::max(worst, involution_check(c, disk));
  }
  return {worst <= 1e-5, "max discrepancy " + fmt(worst) + " (tol 1e-5)"};
}

// 5. Decompositions for 100 seeded random invertible matrices with condition
// number <= 1e6: identity residuals <= 1e-12, relation residuals <= 1e-10,
// and both theorem verifiers on epi Q <= 1e-8.
Outcome criterion_decompositions() {
  const ConvexBody body = ts::parabola_body(-2.0, 2.0, 200);
  std::mt19937 rng(52);
  double worst_identity = 0.0, worst_relate = 0.0, worst_thm = 0.0;
  for (int k = 0; k < 100; ++k) {
    const CostMatrix c(ts::random_invertible(rng, 3, 1e6));
    const AffineDeformation mt = decompose_T(c);
    const AffineDeformation ms = decompose_S(c);
    const DecompositionResiduals<double> res = decomposition_residuals(c, mt, ms);
    worst_identity = std::max({worst_identity, res.identity_T, res.identity_S});
    const auto [rt, rs] = relate_T_S(mt, ms);
    worst_relate = std::max({worst_relate, rt, rs});
    worst_thm = std::max({worst_thm, verify_thm_T(c, body), verify_thm_S(c, body)});
  }
  const bool pass = worst_identity <= 1e-12 && worst_relate <= 1e-10 && worst_thm <= 1e-8;
  return {pass, "identities " + fmt(worst_identity) + " (tol 1e-12), relation " +
                    fmt(worst_relate) + " (tol 1e-10), theorems " + fmt(worst_thm) +
                    " (tol 1e-8)"};
}

// 6. The parabola-to-circle polarity maps 400 samples of the boundary of
// epi Q onto the unit circle: max ||x|^2 + y^2 - lambda^2| <= 1e-9.
Outcome criterion_parabola_to_circle() {
  const CostMatrix c(ts::parabola_to_circle_matrix());
  const ConvexBody body = ts::parabola_body(-4.0, 4.0, 400);
  const EnvelopeResult env = polar_boundary_envelope(c, body);
  double worst = 0.0;
  int used = 0;
  for (Eigen::Index i = 0; i < env.size(); ++i) {
    if (!env.finite(i)) continue;
    const Eigen::VectorXd b = env.point(i).coords();
    worst = std::max(worst, std::abs(b[0] * b[0] + b[1] * b[1] - b[2] * b[2]));
    ++used;
  }
  const bool pass = worst <= 1e-9 && used == 400;
  return {pass, "max residual " + fmt(worst) + " over " + std::to_string(used) +
                    " image points (tol 1e-9)"};
}

// 7. Over 100x100 grids of (theta, eta) pairs for Q and the fig2 function,
// the polar divergence equals F(theta)+F*(eta)-theta*eta to 1e-10 and every
// value is >= -1e-9.
Outcome criterion_divergence_consistency() {
  double worst = 0.0, most_negative = 0.0;
  {
    const Eigen::VectorXd th = Eigen::VectorXd::LinSpaced(100, -3.0, 3.0);
    const Eigen::VectorXd et = Eigen::VectorXd::LinSpaced(100, -3.0, 3.0);
    for (double a : th)
      for (double b : et) {
        const double direct = 0.5 * a * a + 0.5 * b * b - a * b;
        const double polar = polar_fenchel_young(lift(Eigen::VectorXd::Constant(1, a), 0.5 * a * a),
                                                 lift(Eigen::VectorXd::Constant(1, b), 0.5 * b * b));
        worst = std::max(worst, std::abs(polar - direct));
        most_negative = std::min(most_negative, polar);
      }
  }
  {
    const Eigen::VectorXd th = Eigen::VectorXd::LinSpaced(100, -2.0, 2.0);
    const Eigen::VectorXd et = Eigen::VectorXd::LinSpaced(100, -3.0, 5.0);
    for (double a : th)
      for (double b : et) {
        const double fa = a * a + a + 3.0;
        const double fb = ts::fig2_conjugate(b);
        const double direct = fa + fb - a * b;
        const double polar = polar_fenchel_young(lift(Eigen::VectorXd::Constant(1, a), fa),
                                                 lift(Eigen::VectorXd::Constant(1, b), fb));
        worst = std::max(worst, std::abs(polar - direct));
        most_negative = std::min(most_negative, polar);
      }
  }
  const bool pass = worst <= 1e-10 && most_negative >= -1e-9;
  return {pass, "max |polar - direct| " + fmt(worst) + " (tol 1e-10), min value " +
                    fmt(most_negative) + " (floor -1e-9)"};
}

// 8. Plain and total swap identities over 1000 seeded random normalized
// pairs, to 1e-12 relative.
Outcome criterion_swaps() {
  std::mt19937 rng(314159);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Index n = 1 + k % 3;
    Eigen::VectorXd va(n + 2), vb(n + 2);
    for (Eigen::Index i = 0; i < n + 1; ++i) {
      va[i] = u(rng);
      vb[i] = u(rng);
    }
    va[n + 1] = 1.0;
    vb[n + 1] = 1.0;
    const SwapCheck s = swap_check(ProjectivePoint(va), ProjectivePoint(vb));
    worst = std::max(worst,
                     std::abs(s.plain_lhs - s.plain_rhs) / std::max(1.0, std::abs(s.plain_lhs)));
    worst = std::max(worst,
                     std::abs(s.total_lhs - s.total_rhs) / std::max(1.0, std::abs(s.total_lhs)));
  }
  return {worst <= 1e-12, "max relative mismatch " + fmt(worst) + " (tol 1e-12)"};
}

// 9. Oracle equivalence: the linear-time transform matches brute force on
// 200 randomized convex instances, and the c-transform with the plain
// coupling equals minus the brute-force conjugate, both to 1e-12.
Outcome criterion_oracle_equivalence() {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double worst_fast = 0.0, worst_ct = 0.0;
  QuadraticCost coupling;
  coupling.Cn = Eigen::MatrixXd::Zero(1, 1);
  coupling.e = -1.0;
  for (int k = 0; k < 200; ++k) {
    const SampledFunction f = ts::random_convex_1d(rng);
    Eigen::VectorXd eta(33);
    for (Eigen::Index j = 0; j < eta.size(); ++j) eta[j] = u(rng);
    std::sort(eta.data(), eta.data() + eta.size());
    Eigen::MatrixXd etam(eta.size(), 1);
    etam.col(0) = eta;

    const ConjugateResult fast = conjugate_fast_1d(f, eta);
    const auto [brute, arg] = bruteforce_conjugate_values(f, etam);
    const double scale = std::max(1.0, brute.cwiseAbs().maxCoeff());
    worst_fast =
        std::max(worst_fast, (fast.dual.values - brute).cwiseAbs().maxCoeff() / scale);

    const CTransformResult ct = c_transform(f, coupling, etam);
    worst_ct = std::max(worst_ct, (ct.values.values + brute).cwiseAbs().maxCoeff() / scale);
  }
  const bool pass = worst_fast <= 1e-12 && worst_ct <= 1e-12;
  return {pass, "fast vs brute " + fmt(worst_fast) + ", c-transform vs -conjugate " +
                    fmt(worst_ct) + " (tol 1e-12)"};
}

// 10. Order reversal on 50 random convex pairs with F1 <= F2:
// conj F2 <= conj F1 + 1e-9 pointwise.
Outcome criterion_order_reversal() {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> bump(0.0, 3.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 50; ++k) {
    const SampledFunction f1 = ts::random_convex_1d(rng);
    Eigen::VectorXd raised = f1.values;
    for (Eigen::Index i = 0; i < raised.size(); ++i) raised[i] += bump(rng);
    const SampledFunction f2 = make_sampled_function<double>(f1.points, raised);
    Eigen::MatrixXd eta(f1.size(), 1);
    eta.col(0) = auto_eta_grid_1d(f1);
    const auto [v1, a1] = bruteforce_conjugate_values(f1, eta);
    const auto [v2, a2] = bruteforce_conjugate_values(f2, eta);
    worst = std::max(worst, (v2 - v1).maxCoeff());
  }
  return {worst <= 1e-9, "max (conj F2 - conj F1) " + fmt(worst) + " (tol 1e-9)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"self-dual paraboloid conjugation", criterion_self_dual},
      {"fig2 conjugate vs oracle and closed form", criterion_fig2_conjugate},
      {"Legendre polarity bridge", criterion_bridge},
      {"polarity involution round trip", criterion_involution},
      {"T/S decompositions and theorem verifiers", criterion_decompositions},
      {"parabola-to-circle image", criterion_parabola_to_circle},
      {"polar divergence consistency and nonnegativity", criterion_divergence_consistency},
      {"plain and total swap identities", criterion_swaps},
      {"oracle equivalence (fast transform, c-transform)", criterion_oracle_equivalence},
      {"order reversal of conjugation", criterion_order_reversal},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("%s  criterion %zu: %s (%s)\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), out.detail.c_str());
  }
  if (failures != 0) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures;
}
