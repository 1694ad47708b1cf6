// Fenchel-Young, Bregman, polar Fenchel-Young and total divergence variants
// with their conformal factors and swap identities.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <utility>

#include "cvxpolar/errors.hpp"
#include "cvxpolar/legendre.hpp"
#include "cvxpolar/projective.hpp"

namespace cvxpolar {

/// Fenchel-Young divergence Y_F(theta : eta) = F(theta) + F*(eta) -
/// <theta, eta> from already-evaluated function values.
template <typename Scalar>
Scalar fenchel_young(Scalar f_theta, Scalar fstar_eta, const VectorX<Scalar>& theta,
                     const VectorX<Scalar>& eta) {
  if (theta.size() != eta.size())
    throw DimensionMismatchError("fenchel_young: theta/eta sizes disagree");
  return f_theta + fstar_eta - theta.dot(eta);
}

/// Bregman divergence B_F(theta1 : theta2) = F(theta1) - F(theta2) -
/// <theta1 - theta2, grad F(theta2)>.
template <typename Scalar, typename F, typename G>
Scalar bregman(F&& func, G&& grad, const VectorX<Scalar>& theta1, const VectorX<Scalar>& theta2) {
  if (theta1.size() != theta2.size())
    throw DimensionMismatchError("bregman: theta sizes disagree");
  const VectorX<Scalar> g2 = grad(theta2);
  return static_cast<Scalar>(func(theta1)) - static_cast<Scalar>(func(theta2)) -
         (theta1 - theta2).dot(g2);
}

/// Bregman divergence on sampled data: values interpolated multilinearly,
/// the gradient at theta2 interpolated from stored gradients (1-D grids
/// without gradients fall back to finite differences).
template <typename Scalar>
Scalar bregman(const SampledFunctionT<Scalar>& f, const VectorX<Scalar>& theta1,
               const VectorX<Scalar>& theta2) {
  validate_sampled_function(f);
  SampledFunctionT<Scalar> work = f;
  if (!work.has_gradients()) {
    if (work.dim() == 1 && work.size() >= 3 && !work.has_mask()) {
      work.gradients.resize(work.size(), 1);
      work.gradients.col(0) =
          finite_difference_gradients_1d(VectorX<Scalar>(work.points.col(0)), work.values);
    } else {
      throw MissingGradientsError("bregman on sampled data needs gradients");
    }
  }
  const RectangularGridT<Scalar> grid = detect_rectangular_grid(work.points);
  const Scalar f1 = interpolate_value(work, grid, theta1);
  const Scalar f2 = interpolate_value(work, grid, theta2);
  const VectorX<Scalar> g2 = interpolate_gradient(work, grid, theta2);
  return f1 - f2 - (theta1 - theta2).dot(g2);
}

namespace detail {

template <typename Scalar>
VectorX<Scalar> chart_representative(const ProjectivePointT<Scalar>& p, const char* what) {
  if (p.is_ideal()) throw IdealPointError(what);
  return p.normalized().coords();
}

}  // namespace detail

/// A primal/dual point pair, typically (theta, F(theta), 1) against
/// (eta, F*(eta), 1).  Both points must be finite.
template <typename Scalar>
struct DualPointPairT {
  ProjectivePointT<Scalar> a;
  ProjectivePointT<Scalar> b;
};

using DualPointPair = DualPointPairT<double>;

template <typename Scalar>
DualPointPairT<Scalar> make_dual_point_pair(ProjectivePointT<Scalar> a,
                                            ProjectivePointT<Scalar> b) {
  if (a.is_ideal() || b.is_ideal())
    throw IdealPointError("dual point pair: both points must be finite");
  if (a.size() != b.size())
    throw DimensionMismatchError("dual point pair: point sizes disagree");
  return DualPointPairT<Scalar>{std::move(a), std::move(b)};
}

/// Polar Fenchel-Young divergence D(a : b) = [a]^T C_L [b] on the
/// last-coordinate-1 representatives (inputs are normalized internally).
template <typename Scalar>
Scalar polar_fenchel_young(const ProjectivePointT<Scalar>& a, const ProjectivePointT<Scalar>& b) {
  if (a.size() != b.size())
    throw DimensionMismatchError("polar_fenchel_young: point sizes disagree");
  const Eigen::Index n = a.dim();
  const VectorX<Scalar> na = detail::chart_representative(a, "polar_fenchel_young: ideal input");
  const VectorX<Scalar> nb = detail::chart_representative(b, "polar_fenchel_young: ideal input");
  // [a]^T C_L [b] with both last coordinates 1
  return na[n] + nb[n] - na.head(n).dot(nb.head(n));
}

enum class TotalVariant {
  Sqrt,     // kappa = 1 / sqrt(1 + |grad|^2), the geometric distance reading
  PaperTb,  // kappa = 1 / (1 + |grad|^2)
};

/// Total Bregman divergence kappa(theta2) * B_F(theta1 : theta2).
template <typename Scalar, typename F, typename G>
Scalar total_bregman(F&& func, G&& grad, const VectorX<Scalar>& theta1,
                     const VectorX<Scalar>& theta2, TotalVariant variant = TotalVariant::Sqrt) {
  const VectorX<Scalar> g2 = grad(theta2);
  const Scalar b = static_cast<Scalar>(func(theta1)) - static_cast<Scalar>(func(theta2)) -
                   (theta1 - theta2).dot(g2);
  const Scalar s = Scalar(1) + g2.squaredNorm();
  const Scalar kappa = variant == TotalVariant::Sqrt ? Scalar(1) / std::sqrt(s) : Scalar(1) / s;
  return kappa * b;
}

/// Conformal factors of the polar total divergences: affine norms of the
/// polar hyperplane normals C_L [b] and C_L^T [a].
template <typename Scalar>
struct ConformalFactorsT {
  Scalar kappa_b = Scalar(1);       // sqrt(1 + |eta_b|^2)
  Scalar kappa_star_a = Scalar(1);  // sqrt(1 + |theta_a|^2)
  TotalVariant variant = TotalVariant::Sqrt;
};

using ConformalFactors = ConformalFactorsT<double>;

template <typename Scalar>
Scalar kappa_point(const ProjectivePointT<Scalar>& b) {
  const VectorX<Scalar> nb = detail::chart_representative(b, "kappa: ideal input");
  return std::sqrt(Scalar(1) + nb.head(b.dim()).squaredNorm());
}

template <typename Scalar>
Scalar kappa_dual_point(const ProjectivePointT<Scalar>& a) {
  return kappa_point(a);
}

template <typename Scalar>
ConformalFactorsT<Scalar> conformal_factors(const ProjectivePointT<Scalar>& a,
                                            const ProjectivePointT<Scalar>& b,
                                            TotalVariant variant = TotalVariant::Sqrt) {
  return ConformalFactorsT<Scalar>{kappa_point(b), kappa_dual_point(a), variant};
}

/// Polar total Fenchel-Young divergence D(a : b) / kappa(b).
template <typename Scalar>
Scalar polar_total_fenchel_young(const ProjectivePointT<Scalar>& a,
                                 const ProjectivePointT<Scalar>& b) {
  return polar_fenchel_young(a, b) / kappa_point(b);
}

/// Dual polar total Fenchel-Young divergence D(b : a) / kappa*(a).
template <typename Scalar>
Scalar polar_total_fenchel_young_dual(const ProjectivePointT<Scalar>& b,
                                      const ProjectivePointT<Scalar>& a) {
  return polar_fenchel_young(b, a) / kappa_dual_point(a);
}

/// Both sides of the plain swap identity D_A(a:b) = D_{Delta(A)}(b:a) and of
/// the total swap identity tD(a:b)/kappa*(a) = tD(b:a)/kappa(b).
template <typename Scalar>
struct SwapCheckT {
  Scalar plain_lhs = Scalar(0);
  Scalar plain_rhs = Scalar(0);
  Scalar total_lhs = Scalar(0);
  Scalar total_rhs = Scalar(0);
};

using SwapCheck = SwapCheckT<double>;

template <typename Scalar>
SwapCheckT<Scalar> swap_check(const ProjectivePointT<Scalar>& a, const ProjectivePointT<Scalar>& b) {
  SwapCheckT<Scalar> r;
  r.plain_lhs = polar_fenchel_young(a, b);
  r.plain_rhs = polar_fenchel_young(b, a);
  r.total_lhs = polar_total_fenchel_young(a, b) / kappa_dual_point(a);
  r.total_rhs = polar_total_fenchel_young_dual(b, a) / kappa_point(b);
  return r;
}

/// Named scalar results for one dual point pair.  bregman is present only
/// when a generating function was available.
template <typename Scalar>
struct DivergenceReportT {
  Scalar fy = Scalar(0);
  std::optional<Scalar> bregman;
  Scalar polar_fy = Scalar(0);
  Scalar total_sqrt = Scalar(0);
  Scalar total_paper = Scalar(0);
  Scalar kappa_b = Scalar(1);
  Scalar kappa_star_a = Scalar(1);
};

using DivergenceReport = DivergenceReportT<double>;

/// Report from a raw point pair; fy coincides with the polar divergence.
template <typename Scalar>
DivergenceReportT<Scalar> divergence_report(const ProjectivePointT<Scalar>& a,
                                            const ProjectivePointT<Scalar>& b) {
  DivergenceReportT<Scalar> r;
  r.polar_fy = polar_fenchel_young(a, b);
  r.fy = r.polar_fy;
  r.kappa_b = kappa_point(b);
  r.kappa_star_a = kappa_dual_point(a);
  r.total_sqrt = r.polar_fy / r.kappa_b;
  r.total_paper = r.polar_fy / (r.kappa_b * r.kappa_b);
  return r;
}

template <typename Scalar>
DivergenceReportT<Scalar> divergence_report(const DualPointPairT<Scalar>& pair) {
  return divergence_report(pair.a, pair.b);
}

/// Report from a generating function and two primal parameters: the dual
/// point is (eta2, F*(eta2)) with eta2 = grad F(theta2) and F* evaluated
/// through the Fenchel-Young equality at the optimum.
template <typename Scalar, typename F, typename G>
DivergenceReportT<Scalar> divergence_report(F&& func, G&& grad, const VectorX<Scalar>& theta1,
                                            const VectorX<Scalar>& theta2) {
  const Scalar f1 = func(theta1);
  const Scalar f2 = func(theta2);
  const VectorX<Scalar> eta2 = grad(theta2);
  const Scalar fstar2 = theta2.dot(eta2) - f2;
  DivergenceReportT<Scalar> r = divergence_report(lift(theta1, f1), lift(eta2, fstar2));
  r.fy = fenchel_young(f1, fstar2, theta1, eta2);
  r.bregman = f1 - f2 - (theta1 - theta2).dot(eta2);
  return r;
}

/// Sampled-data variant of the function report.
template <typename Scalar>
DivergenceReportT<Scalar> divergence_report(const SampledFunctionT<Scalar>& f,
                                            const VectorX<Scalar>& theta1,
                                            const VectorX<Scalar>& theta2) {
  validate_sampled_function(f);
  SampledFunctionT<Scalar> work = f;
  if (!work.has_gradients()) {
    if (work.dim() == 1 && work.size() >= 3 && !work.has_mask()) {
      work.gradients.resize(work.size(), 1);
      work.gradients.col(0) =
          finite_difference_gradients_1d(VectorX<Scalar>(work.points.col(0)), work.values);
    } else {
      throw MissingGradientsError("divergence report on sampled data needs gradients");
    }
  }
  const RectangularGridT<Scalar> grid = detect_rectangular_grid(work.points);
  auto func = [&](const VectorX<Scalar>& x) { return interpolate_value(work, grid, x); };
  auto grad = [&](const VectorX<Scalar>& x) { return interpolate_gradient(work, grid, x); };
  return divergence_report<Scalar>(func, grad, theta1, theta2);
}

}  // namespace cvxpolar
