// Generalized Legendre-Fenchel transforms as affine deformations, and the
// decompositions of an arbitrary quadratic polarity into a deformed Legendre
// polarity (body-side and dual-side).
#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "cvxpolar/errors.hpp"
#include "cvxpolar/legendre.hpp"
#include "cvxpolar/polarity.hpp"

namespace cvxpolar {

/// Dehomogenized dual points farther than this from the chart origin are
/// treated as recession directions and skipped by the theorem verifiers;
/// Euclidean comparison is meaningless that close to the ideal hyperplane.
inline constexpr double kVerifyCoordCutoff = 300.0;

/// Parameters of the dual-side generalized transform
/// (T F)(eta) = mu * F*(E eta + f) + <eta, g> + h.
template <typename Scalar>
struct DualSideParamsT {
  Scalar mu = Scalar(1);
  MatrixX<Scalar> E;
  VectorX<Scalar> f;
  VectorX<Scalar> g;
  Scalar h = Scalar(0);
};

using DualSideParams = DualSideParamsT<double>;

/// Parameters of the primal-side form (T F)(eta) = (mu F(A theta + b))*(eta)
/// + <eta, c> + d, with the additive linear term taken in the conjugation
/// variable of the output grid.
template <typename Scalar>
struct PrimalSideParamsT {
  Scalar mu = Scalar(1);
  MatrixX<Scalar> A;
  VectorX<Scalar> b;
  VectorX<Scalar> c;
  Scalar d = Scalar(0);
};

using PrimalSideParams = PrimalSideParamsT<double>;

/// Invertible (n+2)x(n+2) matrix acting on homogeneous coordinates.
template <typename Scalar>
struct AffineDeformationT {
  MatrixX<Scalar> matrix;
};

using AffineDeformation = AffineDeformationT<double>;

namespace detail {

/// LU inverse with one Newton correction step.
template <typename Scalar>
MatrixX<Scalar> refined_inverse(const MatrixX<Scalar>& m, const char* what) {
  Eigen::FullPivLU<MatrixX<Scalar>> lu(m);
  if (!lu.isInvertible()) throw SingularMatrixError(what);
  MatrixX<Scalar> inv = lu.inverse();
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(m.rows(), m.cols());
  inv = inv * (Scalar(2) * id - m * inv);
  return inv;
}

template <typename Scalar>
void check_dual_side(const DualSideParamsT<Scalar>& p) {
  if (!(p.mu > Scalar(0))) throw InvalidInputError("dual-side transform needs mu > 0");
  if (p.E.rows() != p.E.cols() || p.E.rows() != p.f.size() || p.E.rows() != p.g.size())
    throw DimensionMismatchError("dual-side transform parameter sizes disagree");
}

template <typename Scalar>
void check_primal_side(const PrimalSideParamsT<Scalar>& p) {
  if (!(p.mu > Scalar(0))) throw InvalidInputError("primal-side transform needs mu > 0");
  if (p.A.rows() != p.A.cols() || p.A.rows() != p.b.size() || p.A.rows() != p.c.size())
    throw DimensionMismatchError("primal-side transform parameter sizes disagree");
}

}  // namespace detail

/// Dual-side deformation T with M_T = C^{-1} C_L, so that
/// Delta_C(A) = T(Delta_L(A)).
template <typename Scalar>
AffineDeformationT<Scalar> decompose_T(const CostMatrixT<Scalar>& c) {
  return AffineDeformationT<Scalar>{c.inverse() *
                                    CostMatrixT<Scalar>::legendre_matrix(c.dim())};
}

/// Body-side deformation S with M_S = C_L C^T, so that
/// Delta_C(A) = Delta_L(S(A)).
template <typename Scalar>
AffineDeformationT<Scalar> decompose_S(const CostMatrixT<Scalar>& c) {
  return AffineDeformationT<Scalar>{CostMatrixT<Scalar>::legendre_matrix(c.dim()) *
                                    c.matrix().transpose()};
}

template <typename Scalar>
struct DecompositionResiduals {
  Scalar identity_T = Scalar(0);  // C M_T = C_L
  Scalar identity_S = Scalar(0);  // M_S^T C_L = C
};

/// Relative residuals of the defining identities, normalized by the product
/// scale so the measure stays meaningful for ill-conditioned C.
template <typename Scalar>
DecompositionResiduals<Scalar> decomposition_residuals(const CostMatrixT<Scalar>& c,
                                                       const AffineDeformationT<Scalar>& mt,
                                                       const AffineDeformationT<Scalar>& ms) {
  const MatrixX<Scalar> cl = CostMatrixT<Scalar>::legendre_matrix(c.dim());
  DecompositionResiduals<Scalar> r;
  r.identity_T = (c.matrix() * mt.matrix - cl).norm() / (c.matrix().norm() * mt.matrix.norm());
  r.identity_S =
      (ms.matrix.transpose() * cl - c.matrix()).norm() / (ms.matrix.norm() * cl.norm());
  return r;
}

/// Residuals of M_T = C_L M_S^{-T} C_L and M_S = C_L M_T^{-T} C_L, each
/// relative to the left-hand side.
template <typename Scalar>
std::pair<Scalar, Scalar> relate_T_S(const AffineDeformationT<Scalar>& mt,
                                     const AffineDeformationT<Scalar>& ms) {
  if (mt.matrix.rows() != ms.matrix.rows())
    throw DimensionMismatchError("relate_T_S: deformation sizes disagree");
  const Eigen::Index n = mt.matrix.rows() - 2;
  const MatrixX<Scalar> cl = CostMatrixT<Scalar>::legendre_matrix(n);
  const MatrixX<Scalar> ms_invt =
      detail::refined_inverse<Scalar>(ms.matrix, "relate_T_S: singular M_S").transpose();
  const MatrixX<Scalar> mt_invt =
      detail::refined_inverse<Scalar>(mt.matrix, "relate_T_S: singular M_T").transpose();
  const Scalar res_t = (mt.matrix - cl * ms_invt * cl).norm() / mt.matrix.norm();
  const Scalar res_s = (ms.matrix - cl * mt_invt * cl).norm() / ms.matrix.norm();
  return {res_t, res_s};
}

/// Maps raw homogeneous rows through M (no renormalization).
template <typename Scalar>
MatrixX<Scalar> apply_deformation_rows(const AffineDeformationT<Scalar>& m,
                                       const MatrixX<Scalar>& rows) {
  if (rows.cols() != m.matrix.cols())
    throw DimensionMismatchError("apply_deformation: dimension mismatch");
  return rows * m.matrix.transpose();
}

/// Maps a body through M: samples renormalized to last coordinate 1,
/// tangent directions mapped along.  Samples that become ideal are flagged
/// degenerate (and kept unnormalized) rather than rejected.
template <typename Scalar>
ConvexBodyT<Scalar> apply_deformation(const AffineDeformationT<Scalar>& m,
                                      const ConvexBodyT<Scalar>& body) {
  if (body.samples.cols() != m.matrix.cols())
    throw DimensionMismatchError("apply_deformation: dimension mismatch");
  ConvexBodyT<Scalar> out;
  out.n = body.n;
  out.closed = body.closed;
  out.samples = body.samples * m.matrix.transpose();
  out.tangents.resize(body.tangents.size());
  out.degenerate = body.degenerate;
  for (Eigen::Index i = 0; i < out.samples.rows(); ++i) {
    const Scalar w = out.samples(i, body.n + 1);
    if (std::abs(w) <= Scalar(kEnvelopeIdealTol) * out.samples.row(i).norm()) {
      out.degenerate[static_cast<std::size_t>(i)] = true;
    } else {
      out.samples.row(i) /= w;
      out.samples(i, body.n + 1) = Scalar(1);
    }
    out.tangents[static_cast<std::size_t>(i)] = m.matrix * body.tangents[static_cast<std::size_t>(i)];
  }
  return out;
}

/// Homogeneous matrix of the dual-side transform, derived from the
/// coordinate map (eta, y) -> (E^{-1}(eta - f),
/// mu y + <eta, E^{-T} g> + h - <E^{-1} f, g>); maps graph F* onto
/// graph T F.
template <typename Scalar>
AffineDeformationT<Scalar> dual_side_matrix(const DualSideParamsT<Scalar>& p) {
  detail::check_dual_side(p);
  const Eigen::Index n = p.E.rows();
  const MatrixX<Scalar> einv = detail::refined_inverse<Scalar>(p.E, "dual-side transform: singular E");
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n + 2, n + 2);
  m.topLeftCorner(n, n) = einv;
  m.block(0, n + 1, n, 1) = -einv * p.f;
  m.block(n, 0, 1, n) = (einv.transpose() * p.g).transpose();
  m(n, n) = p.mu;
  m(n, n + 1) = p.h - (einv * p.f).dot(p.g);
  m(n + 1, n + 1) = Scalar(1);
  return AffineDeformationT<Scalar>{std::move(m)};
}

/// Evaluates (T F)(eta) = mu F*(E eta + f) + <eta, g> + h on the rows of
/// eta_grid by multilinear interpolation of the sampled conjugate.
template <typename Scalar>
SampledFunctionT<Scalar> generalized_lft_dual_side(const SampledFunctionT<Scalar>& fstar,
                                                   const DualSideParamsT<Scalar>& p,
                                                   const MatrixX<Scalar>& eta_grid) {
  detail::check_dual_side(p);
  validate_sampled_function(fstar);
  if (p.E.rows() != fstar.dim() || eta_grid.cols() != fstar.dim())
    throw DimensionMismatchError("dual-side transform dimension mismatch");
  const RectangularGridT<Scalar> grid = detect_rectangular_grid(fstar.points);
  VectorX<Scalar> values(eta_grid.rows());
  Eigen::Array<bool, Eigen::Dynamic, 1> mask(eta_grid.rows());
  bool any_masked = false;
  for (Eigen::Index j = 0; j < eta_grid.rows(); ++j) {
    const VectorX<Scalar> eta = eta_grid.row(j).transpose();
    const Scalar fs = interpolate_value(fstar, grid, VectorX<Scalar>(p.E * eta + p.f));
    if (std::isinf(static_cast<double>(fs))) {
      values[j] = fs;
      mask[j] = true;
      any_masked = true;
    } else {
      values[j] = p.mu * fs + eta.dot(p.g) + p.h;
      mask[j] = false;
    }
  }
  return make_sampled_function<Scalar>(eta_grid, std::move(values), {},
                                       any_masked ? std::move(mask)
                                                  : Eigen::Array<bool, Eigen::Dynamic, 1>());
}

/// Evaluates (mu F(A theta + b))* + <eta, c> + d on the rows of eta_grid.
/// The deformed function G is sampled exactly by pulling the primal grid
/// back through theta = A^{-1}(theta_i - b), then conjugated brute-force.
template <typename Scalar>
SampledFunctionT<Scalar> generalized_lft_primal_side(const SampledFunctionT<Scalar>& f,
                                                     const PrimalSideParamsT<Scalar>& p,
                                                     const MatrixX<Scalar>& eta_grid) {
  detail::check_primal_side(p);
  validate_sampled_function(f);
  if (p.A.rows() != f.dim() || eta_grid.cols() != f.dim())
    throw DimensionMismatchError("primal-side transform dimension mismatch");
  const MatrixX<Scalar> ainv =
      detail::refined_inverse<Scalar>(p.A, "primal-side transform: singular A");

  const Eigen::Index count = f.size();
  MatrixX<Scalar> pts(count, f.dim());
  for (Eigen::Index i = 0; i < count; ++i)
    pts.row(i) = (ainv * (f.points.row(i).transpose() - p.b)).transpose();
  VectorX<Scalar> vals = p.mu * f.values;
  Eigen::Array<bool, Eigen::Dynamic, 1> mask = f.infinite;

  if (f.dim() == 1) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index bdx) { return pts(a, 0) < pts(bdx, 0); });
    MatrixX<Scalar> sp(count, 1);
    VectorX<Scalar> sv(count);
    Eigen::Array<bool, Eigen::Dynamic, 1> sm;
    if (mask.size() != 0) sm.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      sp(i, 0) = pts(order[static_cast<std::size_t>(i)], 0);
      sv[i] = vals[order[static_cast<std::size_t>(i)]];
      if (mask.size() != 0) sm[i] = mask[order[static_cast<std::size_t>(i)]];
    }
    pts = std::move(sp);
    vals = std::move(sv);
    mask = std::move(sm);
  }

  const SampledFunctionT<Scalar> g =
      make_sampled_function<Scalar>(std::move(pts), std::move(vals), {}, std::move(mask));
  const auto [conj, arg] = bruteforce_conjugate_values(g, eta_grid);
  VectorX<Scalar> out = conj;
  for (Eigen::Index j = 0; j < eta_grid.rows(); ++j)
    out[j] += eta_grid.row(j).dot(p.c) + p.d;
  return make_sampled_function<Scalar>(eta_grid, std::move(out));
}

namespace detail {

/// Index-matched comparison of two envelope outputs in the affine chart.
template <typename Scalar>
Scalar compare_envelopes(const EnvelopeResultT<Scalar>& lhs, const MatrixX<Scalar>& rhs_lifts,
                         const std::vector<EnvelopeFlag>& rhs_flags, Scalar coord_cutoff) {
  Scalar worst = Scalar(-1);
  const Eigen::Index m = lhs.lifts.cols();
  for (Eigen::Index i = 0; i < lhs.size(); ++i) {
    const EnvelopeFlag rf = rhs_flags[static_cast<std::size_t>(i)];
    if (!lhs.finite(i)) continue;
    if (rf != EnvelopeFlag::Ok && rf != EnvelopeFlag::Collapsed) continue;
    const VectorX<Scalar> r = rhs_lifts.row(i).transpose();
    if (std::abs(r[m - 1]) <= Scalar(kEnvelopeIdealTol) * r.norm()) continue;
    const VectorX<Scalar> x1 = dehomogenize(lhs.lifts.row(i).transpose());
    const VectorX<Scalar> x2 = dehomogenize(r);
    if (x1.norm() > coord_cutoff || x2.norm() > coord_cutoff) continue;
    worst = std::max(worst, (x1 - x2).norm());
  }
  if (worst < Scalar(0))
    throw InvalidInputError("envelope comparison: no mutually finite samples");
  return worst;
}

}  // namespace detail

/// Max distance between the envelope of Delta_C(body) and the T-deformed
/// envelope of Delta_L(body), over mutually finite dehomogenized samples.
template <typename Scalar>
Scalar verify_thm_T(const CostMatrixT<Scalar>& c, const ConvexBodyT<Scalar>& body,
                    Scalar coord_cutoff = Scalar(kVerifyCoordCutoff)) {
  const CostMatrixT<Scalar> cl = CostMatrixT<Scalar>::legendre(c.dim());
  const EnvelopeResultT<Scalar> direct = polar_boundary_envelope(c, body);
  const EnvelopeResultT<Scalar> legendre_side = polar_boundary_envelope(cl, body);
  const AffineDeformationT<Scalar> mt = decompose_T(c);
  const MatrixX<Scalar> mapped = apply_deformation_rows(mt, legendre_side.lifts);
  return detail::compare_envelopes(direct, mapped, legendre_side.flags, coord_cutoff);
}

/// Max distance between the envelope of Delta_C(body) and the Legendre
/// envelope of the S-deformed body, over mutually finite samples.
template <typename Scalar>
Scalar verify_thm_S(const CostMatrixT<Scalar>& c, const ConvexBodyT<Scalar>& body,
                    Scalar coord_cutoff = Scalar(kVerifyCoordCutoff)) {
  const CostMatrixT<Scalar> cl = CostMatrixT<Scalar>::legendre(c.dim());
  const EnvelopeResultT<Scalar> direct = polar_boundary_envelope(c, body);
  const ConvexBodyT<Scalar> deformed = apply_deformation(decompose_S(c), body);
  const EnvelopeResultT<Scalar> via_s = polar_boundary_envelope(cl, deformed);
  return detail::compare_envelopes(direct, via_s.lifts, via_s.flags, coord_cutoff);
}

}  // namespace cvxpolar
