// Quadratic polarities on homogeneous coordinates: pairing functional,
// polar halfspaces, membership predicates, envelope-based boundaries of
// polar sets and the involution round trip.
#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cvxpolar/errors.hpp"
#include "cvxpolar/projective.hpp"

namespace cvxpolar {

/// Additive membership tolerance, applied relative to the pairing scale.
inline constexpr double kMembershipTol = 1e-9;
/// Singular-value gap deciding rank of the stacked envelope system.
inline constexpr double kEnvelopeRankTol = 1e-8;
/// Last-coordinate threshold (relative to the lift norm) flagging ideal
/// envelope outputs, i.e. recession directions of the polar set.
inline constexpr double kEnvelopeIdealTol = 1e-9;
/// Sine threshold under which consecutive envelope outputs are reported as
/// collapsed duplicates (flat stretches of the primal boundary).
inline constexpr double kEnvelopeCollapseTol = 1e-12;

/// Invertible (n+2)x(n+2) cost matrix C defining the quadratic polarity
/// p(a,b) = [a]^T C [b].  The inverse is computed at construction (LU plus
/// one Newton correction step) and rejected unless C_inv*C matches the
/// identity to 1e-10 relative error.
template <typename Scalar>
class CostMatrixT {
 public:
  using Matrix = MatrixX<Scalar>;

  explicit CostMatrixT(Matrix c) : c_(std::move(c)) {
    if (c_.rows() != c_.cols() || c_.rows() < 2)
      throw DimensionMismatchError("cost matrix must be square of size n+2 >= 2");
    Eigen::FullPivLU<Matrix> lu(c_);
    if (!lu.isInvertible())
      throw SingularMatrixError("cost matrix is singular");
    inv_ = lu.inverse();
    // one Newton step X <- X (2I - C X) squares the inversion residual
    const Matrix id = Matrix::Identity(c_.rows(), c_.cols());
    inv_ = inv_ * (Scalar(2) * id - c_ * inv_);
    residual_ = (inv_ * c_ - id).norm() / std::sqrt(Scalar(c_.rows()));
    if (!(residual_ <= Scalar(1e-10)))
      throw SingularMatrixError("cost matrix is numerically singular (inverse residual " +
                                std::to_string(static_cast<double>(residual_)) + ")");
  }

  /// Legendre cost matrix C_L = [[-I_n, 0, 0], [0, 0, 1], [0, 1, 0]];
  /// symmetric and exactly involutive, so its inverse is itself.
  static CostMatrixT legendre(Eigen::Index n) {
    return CostMatrixT(legendre_matrix(n), legendre_matrix(n));
  }

  static MatrixX<Scalar> legendre_matrix(Eigen::Index n) {
    MatrixX<Scalar> c = MatrixX<Scalar>::Zero(n + 2, n + 2);
    c.topLeftCorner(n, n) = -MatrixX<Scalar>::Identity(n, n);
    c(n, n + 1) = Scalar(1);
    c(n + 1, n) = Scalar(1);
    return c;
  }

  const Matrix& matrix() const { return c_; }
  const Matrix& inverse() const { return inv_; }
  Eigen::Index size() const { return c_.rows(); }
  Eigen::Index dim() const { return c_.rows() - 2; }
  Scalar inverse_residual() const { return residual_; }

  CostMatrixT transposed() const { return CostMatrixT(c_.transpose(), inv_.transpose()); }

 private:
  CostMatrixT(Matrix c, Matrix inv) : c_(std::move(c)), inv_(std::move(inv)), residual_(0) {}

  Matrix c_;
  Matrix inv_;
  Scalar residual_ = Scalar(0);
};

using CostMatrix = CostMatrixT<double>;

/// Halfspace {[x] : nu^T [x] >= 0} given by a nonzero coefficient vector.
template <typename Scalar>
struct HalfspaceT {
  VectorX<Scalar> normal;
};

using Halfspace = HalfspaceT<double>;

/// Sampled boundary of a closed convex subset of R^{n+1}: finite homogeneous
/// samples (rows of length n+2) with per-sample tangent bases (n columns of
/// homogeneous tangent directions).  closed marks periodic parametrizations
/// such as boundaries of bounded bodies.
template <typename Scalar>
struct ConvexBodyT {
  Eigen::Index n = 0;
  MatrixX<Scalar> samples;                     // N x (n+2)
  std::vector<MatrixX<Scalar>> tangents;       // per sample: (n+2) x n
  bool closed = false;
  std::vector<bool> degenerate;                // rank-deficient tangent blocks

  Eigen::Index size() const { return samples.rows(); }
};

using ConvexBody = ConvexBodyT<double>;

/// Validates samples (finite) and tangent ranks; rank-deficient samples are
/// flagged degenerate rather than rejected.
template <typename Scalar>
ConvexBodyT<Scalar> make_convex_body(Eigen::Index n, MatrixX<Scalar> samples,
                                     std::vector<MatrixX<Scalar>> tangents, bool closed = false) {
  if (samples.cols() != n + 2)
    throw DimensionMismatchError("body samples must have n+2 homogeneous coordinates");
  if (static_cast<Eigen::Index>(tangents.size()) != samples.rows())
    throw DimensionMismatchError("one tangent basis required per boundary sample");
  ConvexBodyT<Scalar> body;
  body.n = n;
  body.samples = std::move(samples);
  body.tangents = std::move(tangents);
  body.closed = closed;
  body.degenerate.assign(static_cast<std::size_t>(body.samples.rows()), false);
  for (Eigen::Index i = 0; i < body.samples.rows(); ++i) {
    if (body.samples(i, n + 1) == Scalar(0))
      throw InvalidInputError("boundary sample " + std::to_string(i) + " is an ideal point");
    const auto& t = body.tangents[static_cast<std::size_t>(i)];
    if (t.rows() != n + 2 || t.cols() != n)
      throw DimensionMismatchError("tangent basis must be (n+2) x n");
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(t);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(sv.size() - 1) > Scalar(kEnvelopeRankTol) * sv(0)))
      body.degenerate[static_cast<std::size_t>(i)] = true;
  }
  return body;
}

/// Polarity pairing p(a, b) = [a]^T C [b].
template <typename Scalar>
Scalar pairing(const CostMatrixT<Scalar>& c, const ProjectivePointT<Scalar>& a,
               const ProjectivePointT<Scalar>& b) {
  if (a.size() != c.size() || b.size() != c.size())
    throw DimensionMismatchError("pairing: point/cost-matrix dimensions disagree");
  return a.coords().dot(c.matrix() * b.coords());
}

/// Polar of a point: the halfspace {[b] : [a]^T C [b] >= 0}, i.e. nu = C^T a.
template <typename Scalar>
HalfspaceT<Scalar> polar_halfspace(const CostMatrixT<Scalar>& c, const ProjectivePointT<Scalar>& a) {
  if (a.size() != c.size())
    throw DimensionMismatchError("polar_halfspace: dimensions disagree");
  return HalfspaceT<Scalar>{c.matrix().transpose() * a.coords()};
}

/// True iff [b] lies in the polar set of the sampled body: the pairing with
/// every boundary sample is >= -tol, tol scaled by the pairing magnitudes so
/// that exact boundary points pass.
template <typename Scalar>
bool polar_membership(const CostMatrixT<Scalar>& c, const ConvexBodyT<Scalar>& body,
                      const ProjectivePointT<Scalar>& b, Scalar tol = Scalar(kMembershipTol)) {
  if (body.size() == 0) throw InvalidInputError("polar_membership needs at least one sample");
  if (b.size() != c.size() || body.samples.cols() != c.size())
    throw DimensionMismatchError("polar_membership: dimensions disagree");
  const VectorX<Scalar> cb = c.matrix() * b.coords();
  const Scalar scale_c = c.matrix().norm();
  const Scalar scale_b = b.coords().norm();
  for (Eigen::Index i = 0; i < body.size(); ++i) {
    const Scalar p = body.samples.row(i).dot(cb);
    if (p < -tol * body.samples.row(i).norm() * scale_c * scale_b) return false;
  }
  return true;
}

/// Membership in the dual polarity: [b]^T C^T [a] >= -tol for every dual
/// sample row.  An empty sample list is vacuously true.
template <typename Scalar>
bool dual_polar_membership(const CostMatrixT<Scalar>& c, const MatrixX<Scalar>& dual_samples,
                           const ProjectivePointT<Scalar>& a,
                           Scalar tol = Scalar(kMembershipTol)) {
  if (dual_samples.rows() == 0) return true;
  if (a.size() != c.size() || dual_samples.cols() != c.size())
    throw DimensionMismatchError("dual_polar_membership: dimensions disagree");
  const VectorX<Scalar> ca = c.matrix().transpose() * a.coords();
  const Scalar scale_c = c.matrix().norm();
  const Scalar scale_a = a.coords().norm();
  for (Eigen::Index i = 0; i < dual_samples.rows(); ++i) {
    const Scalar p = dual_samples.row(i).dot(ca);
    if (p < -tol * dual_samples.row(i).norm() * scale_c * scale_a) return false;
  }
  return true;
}

enum class EnvelopeFlag {
  Ok,
  RankDeficient,  // stacked incidence/tangency system lost rank; sample skipped
  Ideal,          // output is a recession direction (last coordinate ~ 0)
  Collapsed,      // duplicate of the previous output (flat boundary stretch)
};

/// Per-sample envelope outputs.  lifts keeps the raw null-space
/// representatives, sign-aligned along the sample sequence so that the image
/// is a continuous curve usable for finite differencing; rows flagged
/// RankDeficient are zero.
template <typename Scalar>
struct EnvelopeResultT {
  MatrixX<Scalar> lifts;
  std::vector<EnvelopeFlag> flags;

  Eigen::Index size() const { return lifts.rows(); }
  bool has_lift(Eigen::Index i) const {
    return flags[static_cast<std::size_t>(i)] != EnvelopeFlag::RankDeficient;
  }
  bool finite(Eigen::Index i) const {
    const EnvelopeFlag f = flags[static_cast<std::size_t>(i)];
    return f == EnvelopeFlag::Ok || f == EnvelopeFlag::Collapsed;
  }
  ProjectivePointT<Scalar> point(Eigen::Index i) const {
    if (!has_lift(i)) throw InvalidInputError("no envelope output at skipped sample");
    return ProjectivePointT<Scalar>(lifts.row(i).transpose()).normalized();
  }
};

using EnvelopeResult = EnvelopeResultT<double>;

/// Envelope core on raw homogeneous samples (finiteness not required): for
/// each sample a with tangent directions t_k solves the n+1 homogeneous
/// conditions a^T C [b] = 0 (incidence) and t_k^T C [b] = 0 (tangency) as the
/// one-dimensional null space of the stacked (n+1) x (n+2) matrix.
template <typename Scalar>
EnvelopeResultT<Scalar> envelope_from_lifts(const CostMatrixT<Scalar>& c,
                                            const MatrixX<Scalar>& samples,
                                            const std::vector<MatrixX<Scalar>>& tangents,
                                            const std::vector<bool>& skip = {},
                                            Scalar rank_tol = Scalar(kEnvelopeRankTol)) {
  const Eigen::Index m = c.size();
  const Eigen::Index n = c.dim();
  const Eigen::Index count = samples.rows();
  if (samples.cols() != m)
    throw DimensionMismatchError("envelope: sample/cost-matrix dimensions disagree");
  if (static_cast<Eigen::Index>(tangents.size()) != count)
    throw DimensionMismatchError("envelope: one tangent basis per sample required");

  EnvelopeResultT<Scalar> result;
  result.lifts = MatrixX<Scalar>::Zero(count, m);
  result.flags.assign(static_cast<std::size_t>(count), EnvelopeFlag::RankDeficient);

  // probe subset used to orient outputs toward the membership-positive side
  const Eigen::Index probe_stride = std::max<Eigen::Index>(1, count / 64);

  MatrixX<Scalar> stacked(n + 1, m);
  Eigen::Index prev = -1;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!skip.empty() && skip[static_cast<std::size_t>(i)]) continue;
    stacked.row(0) = samples.row(i) * c.matrix();
    for (Eigen::Index k = 0; k < n; ++k)
      stacked.row(k + 1) = tangents[static_cast<std::size_t>(i)].col(k).transpose() * c.matrix();

    Eigen::JacobiSVD<MatrixX<Scalar>> svd(stacked, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > Scalar(0)) || !(sv(n) > rank_tol * sv(0)))
      continue;  // rank < n+1: null space ambiguous, sample reported as skipped

    VectorX<Scalar> b = svd.matrixV().col(m - 1);
    // orient so the polar hyperplane of the output supports the body:
    // p(a_j, b) >= 0 over the probes.  This keeps the lift continuous along
    // the sample sequence (the score stays positive on convex bodies); flat
    // bodies give no signal and fall back to alignment with the previous lift.
    const VectorX<Scalar> cb = c.matrix() * b;
    Scalar score = Scalar(0), score_abs = Scalar(0);
    for (Eigen::Index j = 0; j < count; j += probe_stride) {
      const Scalar p = samples.row(j).dot(cb);
      score += p;
      score_abs += std::abs(p);
    }
    if (score < -Scalar(1e-9) * score_abs) {
      b = -b;
    } else if (!(score > Scalar(1e-9) * score_abs) && prev >= 0 &&
               result.lifts.row(prev).dot(b) < Scalar(0)) {
      b = -b;
    }
    result.lifts.row(i) = b;

    EnvelopeFlag flag = EnvelopeFlag::Ok;
    if (std::abs(b[m - 1]) <= Scalar(kEnvelopeIdealTol) * b.norm()) {
      flag = EnvelopeFlag::Ideal;
    } else if (prev >= 0 && result.flags[static_cast<std::size_t>(prev)] != EnvelopeFlag::Ideal &&
               line_angle_sine(result.lifts.row(prev).transpose(), b) <=
                   Scalar(kEnvelopeCollapseTol)) {
      flag = EnvelopeFlag::Collapsed;
    }
    result.flags[static_cast<std::size_t>(i)] = flag;
    prev = i;
  }
  return result;
}

/// Boundary of the polar set Delta_C(body) as the envelope of the polar
/// hyperplanes of the boundary samples (incidence + tangency null space).
/// Samples flagged degenerate in the body are skipped and reported.
template <typename Scalar>
EnvelopeResultT<Scalar> polar_boundary_envelope(const CostMatrixT<Scalar>& c,
                                                const ConvexBodyT<Scalar>& body,
                                                Scalar rank_tol = Scalar(kEnvelopeRankTol)) {
  if (body.n != c.dim())
    throw DimensionMismatchError("envelope: body/cost-matrix dimensions disagree");
  return envelope_from_lifts(c, body.samples, body.tangents, body.degenerate, rank_tol);
}

/// Derivative of a discretely sampled curve (rows of points) with respect to
/// the sample index, using fourth-order stencils where five points exist.
/// For closed curves the stencil wraps around.  Any smooth lift and any
/// parametrization give the same tangent directions projectively, so index
/// spacing is sufficient here.
template <typename Scalar>
MatrixX<Scalar> finite_difference_tangents(const MatrixX<Scalar>& pts, bool closed = false) {
  const Eigen::Index count = pts.rows();
  if (count < 2) throw InvalidInputError("finite differences need at least 2 samples");
  MatrixX<Scalar> d(count, pts.cols());
  auto row = [&](Eigen::Index i) { return pts.row(((i % count) + count) % count); };
  if (count >= 5) {
    if (closed) {
      for (Eigen::Index i = 0; i < count; ++i)
        d.row(i) = (row(i - 2) - Scalar(8) * row(i - 1) + Scalar(8) * row(i + 1) - row(i + 2)) /
                   Scalar(12);
    } else {
      d.row(0) = (Scalar(-25) * pts.row(0) + Scalar(48) * pts.row(1) - Scalar(36) * pts.row(2) +
                  Scalar(16) * pts.row(3) - Scalar(3) * pts.row(4)) /
                 Scalar(12);
      d.row(1) = (Scalar(-3) * pts.row(0) - Scalar(10) * pts.row(1) + Scalar(18) * pts.row(2) -
                  Scalar(6) * pts.row(3) + pts.row(4)) /
                 Scalar(12);
      for (Eigen::Index i = 2; i + 2 < count; ++i)
        d.row(i) = (pts.row(i - 2) - Scalar(8) * pts.row(i - 1) + Scalar(8) * pts.row(i + 1) -
                    pts.row(i + 2)) /
                   Scalar(12);
      const Eigen::Index e = count - 1;
      d.row(e - 1) = -(Scalar(-3) * pts.row(e) - Scalar(10) * pts.row(e - 1) +
                       Scalar(18) * pts.row(e - 2) - Scalar(6) * pts.row(e - 3) + pts.row(e - 4)) /
                     Scalar(12);
      d.row(e) = -(Scalar(-25) * pts.row(e) + Scalar(48) * pts.row(e - 1) -
                   Scalar(36) * pts.row(e - 2) + Scalar(16) * pts.row(e - 3) -
                   Scalar(3) * pts.row(e - 4)) /
                 Scalar(12);
    }
    return d;
  }
  // small sample counts: second-order central, first-order at open ends
  for (Eigen::Index i = 0; i < count; ++i) {
    if (closed) {
      d.row(i) = (row(i + 1) - row(i - 1)) / Scalar(2);
    } else if (i == 0) {
      d.row(i) = pts.row(1) - pts.row(0);
    } else if (i == count - 1) {
      d.row(i) = pts.row(count - 1) - pts.row(count - 2);
    } else {
      d.row(i) = (pts.row(i + 1) - pts.row(i - 1)) / Scalar(2);
    }
  }
  return d;
}

/// Round-trip discrepancy of the polarity involution: the boundary is mapped
/// through the envelope with C, tangents of the image curve are rebuilt by
/// finite differences on the raw lifts, the dual envelope with C^T is applied
/// and the maximal Euclidean distance between the original and round-tripped
/// dehomogenized samples is returned.  Supports curve bodies (n == 1); the
/// image is never dehomogenized, so intermediate recession directions are
/// harmless.
template <typename Scalar>
Scalar involution_check(const CostMatrixT<Scalar>& c, const ConvexBodyT<Scalar>& body) {
  if (body.n != 1)
    throw InvalidInputError("involution_check rebuilds tangents sequentially; only n == 1 bodies are supported");
  const EnvelopeResultT<Scalar> first = polar_boundary_envelope(c, body);

  std::vector<Eigen::Index> kept;
  kept.reserve(static_cast<std::size_t>(first.size()));
  for (Eigen::Index i = 0; i < first.size(); ++i)
    if (first.has_lift(i)) kept.push_back(i);
  if (kept.size() < 2) throw InvalidInputError("involution_check: too few valid envelope samples");

  MatrixX<Scalar> image(static_cast<Eigen::Index>(kept.size()), c.size());
  for (std::size_t j = 0; j < kept.size(); ++j) image.row(static_cast<Eigen::Index>(j)) = first.lifts.row(kept[j]);

  const bool wrap = body.closed && static_cast<Eigen::Index>(kept.size()) == body.size();
  const MatrixX<Scalar> deriv = finite_difference_tangents(image, wrap);
  std::vector<MatrixX<Scalar>> image_tangents(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j)
    image_tangents[j] = deriv.row(static_cast<Eigen::Index>(j)).transpose();

  const EnvelopeResultT<Scalar> second = envelope_from_lifts(c.transposed(), image, image_tangents);

  Scalar worst = Scalar(-1);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    if (!second.finite(jj)) continue;
    const VectorX<Scalar> back = dehomogenize(second.lifts.row(jj).transpose());
    const VectorX<Scalar> orig = dehomogenize(body.samples.row(kept[j]).transpose());
    worst = std::max(worst, (back - orig).norm());
  }
  if (worst < Scalar(0)) throw InvalidInputError("involution_check: no finite round-trip samples");
  return worst;
}

}  // namespace cvxpolar
