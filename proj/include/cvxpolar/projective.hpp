// Homogeneous-coordinate kernel: lift, normalize, compare and dehomogenize
// points of the projective space P^{n+1} stored as length-(n+2) vectors.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <utility>

#include "cvxpolar/errors.hpp"

namespace cvxpolar {

template <typename Scalar>
using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Default tolerance on the sine of the angle between coordinate lines.
inline constexpr double kProjectiveEqualityTol = 1e-9;

/// A point of P^{n+1} held as a nonzero homogeneous coordinate vector of
/// length n+2.  Representatives are equivalent up to nonzero scale; the last
/// coordinate is the homogenizing one and marks ideal points when zero.
/// Immutable after construction.
template <typename Scalar>
class ProjectivePointT {
 public:
  using Vector = VectorX<Scalar>;

  template <typename Derived>
  explicit ProjectivePointT(const Eigen::MatrixBase<Derived>& coords)
      : coords_(coords) {
    if (coords_.size() < 2)
      throw DimensionMismatchError("projective point needs at least 2 homogeneous coordinates");
    if (coords_.isZero(Scalar(0)))
      throw InvalidInputError("projective point must be a nonzero vector");
  }

  const Vector& coords() const { return coords_; }
  Scalar operator[](Eigen::Index i) const { return coords_[i]; }
  Eigen::Index size() const { return coords_.size(); }
  /// Dimension n of the underlying function space (coordinate length minus 2).
  Eigen::Index dim() const { return coords_.size() - 2; }
  Scalar last() const { return coords_[coords_.size() - 1]; }
  bool is_ideal() const { return last() == Scalar(0); }

  /// Canonical representative: finite points get last coordinate exactly 1,
  /// ideal points unit Euclidean norm with first nonzero coordinate positive.
  ProjectivePointT normalized() const {
    Vector v = coords_;
    if (!is_ideal()) {
      v /= last();
      v[v.size() - 1] = Scalar(1);
    } else {
      v /= v.norm();
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] != Scalar(0)) {
          if (v[i] < Scalar(0)) v = -v;
          break;
        }
      }
    }
    return ProjectivePointT(v);
  }

 private:
  Vector coords_;
};

using ProjectivePoint = ProjectivePointT<double>;

/// Embeds v in R^{n+1} as the finite projective point (v, 1).
template <typename Derived>
ProjectivePointT<typename Derived::Scalar> lift(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> h(v.size() + 1);
  h.head(v.size()) = v;
  h[v.size()] = Scalar(1);
  return ProjectivePointT<Scalar>(h);
}

/// lift of a graph point (theta, value).
template <typename Derived>
ProjectivePointT<typename Derived::Scalar> lift(const Eigen::MatrixBase<Derived>& theta,
                                                typename Derived::Scalar value) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> h(theta.size() + 2);
  h.head(theta.size()) = theta;
  h[theta.size()] = value;
  h[theta.size() + 1] = Scalar(1);
  return ProjectivePointT<Scalar>(h);
}

template <typename Scalar>
VectorX<Scalar> dehomogenize(const ProjectivePointT<Scalar>& p) {
  if (p.is_ideal()) throw IdealPointError("cannot dehomogenize an ideal point");
  return p.coords().head(p.size() - 1) / p.last();
}

/// Dehomogenizes a raw homogeneous vector.
template <typename Derived>
VectorX<typename Derived::Scalar> dehomogenize(const Eigen::MatrixBase<Derived>& h) {
  using Scalar = typename Derived::Scalar;
  const Scalar w = h[h.size() - 1];
  if (w == Scalar(0)) throw IdealPointError("cannot dehomogenize an ideal point");
  return h.head(h.size() - 1) / w;
}

/// Sine of the angle between the lines spanned by u and v (sign-insensitive).
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar line_angle_sine(const Eigen::MatrixBase<DerivedU>& u,
                                          const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  VectorX<Scalar> a = u;
  VectorX<Scalar> b = v;
  a /= a.norm();
  b /= b.norm();
  // component of b orthogonal to a; stable for both near-parallel and
  // near-antiparallel configurations
  const Scalar c = a.dot(b);
  const VectorX<Scalar> w = b - c * a;
  return w.norm();
}

/// Scale- and sign-insensitive equality of projective points: true iff the
/// sine of the angle between the coordinate lines is at most tol.
template <typename Scalar>
bool projectively_equal(const ProjectivePointT<Scalar>& p, const ProjectivePointT<Scalar>& q,
                        Scalar tol = Scalar(kProjectiveEqualityTol)) {
  if (p.size() != q.size()) return false;
  return line_angle_sine(p.coords(), q.coords()) <= tol;
}

}  // namespace cvxpolar
