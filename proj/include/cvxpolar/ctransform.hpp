// Quadratic-cost c-transform and its embedding as a quadratic polarity.
#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <limits>
#include <utility>
#include <vector>

#include "cvxpolar/errors.hpp"
#include "cvxpolar/legendre.hpp"
#include "cvxpolar/polarity.hpp"

namespace cvxpolar {

/// Quadratic coupling cost
/// c(theta, eta) = theta^T Cn theta + d |eta|^2 + e <theta, eta>
///               + <f_coef, theta> + <g_coef, eta> + h.
/// Empty f_coef/g_coef mean zero.
template <typename Scalar>
struct QuadraticCostT {
  MatrixX<Scalar> Cn;
  Scalar d = Scalar(0);
  Scalar e = Scalar(0);
  VectorX<Scalar> f_coef;
  VectorX<Scalar> g_coef;
  Scalar h = Scalar(0);

  Eigen::Index dim() const { return Cn.rows(); }

  Scalar evaluate(const VectorX<Scalar>& theta, const VectorX<Scalar>& eta) const {
    Scalar v = theta.dot(Cn * theta);
    v += d * eta.squaredNorm();
    v += e * theta.dot(eta);
    if (f_coef.size() != 0) v += f_coef.dot(theta);
    if (g_coef.size() != 0) v += g_coef.dot(eta);
    v += h;
    return v;
  }
};

using QuadraticCost = QuadraticCostT<double>;

template <typename Scalar>
void validate_quadratic_cost(const QuadraticCostT<Scalar>& cost) {
  if (cost.Cn.rows() != cost.Cn.cols())
    throw DimensionMismatchError("quadratic cost: Cn must be square");
  if (cost.f_coef.size() != 0 && cost.f_coef.size() != cost.Cn.rows())
    throw DimensionMismatchError("quadratic cost: f_coef size disagrees with Cn");
  if (cost.g_coef.size() != 0 && cost.g_coef.size() != cost.Cn.rows())
    throw DimensionMismatchError("quadratic cost: g_coef size disagrees with Cn");
}

/// c-transform values F^c(eta) = min_i c(theta_i, eta) + F(theta_i) over the
/// sample grid, with ties broken by the smallest index.
template <typename Scalar>
struct CTransformResultT {
  SampledFunctionT<Scalar> values;
  std::vector<Eigen::Index> argmin;
};

using CTransformResult = CTransformResultT<double>;

template <typename Scalar>
CTransformResultT<Scalar> c_transform(const SampledFunctionT<Scalar>& f,
                                      const QuadraticCostT<Scalar>& cost,
                                      const MatrixX<Scalar>& eta_grid) {
  validate_sampled_function(f);
  validate_quadratic_cost(cost);
  if (f.size() < 2) throw InvalidInputError("c_transform needs at least 2 grid points");
  if (cost.dim() != f.dim() || eta_grid.cols() != f.dim())
    throw DimensionMismatchError("c_transform dimension mismatch");
  if (f.finite_count() == 0) throw InvalidInputError("c_transform needs a finite node");

  const Eigen::Index m = eta_grid.rows();
  VectorX<Scalar> out(m);
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(m), -1);
  for (Eigen::Index j = 0; j < m; ++j) {
    const VectorX<Scalar> eta = eta_grid.row(j).transpose();
    Scalar best = std::numeric_limits<Scalar>::infinity();
    Eigen::Index bi = -1;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (f.is_infinite(i)) continue;
      const VectorX<Scalar> theta = f.points.row(i).transpose();
      const Scalar v = cost.evaluate(theta, eta) + f.values[i];
      if (v < best) {
        best = v;
        bi = i;
      }
    }
    out[j] = best;
    arg[static_cast<std::size_t>(j)] = bi;
  }
  CTransformResultT<Scalar> r;
  r.values = make_sampled_function<Scalar>(eta_grid, std::move(out));
  r.argmin = std::move(arg);
  return r;
}

template <typename Scalar>
CTransformResultT<Scalar> c_transform(const SampledFunctionT<Scalar>& f,
                                      const QuadraticCostT<Scalar>& cost,
                                      const VectorX<Scalar>& eta_grid) {
  MatrixX<Scalar> m(eta_grid.size(), 1);
  m.col(0) = eta_grid;
  return c_transform(f, cost, m);
}

/// Embeds a pure primal-quadratic cost as the polarity matrix
/// C = [[Cn, 0, 0], [0, 0, 1], [0, 1, 0]].  Only the block form is
/// embeddable: d, e, f_coef, g_coef and h must vanish.
template <typename Scalar>
CostMatrixT<Scalar> cost_to_polarity_matrix(const QuadraticCostT<Scalar>& cost) {
  validate_quadratic_cost(cost);
  const bool extras = cost.d != Scalar(0) || cost.e != Scalar(0) || cost.h != Scalar(0) ||
                      (cost.f_coef.size() != 0 && !cost.f_coef.isZero(Scalar(0))) ||
                      (cost.g_coef.size() != 0 && !cost.g_coef.isZero(Scalar(0)));
  if (extras)
    throw InvalidInputError(
        "cost_to_polarity_matrix accepts only the pure primal-quadratic block form");
  const Eigen::Index n = cost.dim();
  Eigen::FullPivLU<MatrixX<Scalar>> lu(cost.Cn);
  if (!lu.isInvertible()) throw SingularMatrixError("cost_to_polarity_matrix: singular Cn block");
  MatrixX<Scalar> c = MatrixX<Scalar>::Zero(n + 2, n + 2);
  c.topLeftCorner(n, n) = cost.Cn;
  c(n, n + 1) = Scalar(1);
  c(n + 1, n) = Scalar(1);
  return CostMatrixT<Scalar>(std::move(c));
}

}  // namespace cvxpolar
