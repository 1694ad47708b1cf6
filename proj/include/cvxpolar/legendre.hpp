// Legendre-Fenchel transforms of sampled and smooth convex functions, plus
// the epigraph bridge into the polarity machinery.
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cvxpolar/errors.hpp"
#include "cvxpolar/polarity.hpp"
#include "cvxpolar/projective.hpp"

namespace cvxpolar {

/// Function sampled on a grid of parameter points theta_i in R^n with values
/// F(theta_i), optional gradients and an optional +infinity mask for proper
/// functions on restricted domains.  For n == 1 the grid must be strictly
/// increasing; for n >= 2 a rectangular grid is expected wherever
/// interpolation is involved.
template <typename Scalar>
struct SampledFunctionT {
  MatrixX<Scalar> points;    // N x n
  VectorX<Scalar> values;    // N; +inf at masked nodes
  MatrixX<Scalar> gradients; // N x n, or 0 x 0 when absent
  Eigen::Array<bool, Eigen::Dynamic, 1> infinite;  // N, or empty when no mask

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
  bool has_gradients() const { return gradients.rows() == points.rows() && points.rows() > 0; }
  bool has_mask() const { return infinite.size() == points.rows() && points.rows() > 0; }
  bool is_infinite(Eigen::Index i) const { return has_mask() && infinite[i]; }
  Eigen::Index finite_count() const {
    if (!has_mask()) return size();
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < size(); ++i)
      if (!infinite[i]) ++c;
    return c;
  }
};

using SampledFunction = SampledFunctionT<double>;

template <typename Scalar>
void validate_sampled_function(const SampledFunctionT<Scalar>& f) {
  if (f.points.rows() == 0 || f.points.cols() == 0)
    throw InvalidInputError("sampled function needs a nonempty grid");
  if (f.values.size() != f.points.rows())
    throw InvalidInputError("sampled function: one value per grid point required");
  if (f.gradients.size() != 0 &&
      (f.gradients.rows() != f.points.rows() || f.gradients.cols() != f.points.cols()))
    throw InvalidInputError("sampled function: gradient count does not match the grid");
  if (f.infinite.size() != 0 && f.infinite.size() != f.points.rows())
    throw InvalidInputError("sampled function: infinite mask does not match the grid");
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (!f.is_infinite(i) && !std::isfinite(static_cast<double>(f.values[i])))
      throw InvalidInputError("sampled function: non-finite value at unmasked node " + std::to_string(i));
  }
  if (f.dim() == 1) {
    for (Eigen::Index i = 0; i + 1 < f.size(); ++i)
      if (!(f.points(i, 0) < f.points(i + 1, 0)))
        throw InvalidInputError("sampled function: 1-D grid must be strictly increasing");
  }
}

template <typename Scalar>
SampledFunctionT<Scalar> make_sampled_function(MatrixX<Scalar> points, VectorX<Scalar> values,
                                               MatrixX<Scalar> gradients = {},
                                               Eigen::Array<bool, Eigen::Dynamic, 1> infinite = {}) {
  SampledFunctionT<Scalar> f{std::move(points), std::move(values), std::move(gradients),
                             std::move(infinite)};
  validate_sampled_function(f);
  return f;
}

template <typename Scalar>
SampledFunctionT<Scalar> make_sampled_function_1d(const VectorX<Scalar>& theta,
                                                  VectorX<Scalar> values,
                                                  VectorX<Scalar> gradients = {}) {
  MatrixX<Scalar> pts(theta.size(), 1);
  pts.col(0) = theta;
  MatrixX<Scalar> grads;
  if (gradients.size() != 0) {
    grads.resize(gradients.size(), 1);
    grads.col(0) = gradients;
  }
  return make_sampled_function<Scalar>(std::move(pts), std::move(values), std::move(grads));
}

/// Samples a callable on a 1-D grid.
template <typename Scalar, typename F>
SampledFunctionT<Scalar> sample_function_1d(F&& func, const VectorX<Scalar>& theta) {
  VectorX<Scalar> vals(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) vals[i] = func(theta[i]);
  return make_sampled_function_1d<Scalar>(theta, std::move(vals));
}

template <typename Scalar, typename F, typename G>
SampledFunctionT<Scalar> sample_function_1d(F&& func, G&& grad, const VectorX<Scalar>& theta) {
  VectorX<Scalar> vals(theta.size()), grads(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    vals[i] = func(theta[i]);
    grads[i] = grad(theta[i]);
  }
  return make_sampled_function_1d<Scalar>(theta, std::move(vals), std::move(grads));
}

/// Second-order finite-difference gradients on a (possibly non-uniform) 1-D
/// grid: three-point formulas in the interior, one-sided at the ends.
template <typename Scalar>
VectorX<Scalar> finite_difference_gradients_1d(const VectorX<Scalar>& theta,
                                               const VectorX<Scalar>& values) {
  const Eigen::Index count = theta.size();
  if (count < 3) throw InvalidInputError("finite-difference gradients need >= 3 grid points");
  VectorX<Scalar> g(count);
  for (Eigen::Index i = 1; i + 1 < count; ++i) {
    const Scalar hm = theta[i] - theta[i - 1];
    const Scalar hp = theta[i + 1] - theta[i];
    g[i] = -hp / (hm * (hm + hp)) * values[i - 1] + (hp - hm) / (hm * hp) * values[i] +
           hm / (hp * (hm + hp)) * values[i + 1];
  }
  {
    const Scalar h0 = theta[1] - theta[0];
    const Scalar h1 = theta[2] - theta[1];
    g[0] = -(Scalar(2) * h0 + h1) / (h0 * (h0 + h1)) * values[0] +
           (h0 + h1) / (h0 * h1) * values[1] - h0 / (h1 * (h0 + h1)) * values[2];
    const Eigen::Index e = count - 1;
    const Scalar hm1 = theta[e - 1] - theta[e - 2];
    const Scalar hm0 = theta[e] - theta[e - 1];
    g[e] = hm0 / (hm1 * (hm1 + hm0)) * values[e - 2] - (hm1 + hm0) / (hm1 * hm0) * values[e - 1] +
           (Scalar(2) * hm0 + hm1) / (hm0 * (hm1 + hm0)) * values[e];
  }
  return g;
}

/// Discrete Legendre transform values: for every row eta of eta_grid returns
/// max_i <theta_i, eta> - F(theta_i) over unmasked nodes, with ties broken by
/// the smallest grid index, plus the argmax indices.
template <typename Scalar>
std::pair<VectorX<Scalar>, std::vector<Eigen::Index>> bruteforce_conjugate_values(
    const SampledFunctionT<Scalar>& f, const MatrixX<Scalar>& eta_grid) {
  validate_sampled_function(f);
  if (f.size() < 2) throw InvalidInputError("conjugation needs at least 2 grid points");
  if (eta_grid.cols() != f.dim())
    throw DimensionMismatchError("dual grid dimension does not match the function");
  if (f.finite_count() == 0) throw InvalidInputError("conjugation needs at least one finite node");

  const Eigen::Index n = f.dim();
  const Eigen::Index count = f.size();
  const Eigen::Index m = eta_grid.rows();
  VectorX<Scalar> out(m);
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(m), -1);
  const bool masked = f.has_mask();

  if (n == 1 && !masked) {
    const Scalar* th = f.points.data();
    const Scalar* va = f.values.data();
    for (Eigen::Index j = 0; j < m; ++j) {
      const Scalar eta = eta_grid(j, 0);
      Scalar best = th[0] * eta - va[0];
      Eigen::Index bi = 0;
      for (Eigen::Index i = 1; i < count; ++i) {
        const Scalar v = th[i] * eta - va[i];
        if (v > best) {
          best = v;
          bi = i;
        }
      }
      out[j] = best;
      arg[static_cast<std::size_t>(j)] = bi;
    }
  } else {
    for (Eigen::Index j = 0; j < m; ++j) {
      Scalar best = -std::numeric_limits<Scalar>::infinity();
      Eigen::Index bi = -1;
      for (Eigen::Index i = 0; i < count; ++i) {
        if (masked && f.infinite[i]) continue;
        const Scalar v = f.points.row(i).dot(eta_grid.row(j)) - f.values[i];
        if (v > best) {
          best = v;
          bi = i;
        }
      }
      out[j] = best;
      arg[static_cast<std::size_t>(j)] = bi;
    }
  }
  return {std::move(out), std::move(arg)};
}

/// Conjugate of a sampled function over a dual grid: the dual sample carries
/// F* values and, as gradients, the maximizing primal points (subgradients of
/// the polyhedral conjugate).
template <typename Scalar>
struct ConjugateResultT {
  SampledFunctionT<Scalar> dual;
  std::vector<Eigen::Index> argmax;
};

using ConjugateResult = ConjugateResultT<double>;

template <typename Scalar>
ConjugateResultT<Scalar> conjugate_bruteforce(const SampledFunctionT<Scalar>& f,
                                              const MatrixX<Scalar>& eta_grid) {
  auto [values, arg] = bruteforce_conjugate_values(f, eta_grid);
  MatrixX<Scalar> grads(eta_grid.rows(), f.dim());
  for (Eigen::Index j = 0; j < eta_grid.rows(); ++j)
    grads.row(j) = f.points.row(arg[static_cast<std::size_t>(j)]);
  ConjugateResultT<Scalar> r;
  r.dual = make_sampled_function<Scalar>(eta_grid, std::move(values), std::move(grads));
  r.argmax = std::move(arg);
  return r;
}

template <typename Scalar>
ConjugateResultT<Scalar> conjugate_bruteforce(const SampledFunctionT<Scalar>& f,
                                              const VectorX<Scalar>& eta_grid) {
  MatrixX<Scalar> m(eta_grid.size(), 1);
  m.col(0) = eta_grid;
  return conjugate_bruteforce(f, m);
}

/// Linear-time discrete Legendre transform for n == 1: the lower convex hull
/// of the samples is built once, then hull slopes are merged with the sorted
/// dual grid.  Agrees with conjugate_bruteforce to within rounding.
template <typename Scalar>
ConjugateResultT<Scalar> conjugate_fast_1d(const SampledFunctionT<Scalar>& f,
                                           const VectorX<Scalar>& eta_grid) {
  validate_sampled_function(f);
  if (f.dim() != 1) throw DimensionMismatchError("conjugate_fast_1d requires n == 1");
  if (f.size() < 2) throw InvalidInputError("conjugation needs at least 2 grid points");
  for (Eigen::Index j = 0; j + 1 < eta_grid.size(); ++j)
    if (!(eta_grid[j] <= eta_grid[j + 1]))
      throw InvalidInputError("conjugate_fast_1d requires a sorted dual grid");

  // lower convex hull over the unmasked nodes; collinear middle points dropped
  std::vector<Eigen::Index> hull;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f.is_infinite(i)) continue;
    const Scalar x = f.points(i, 0);
    const Scalar y = f.values[i];
    while (hull.size() >= 2) {
      const Eigen::Index a = hull[hull.size() - 2];
      const Eigen::Index b = hull[hull.size() - 1];
      const Scalar cross = (f.points(b, 0) - f.points(a, 0)) * (y - f.values[a]) -
                           (f.values[b] - f.values[a]) * (x - f.points(a, 0));
      if (cross <= Scalar(0))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  if (hull.empty()) throw InvalidInputError("conjugation needs at least one finite node");

  const Eigen::Index m = eta_grid.size();
  VectorX<Scalar> out(m);
  MatrixX<Scalar> grads(m, 1);
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(m), -1);
  std::size_t k = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Scalar eta = eta_grid[j];
    while (k + 1 < hull.size()) {
      const Eigen::Index a = hull[k];
      const Eigen::Index b = hull[k + 1];
      const Scalar slope = (f.values[b] - f.values[a]) / (f.points(b, 0) - f.points(a, 0));
      if (slope < eta)
        ++k;
      else
        break;
    }
    const Eigen::Index i = hull[k];
    out[j] = f.points(i, 0) * eta - f.values[i];
    grads(j, 0) = f.points(i, 0);
    arg[static_cast<std::size_t>(j)] = i;
  }
  MatrixX<Scalar> pts(m, 1);
  pts.col(0) = eta_grid;
  ConjugateResultT<Scalar> r;
  r.dual = make_sampled_function<Scalar>(std::move(pts), std::move(out), std::move(grads));
  r.argmax = std::move(arg);
  return r;
}

/// Dual grid spanning the discrete slope range (gradient range when
/// gradients are present), with the primal cardinality.  Affine data, whose
/// slope range is a single point, gets a unit-halfwidth interval around it.
template <typename Scalar>
VectorX<Scalar> auto_eta_grid_1d(const SampledFunctionT<Scalar>& f) {
  validate_sampled_function(f);
  if (f.dim() != 1) throw DimensionMismatchError("auto_eta_grid_1d requires n == 1");
  Scalar lo = std::numeric_limits<Scalar>::infinity();
  Scalar hi = -lo;
  if (f.has_gradients()) {
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (f.is_infinite(i)) continue;
      lo = std::min(lo, f.gradients(i, 0));
      hi = std::max(hi, f.gradients(i, 0));
    }
  } else {
    Eigen::Index prev = -1;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (f.is_infinite(i)) continue;
      if (prev >= 0) {
        const Scalar s = (f.values[i] - f.values[prev]) / (f.points(i, 0) - f.points(prev, 0));
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      prev = i;
    }
  }
  if (!(lo <= hi)) throw InvalidInputError("auto dual grid needs at least two finite nodes");
  if (hi - lo <= Scalar(1e-12) * std::max(Scalar(1), std::abs(lo))) {
    lo -= Scalar(1);
    hi += Scalar(1);
  }
  return VectorX<Scalar>::LinSpaced(f.size(), lo, hi);
}

/// Rectangular structure of an n-D sample grid: strictly increasing axes and
/// the map from flat row-major grid indices to sample rows.
template <typename Scalar>
struct RectangularGridT {
  std::vector<VectorX<Scalar>> axes;
  std::vector<Eigen::Index> row_of;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(axes.size()); }
};

template <typename Scalar>
RectangularGridT<Scalar> detect_rectangular_grid(const MatrixX<Scalar>& points) {
  const Eigen::Index n = points.cols();
  const Eigen::Index count = points.rows();
  RectangularGridT<Scalar> g;
  g.axes.resize(static_cast<std::size_t>(n));
  Eigen::Index total = 1;
  for (Eigen::Index d = 0; d < n; ++d) {
    std::vector<Scalar> v(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = points(i, d);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    g.axes[static_cast<std::size_t>(d)] =
        Eigen::Map<const VectorX<Scalar>>(v.data(), static_cast<Eigen::Index>(v.size()));
    total *= static_cast<Eigen::Index>(v.size());
  }
  if (total != count)
    throw InvalidInputError("sample points do not form a rectangular grid");
  g.row_of.assign(static_cast<std::size_t>(count), -1);
  for (Eigen::Index i = 0; i < count; ++i) {
    Eigen::Index flat = 0;
    for (Eigen::Index d = 0; d < n; ++d) {
      const auto& axis = g.axes[static_cast<std::size_t>(d)];
      const Scalar* lo = std::lower_bound(axis.data(), axis.data() + axis.size(), points(i, d));
      if (lo == axis.data() + axis.size() || *lo != points(i, d))
        throw InvalidInputError("sample points do not form a rectangular grid");
      flat = flat * axis.size() + static_cast<Eigen::Index>(lo - axis.data());
    }
    if (g.row_of[static_cast<std::size_t>(flat)] != -1)
      throw InvalidInputError("duplicate grid point in sampled function");
    g.row_of[static_cast<std::size_t>(flat)] = i;
  }
  return g;
}

namespace detail {

/// Locates x on an axis: cell index k and barycentric weight t in [0, 1].
/// Queries within a tiny slack outside the range clamp to the boundary.
template <typename Scalar>
std::pair<Eigen::Index, Scalar> locate_on_axis(const VectorX<Scalar>& axis, Scalar x) {
  const Eigen::Index count = axis.size();
  const Scalar slack =
      Scalar(1e-12) * (std::abs(axis[0]) + std::abs(axis[count - 1]) + axis[count - 1] - axis[0] +
                       Scalar(1));
  if (x < axis[0]) {
    if (axis[0] - x > slack) throw OutOfGridError("interpolation query below the sampled grid");
    return {0, Scalar(0)};
  }
  if (x > axis[count - 1]) {
    if (x - axis[count - 1] > slack)
      throw OutOfGridError("interpolation query above the sampled grid");
    return {std::max<Eigen::Index>(count - 2, 0), Scalar(1)};
  }
  if (count == 1) return {0, Scalar(0)};
  const Scalar* hi = std::upper_bound(axis.data(), axis.data() + count, x);
  Eigen::Index k = static_cast<Eigen::Index>(hi - axis.data()) - 1;
  if (k >= count - 1) k = count - 2;
  const Scalar t = (x - axis[k]) / (axis[k + 1] - axis[k]);
  return {k, t};
}

}  // namespace detail

/// Multilinear interpolation of the sampled values at x.  Exact at grid
/// nodes; returns +infinity when a contributing corner is masked.
template <typename Scalar>
Scalar interpolate_value(const SampledFunctionT<Scalar>& f, const RectangularGridT<Scalar>& grid,
                         const VectorX<Scalar>& x) {
  const Eigen::Index n = grid.dim();
  if (x.size() != n) throw DimensionMismatchError("interpolation query dimension mismatch");
  std::vector<Eigen::Index> cell(static_cast<std::size_t>(n));
  std::vector<Scalar> t(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < n; ++d) {
    auto [k, w] = detail::locate_on_axis(grid.axes[static_cast<std::size_t>(d)], x[d]);
    cell[static_cast<std::size_t>(d)] = k;
    t[static_cast<std::size_t>(d)] = w;
  }
  Scalar acc = Scalar(0);
  const Eigen::Index corners = Eigen::Index(1) << n;
  for (Eigen::Index c = 0; c < corners; ++c) {
    Scalar w = Scalar(1);
    Eigen::Index flat = 0;
    for (Eigen::Index d = 0; d < n; ++d) {
      const auto& axis = grid.axes[static_cast<std::size_t>(d)];
      const bool upper = ((c >> d) & 1) != 0;
      Eigen::Index idx = cell[static_cast<std::size_t>(d)];
      if (upper) {
        if (axis.size() == 1) {
          w = Scalar(0);
          break;
        }
        idx += 1;
        w *= t[static_cast<std::size_t>(d)];
      } else {
        w *= Scalar(1) - t[static_cast<std::size_t>(d)];
      }
      flat = flat * axis.size() + idx;
    }
    if (w == Scalar(0)) continue;
    const Eigen::Index row = grid.row_of[static_cast<std::size_t>(flat)];
    if (f.is_infinite(row)) return std::numeric_limits<Scalar>::infinity();
    acc += w * f.values[row];
  }
  return acc;
}

/// Multilinear interpolation of the sampled gradient at x.
template <typename Scalar>
VectorX<Scalar> interpolate_gradient(const SampledFunctionT<Scalar>& f,
                                     const RectangularGridT<Scalar>& grid,
                                     const VectorX<Scalar>& x) {
  if (!f.has_gradients()) throw MissingGradientsError("sampled function has no gradients");
  const Eigen::Index n = grid.dim();
  if (x.size() != n) throw DimensionMismatchError("interpolation query dimension mismatch");
  std::vector<Eigen::Index> cell(static_cast<std::size_t>(n));
  std::vector<Scalar> t(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < n; ++d) {
    auto [k, w] = detail::locate_on_axis(grid.axes[static_cast<std::size_t>(d)], x[d]);
    cell[static_cast<std::size_t>(d)] = k;
    t[static_cast<std::size_t>(d)] = w;
  }
  VectorX<Scalar> acc = VectorX<Scalar>::Zero(n);
  const Eigen::Index corners = Eigen::Index(1) << n;
  for (Eigen::Index c = 0; c < corners; ++c) {
    Scalar w = Scalar(1);
    Eigen::Index flat = 0;
    for (Eigen::Index d = 0; d < n; ++d) {
      const auto& axis = grid.axes[static_cast<std::size_t>(d)];
      const bool upper = ((c >> d) & 1) != 0;
      Eigen::Index idx = cell[static_cast<std::size_t>(d)];
      if (upper) {
        if (axis.size() == 1) {
          w = Scalar(0);
          break;
        }
        idx += 1;
        w *= t[static_cast<std::size_t>(d)];
      } else {
        w *= Scalar(1) - t[static_cast<std::size_t>(d)];
      }
      flat = flat * axis.size() + idx;
    }
    if (w == Scalar(0)) continue;
    const Eigen::Index row = grid.row_of[static_cast<std::size_t>(flat)];
    if (f.is_infinite(row))
      throw OutOfGridError("gradient interpolation touched an infinite node");
    acc += w * f.gradients.row(row).transpose();
  }
  return acc;
}

/// Dual grid for arbitrary n: the 1-D slope-range grid, or for n >= 2 the
/// rectangular gradient-range box with the primal per-axis cardinalities.
template <typename Scalar>
MatrixX<Scalar> auto_eta_grid(const SampledFunctionT<Scalar>& f) {
  if (f.dim() == 1) {
    MatrixX<Scalar> m(f.size(), 1);
    m.col(0) = auto_eta_grid_1d(f);
    return m;
  }
  if (!f.has_gradients())
    throw MissingGradientsError("auto dual grid for n >= 2 needs gradients");
  const RectangularGridT<Scalar> grid = detect_rectangular_grid(f.points);
  const Eigen::Index n = f.dim();
  std::vector<VectorX<Scalar>> axes(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < n; ++d) {
    Scalar lo = f.gradients.col(d).minCoeff();
    Scalar hi = f.gradients.col(d).maxCoeff();
    if (hi - lo <= Scalar(1e-12) * std::max(Scalar(1), std::abs(lo))) {
      lo -= Scalar(1);
      hi += Scalar(1);
    }
    axes[static_cast<std::size_t>(d)] =
        VectorX<Scalar>::LinSpaced(grid.axes[static_cast<std::size_t>(d)].size(), lo, hi);
  }
  Eigen::Index total = 1;
  for (const auto& a : axes) total *= a.size();
  MatrixX<Scalar> out(total, n);
  for (Eigen::Index flat = 0; flat < total; ++flat) {
    Eigen::Index rem = flat;
    for (Eigen::Index d = n - 1; d >= 0; --d) {
      const auto& a = axes[static_cast<std::size_t>(d)];
      out(flat, d) = a[rem % a.size()];
      rem /= a.size();
    }
  }
  return out;
}

/// Result of a smooth conjugation F*(eta) = <theta*, eta> - F(theta*) with
/// grad F(theta*) = eta.
template <typename Scalar>
struct SmoothConjugateT {
  VectorX<Scalar> theta;
  Scalar value = Scalar(0);
  int iterations = 0;
  Scalar residual = Scalar(0);
};

using SmoothConjugate = SmoothConjugateT<double>;

namespace detail {

template <typename Scalar, typename F, typename G>
SmoothConjugateT<Scalar> conjugate_smooth_1d(F&& func, G&& grad, Scalar eta, Scalar theta0,
                                             Scalar tol, int max_iter) {
  auto g = [&](Scalar t) {
    VectorX<Scalar> v(1);
    v[0] = t;
    return static_cast<Scalar>(grad(v)[0]) - eta;
  };
  auto finish = [&](Scalar t, Scalar res, int it) {
    VectorX<Scalar> v(1);
    v[0] = t;
    SmoothConjugateT<Scalar> r;
    r.theta = v;
    r.value = t * eta - func(v);
    r.iterations = it;
    r.residual = std::abs(res);
    return r;
  };

  const Scalar target = tol * (Scalar(1) + std::abs(eta));
  Scalar g0 = g(theta0);
  if (std::abs(g0) <= target) return finish(theta0, g0, 0);

  // bracket the root of the monotone gradient by geometric expansion
  Scalar lo, hi, glo, ghi;
  Scalar step = std::max(Scalar(1), std::abs(theta0));
  if (g0 > Scalar(0)) {
    hi = theta0;
    ghi = g0;
    lo = theta0 - step;
    glo = g(lo);
    while (glo > Scalar(0)) {
      hi = lo;
      ghi = glo;
      step *= Scalar(2);
      if (step > Scalar(1e18)) throw OutOfRangeError("conjugate_smooth: bracketing failed");
      lo -= step;
      glo = g(lo);
    }
  } else {
    lo = theta0;
    glo = g0;
    hi = theta0 + step;
    ghi = g(hi);
    while (ghi < Scalar(0)) {
      lo = hi;
      glo = ghi;
      step *= Scalar(2);
      if (step > Scalar(1e18)) throw OutOfRangeError("conjugate_smooth: bracketing failed");
      hi += step;
      ghi = g(hi);
    }
  }
  if (std::abs(glo) <= target) return finish(lo, glo, 0);
  if (std::abs(ghi) <= target) return finish(hi, ghi, 0);

  // secant-accelerated bisection; every other step bisects, so the bracket
  // provably shrinks
  for (int it = 1; it <= max_iter; ++it) {
    Scalar t;
    if (it % 2 == 0 && ghi != glo) {
      t = hi - ghi * (hi - lo) / (ghi - glo);
      if (!(t > lo && t < hi)) t = (lo + hi) / Scalar(2);
    } else {
      t = (lo + hi) / Scalar(2);
    }
    const Scalar gt = g(t);
    if (std::abs(gt) <= target) return finish(t, gt, it);
    if (gt > Scalar(0)) {
      hi = t;
      ghi = gt;
    } else {
      lo = t;
      glo = gt;
    }
    if (hi - lo <= std::numeric_limits<Scalar>::epsilon() * (std::abs(lo) + std::abs(hi) + Scalar(1))) {
      const Scalar best = std::abs(glo) < std::abs(ghi) ? lo : hi;
      const Scalar gb = std::abs(glo) < std::abs(ghi) ? glo : ghi;
      if (std::abs(gb) <= target) return finish(best, gb, it);
      break;
    }
  }
  throw NoConvergenceError("conjugate_smooth: 1-D solve did not reach the residual target");
}

template <typename Scalar, typename F, typename G>
SmoothConjugateT<Scalar> conjugate_smooth_newton(F&& func, G&& grad, const VectorX<Scalar>& eta,
                                                 const VectorX<Scalar>& theta0, Scalar tol,
                                                 int max_iter) {
  const Eigen::Index n = eta.size();
  const Scalar target = tol * (Scalar(1) + eta.norm());
  VectorX<Scalar> theta = theta0;
  VectorX<Scalar> r = VectorX<Scalar>(grad(theta)) - eta;
  for (int it = 0; it <= max_iter; ++it) {
    if (r.norm() <= target) {
      SmoothConjugateT<Scalar> out;
      out.theta = theta;
      out.value = theta.dot(eta) - func(theta);
      out.iterations = it;
      out.residual = r.norm();
      return out;
    }
    if (it == max_iter) break;
    // finite-difference Hessian of F from the gradient callable
    MatrixX<Scalar> h(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Scalar dk = Scalar(1e-6) * (Scalar(1) + std::abs(theta[k]));
      VectorX<Scalar> tp = theta, tm = theta;
      tp[k] += dk;
      tm[k] -= dk;
      h.col(k) = (VectorX<Scalar>(grad(tp)) - VectorX<Scalar>(grad(tm))) / (Scalar(2) * dk);
    }
    h = ((h + h.transpose()) / Scalar(2)).eval();
    VectorX<Scalar> dir = h.ldlt().solve(-r);
    if (!dir.allFinite() || !(dir.dot(-r) > Scalar(0))) dir = -r;
    Scalar t = Scalar(1);
    bool accepted = false;
    while (t >= Scalar(1e-12)) {
      VectorX<Scalar> cand = theta + t * dir;
      VectorX<Scalar> rc = VectorX<Scalar>(grad(cand)) - eta;
      if (rc.norm() < r.norm()) {
        theta = std::move(cand);
        r = std::move(rc);
        accepted = true;
        break;
      }
      t /= Scalar(2);
    }
    if (!accepted)
      throw NoConvergenceError("conjugate_smooth: damped Newton step stalled");
  }
  throw NoConvergenceError("conjugate_smooth: residual target not reached in " +
                           std::to_string(max_iter) + " iterations");
}

}  // namespace detail

/// Conjugate of a Legendre-type function: solves grad F(theta*) = eta by
/// safeguarded bisection (n == 1) or damped Newton (n >= 2) from theta0 and
/// returns theta* together with <theta*, eta> - F(theta*).  The gradient
/// residual at theta* is at most tol * (1 + |eta|).
template <typename Scalar, typename F, typename G>
SmoothConjugateT<Scalar> conjugate_smooth(F&& func, G&& grad, const VectorX<Scalar>& eta,
                                          const VectorX<Scalar>& theta0,
                                          Scalar tol = Scalar(1e-10), int max_iter = 100) {
  if (eta.size() != theta0.size())
    throw DimensionMismatchError("conjugate_smooth: eta/theta0 sizes disagree");
  if (eta.size() == 1)
    return detail::conjugate_smooth_1d<Scalar>(func, grad, eta[0], theta0[0], tol, max_iter);
  return detail::conjugate_smooth_newton<Scalar>(func, grad, eta, theta0, tol, max_iter);
}

/// The conjugate applied twice over matched grids: dual grid chosen
/// automatically, result evaluated back on the primal grid.  Pointwise
/// <= the input; equality within grid resolution for convex inputs.
template <typename Scalar>
SampledFunctionT<Scalar> biconjugate(const SampledFunctionT<Scalar>& f) {
  if (f.dim() == 1) {
    const VectorX<Scalar> eta = auto_eta_grid_1d(f);
    const ConjugateResultT<Scalar> c1 = conjugate_fast_1d(f, eta);
    const ConjugateResultT<Scalar> c2 = conjugate_fast_1d(c1.dual, VectorX<Scalar>(f.points.col(0)));
    return make_sampled_function<Scalar>(f.points, c2.dual.values, c2.dual.gradients);
  }
  const MatrixX<Scalar> eta = auto_eta_grid(f);
  const ConjugateResultT<Scalar> c1 = conjugate_bruteforce(f, eta);
  const auto [values, arg] = bruteforce_conjugate_values(c1.dual, f.points);
  MatrixX<Scalar> grads(f.size(), f.dim());
  for (Eigen::Index i = 0; i < f.size(); ++i)
    grads.row(i) = eta.row(arg[static_cast<std::size_t>(i)]);
  return make_sampled_function<Scalar>(f.points, values, std::move(grads));
}

/// Epigraph boundary of a sampled function as a convex body: samples
/// (theta_i, F(theta_i), 1) with tangent columns (e_k, dF/dtheta_k, 0).
/// Analytic gradients are used when present; otherwise n == 1 grids with at
/// least 3 points fall back to finite differences.  Infinite nodes are
/// excluded.
template <typename Scalar>
ConvexBodyT<Scalar> epigraph_body(const SampledFunctionT<Scalar>& f) {
  validate_sampled_function(f);
  const Eigen::Index n = f.dim();
  MatrixX<Scalar> grads;
  if (f.has_gradients()) {
    grads = f.gradients;
  } else if (n == 1 && f.size() >= 3 && !f.has_mask()) {
    grads.resize(f.size(), 1);
    grads.col(0) = finite_difference_gradients_1d(VectorX<Scalar>(f.points.col(0)), f.values);
  } else {
    throw MissingGradientsError("epigraph_body needs gradients (or a 1-D grid with >= 3 points)");
  }

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    if (!f.is_infinite(i)) keep.push_back(i);
  MatrixX<Scalar> samples(static_cast<Eigen::Index>(keep.size()), n + 2);
  std::vector<MatrixX<Scalar>> tangents(keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const Eigen::Index i = keep[j];
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    samples.row(jj).head(n) = f.points.row(i);
    samples(jj, n) = f.values[i];
    samples(jj, n + 1) = Scalar(1);
    MatrixX<Scalar> t = MatrixX<Scalar>::Zero(n + 2, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      t(k, k) = Scalar(1);
      t(n, k) = grads(i, k);
    }
    tangents[j] = std::move(t);
  }
  return make_convex_body<Scalar>(n, std::move(samples), std::move(tangents), false);
}

/// Checks that the Legendre-polar envelope of the graph of F is the graph of
/// F*: each dehomogenized envelope point (eta, y) is compared against the
/// conjugate value at eta recovered independently by conjugate_smooth.
/// Returns the maximal |y - F*(eta)|.
template <typename Scalar, typename F, typename G>
Scalar verify_legendre_polarity(F&& func, G&& grad, const MatrixX<Scalar>& theta_samples,
                                Scalar solver_tol = Scalar(1e-10)) {
  const Eigen::Index n = theta_samples.cols();
  VectorX<Scalar> values(theta_samples.rows());
  MatrixX<Scalar> grads(theta_samples.rows(), n);
  for (Eigen::Index i = 0; i < theta_samples.rows(); ++i) {
    const VectorX<Scalar> th = theta_samples.row(i).transpose();
    values[i] = func(th);
    grads.row(i) = VectorX<Scalar>(grad(th)).transpose();
  }
  const SampledFunctionT<Scalar> f =
      make_sampled_function<Scalar>(theta_samples, std::move(values), std::move(grads));
  const ConvexBodyT<Scalar> body = epigraph_body(f);
  const CostMatrixT<Scalar> cl = CostMatrixT<Scalar>::legendre(n);
  const EnvelopeResultT<Scalar> env = polar_boundary_envelope(cl, body);

  Scalar worst = Scalar(-1);
  for (Eigen::Index i = 0; i < env.size(); ++i) {
    if (!env.finite(i)) continue;
    const VectorX<Scalar> v = dehomogenize(env.lifts.row(i).transpose());
    const VectorX<Scalar> eta = v.head(n);
    const SmoothConjugateT<Scalar> sc =
        conjugate_smooth<Scalar>(func, grad, eta, VectorX<Scalar>(theta_samples.row(i).transpose()),
                                 solver_tol);
    worst = std::max(worst, std::abs(v[n] - sc.value));
  }
  if (worst < Scalar(0)) throw InvalidInputError("verify_legendre_polarity: no finite envelope outputs");
  return worst;
}

/// Sampled-data variant: the envelope is compared against the brute-force
/// conjugate over the function's own grid, so the returned discrepancy
/// carries the grid resolution error on top of the envelope error.
template <typename Scalar>
Scalar verify_legendre_polarity(const SampledFunctionT<Scalar>& f) {
  const ConvexBodyT<Scalar> body = epigraph_body(f);
  const CostMatrixT<Scalar> cl = CostMatrixT<Scalar>::legendre(f.dim());
  const EnvelopeResultT<Scalar> env = polar_boundary_envelope(cl, body);

  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < env.size(); ++i)
    if (env.finite(i)) idx.push_back(i);
  if (idx.empty()) throw InvalidInputError("verify_legendre_polarity: no finite envelope outputs");

  MatrixX<Scalar> etas(static_cast<Eigen::Index>(idx.size()), f.dim());
  VectorX<Scalar> ys(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const VectorX<Scalar> v = dehomogenize(env.lifts.row(idx[j]).transpose());
    etas.row(static_cast<Eigen::Index>(j)) = v.head(f.dim()).transpose();
    ys[static_cast<Eigen::Index>(j)] = v[f.dim()];
  }
  const auto [conj, arg] = bruteforce_conjugate_values(f, etas);
  return (ys - conj).cwiseAbs().maxCoeff();
}

/// A primal/dual grid pair; validity means the Fenchel-Young gap is
/// nonnegative (up to tol) over all grid pairs.
template <typename Scalar>
struct ConjugatePairT {
  SampledFunctionT<Scalar> primal;
  SampledFunctionT<Scalar> dual;
};

using ConjugatePair = ConjugatePairT<double>;

/// Gap matrix gap(i, j) = F(theta_i) + F*(eta_j) - <theta_i, eta_j>.
template <typename Scalar>
MatrixX<Scalar> fenchel_young_gap_matrix(const ConjugatePairT<Scalar>& pair) {
  const Eigen::Index rows = pair.primal.size();
  const Eigen::Index cols = pair.dual.size();
  MatrixX<Scalar> gap(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      gap(i, j) = pair.primal.values[i] + pair.dual.values[j] -
                  pair.primal.points.row(i).dot(pair.dual.points.row(j));
  return gap;
}

/// Pair invariant: the gap is nonnegative (up to tol) over all grid pairs.
template <typename Scalar>
void validate_conjugate_pair(const ConjugatePairT<Scalar>& pair, Scalar tol = Scalar(1e-9)) {
  Scalar worst = Scalar(0);
  for (Eigen::Index i = 0; i < pair.primal.size(); ++i) {
    if (pair.primal.is_infinite(i)) continue;
    for (Eigen::Index j = 0; j < pair.dual.size(); ++j) {
      if (pair.dual.is_infinite(j)) continue;
      const Scalar gap = pair.primal.values[i] + pair.dual.values[j] -
                         pair.primal.points.row(i).dot(pair.dual.points.row(j));
      worst = std::min(worst, gap);
    }
  }
  if (worst < -tol)
    throw InvalidInputError("conjugate pair violates the Fenchel-Young inequality by " +
                            std::to_string(static_cast<double>(-worst)));
}

}  // namespace cvxpolar
