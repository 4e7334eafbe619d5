#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cartan/errors.hpp"
#include "cartan/tolerances.hpp"

namespace cartan {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Christoffel symbols of the second kind, stored as one m x m matrix per
/// upper index: `(k, i, j)` is Gamma^k_ij.
class Christoffels {
public:
  Christoffels() = default;
  explicit Christoffels(int dim);

  int dim() const { return dim_; }
  double& operator()(int k, int i, int j) { return slices_[k](i, j); }
  double operator()(int k, int i, int j) const { return slices_[k](i, j); }
  Mat& slice(int k) { return slices_[k]; }
  const Mat& slice(int k) const { return slices_[k]; }

  /// Matrix C(v) with C(v)(k, j) = Gamma^k_ij v^i. Transport along a curve
  /// with velocity v reads dw/dt = -C(v) w.
  Mat contract(const Vec& v) const;

  /// Gamma^k_ij v^i v^j.
  Vec quadratic(const Vec& v) const;

private:
  int dim_ = 0;
  std::vector<Mat> slices_;
};

struct Box {
  Vec lo;
  Vec hi;
};

using MetricFn = std::function<Mat(const Vec&)>;
using ChristoffelFn = std::function<Christoffels(const Vec&)>;

/// A Riemannian manifold given by a single coordinate chart. Coordinates with
/// a nonzero period are angular: the metric is periodic in them, the domain
/// box does not restrict them, and curves may close up to a multiple of the
/// period.
class MetricChart {
public:
  MetricChart(std::string label, Box domain, MetricFn metric, ChristoffelFn christoffel = {},
              std::vector<double> periods = {});

  int dim() const { return static_cast<int>(domain_.lo.size()); }
  const std::string& label() const { return label_; }
  const Box& domain() const { return domain_; }
  const MetricFn& metric_fn() const { return metric_; }
  const ChristoffelFn& christoffel_fn() const { return christoffel_; }
  bool has_analytic_christoffels() const { return static_cast<bool>(christoffel_); }

  const std::vector<double>& periods() const { return periods_; }
  bool is_periodic(int axis) const { return periods_[axis] > 0.0; }

  bool contains(const Vec& x) const;
  void require_inside(const Vec& x) const;

  Mat metric(const Vec& x) const { return metric_(x); }

  /// b - a with periodic coordinates reduced to (-period/2, period/2].
  Vec wrapped_difference(const Vec& a, const Vec& b) const;

private:
  std::string label_;
  Box domain_;
  MetricFn metric_;
  ChristoffelFn christoffel_;
  std::vector<double> periods_;
};

struct TangentVector {
  Vec base;
  Vec components;
};

/// Linear frame at a point; column j holds the chart components of the j-th
/// frame vector.
struct FramePoint {
  Vec base;
  Mat columns;
};

struct CurvatureOperator {
  Vec base;
  Vec x;
  Vec y;
  Mat matrix;  // R(X, Y) acting on chart components
};

/// Full curvature tensor at a point, `(i, j, k, l)` is R^i_jkl with
/// R(d_k, d_l) d_j = R^i_jkl d_i.
class RiemannTensor {
public:
  explicit RiemannTensor(int dim);
  int dim() const { return dim_; }
  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }

  /// Matrix of R(X, Y). Assembled from the k < l half of the tensor with the
  /// antisymmetric weights X^k Y^l - X^l Y^k, so swapping X and Y negates the
  /// result bit for bit.
  Mat apply(const Vec& x, const Vec& y) const;

private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * dim_ + j) * dim_ + k) * dim_ + l;
  }
  int dim_;
  std::vector<double> data_;
};

struct GeodesicTrace {
  std::vector<double> t;
  std::vector<Vec> position;
  std::vector<Vec> velocity;
  bool exited_domain = false;
  double max_speed_drift = 0.0;
};

double min_metric_eigenvalue(const MetricChart& chart, const Vec& x);

/// Checked Christoffel evaluation: domain and positive definiteness are
/// verified, analytic symbols are used verbatim when the chart has them.
Christoffels christoffels(const MetricChart& chart, const Vec& x, const Tolerances& tol = {});

/// Central finite differences of the metric, regardless of analytic symbols.
Christoffels christoffels_fd(const MetricChart& chart, const Vec& x, double h);

/// Hot-path evaluation used inside the integrators; no checks.
Christoffels christoffels_unchecked(const MetricChart& chart, const Vec& x, const Tolerances& tol);

RiemannTensor riemann(const MetricChart& chart, const Vec& x, const Tolerances& tol = {});

CurvatureOperator curvature_op(const MetricChart& chart, const Vec& x, const TangentVector& X,
                               const TangentVector& Y, const Tolerances& tol = {});

/// Matrix of a curvature operator expressed in the given frame.
Mat in_frame(const CurvatureOperator& op, const FramePoint& frame);

/// Fixed-step RK4 geodesic. Stops early with `exited_domain` set when the
/// trace leaves the chart.
GeodesicTrace geodesic(const MetricChart& chart, const Vec& x0, const Vec& v0, double t_end,
                       double step, const Tolerances& tol = {});

/// Ric(v, v) as the trace of X -> R(X, v) v over a g-orthonormal frame.
double ricci_direction(const MetricChart& chart, const Vec& x, const Vec& v,
                       const Tolerances& tol = {});

/// Gram-Schmidt on the chart basis d_1, ..., d_m in that order.
FramePoint orthonormal_frame(const MetricChart& chart, const Vec& x, const Tolerances& tol = {});

double norm_g(const Mat& g, const Vec& v);

/// Right-hand side of the geodesic equation, shared by every integrator that
/// moves along geodesics so that identical inputs give identical paths.
inline Vec geodesic_acceleration(const Christoffels& gamma, const Vec& v) {
  return -gamma.quadratic(v);
}

}  // namespace cartan
