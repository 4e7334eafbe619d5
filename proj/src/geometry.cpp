#include "cartan/geometry.hpp"

#include <cmath>
#include <sstream>

namespace cartan {

namespace {

std::string format_point(const Vec& x) {
  std::ostringstream out;
  out << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
  out << ")";
  return out.str();
}

void require_dim(const MetricChart& chart, const Vec& v, const char* what) {
  if (v.size() != chart.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " has " + std::to_string(v.size()) + " components, chart " +
                    chart.label() + " has dimension " + std::to_string(chart.dim()));
  }
}

}  // namespace

Christoffels::Christoffels(int dim) : dim_(dim), slices_(dim, Mat::Zero(dim, dim)) {}

Mat Christoffels::contract(const Vec& v) const {
  Mat c(dim_, dim_);
  for (int k = 0; k < dim_; ++k) c.row(k) = v.transpose() * slices_[k];
  return c;
}

Vec Christoffels::quadratic(const Vec& v) const {
  Vec out(dim_);
  for (int k = 0; k < dim_; ++k) out[k] = v.dot(slices_[k] * v);
  return out;
}

MetricChart::MetricChart(std::string label, Box domain, MetricFn metric, ChristoffelFn christoffel,
                         std::vector<double> periods)
    : label_(std::move(label)),
      domain_(std::move(domain)),
      metric_(std::move(metric)),
      christoffel_(std::move(christoffel)),
      periods_(std::move(periods)) {
  if (domain_.lo.size() != domain_.hi.size() || domain_.lo.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "chart " + label_ + ": malformed domain box");
  }
  if (periods_.empty()) periods_.assign(domain_.lo.size(), 0.0);
  if (static_cast<Eigen::Index>(periods_.size()) != domain_.lo.size()) {
    throw Error(ErrorCode::DimensionMismatch, "chart " + label_ + ": period list length");
  }
}

bool MetricChart::contains(const Vec& x) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (is_periodic(i)) continue;
    if (!(x[i] > domain_.lo[i] && x[i] < domain_.hi[i])) return false;
  }
  return true;
}

void MetricChart::require_inside(const Vec& x) const {
  if (!contains(x)) {
    throw Error(ErrorCode::OutOfDomain, "point " + format_point(x) + " outside chart " + label_);
  }
}

Vec MetricChart::wrapped_difference(const Vec& a, const Vec& b) const {
  Vec d = b - a;
  for (int i = 0; i < dim(); ++i) {
    if (!is_periodic(i)) continue;
    const double p = periods_[i];
    d[i] -= p * std::round(d[i] / p);
  }
  return d;
}

RiemannTensor::RiemannTensor(int dim)
    : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0) {}

Mat RiemannTensor::apply(const Vec& x, const Vec& y) const {
  Mat out = Mat::Zero(dim_, dim_);
  for (int k = 0; k < dim_; ++k) {
    for (int l = k + 1; l < dim_; ++l) {
      const double w = x[k] * y[l] - x[l] * y[k];
      if (w == 0.0) continue;
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) out(i, j) += (*this)(i, j, k, l) * w;
    }
  }
  return out;
}

double norm_g(const Mat& g, const Vec& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); }

double min_metric_eigenvalue(const MetricChart& chart, const Vec& x) {
  const Mat g = chart.metric(x);
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

Christoffels christoffels_fd(const MetricChart& chart, const Vec& x, double h) {
  const int m = chart.dim();
  // dg[l](i, j) = d_l g_ij
  std::vector<Mat> dg(m);
  for (int l = 0; l < m; ++l) {
    Vec xp = x, xm = x;
    xp[l] += h;
    xm[l] -= h;
    dg[l] = (chart.metric(xp) - chart.metric(xm)) / (2.0 * h);
  }
  const Mat ginv = chart.metric(x).inverse();
  Christoffels gamma(m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      // lowered symbol [ij, l] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
      Vec lowered(m);
      for (int l = 0; l < m; ++l) lowered[l] = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
      const Vec raised = ginv * lowered;
      for (int k = 0; k < m; ++k) {
        gamma(k, i, j) = raised[k];
        gamma(k, j, i) = raised[k];
      }
    }
  }
  return gamma;
}

Christoffels christoffels_unchecked(const MetricChart& chart, const Vec& x, const Tolerances& tol) {
  if (chart.has_analytic_christoffels()) return chart.christoffel_fn()(x);
  return christoffels_fd(chart, x, tol.h_fd);
}

Christoffels christoffels(const MetricChart& chart, const Vec& x, const Tolerances& tol) {
  require_dim(chart, x, "point");
  chart.require_inside(x);
  const double lambda = min_metric_eigenvalue(chart, x);
  if (!(lambda > tol.eps_pd)) {
    throw Error(ErrorCode::MetricDegenerate, "metric of " + chart.label() + " at " +
                                                 format_point(x) + " has eigenvalue " +
                                                 std::to_string(lambda));
  }
  return christoffels_unchecked(chart, x, tol);
}

RiemannTensor riemann(const MetricChart& chart, const Vec& x, const Tolerances& tol) {
  const Christoffels gamma = christoffels(chart, x, tol);
  const int m = chart.dim();
  // Nested differences lose accuracy when the symbols are themselves finite
  // differences; the outer step then grows to sqrt(h_fd).
  const double H = chart.has_analytic_christoffels() ? tol.h_fd : std::sqrt(tol.h_fd);

  // dgamma[l](k, i, j) = d_l Gamma^k_ij, five-point stencil
  std::vector<Christoffels> dgamma(m, Christoffels(m));
  for (int l = 0; l < m; ++l) {
    auto at = [&](double s) {
      Vec y = x;
      y[l] += s;
      return christoffels_unchecked(chart, y, tol);
    };
    const Christoffels p2 = at(2 * H), p1 = at(H), m1 = at(-H), m2 = at(-2 * H);
    for (int k = 0; k < m; ++k)
      dgamma[l].slice(k) =
          (-p2.slice(k) + 8.0 * p1.slice(k) - 8.0 * m1.slice(k) + m2.slice(k)) / (12.0 * H);
  }

  RiemannTensor R(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        for (int l = k + 1; l < m; ++l) {
          double v = dgamma[k](i, l, j) - dgamma[l](i, k, j);
          for (int p = 0; p < m; ++p) v += gamma(i, k, p) * gamma(p, l, j) - gamma(i, l, p) * gamma(p, k, j);
          R(i, j, k, l) = v;
          R(i, j, l, k) = -v;
        }
      }
    }
  }
  return R;
}

CurvatureOperator curvature_op(const MetricChart& chart, const Vec& x, const TangentVector& X,
                               const TangentVector& Y, const Tolerances& tol) {
  require_dim(chart, x, "point");
  require_dim(chart, X.components, "X");
  require_dim(chart, Y.components, "Y");
  if (X.base.size() != x.size() || Y.base.size() != x.size() || (X.base - x).norm() != 0.0 ||
      (Y.base - x).norm() != 0.0) {
    throw Error(ErrorCode::DimensionMismatch, "curvature_op: tangent vectors not based at x");
  }
  const RiemannTensor R = riemann(chart, x, tol);
  return CurvatureOperator{x, X.components, Y.components, R.apply(X.components, Y.components)};
}

Mat in_frame(const CurvatureOperator& op, const FramePoint& frame) {
  return frame.columns.partialPivLu().solve(op.matrix * frame.columns);
}

FramePoint orthonormal_frame(const MetricChart& chart, const Vec& x, const Tolerances& tol) {
  chart.require_inside(x);
  const int m = chart.dim();
  const Mat g = chart.metric(x);
  Mat e = Mat::Identity(m, m);
  for (int j = 0; j < m; ++j) {
    Vec v = e.col(j);
    for (int i = 0; i < j; ++i) v -= e.col(i).dot(g * v) * e.col(i);
    const double n = norm_g(g, v);
    if (!(n > tol.eps_pd)) throw Error(ErrorCode::MetricDegenerate, "Gram-Schmidt breakdown");
    e.col(j) = v / n;
  }
  if (!(std::abs(e.determinant()) > tol.eps_frame)) {
    throw Error(ErrorCode::SingularFrame, "orthonormal frame is singular");
  }
  return FramePoint{x, e};
}

GeodesicTrace geodesic(const MetricChart& chart, const Vec& x0, const Vec& v0, double t_end,
                       double step, const Tolerances& tol) {
  require_dim(chart, x0, "x0");
  require_dim(chart, v0, "v0");
  chart.require_inside(x0);
  if (!(step > 0.0)) throw Error(ErrorCode::StepTooLarge, "geodesic step must be positive");

  const int n_steps = std::max(1, static_cast<int>(std::ceil(std::abs(t_end) / step - 1e-9)));
  const double h = t_end / n_steps;

  GeodesicTrace trace;
  trace.t.push_back(0.0);
  trace.position.push_back(x0);
  trace.velocity.push_back(v0);
  const double speed0 = norm_g(chart.metric(x0), v0);

  auto accel = [&](const Vec& x, const Vec& v) {
    return geodesic_acceleration(christoffels_unchecked(chart, x, tol), v);
  };

  Vec x = x0, v = v0;
  for (int n = 0; n < n_steps; ++n) {
    const Vec k1x = v, k1v = accel(x, v);
    const Vec k2x = v + 0.5 * h * k1v, k2v = accel(x + 0.5 * h * k1x, k2x);
    const Vec k3x = v + 0.5 * h * k2v, k3v = accel(x + 0.5 * h * k2x, k3x);
    const Vec k4x = v + h * k3v, k4v = accel(x + h * k3x, k4x);
    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!chart.contains(x)) {
      trace.exited_domain = true;
      break;
    }
    trace.t.push_back((n + 1) * h);
    trace.position.push_back(x);
    trace.velocity.push_back(v);
    trace.max_speed_drift =
        std::max(trace.max_speed_drift, std::abs(norm_g(chart.metric(x), v) - speed0));
  }
  if (trace.max_speed_drift > 10.0 * tol.tol_speed) {
    throw Error(ErrorCode::StepTooLarge,
                "geodesic speed drift " + std::to_string(trace.max_speed_drift));
  }
  return trace;
}

double ricci_direction(const MetricChart& chart, const Vec& x, const Vec& v, const Tolerances& tol) {
  require_dim(chart, v, "v");
  const RiemannTensor R = riemann(chart, x, tol);
  const FramePoint frame = orthonormal_frame(chart, x, tol);
  const Mat g = chart.metric(x);
  double ric = 0.0;
  for (int a = 0; a < chart.dim(); ++a) {
    const Vec e = frame.columns.col(a);
    ric += e.dot(g * (R.apply(e, v) * v));
  }
  return ric;
}

}  // namespace cartan
