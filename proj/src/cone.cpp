#include "cartan/cone.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "cartan/parallel.hpp"
#include "cartan/transport.hpp"

namespace cartan {

ConeChart make_cone(const MetricChart& base, double r_min, double r_max) {
  if (!(r_min > 0.0) || !(r_max > r_min)) {
    throw Error(ErrorCode::MetricDegenerate, "cone radii must satisfy 0 < r_min < r_max");
  }
  const int l = base.dim();
  const int m = l + 1;
  Vec probe = 0.5 * (base.domain().lo + base.domain().hi);
  for (int a = 0; a < l; ++a)
    if (base.is_periodic(a)) probe[a] = 0.0;
  if (!(min_metric_eigenvalue(base, probe) > Tolerances{}.eps_pd)) {
    throw Error(ErrorCode::MetricDegenerate, "cone base metric is not positive definite");
  }

  Box box{Vec(m), Vec(m)};
  box.lo << r_min, base.domain().lo;
  box.hi << r_max, base.domain().hi;
  std::vector<double> periods{0.0};
  periods.insert(periods.end(), base.periods().begin(), base.periods().end());

  MetricFn metric = [base, m, l](const Vec& x) -> Mat {
    Mat g = Mat::Zero(m, m);
    g(0, 0) = 1.0;
    g.bottomRightCorner(l, l) = x[0] * x[0] * base.metric(x.tail(l));
    return g;
  };
  ChristoffelFn gamma;
  if (base.has_analytic_christoffels()) {
    gamma = [base, m, l](const Vec& x) {
      const double r = x[0];
      const Vec y = x.tail(l);
      const Mat f = base.metric(y);
      const Christoffels bg = base.christoffel_fn()(y);
      Christoffels out(m);
      out.slice(0).bottomRightCorner(l, l) = -r * f;
      for (int a = 0; a < l; ++a) {
        out(a + 1, 0, a + 1) = 1.0 / r;
        out(a + 1, a + 1, 0) = 1.0 / r;
        out.slice(a + 1).bottomRightCorner(l, l) += bg.slice(a);
      }
      return out;
    };
  }
  MetricChart chart("cone(" + base.label() + ")", box, metric, gamma, periods);
  return {base, r_min, r_max, std::move(chart)};
}

RadialField::RadialField(const MetricChart& chart, Vec x, Vec value_at_x, int steps,
                         const Tolerances& tol)
    : chart_(&chart), x_(std::move(x)), v_(std::move(value_at_x)), steps_(steps), tol_(tol) {
  if (x_.size() != chart.dim() || v_.size() != chart.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "radial field dimensions");
  }
  chart.require_inside(x_);
}

Vec RadialField::at(const Vec& y) const {
  if (y.size() != x_.size()) throw Error(ErrorCode::DimensionMismatch, "radial field query");
  chart_->require_inside(y);
  const Vec d = y - x_;
  const double h = 1.0 / steps_;
  auto rate = [&](double s, const Vec& v) -> Vec {
    const Christoffels gamma = christoffels_unchecked(*chart_, x_ + s * d, tol_);
    return -gamma.contract(d) * v - d;
  };
  Vec v = v_;
  for (int k = 0; k < steps_; ++k) {
    const double s = k * h;
    const Vec k1 = rate(s, v);
    const Vec k2 = rate(s + 0.5 * h, v + 0.5 * h * k1);
    const Vec k3 = rate(s + 0.5 * h, v + 0.5 * h * k2);
    const Vec k4 = rate(s + h, v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return v;
}

VectorField RadialField::as_function() const {
  return [self = *this](const Vec& y) { return self.at(y); };
}

std::vector<Vec> probe_directions(int dim) {
  std::vector<Vec> dirs;
  for (int i = 0; i < dim; ++i) {
    dirs.push_back(Vec::Unit(dim, i));
    dirs.push_back(-Vec::Unit(dim, i));
  }
  for (int i = 0; dim > 1 && dirs.size() < 8; i = (i + 1) % dim) {
    const int j = (i + 1) % dim;
    const Vec s = (Vec::Unit(dim, i) + Vec::Unit(dim, j)).normalized();
    const Vec t = (Vec::Unit(dim, i) - Vec::Unit(dim, j)).normalized();
    for (const Vec& v : {s, t, Vec(-s), Vec(-t)})
      if (dirs.size() < 8) dirs.push_back(v);
  }
  return dirs;
}

std::vector<RadialProbe> radial_field_from_point(const MetricChart& chart, const Vec& x,
                                                 const Vec& p_star, double probe_radius,
                                                 const Tolerances& tol) {
  const int m = chart.dim();
  if (p_star.size() != m) throw Error(ErrorCode::DimensionMismatch, "p_star dimension");
  const FramePoint frame = orthonormal_frame(chart, x, tol);
  const Vec v_x = frame.columns * p_star;
  const std::vector<Vec> dirs = probe_directions(m);
  constexpr int kSteps = 200;
  constexpr int kRadii = 4;

  std::vector<std::vector<RadialProbe>> per_dir(dirs.size());
  par::for_each_index(dirs.size(), [&](std::size_t k) {
    Vec pos = x;
    Vec vel = probe_radius * (frame.columns * dirs[k]);
    Vec field = v_x;
    const double h = 1.0 / kSteps;
    auto rates = [&](const Vec& p, const Vec& w, const Vec& f) {
      const Christoffels gamma = christoffels_unchecked(chart, p, tol);
      return std::array<Vec, 3>{w, Vec(-gamma.quadratic(w)), Vec(-gamma.contract(w) * f - w)};
    };
    for (int n = 1; n <= kSteps; ++n) {
      const auto k1 = rates(pos, vel, field);
      const auto k2 = rates(pos + 0.5 * h * k1[0], vel + 0.5 * h * k1[1], field + 0.5 * h * k1[2]);
      const auto k3 = rates(pos + 0.5 * h * k2[0], vel + 0.5 * h * k2[1], field + 0.5 * h * k2[2]);
      const auto k4 = rates(pos + h * k3[0], vel + h * k3[1], field + h * k3[2]);
      pos += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
      vel += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
      field += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
      chart.require_inside(pos);
      if (n % (kSteps / kRadii) == 0) {
        const int j = n / (kSteps / kRadii);
        per_dir[k].push_back({dirs[k], probe_radius * j / kRadii, pos, field});
      }
    }
  });
  std::vector<RadialProbe> out;
  for (auto& v : per_dir) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::string_view to_string(ConeVerdict v) {
  switch (v) {
    case ConeVerdict::Cone: return "CONE";
    case ConeVerdict::NotCone: return "NOT_CONE";
    case ConeVerdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

namespace {

Vec flow(const MetricChart& chart, const VectorField& field, Vec q, double duration, double dt) {
  if (duration <= 0.0) return q;
  const int n = std::max(1, static_cast<int>(std::ceil(duration / dt - 1e-9)));
  const double h = duration / n;
  for (int k = 0; k < n; ++k) {
    const Vec k1 = field(q);
    const Vec k2 = field(q + 0.5 * h * k1);
    const Vec k3 = field(q + 0.5 * h * k2);
    const Vec k4 = field(q + h * k3);
    q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    chart.require_inside(q);
  }
  return q;
}

double f_value(const MetricChart& chart, const VectorField& field, const Vec& q) {
  const Vec v = field(q);
  return v.dot(chart.metric(q) * v);
}

}  // namespace

double homothety_check(const MetricChart& chart, const VectorField& field,
                       const std::vector<Vec>& points, const std::vector<double>& t_list, double dt,
                       double fd_step) {
  const int m = chart.dim();
  std::vector<double> times = t_list;
  std::sort(times.begin(), times.end());
  std::vector<double> worst(points.size(), 0.0);

  par::for_each_index(points.size(), [&](std::size_t p) {
    const Vec& q = points[p];
    const Mat g_q = chart.metric(q);
    const double f_q = f_value(chart, field, q);
    // Trajectories of q and of its 2m stencil neighbours, advanced through the
    // sorted times.
    std::vector<Vec> traj{q};
    std::vector<double> spacing(m);
    for (int j = 0; j < m; ++j) {
      Vec plus = q, minus = q;
      plus[j] += fd_step;
      minus[j] -= fd_step;
      spacing[j] = plus[j] - minus[j];
      traj.push_back(plus);
      traj.push_back(minus);
    }
    double t_prev = 0.0;
    for (double t : times) {
      for (Vec& y : traj) y = flow(chart, field, y, t - t_prev, dt);
      t_prev = t;
      Mat jac(m, m);
      for (int j = 0; j < m; ++j) jac.col(j) = (traj[1 + 2 * j] - traj[2 + 2 * j]) / spacing[j];
      const double scale = std::exp(-2.0 * t);
      const Mat pull = jac.transpose() * chart.metric(traj[0]) * jac;
      double r = (pull - scale * g_q).cwiseAbs().maxCoeff();
      r = std::max(r, std::abs(f_value(chart, field, traj[0]) - scale * f_q));
      worst[p] = std::max(worst[p], r);
    }
  });
  return points.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

ConeCertificate certify_cone(const MetricChart& chart, const Vec& x, const std::optional<Vec>& p_star,
                             const ConeOptions& options, const Tolerances& tol) {
  const int m = chart.dim();
  if (x.size() != m) throw Error(ErrorCode::DimensionMismatch, "certify_cone: base point");
  chart.require_inside(x);
  const FramePoint frame = orthonormal_frame(chart, x, tol);

  ConeCertificate cert;
  cert.base = x;
  Vec v_x;
  if (p_star) {
    if (p_star->size() != m) throw Error(ErrorCode::DimensionMismatch, "certify_cone: p_star");
    cert.p_star = *p_star;
    v_x = frame.columns * *p_star;
  } else {
    const HolonomySample sample = sample_holonomy(chart, x, options.protocol, tol);
    const FixedPointResult fp = solve_fixed_point(sample.elements, tol);
    if (fp.verdict == FixedPointVerdict::NoFixedPoint) {
      throw Error(ErrorCode::NoFixedPoint, "holonomy sample at the base point has no fixed point "
                                           "(residual " + std::to_string(fp.residual) + ")");
    }
    cert.p_star_from_holonomy = true;
    cert.fixed_point_residual = fp.residual;
    v_x = sample.frame.columns * fp.point;
    cert.p_star = frame.columns.partialPivLu().solve(v_x);
  }
  cert.field_at_base = v_x;
  cert.field_norm = norm_g(chart.metric(x), v_x);

  const RadialField field(chart, x, v_x, 200, tol);
  const std::vector<RadialProbe> probes =
      radial_field_from_point(chart, x, cert.p_star, options.probe_radius, tol);
  std::vector<Vec> points{x};
  std::vector<Vec> flow_points{x};
  for (const RadialProbe& p : probes) {
    points.push_back(p.point);
    if (std::abs(p.radius - 0.5 * options.probe_radius) < 1e-12) flow_points.push_back(p.point);
  }
  cert.probe_count = static_cast<int>(points.size());

  struct Local {
    double nabla = 0, curv = 0, grad = 0;
  };
  std::vector<Local> local(points.size());
  const double h = options.fd_step;
  auto f_at = [&](const Vec& y) {
    const Vec v = field.at(y);
    return v.dot(chart.metric(y) * v);
  };
  par::for_each_index(points.size(), [&](std::size_t k) {
    const Vec& q = points[k];
    const Mat g = chart.metric(q);
    const FramePoint e = orthonormal_frame(chart, q, tol);
    const Christoffels gamma = christoffels(chart, q, tol);
    const RiemannTensor R = riemann(chart, q, tol);
    const Vec vq = field.at(q);
    Local out;
    for (int a = 0; a < m; ++a) {
      const Vec ea = e.columns.col(a);
      const Vec dv = (field.at(q + h * ea) - field.at(q - h * ea)) / (2.0 * h);
      const Vec nabla = dv + gamma.contract(ea) * vq;
      out.nabla = std::max(out.nabla, norm_g(g, nabla + ea));
      for (int b = a + 1; b < m; ++b)
        out.curv = std::max(out.curv, norm_g(g, R.apply(ea, e.columns.col(b)) * vq));
    }
    const double vn = norm_g(g, vq);
    if (vn > tol.eps_v) {
      const Vec vhat = vq / vn;
      double ric = 0.0;
      for (int c = 0; c < m; ++c) {
        const Vec ec = e.columns.col(c);
        ric += ec.dot(g * (R.apply(ec, vhat) * vhat));
      }
      out.curv = std::max(out.curv, std::abs(ric));
    }
    Vec df(m);
    for (int i = 0; i < m; ++i) {
      Vec plus = q, minus = q;
      plus[i] += h;
      minus[i] -= h;
      df[i] = (f_at(plus) - f_at(minus)) / (plus[i] - minus[i]);
    }
    const Vec grad = g.ldlt().solve(df);
    out.grad = norm_g(g, grad + 2.0 * vq);
    local[k] = out;
  });
  for (const Local& l : local) {
    cert.residual_nabla = std::max(cert.residual_nabla, l.nabla);
    cert.residual_curv = std::max(cert.residual_curv, l.curv);
    cert.residual_grad = std::max(cert.residual_grad, l.grad);
  }
  cert.residual_homothety =
      homothety_check(chart, field.as_function(), flow_points, options.t_list, options.flow_dt, h);

  if (cert.field_norm <= tol.eps_v) {
    cert.verdict = ConeVerdict::Inconclusive;
  } else if (cert.residual_nabla < tol.tol_cone && cert.residual_curv < tol.tol_cone &&
             cert.residual_grad < tol.tol_cone && cert.residual_homothety < tol.tol_cone) {
    cert.verdict = ConeVerdict::Cone;
  } else {
    cert.verdict = ConeVerdict::NotCone;
  }
  return cert;
}

}  // namespace cartan
