#include "cartan/transport.hpp"

#include <cmath>

#include "cartan/parallel.hpp"

namespace cartan {

namespace {

constexpr double kClosure = 1e-8;

struct Rates {
  Mat frame;
  Vec dev;
};

Rates rates(const MetricChart& chart, const Vec& x, const Vec& v, const Mat& f, bool develop,
            const Tolerances& tol) {
  const Christoffels gamma = christoffels_unchecked(chart, x, tol);
  Rates r;
  r.frame = -gamma.contract(v) * f;
  if (develop) r.dev = f.partialPivLu().solve(v);
  return r;
}

double frame_defect(const MetricChart& chart, const Vec& x, const Mat& f) {
  return orthogonality_defect_g(chart.metric(x), f);
}

void check_inside(const MetricChart& chart, const Vec& x) {
  if (!chart.contains(x)) chart.require_inside(x);
}

}  // namespace

double orthogonality_defect_g(const Mat& g, const Mat& f) {
  return (f.transpose() * g * f - Mat::Identity(f.cols(), f.cols())).cwiseAbs().maxCoeff();
}

TransportState integrate_transport(const MetricChart& chart, const Curve& curve, const Mat& frame0,
                                   bool develop, const Tolerances& tol, DevelopmentTrace* trace) {
  const int m = chart.dim();
  if (curve.start.size() != m || frame0.rows() != m) {
    throw Error(ErrorCode::DimensionMismatch, "transport: curve or frame dimension");
  }
  check_inside(chart, curve.start);
  const bool watch_orth = frame_defect(chart, curve.start, frame0) <= tol.tol_orth;

  Mat f = frame0;
  Vec dev = Vec::Zero(m);
  Vec x = curve.start;
  double t = 0.0;
  if (trace) trace->samples.push_back({0.0, dev, x});

  auto record = [&](const Vec& pos, double t_now, double dlen, double devlen) {
    if (watch_orth) {
      const double d = frame_defect(chart, pos, f);
      if (d > tol.tol_orth) {
        throw Error(ErrorCode::StepTooLarge,
                    "transported frame lost orthonormality (" + std::to_string(d) + ")");
      }
    }
    if (trace) {
      trace->dev_length += devlen;
      trace->g_length += dlen;
      trace->samples.push_back({t_now, dev, pos});
    }
  };

  for (const Segment& seg : curve.segments) {
    const int n = steps_for(seg.weight, tol.rk4_step);
    const double h = 1.0 / n;
    const double dt = seg.weight / n;
    if (seg.kind == Segment::Kind::Coordinate) {
      for (int k = 0; k < n; ++k) {
        const double s = k * h;
        const Vec x0 = seg.position(s), xm = seg.position(s + 0.5 * h), x1 = seg.position(s + h);
        const Vec v0 = seg.velocity(s), vm = seg.velocity(s + 0.5 * h), v1 = seg.velocity(s + h);
        check_inside(chart, xm);
        check_inside(chart, x1);
        const Rates k1 = rates(chart, x0, v0, f, develop, tol);
        const Mat f2 = f + 0.5 * h * k1.frame;
        const Rates k2 = rates(chart, xm, vm, f2, develop, tol);
        const Mat f3 = f + 0.5 * h * k2.frame;
        const Rates k3 = rates(chart, xm, vm, f3, develop, tol);
        const Mat f4 = f + h * k3.frame;
        const Rates k4 = rates(chart, x1, v1, f4, develop, tol);
        f += h / 6.0 * (k1.frame + 2.0 * k2.frame + 2.0 * k3.frame + k4.frame);
        if (develop) dev += h / 6.0 * (k1.dev + 2.0 * k2.dev + 2.0 * k3.dev + k4.dev);
        x = x1;
        t += dt;
        double dlen = 0.0, devlen = 0.0;
        if (trace) {
          dlen = h / 6.0 *
                 (norm_g(chart.metric(x0), v0) + 4.0 * norm_g(chart.metric(xm), vm) +
                  norm_g(chart.metric(x1), v1));
          devlen = h / 6.0 * (k1.dev.norm() + 2.0 * k2.dev.norm() + 2.0 * k3.dev.norm() + k4.dev.norm());
        }
        record(x, t, dlen, devlen);
      }
    } else {
      // Same stage arithmetic as geodesic_piece_end so that shooting and
      // transport see the same discrete geodesic.
      x = seg.start;
      Vec v = seg.initial_velocity;
      check_inside(chart, x);
      auto accel = [&](const Vec& p, const Vec& w) {
        return geodesic_acceleration(christoffels_unchecked(chart, p, tol), w);
      };
      for (int k = 0; k < n; ++k) {
        const Vec k1x = v, k1v = accel(x, v);
        const Vec k2x = v + 0.5 * h * k1v, k2v = accel(x + 0.5 * h * k1x, k2x);
        const Vec k3x = v + 0.5 * h * k2v, k3v = accel(x + 0.5 * h * k2x, k3x);
        const Vec k4x = v + h * k3v, k4v = accel(x + h * k3x, k4x);
        const Rates r1 = rates(chart, x, k1x, f, develop, tol);
        const Mat f2 = f + 0.5 * h * r1.frame;
        const Rates r2 = rates(chart, x + 0.5 * h * k1x, k2x, f2, develop, tol);
        const Mat f3 = f + 0.5 * h * r2.frame;
        const Rates r3 = rates(chart, x + 0.5 * h * k2x, k3x, f3, develop, tol);
        const Mat f4 = f + h * r3.frame;
        const Rates r4 = rates(chart, x + h * k3x, k4x, f4, develop, tol);
        const Vec x_prev = x;
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        f += h / 6.0 * (r1.frame + 2.0 * r2.frame + 2.0 * r3.frame + r4.frame);
        if (develop) dev += h / 6.0 * (r1.dev + 2.0 * r2.dev + 2.0 * r3.dev + r4.dev);
        check_inside(chart, x);
        t += dt;
        double dlen = 0.0, devlen = 0.0;
        if (trace) {
          const Vec xm2 = x_prev + 0.5 * h * k1x, xm3 = x_prev + 0.5 * h * k2x, x4 = x_prev + h * k3x;
          dlen = h / 6.0 *
                 (norm_g(chart.metric(x_prev), k1x) + 2.0 * norm_g(chart.metric(xm2), k2x) +
                  2.0 * norm_g(chart.metric(xm3), k3x) + norm_g(chart.metric(x4), k4x));
          devlen = h / 6.0 * (r1.dev.norm() + 2.0 * r2.dev.norm() + 2.0 * r3.dev.norm() + r4.dev.norm());
        }
        record(x, t, dlen, devlen);
      }
    }
  }
  return {x, f, dev};
}

TangentVector transport_linear(const MetricChart& chart, const Curve& curve, const TangentVector& v0,
                               const Tolerances& tol) {
  if (v0.components.size() != chart.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "transport_linear: vector dimension");
  }
  const Mat col = v0.components;
  const TransportState end = integrate_transport(chart, curve, col, false, tol);
  const double n0 = norm_g(chart.metric(curve.start), v0.components);
  const Vec v1 = end.frame_matrix.col(0);
  const double n1 = norm_g(chart.metric(end.position), v1);
  if (std::abs(n1 - n0) > tol.tol_speed * std::max(1.0, n0)) {
    throw Error(ErrorCode::StepTooLarge, "transported vector changed length by " +
                                             std::to_string(std::abs(n1 - n0)));
  }
  return {end.position, v1};
}

AffineIsometry develop_curve(const MetricChart& chart, const Curve& curve, const FramePoint& frame0,
                             const Tolerances& tol) {
  const TransportState end = integrate_transport(chart, curve, frame0.columns, true, tol);
  const double gap =
      chart.wrapped_difference(curve.start, end.position).cwiseAbs().maxCoeff();
  if (gap > kClosure) {
    throw Error(ErrorCode::NonClosedCurve, "curve ends " + std::to_string(gap) + " from its start");
  }
  const ProductPoint q{end.frame_matrix, end.dev_point};
  return frame_difference(AffineFrame{Vec::Zero(chart.dim()), frame0.columns}, claimII_inverse(q));
}

AffineIsometry develop_loop(const MetricChart& chart, const LoopSpec& loop, const FramePoint& frame0,
                            const Tolerances& tol) {
  return develop_curve(chart, build_curve(chart, loop, frame0, tol), frame0, tol);
}

namespace {

template <typename Runner>
LoopFamily loop_family(const MetricChart& chart, const Vec& x, const std::vector<double>& eps_list,
                       int i, int j, const Tolerances& tol, Runner run) {
  const FramePoint frame = orthonormal_frame(chart, x, tol);
  LoopFamily fam;
  fam.elements.resize(eps_list.size());
  fam.diagnostics.resize(eps_list.size());
  run(eps_list.size(), [&](std::size_t k) {
    const AffineIsometry h = develop_loop(chart, LoopSpec::rect(x, i, j, eps_list[k]), frame, tol);
    fam.elements[k] = h;
    fam.diagnostics[k] = {eps_list[k], linear_defect(h), h.translation.norm()};
  });
  return fam;
}

}  // namespace

LoopFamily small_loop_family(const MetricChart& chart, const Vec& x, const std::vector<double>& eps_list,
                             int i, int j, const Tolerances& tol) {
  return loop_family(chart, x, eps_list, i, j, tol,
                     [](std::size_t n, auto&& fn) { par::for_each_index(n, fn); });
}

LoopFamily small_loop_family_serial(const MetricChart& chart, const Vec& x,
                                    const std::vector<double>& eps_list, int i, int j,
                                    const Tolerances& tol) {
  return loop_family(chart, x, eps_list, i, j, tol,
                     [](std::size_t n, auto&& fn) { par::for_each_index_serial(n, fn); });
}

DevelopmentTrace development_trace(const MetricChart& chart, const Curve& curve,
                                   const FramePoint& frame0, const Tolerances& tol) {
  DevelopmentTrace trace;
  integrate_transport(chart, curve, frame0.columns, true, tol, &trace);
  return trace;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace cartan
