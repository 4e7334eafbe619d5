#include "cartan/curve.hpp"

#include <cmath>

namespace cartan {

namespace {

constexpr double kClosure = 1e-12;

Segment coordinate_segment(std::function<Vec(double)> pos, std::function<Vec(double)> vel,
                           double weight) {
  Segment s;
  s.kind = Segment::Kind::Coordinate;
  s.weight = weight;
  s.position = std::move(pos);
  s.velocity = std::move(vel);
  return s;
}

Segment line_segment(const Vec& a, const Vec& b, double weight) {
  const Vec d = b - a;
  return coordinate_segment([a, d](double s) -> Vec { return a + s * d; },
                            [d](double) -> Vec { return d; }, weight);
}

Segment geodesic_segment(const Vec& start, const Vec& velocity, double weight) {
  Segment s;
  s.kind = Segment::Kind::Geodesic;
  s.weight = weight;
  s.start = start;
  s.initial_velocity = velocity;
  return s;
}

void normalise_weights(Curve& c) {
  double total = 0.0;
  for (const Segment& s : c.segments) total += s.weight;
  for (Segment& s : c.segments) s.weight /= total;
}

}  // namespace

int steps_for(double weight, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::StepTooLarge, "integration step must be positive");
  return std::max(1, static_cast<int>(std::ceil(weight / step - 1e-9)));
}

std::string_view to_string(LoopKind kind) {
  switch (kind) {
    case LoopKind::CoordRect: return "COORD_RECT";
    case LoopKind::GeodesicPolygon: return "GEODESIC_POLYGON";
    case LoopKind::ParamCurve: return "PARAM_CURVE";
    case LoopKind::CoordLine: return "COORD_LINE";
  }
  return "?";
}

LoopSpec LoopSpec::rect(Vec base, int i, int j, double eps, int orientation) {
  LoopSpec l;
  l.base = std::move(base);
  l.kind = LoopKind::CoordRect;
  l.axis_i = i;
  l.axis_j = j;
  l.eps = eps;
  l.orientation = orientation;
  return l;
}

LoopSpec LoopSpec::polygon(Vec base, std::vector<Vec> directions, double side, int orientation) {
  LoopSpec l;
  l.base = std::move(base);
  l.kind = LoopKind::GeodesicPolygon;
  l.directions = std::move(directions);
  l.side = side;
  l.orientation = orientation;
  return l;
}

LoopSpec LoopSpec::param_curve(std::vector<Vec> samples, int orientation) {
  LoopSpec l;
  if (!samples.empty()) l.base = samples.front();
  l.kind = LoopKind::ParamCurve;
  l.samples = std::move(samples);
  l.orientation = orientation;
  return l;
}

LoopSpec LoopSpec::coord_line(Vec base, int axis, int turns, int orientation) {
  LoopSpec l;
  l.base = std::move(base);
  l.kind = LoopKind::CoordLine;
  l.axis = axis;
  l.turns = turns;
  l.orientation = orientation;
  return l;
}

std::pair<Vec, Vec> geodesic_piece_end(const MetricChart& chart, const Vec& start,
                                       const Vec& velocity, int n_steps, const Tolerances& tol) {
  const double h = 1.0 / n_steps;
  auto accel = [&](const Vec& x, const Vec& v) {
    return geodesic_acceleration(christoffels_unchecked(chart, x, tol), v);
  };
  Vec x = start, v = velocity;
  for (int n = 0; n < n_steps; ++n) {
    const Vec k1x = v, k1v = accel(x, v);
    const Vec k2x = v + 0.5 * h * k1v, k2v = accel(x + 0.5 * h * k1x, k2x);
    const Vec k3x = v + 0.5 * h * k2v, k3v = accel(x + 0.5 * h * k2x, k3x);
    const Vec k4x = v + h * k3v, k4v = accel(x + h * k3x, k4x);
    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!chart.contains(x)) {
      throw Error(ErrorCode::OutOfDomain, "geodesic edge leaves chart " + chart.label());
    }
  }
  return {x, v};
}

Vec shoot_geodesic(const MetricChart& chart, const Vec& a, const Vec& b, const Vec& guess,
                   int n_steps, const Tolerances& tol) {
  const int m = chart.dim();
  auto miss = [&](const Vec& w) {
    return chart.wrapped_difference(b, geodesic_piece_end(chart, a, w, n_steps, tol).first);
  };
  Vec w = guess;
  Vec r = miss(w);
  for (int iter = 0; iter < 40 && r.cwiseAbs().maxCoeff() > 1e-14; ++iter) {
    Mat jac(m, m);
    const double h = 1e-6 * std::max(1.0, w.norm());
    for (int j = 0; j < m; ++j) {
      Vec wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      jac.col(j) = (miss(wp) - miss(wm)) / (2.0 * h);
    }
    w -= jac.partialPivLu().solve(r);
    r = miss(w);
  }
  if (r.cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorCode::NonClosedCurve, "geodesic shooting did not converge");
  }
  return w;
}

Curve straight_segment(const Vec& a, const Vec& b) {
  Curve c;
  c.start = a;
  c.segments.push_back(line_segment(a, b, 1.0));
  return c;
}

Curve coordinate_arc(const Vec& base, int axis, double length) {
  Vec d = Vec::Zero(base.size());
  d[axis] = length;
  return straight_segment(base, base + d);
}

Curve spline_through(const std::vector<Vec>& samples, bool closed) {
  if (samples.size() < 2) throw Error(ErrorCode::NonClosedCurve, "curve needs two samples");
  const std::size_t n = samples.size() - 1;  // number of pieces
  std::vector<double> chord(n);
  for (std::size_t k = 0; k < n; ++k) {
    chord[k] = (samples[k + 1] - samples[k]).norm();
    if (!(chord[k] > 0.0)) throw Error(ErrorCode::NonClosedCurve, "repeated curve sample");
  }
  // For closed curves the last sample may differ from the first by whole
  // periods; the shift carries neighbours across the seam.
  const Vec shift = samples[n] - samples[0];
  std::vector<Vec> tangent(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    if (k > 0 && k < n) {
      tangent[k] = (samples[k + 1] - samples[k - 1]) / (chord[k - 1] + chord[k]);
    } else if (closed) {
      const Vec prev = samples[n - 1] - shift;
      tangent[k] = (samples[1] - prev) / (chord[n - 1] + chord[0]);
    } else if (k == 0) {
      tangent[k] = (samples[1] - samples[0]) / chord[0];
    } else {
      tangent[k] = (samples[n] - samples[n - 1]) / chord[n - 1];
    }
  }
  Curve c;
  c.start = samples[0];
  for (std::size_t k = 0; k < n; ++k) {
    const Vec p0 = samples[k], p1 = samples[k + 1];
    const Vec m0 = chord[k] * tangent[k], m1 = chord[k] * tangent[k + 1];
    auto pos = [p0, p1, m0, m1](double s) -> Vec {
      const double s2 = s * s, s3 = s2 * s;
      return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 +
             (s3 - s2) * m1;
    };
    auto vel = [p0, p1, m0, m1](double s) -> Vec {
      const double s2 = s * s;
      return (6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * p1 +
             (3 * s2 - 2 * s) * m1;
    };
    c.segments.push_back(coordinate_segment(pos, vel, chord[k]));
  }
  normalise_weights(c);
  return c;
}

Curve reversed(const MetricChart& chart, const Curve& curve, const Tolerances& tol) {
  Curve out;
  for (auto it = curve.segments.rbegin(); it != curve.segments.rend(); ++it) {
    const Segment& s = *it;
    if (s.kind == Segment::Kind::Coordinate) {
      auto pos = s.position;
      auto vel = s.velocity;
      out.segments.push_back(coordinate_segment([pos](double t) { return pos(1.0 - t); },
                                                 [vel](double t) -> Vec { return -vel(1.0 - t); },
                                                 s.weight));
    } else {
      const auto [end, v_end] = geodesic_piece_end(chart, s.start, s.initial_velocity,
                                                    steps_for(s.weight, tol.rk4_step), tol);
      out.segments.push_back(geodesic_segment(end, -v_end, s.weight));
    }
  }
  const Segment& first = out.segments.front();
  out.start = first.kind == Segment::Kind::Coordinate ? first.position(0.0) : first.start;
  return out;
}

Curve repeated(const Curve& curve, int times) {
  if (times < 1) throw Error(ErrorCode::NonClosedCurve, "repeat count must be positive");
  Curve out;
  out.start = curve.start;
  for (int t = 0; t < times; ++t)
    for (const Segment& s : curve.segments) {
      out.segments.push_back(s);
    }
  return out;
}

Curve build_curve(const MetricChart& chart, const LoopSpec& loop, const FramePoint& frame,
                  const Tolerances& tol) {
  const int m = chart.dim();
  if (loop.kind != LoopKind::ParamCurve && loop.base.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "loop base point dimension");
  }
  Curve c;
  switch (loop.kind) {
    case LoopKind::CoordRect: {
      if (loop.axis_i < 0 || loop.axis_j < 0 || loop.axis_i >= m || loop.axis_j >= m ||
          loop.axis_i == loop.axis_j) {
        throw Error(ErrorCode::DimensionMismatch, "rectangle axes out of range");
      }
      const Vec ei = loop.eps * Vec::Unit(m, loop.axis_i);
      const Vec ej = loop.eps * Vec::Unit(m, loop.axis_j);
      const Vec& x = loop.base;
      c.start = x;
      c.segments = {line_segment(x, x + ei, 0.25), line_segment(x + ei, x + ei + ej, 0.25),
                    line_segment(x + ei + ej, x + ej, 0.25), line_segment(x + ej, x, 0.25)};
      break;
    }
    case LoopKind::GeodesicPolygon: {
      const std::size_t n = loop.directions.size();
      if (n < 2) throw Error(ErrorCode::ConfigInvalid, "polygon needs at least two directions");
      const double weight = 1.0 / static_cast<double>(n + 1);
      const int n_steps = steps_for(weight, tol.rk4_step);
      std::vector<Vec> vertex;
      std::vector<Vec> spoke;
      for (const Vec& d : loop.directions) {
        if (d.size() != m) throw Error(ErrorCode::DimensionMismatch, "polygon direction dimension");
        spoke.push_back(loop.side * (frame.columns * d.normalized()));
        vertex.push_back(geodesic_piece_end(chart, loop.base, spoke.back(), n_steps, tol).first);
      }
      c.start = loop.base;
      c.segments.push_back(geodesic_segment(loop.base, spoke.front(), weight));
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const Vec guess = chart.wrapped_difference(vertex[k], vertex[k + 1]);
        const Vec w = shoot_geodesic(chart, vertex[k], vertex[k + 1], guess, n_steps, tol);
        c.segments.push_back(geodesic_segment(vertex[k], w, weight));
      }
      const Vec back = shoot_geodesic(chart, vertex.back(), loop.base, -spoke.back(), n_steps, tol);
      c.segments.push_back(geodesic_segment(vertex.back(), back, weight));
      break;
    }
    case LoopKind::ParamCurve: {
      if (loop.samples.size() < 3) throw Error(ErrorCode::NonClosedCurve, "too few samples");
      for (const Vec& p : loop.samples)
        if (p.size() != m) throw Error(ErrorCode::DimensionMismatch, "curve sample dimension");
      const double gap =
          chart.wrapped_difference(loop.samples.front(), loop.samples.back()).cwiseAbs().maxCoeff();
      if (gap > kClosure) {
        throw Error(ErrorCode::NonClosedCurve, "sample curve does not close (gap " +
                                                   std::to_string(gap) + ")");
      }
      c = spline_through(loop.samples, true);
      break;
    }
    case LoopKind::CoordLine: {
      if (loop.axis < 0 || loop.axis >= m || !chart.is_periodic(loop.axis)) {
        throw Error(ErrorCode::NonClosedCurve, "coordinate line needs a periodic axis");
      }
      c = coordinate_arc(loop.base, loop.axis, loop.turns * chart.periods()[loop.axis]);
      break;
    }
  }
  if (loop.orientation < 0) return reversed(chart, c, tol);
  return c;
}

}  // namespace cartan
