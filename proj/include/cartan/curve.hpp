#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "cartan/geometry.hpp"

namespace cartan {

/// One smooth piece of a curve, parametrised by a local s in [0, 1].
/// Coordinate pieces carry closed-form position and velocity; geodesic pieces
/// are integrated together with whatever is transported along them.
struct Segment {
  enum class Kind { Coordinate, Geodesic };

  Kind kind = Kind::Coordinate;
  double weight = 1.0;  // share of the overall curve parameter

  std::function<Vec(double)> position;
  std::function<Vec(double)> velocity;

  Vec start;
  Vec initial_velocity;
};

struct Curve {
  std::vector<Segment> segments;
  Vec start;
};

/// Number of RK4 steps given to a piece of the given weight.
int steps_for(double weight, double step);

enum class LoopKind { CoordRect, GeodesicPolygon, ParamCurve, CoordLine };

std::string_view to_string(LoopKind kind);

/// A closed curve in chart coordinates based at `base`.
///  - CoordRect: the square x, x + eps e_i, x + eps (e_i + e_j), x + eps e_j.
///  - GeodesicPolygon: geodesic edges x -> q_1 -> ... -> q_n -> x with
///    q_k = exp_x(side * direction_k), directions in the base orthonormal frame.
///  - ParamCurve: closed sample polyline through x, interpolated by a
///    chord-length Hermite spline.
///  - CoordLine: `turns` full periods along a periodic coordinate.
/// orientation -1 traverses the same loop backwards.
struct LoopSpec {
  Vec base;
  LoopKind kind = LoopKind::CoordRect;
  int orientation = 1;

  int axis_i = 0;
  int axis_j = 1;
  double eps = 0.0;

  std::vector<Vec> directions;
  double side = 0.0;

  std::vector<Vec> samples;

  int axis = 0;
  int turns = 1;

  static LoopSpec rect(Vec base, int i, int j, double eps, int orientation = 1);
  static LoopSpec polygon(Vec base, std::vector<Vec> directions, double side, int orientation = 1);
  static LoopSpec param_curve(std::vector<Vec> samples, int orientation = 1);
  static LoopSpec coord_line(Vec base, int axis, int turns = 1, int orientation = 1);
};

/// Builds the integrable curve of a loop. `frame` is the orthonormal frame in
/// which polygon directions are read; `tol.rk4_step` fixes the discretisation
/// shared with the transport integrator.
Curve build_curve(const MetricChart& chart, const LoopSpec& loop, const FramePoint& frame,
                  const Tolerances& tol = {});

/// Open curves for development traces.
Curve straight_segment(const Vec& a, const Vec& b);
Curve coordinate_arc(const Vec& base, int axis, double length);
Curve spline_through(const std::vector<Vec>& samples, bool closed);

Curve reversed(const MetricChart& chart, const Curve& curve, const Tolerances& tol);
/// Traverses the curve `times` times; each copy keeps its weight, so every
/// traversal gets the same number of integration steps.
Curve repeated(const Curve& curve, int times);

/// Endpoint of a geodesic piece integrated with exactly `n_steps` RK4 steps
/// over s in [0, 1]; also returns the end velocity.
std::pair<Vec, Vec> geodesic_piece_end(const MetricChart& chart, const Vec& start,
                                       const Vec& velocity, int n_steps, const Tolerances& tol);

/// Newton shooting for the geodesic piece from a to b (n_steps fixed).
Vec shoot_geodesic(const MetricChart& chart, const Vec& a, const Vec& b, const Vec& guess,
                   int n_steps, const Tolerances& tol);

}  // namespace cartan
