#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cartan/geometry.hpp"
#include "cartan/holonomy.hpp"

namespace cartan {

/// dr^2 + r^2 (base metric) on (r_min, r_max) x base domain.
struct ConeChart {
  MetricChart base;
  double r_min;
  double r_max;
  MetricChart chart;
};

ConeChart make_cone(const MetricChart& base, double r_min = 0.05, double r_max = 20.0);

using VectorField = std::function<Vec(const Vec&)>;

/// The field V with V(x) given and nabla_{y'} V = -y' along the straight
/// coordinate segment from x to any query point y. For a cone this is
/// -r d/dr whatever the path; elsewhere the result is path dependent, which
/// the certifier detects.
class RadialField {
public:
  RadialField(const MetricChart& chart, Vec x, Vec value_at_x, int steps = 200,
              const Tolerances& tol = {});
  Vec at(const Vec& y) const;
  const Vec& origin() const { return x_; }
  const Vec& value_at_origin() const { return v_; }
  VectorField as_function() const;

private:
  const MetricChart* chart_;
  Vec x_;
  Vec v_;
  int steps_;
  Tolerances tol_;
};

struct RadialProbe {
  Vec direction;  // unit, base frame coordinates
  double radius;
  Vec point;
  Vec value;      // V at point, chart components
};

/// Probe directions in the base frame: +-e_i, padded with (e_i +- e_{i+1})/sqrt 2
/// until there are at least 8.
std::vector<Vec> probe_directions(int dim);

/// Propagates V from V(x) = frame p_star along radial geodesics
/// exp_x(rho F0 d) for every probe direction d and rho = R j / 4, j = 1..4,
/// solving nabla V = -gamma' jointly with the geodesic.
std::vector<RadialProbe> radial_field_from_point(const MetricChart& chart, const Vec& x,
                                                 const Vec& p_star, double probe_radius = 0.25,
                                                 const Tolerances& tol = {});

enum class ConeVerdict { Cone, NotCone, Inconclusive };
std::string_view to_string(ConeVerdict v);

struct ConeOptions {
  double probe_radius = 0.25;
  std::vector<double> t_list = {0.05, 0.1};
  double flow_dt = 0.01;
  double fd_step = 1e-4;
  Protocol protocol;  // used when p_star has to be found from holonomy
};

struct ConeCertificate {
  Vec base;
  Vec p_star;            // base frame coordinates
  Vec field_at_base;     // chart components
  double field_norm = 0.0;
  bool p_star_from_holonomy = false;
  double fixed_point_residual = 0.0;
  double residual_nabla = 0.0;
  double residual_curv = 0.0;
  double residual_homothety = 0.0;
  double residual_grad = 0.0;
  int probe_count = 0;
  ConeVerdict verdict = ConeVerdict::Inconclusive;
};

/// Measures |nabla_X V + X|, |R(X, Y) V| and Ric(V, V) / |V|^2,
/// |grad f + 2 V| (f = |V|^2) and the homothety law at x and on the probe set;
/// derivatives of V are finite differences of the field, not the ODE used to
/// build it. Without p_star a holonomy sample supplies it; NoFixedPoint is
/// thrown when that sample has no common fixed point.
ConeCertificate certify_cone(const MetricChart& chart, const Vec& x,
                             const std::optional<Vec>& p_star = std::nullopt,
                             const ConeOptions& options = {}, const Tolerances& tol = {});

/// Max over points q and t of the entrywise gap between F_t^* g and
/// e^{-2t} g at q, and of |f(F_t q) - e^{-2t} f(q)| with f = |V|^2. The flow
/// is RK4 with step at most dt; differentials are central differences.
double homothety_check(const MetricChart& chart, const VectorField& field,
                       const std::vector<Vec>& points, const std::vector<double>& t_list,
                       double dt = 0.01, double fd_step = 1e-4);

}  // namespace cartan
