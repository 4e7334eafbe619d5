#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cartan/geometry.hpp"

namespace cartan {

MetricChart flat_chart(int dim);
/// Constant metric matrix on a box of half-width 100.
MetricChart constant_chart(const Mat& g, std::string label = "custom");
/// Round sphere of the given radius in (theta, phi); phi is periodic and theta
/// stays 0.05 away from the poles.
MetricChart sphere_chart(double radius = 1.0);
/// Upper half-plane model.
MetricChart hyperbolic_chart();
/// Circle of length 2 pi c, angular coordinate.
MetricChart circle_chart(double c);
/// Surface of revolution z = a rho^2 in polar coordinates (rho, theta). No
/// analytic Christoffels: exercises the finite-difference path.
MetricChart paraboloid_chart(double a);
/// Riemannian product; coordinates are concatenated in factor order.
MetricChart product_chart(const std::vector<MetricChart>& factors);

/// A manifold of the shipped catalog with the data the verification suite
/// needs about it.
struct CatalogEntry {
  std::string name;
  std::string summary;
  nlohmann::json descriptor;
  Vec base;
  std::string expected;         // overall classification verdict
  bool cone = false;            // certify_cone should succeed at base
  double apex_distance = 0.0;   // r0 when the first coordinate is a cone radius
  std::optional<int> closed_geodesic_axis;  // periodic axis whose line at base is a closed geodesic
  bool einstein = false;        // Einstein with nonzero constant
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(const std::string& name);

/// Builds a chart from a JSON descriptor, e.g. {"kind": "sphere", "radius": 2}
/// or {"kind": "cone", "base": {...}, "r_min": 0.05, "r_max": 20}. Throws
/// ConfigInvalid on malformed input.
MetricChart chart_from_descriptor(const nlohmann::json& d);

}  // namespace cartan
