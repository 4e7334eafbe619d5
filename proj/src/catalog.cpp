#include "cartan/catalog.hpp"

#include <cmath>
#include <numbers>

#include "cartan/cone.hpp"

namespace cartan {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

Box cube(int dim, double half_width) {
  return {Vec::Constant(dim, -half_width), Vec::Constant(dim, half_width)};
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

double number(const json& d, const char* key, double fallback) {
  if (!d.contains(key)) return fallback;
  if (!d.at(key).is_number()) invalid(std::string("descriptor field '") + key + "' must be a number");
  return d.at(key).get<double>();
}

}  // namespace

MetricChart flat_chart(int dim) {
  if (dim < 1) invalid("flat chart needs dim >= 1");
  return MetricChart("flat-r" + std::to_string(dim), cube(dim, 100.0),
                     [dim](const Vec&) -> Mat { return Mat::Identity(dim, dim); },
                     [dim](const Vec&) { return Christoffels(dim); });
}

MetricChart constant_chart(const Mat& g, std::string label) {
  const int m = static_cast<int>(g.rows());
  if (m < 1 || g.cols() != m) invalid("custom metric must be a square matrix");
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12) invalid("custom metric must be symmetric");
  return MetricChart(std::move(label), cube(m, 100.0), [g](const Vec&) -> Mat { return g; },
                     [m](const Vec&) { return Christoffels(m); });
}

MetricChart sphere_chart(double radius) {
  if (!(radius > 0.0)) invalid("sphere radius must be positive");
  const double r2 = radius * radius;
  Box box{Vec(2), Vec(2)};
  box.lo << 0.05, -kPi;
  box.hi << kPi - 0.05, kPi;
  return MetricChart(
      radius == 1.0 ? "sphere-s2" : "sphere-s2(r=" + std::to_string(radius) + ")", box,
      [r2](const Vec& x) -> Mat {
        Mat g = Mat::Zero(2, 2);
        const double s = std::sin(x[0]);
        g(0, 0) = r2;
        g(1, 1) = r2 * s * s;
        return g;
      },
      [](const Vec& x) {
        Christoffels gamma(2);
        const double s = std::sin(x[0]), c = std::cos(x[0]);
        gamma(0, 1, 1) = -s * c;
        gamma(1, 0, 1) = c / s;
        gamma(1, 1, 0) = c / s;
        return gamma;
      },
      {0.0, 2.0 * kPi});
}

MetricChart hyperbolic_chart() {
  Box box{Vec(2), Vec(2)};
  box.lo << -100.0, 1e-3;
  box.hi << 100.0, 1e3;
  return MetricChart(
      "hyperbolic-h2", box,
      [](const Vec& x) -> Mat { return Mat::Identity(2, 2) / (x[1] * x[1]); },
      [](const Vec& x) {
        Christoffels gamma(2);
        const double y = x[1];
        gamma(0, 0, 1) = -1.0 / y;
        gamma(0, 1, 0) = -1.0 / y;
        gamma(1, 0, 0) = 1.0 / y;
        gamma(1, 1, 1) = -1.0 / y;
        return gamma;
      });
}

MetricChart circle_chart(double c) {
  if (!(c > 0.0)) invalid("circle factor must be positive");
  return MetricChart(
      "circle(c=" + std::to_string(c) + ")", Box{Vec::Constant(1, -kPi), Vec::Constant(1, kPi)},
      [c](const Vec&) -> Mat { return Mat::Constant(1, 1, c * c); },
      [](const Vec&) { return Christoffels(1); }, {2.0 * kPi});
}

MetricChart paraboloid_chart(double a) {
  Box box{Vec(2), Vec(2)};
  box.lo << 0.05, -kPi;
  box.hi << 100.0, kPi;
  return MetricChart(
      "paraboloid", box,
      [a](const Vec& x) -> Mat {
        Mat g = Mat::Zero(2, 2);
        g(0, 0) = 1.0 + 4.0 * a * a * x[0] * x[0];
        g(1, 1) = x[0] * x[0];
        return g;
      },
      {}, {0.0, 2.0 * kPi});
}

MetricChart product_chart(const std::vector<MetricChart>& factors) {
  if (factors.empty()) invalid("product needs at least one factor");
  std::vector<int> offset;
  int m = 0;
  bool analytic = true;
  std::string label = "product(";
  std::vector<double> periods;
  for (const MetricChart& f : factors) {
    offset.push_back(m);
    m += f.dim();
    analytic = analytic && f.has_analytic_christoffels();
    label += (offset.size() > 1 ? "," : "") + f.label();
    periods.insert(periods.end(), f.periods().begin(), f.periods().end());
  }
  label += ")";
  Box box{Vec(m), Vec(m)};
  for (std::size_t k = 0; k < factors.size(); ++k) {
    box.lo.segment(offset[k], factors[k].dim()) = factors[k].domain().lo;
    box.hi.segment(offset[k], factors[k].dim()) = factors[k].domain().hi;
  }
  MetricFn metric = [factors, offset, m](const Vec& x) -> Mat {
    Mat g = Mat::Zero(m, m);
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const int d = factors[k].dim();
      g.block(offset[k], offset[k], d, d) = factors[k].metric(x.segment(offset[k], d));
    }
    return g;
  };
  ChristoffelFn gamma;
  if (analytic) {
    gamma = [factors, offset, m](const Vec& x) {
      Christoffels out(m);
      for (std::size_t k = 0; k < factors.size(); ++k) {
        const int d = factors[k].dim();
        const Christoffels part = factors[k].christoffel_fn()(x.segment(offset[k], d));
        for (int a = 0; a < d; ++a)
          out.slice(offset[k] + a).block(offset[k], offset[k], d, d) = part.slice(a);
      }
      return out;
    };
  }
  return MetricChart(label, box, metric, gamma, periods);
}

MetricChart chart_from_descriptor(const json& d) {
  if (d.is_string()) return chart_from_descriptor(catalog_entry(d.get<std::string>()).descriptor);
  if (!d.is_object() || !d.contains("kind") || !d.at("kind").is_string()) {
    invalid("manifold descriptor needs a string 'kind'");
  }
  const std::string kind = d.at("kind").get<std::string>();
  if (kind == "flat") return flat_chart(static_cast<int>(number(d, "dim", 2)));
  if (kind == "sphere") return sphere_chart(number(d, "radius", 1.0));
  if (kind == "hyperbolic") return hyperbolic_chart();
  if (kind == "circle") return circle_chart(number(d, "c", 1.0));
  if (kind == "paraboloid") return paraboloid_chart(number(d, "a", 1.0));
  if (kind == "cone") {
    if (!d.contains("base")) invalid("cone descriptor needs 'base'");
    return make_cone(chart_from_descriptor(d.at("base")), number(d, "r_min", 0.05),
                     number(d, "r_max", 20.0))
        .chart;
  }
  if (kind == "product") {
    if (!d.contains("factors") || !d.at("factors").is_array()) {
      invalid("product descriptor needs a 'factors' array");
    }
    std::vector<MetricChart> factors;
    for (const json& f : d.at("factors")) factors.push_back(chart_from_descriptor(f));
    return product_chart(factors);
  }
  if (kind == "custom") {
    if (!d.contains("metric") || !d.at("metric").is_array()) {
      invalid("custom descriptor needs a 'metric' matrix");
    }
    const json& rows = d.at("metric");
    const auto m = static_cast<int>(rows.size());
    Mat g(m, m);
    for (int i = 0; i < m; ++i) {
      if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != m) {
        invalid("custom metric must be square");
      }
      for (int j = 0; j < m; ++j) {
        if (!rows[i][j].is_number()) invalid("custom metric entries must be numbers");
        g(i, j) = rows[i][j].get<double>();
      }
    }
    return constant_chart(g, d.value("label", std::string("custom")));
  }
  invalid("unknown manifold kind '" + kind + "'");
}

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<CatalogEntry> build_catalog() {
  const json circle_half = {{"kind", "circle"}, {"c", 0.5}};
  const json sphere = {{"kind", "sphere"}, {"radius", 1.0}};
  std::vector<CatalogEntry> c;
  c.push_back({"flat-r2", "Euclidean plane, Cartesian coordinates", {{"kind", "flat"}, {"dim", 2}},
               vec({0.3, -0.2}), "TRIVIAL", false, 0.0, std::nullopt});
  c.push_back({"flat-r3", "Euclidean 3-space, Cartesian coordinates", {{"kind", "flat"}, {"dim", 3}},
               vec({0.1, 0.2, 0.3}), "TRIVIAL", false, 0.0, std::nullopt});
  c.push_back({"polar-r2", "Euclidean plane in polar coordinates (cone over the unit circle)",
               {{"kind", "cone"}, {"base", {{"kind", "circle"}, {"c", 1.0}}}}, vec({1.0, 0.0}),
               "TRIVIAL", true, 1.0, std::nullopt});
  c.push_back({"sphere-s2", "unit round 2-sphere", sphere, vec({kPi / 2, 0.0}), "FULL_SEMIDIRECT",
               false, 0.0, 1, true});
  c.push_back({"sphere-s2-scaled", "round 2-sphere of radius 2", {{"kind", "sphere"}, {"radius", 2.0}},
               vec({kPi / 2, 0.0}), "FULL_SEMIDIRECT", false, 0.0, 1, true});
  c.push_back({"hyperbolic-h2", "hyperbolic plane, upper half-plane model", {{"kind", "hyperbolic"}},
               vec({0.0, 1.0}), "FULL_SEMIDIRECT", false, 0.0, std::nullopt, true});
  c.push_back({"cone-circle", "flat 2-cone over a circle of length pi",
               {{"kind", "cone"}, {"base", circle_half}}, vec({1.0, 0.0}), "COMPACT", true, 1.0,
               std::nullopt});
  c.push_back({"cone-sphere", "3-cone over a round sphere of radius 0.8",
               {{"kind", "cone"}, {"base", {{"kind", "sphere"}, {"radius", 0.8}}}},
               vec({1.0, kPi / 2, 0.0}), "COMPACT", true, 1.0, std::nullopt});
  c.push_back({"cone-x-cone", "product of the 2-cones over circles of length pi and 3pi/2",
               {{"kind", "product"},
                {"factors",
                 {{{"kind", "cone"}, {"base", circle_half}},
                  {{"kind", "cone"}, {"base", {{"kind", "circle"}, {"c", 0.75}}}}}}},
               vec({1.0, 0.0, 1.0, 0.0}), "COMPACT", true, 0.0, std::nullopt});
  c.push_back({"flat-x-sphere", "line times unit 2-sphere, coordinates (z, theta, phi)",
               {{"kind", "product"}, {"factors", {{{"kind", "flat"}, {"dim", 1}}, sphere}}},
               vec({0.0, kPi / 2, 0.0}), "NONCOMPACT", false, 0.0, 2});
  c.push_back({"paraboloid", "paraboloid of revolution z = rho^2", {{"kind", "paraboloid"}, {"a", 1.0}},
               vec({1.0, 0.0}), "FULL_SEMIDIRECT", false, 0.0, std::nullopt});
  return c;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build_catalog();
  return entries;
}

const CatalogEntry& catalog_entry(const std::string& name) {
  for (const CatalogEntry& e : catalog())
    if (e.name == name) return e;
  invalid("no catalog entry named '" + name + "'");
}

}  // namespace cartan
