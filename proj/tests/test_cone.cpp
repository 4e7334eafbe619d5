#include <cmath>
#include <numbers>

#include "cartan/catalog.hpp"
#include "cartan/cone.hpp"
#include "support.hpp"

using namespace cartan;
using cartan::testing::max_abs;
using cartan::testing::vec;

namespace {

constexpr double pi = std::numbers::pi;

struct Sample {
  std::string name;
  MetricChart chart;
  Vec x;
};

std::vector<Sample> cone_charts() {
  std::vector<Sample> out;
  out.push_back({"circle", make_cone(circle_chart(0.5)).chart, vec({1, 0})});
  out.push_back({"unit circle", make_cone(circle_chart(1.0)).chart, vec({2, 1})});
  out.push_back({"scaled sphere", make_cone(sphere_chart(0.8)).chart, vec({1, pi / 2, 0})});
  out.push_back({"sphere", make_cone(sphere_chart()).chart, vec({1.5, 1.0, 0.3})});
  out.push_back({"hyperbolic", make_cone(hyperbolic_chart()).chart, vec({0.7, 0.2, 1.1})});
  return out;
}

Vec minus_r_dr(const Vec& y) {
  Vec v = Vec::Zero(y.size());
  v[0] = -y[0];
  return v;
}

// Points around x inside the chart, away from the radial axis.
std::vector<Vec> around(const MetricChart& chart, const Vec& x) {
  std::vector<Vec> pts{x};
  for (int i = 0; i < chart.dim(); ++i)
    for (double s : {-0.2, 0.2}) {
      Vec y = x;
      y[i] += s;
      if (chart.contains(y)) pts.push_back(y);
    }
  return pts;
}

}  // namespace

TEST(MakeCone, CircleBaseIsFlatAndMatchesCatalog) {
  const ConeChart c = make_cone(circle_chart(0.5));
  EXPECT_EQ(c.chart.dim(), 2);
  for (const Vec& x : {vec({1, 0}), vec({0.4, 2.5}), vec({6, -1})}) {
    const CurvatureOperator op = curvature_op(c.chart, x, {x, vec({1, 0})}, {x, vec({0, 1})});
    EXPECT_LT(max_abs(op.matrix), Tolerances{}.tol_curv);
    Mat g(2, 2);
    g << 1, 0, 0, 0.25 * x[0] * x[0];
    EXPECT_LT(max_abs(c.chart.metric(x) - g), 1e-15);
  }
}

TEST(MakeCone, UnitCircleBaseIsPolarPlane) {
  const CatalogEntry& polar = catalog_entry("polar-r2");
  const MetricChart chart = chart_from_descriptor(polar.descriptor);
  EXPECT_EQ(classify(chart, polar.base, Protocol{}).verdict, OverallVerdict::Trivial);
}

TEST(MakeCone, ScaledSphereBaseIsCurved) {
  const MetricChart c = make_cone(sphere_chart(0.8)).chart;
  const Vec x = vec({1, 1.2, 0.5});
  const FramePoint f = orthonormal_frame(c, x);
  const Mat m = in_frame(curvature_op(c, x, {x, f.columns.col(1)}, {x, f.columns.col(2)}), f);
  EXPECT_GT(max_abs(m), 0.1);
}

TEST(MakeCone, AnalyticChristoffelsMatchFiniteDifferences) {
  const Tolerances tol;
  for (const Sample& s : cone_charts()) {
    ASSERT_TRUE(s.chart.has_analytic_christoffels()) << s.name;
    const Christoffels a = christoffels(s.chart, s.x), f = christoffels_fd(s.chart, s.x, tol.h_fd);
    for (int k = 0; k < s.chart.dim(); ++k)
      EXPECT_LT(max_abs(a.slice(k) - f.slice(k)), 10 * tol.h_fd * tol.h_fd) << s.name;
  }
}

TEST(MakeCone, RejectsBadRadii) {
  EXPECT_THROW(make_cone(circle_chart(1.0), 0.0, 1.0), Error);
  EXPECT_THROW(make_cone(circle_chart(1.0), 2.0, 1.0), Error);
}

TEST(ConeIdentities, RadialFieldSolvesNablaVPlusX) {
  // nabla_X V^k = X^i d_i V^k + Gamma^k_ij X^i V^j with V = -r d_r.
  for (const Sample& s : cone_charts()) {
    const int m = s.chart.dim();
    for (const Vec& y : around(s.chart, s.x)) {
      const Christoffels gamma = christoffels(s.chart, y);
      for (int i = 0; i < m; ++i) {
        Vec X = Vec::Zero(m);
        X[i] = 1;
        Vec dV = Vec::Zero(m);
        dV[0] = -X[0];
        const Vec nabla = dV + gamma.contract(X) * minus_r_dr(y);
        EXPECT_LT((nabla + X).norm(), 1e-6) << s.name;
      }
    }
  }
}

TEST(ConeIdentities, RadialFieldInCurvatureNullity) {
  const Tolerances tol;
  for (const Sample& s : cone_charts()) {
    const int m = s.chart.dim();
    const Vec V = minus_r_dr(s.x);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        Vec a = Vec::Zero(m), b = Vec::Zero(m);
        a[i] = b[j] = 1;
        EXPECT_LT((curvature_op(s.chart, s.x, {s.x, a}, {s.x, b}, tol).matrix * V).norm(), tol.tol_curv) << s.name;
      }
    EXPECT_LT(std::abs(ricci_direction(s.chart, s.x, vec({1, 0, 0}).head(m), tol)), tol.tol_curv) << s.name;
  }
}

TEST(ConeIdentities, GradientOfSquaredNorm) {
  const double h = 1e-5;
  for (const Sample& s : cone_charts()) {
    const int m = s.chart.dim();
    auto f = [&](const Vec& y) {
      const Vec v = minus_r_dr(y);
      return v.dot(s.chart.metric(y) * v);
    };
    Vec df(m);
    for (int i = 0; i < m; ++i) {
      Vec e = Vec::Zero(m);
      e[i] = h;
      df[i] = (f(s.x + e) - f(s.x - e)) / (2 * h);
    }
    const Vec grad = s.chart.metric(s.x).ldlt().solve(df);
    EXPECT_LT((grad + 2 * minus_r_dr(s.x)).norm(), 1e-5) << s.name;
  }
}

TEST(RadialField, ConeGivesMinusRDr) {
  for (const Sample& s : cone_charts()) {
    const RadialField field(s.chart, s.x, minus_r_dr(s.x));
    for (const Vec& y : around(s.chart, s.x)) EXPECT_LT((field.at(y) - minus_r_dr(y)).norm(), 1e-6) << s.name;
  }
}

TEST(RadialField, FlatGivesAffineField) {
  const MetricChart flat = flat_chart(2);
  const Vec x = vec({0.3, -0.2});
  const RadialField field(flat, x, Vec::Zero(2));
  for (const Vec& y : {vec({1, 1}), vec({-2, 0.5}), x}) EXPECT_LT((field.at(y) - (x - y)).norm(), 1e-6);
}

TEST(RadialField, ProbesFollowRadialGeodesics) {
  const Sample s = cone_charts()[2];
  const FramePoint f = orthonormal_frame(s.chart, s.x);
  const Vec p_star = f.columns.partialPivLu().solve(minus_r_dr(s.x));
  const std::vector<RadialProbe> probes = radial_field_from_point(s.chart, s.x, p_star);
  EXPECT_EQ(probes.size(), probe_directions(3).size() * 4);
  for (const RadialProbe& p : probes) EXPECT_LT((p.value - minus_r_dr(p.point)).norm(), 1e-6);
}

TEST(RadialField, ProbeDirections) {
  for (int m : {2, 3, 4, 5}) {
    const std::vector<Vec> d = probe_directions(m);
    EXPECT_GE(d.size(), 8u);
    EXPECT_GE(d.size(), static_cast<std::size_t>(2 * m));
    for (const Vec& v : d) EXPECT_NEAR(v.norm(), 1.0, 1e-15);
  }
}

TEST(Certify, ConeOverCircle) {
  const CatalogEntry& e = catalog_entry("cone-circle");
  const MetricChart chart = chart_from_descriptor(e.descriptor);
  const ConeCertificate c = certify_cone(chart, e.base);
  EXPECT_EQ(c.verdict, ConeVerdict::Cone);
  EXPECT_TRUE(c.p_star_from_holonomy);
  EXPECT_LT((c.p_star - vec({-1, 0})).norm(), 1e-3);
  for (double r : {c.residual_nabla, c.residual_curv, c.residual_homothety, c.residual_grad}) EXPECT_LT(r, 1e-4);
}

TEST(Certify, EveryCatalogConeIsCertified) {
  for (const CatalogEntry& e : catalog()) {
    if (!e.cone || e.apex_distance == 0.0) continue;
    const MetricChart chart = chart_from_descriptor(e.descriptor);
    Vec p = Vec::Zero(chart.dim());
    p[0] = -e.apex_distance;
    EXPECT_EQ(certify_cone(chart, e.base, p).verdict, ConeVerdict::Cone) << e.name;
  }
}

TEST(Certify, NoFixedPointOnEinsteinSurfaces) {
  for (const char* name : {"sphere-s2", "hyperbolic-h2"}) {
    const CatalogEntry& e = catalog_entry(name);
    try {
      certify_cone(chart_from_descriptor(e.descriptor), e.base);
      FAIL() << name;
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::NoFixedPoint) << name;
    }
  }
}

TEST(Certify, SphereWithChosenPointIsNotACone) {
  const MetricChart s2 = sphere_chart();
  const Vec x = vec({pi / 2, 0});
  // Ric(V, V) / |V|^2 = 1 on the unit sphere whatever the chosen point.
  for (const Vec& p : {vec({0.5, 0.3}), vec({-1, 0}), vec({0, 1}), vec({0.05, 0})}) {
    const ConeCertificate c = certify_cone(s2, x, p);
    EXPECT_EQ(c.verdict, ConeVerdict::NotCone);
    EXPECT_GT(c.residual_curv, 0.1);
  }
  // The derivative residual grows with |V|; at unit length it is well clear.
  EXPECT_GT(certify_cone(s2, x, vec({-1, 0})).residual_nabla, 0.1);
}

TEST(Certify, FlatIsAConeExceptAtTheApex) {
  const MetricChart flat = flat_chart(2);
  const ConeCertificate off = certify_cone(flat, vec({0.3, -0.2}), vec({0.5, 1.0}));
  EXPECT_EQ(off.verdict, ConeVerdict::Cone);
  EXPECT_GT(off.field_norm, 0.0);
  const ConeCertificate at = certify_cone(flat, vec({0.3, -0.2}), vec({0.0, 0.0}));
  EXPECT_EQ(at.verdict, ConeVerdict::Inconclusive);
}

TEST(Certify, DimensionMismatch) {
  EXPECT_THROW(certify_cone(flat_chart(2), vec({0, 0}), vec({1, 0, 0})), Error);
}

TEST(Homothety, ConeFieldScalesMetric) {
  for (const Sample& s : cone_charts()) {
    const VectorField V = minus_r_dr;
    EXPECT_LT(homothety_check(s.chart, V, around(s.chart, s.x), {0.1}), 1e-5) << s.name;
  }
}

TEST(Homothety, SquaredNormScalesExactly) {
  // Flowing -r d_r for time t multiplies r by e^{-t}, so f = r^2 by e^{-2t}.
  const Sample s = cone_charts()[0];
  const double t = 0.1;
  const Vec y = s.x;
  const Vec moved = vec({y[0] * std::exp(-t), y[1]});
  const double f0 = y[0] * y[0], f1 = moved[0] * moved[0];
  EXPECT_NEAR(f1, std::exp(-0.2) * f0, 1e-15);
  EXPECT_LT(homothety_check(s.chart, minus_r_dr, {y}, {t}), 1e-5);
}

TEST(Homothety, ZeroTimeIsExactlyZero) {
  for (const Sample& s : cone_charts()) EXPECT_EQ(homothety_check(s.chart, minus_r_dr, around(s.chart, s.x), {0.0}), 0.0);
}

TEST(Homothety, NonConformalFieldOnSphereFails) {
  const MetricChart s2 = sphere_chart();
  const VectorField shear = [](const Vec& y) { return vec({0.3 * std::sin(y[1]), 0.5}); };
  EXPECT_GT(homothety_check(s2, shear, {vec({1.2, 0.4}), vec({1.8, -0.3})}, {0.05, 0.1}), 0.01);
}
