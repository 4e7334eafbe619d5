#include "cartan/suite.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>

#include "cartan/evidence.hpp"
#include "cartan/transport.hpp"

namespace cartan {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) invalid("unknown field '" + it.key() + "' in " + where);
  }
}

double num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) invalid(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

int integer(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) invalid(std::string("field '") + key + "' must be an integer");
  return j.at(key).get<int>();
}

}  // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    invalid(path + ": " + e.what());
  }
}

LoopSpec loop_from_json(const json& j, const Vec& base) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    invalid("loop needs a string 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  const int orientation = integer(j, "orientation", 1);
  if (orientation != 1 && orientation != -1) invalid("orientation must be 1 or -1");
  if (kind == "rect") {
    only_keys(j, {"kind", "plane", "eps", "orientation"}, "rect loop");
    if (!j.contains("plane") || !j.at("plane").is_array() || j.at("plane").size() != 2) {
      invalid("rect loop needs 'plane': [i, j]");
    }
    return LoopSpec::rect(base, j.at("plane")[0].get<int>(), j.at("plane")[1].get<int>(),
                          num(j, "eps", 0.1), orientation);
  }
  if (kind == "coord_line") {
    only_keys(j, {"kind", "axis", "turns", "orientation"}, "coord_line loop");
    return LoopSpec::coord_line(base, integer(j, "axis", 0), integer(j, "turns", 1), orientation);
  }
  if (kind == "polygon") {
    only_keys(j, {"kind", "directions", "side", "orientation"}, "polygon loop");
    if (!j.contains("directions") || !j.at("directions").is_array()) {
      invalid("polygon loop needs 'directions'");
    }
    std::vector<Vec> dirs;
    for (const json& d : j.at("directions")) dirs.push_back(vec_from_json(d, "direction"));
    return LoopSpec::polygon(base, dirs, num(j, "side", 0.3), orientation);
  }
  if (kind == "param_curve") {
    only_keys(j, {"kind", "samples", "orientation"}, "param_curve loop");
    if (!j.contains("samples") || !j.at("samples").is_array()) invalid("param_curve needs 'samples'");
    std::vector<Vec> samples;
    for (const json& s : j.at("samples")) samples.push_back(vec_from_json(s, "sample"));
    return LoopSpec::param_curve(samples, orientation);
  }
  invalid("unknown loop kind '" + kind + "'");
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) invalid("config must be a JSON object");
  only_keys(j, {"manifold", "base", "protocol", "tolerances", "output", "cone", "develop", "evidence",
                "checks", "expect", "comment"},
            "config");
  if (!j.contains("manifold")) invalid("config needs 'manifold'");
  RunConfig cfg;
  cfg.manifold = j.at("manifold");
  if (cfg.manifold.is_string()) {
    cfg.entry = catalog_entry(cfg.manifold.get<std::string>());
  } else if (cfg.manifold.is_object()) {
    cfg.entry.name = cfg.manifold.value("name", std::string("custom"));
    cfg.entry.descriptor = cfg.manifold;
    if (!j.contains("base")) invalid("a manifold descriptor needs an explicit 'base'");
  } else {
    invalid("'manifold' must be a catalog name or a descriptor object");
  }
  if (j.contains("expect")) {
    const json& e = j.at("expect");
    if (!e.is_object()) invalid("'expect' must be an object");
    only_keys(e, {"verdict", "cone", "apex_distance", "closed_geodesic_axis", "einstein"}, "expect");
    if (e.contains("verdict")) cfg.entry.expected = e.at("verdict").get<std::string>();
    if (e.contains("cone")) cfg.entry.cone = e.at("cone").get<bool>();
    cfg.entry.apex_distance = num(e, "apex_distance", cfg.entry.apex_distance);
    if (e.contains("closed_geodesic_axis")) cfg.entry.closed_geodesic_axis = integer(e, "closed_geodesic_axis", 0);
    if (e.contains("einstein")) cfg.entry.einstein = e.at("einstein").get<bool>();
  }
  cfg.base = j.contains("base") ? vec_from_json(j.at("base"), "base") : cfg.entry.base;
  cfg.entry.base = cfg.base;
  if (j.contains("protocol")) {
    cfg.protocol = protocol_from_json(j.at("protocol"));
    cfg.seed_given = j.at("protocol").contains("seed");
  }
  if (j.contains("tolerances")) cfg.tol = tolerances_from_json(j.at("tolerances"));
  if (j.contains("output")) {
    if (!j.at("output").is_string()) invalid("'output' must be a path");
    cfg.output = j.at("output").get<std::string>();
  }
  if (j.contains("cone")) {
    const json& c = j.at("cone");
    if (!c.is_object()) invalid("'cone' must be an object");
    only_keys(c, {"p_star", "probe_radius", "t_list", "flow_dt", "fd_step"}, "cone");
    if (c.contains("p_star")) cfg.p_star = vec_from_json(c.at("p_star"), "p_star");
    cfg.cone.probe_radius = num(c, "probe_radius", cfg.cone.probe_radius);
    cfg.cone.flow_dt = num(c, "flow_dt", cfg.cone.flow_dt);
    cfg.cone.fd_step = num(c, "fd_step", cfg.cone.fd_step);
    if (c.contains("t_list")) {
      const Vec t = vec_from_json(c.at("t_list"), "t_list");
      cfg.cone.t_list.assign(t.data(), t.data() + t.size());
    }
  }
  if (j.contains("develop")) {
    if (!j.at("develop").is_object()) invalid("'develop' must be an object");
    cfg.develop = j.at("develop");
  }
  if (j.contains("evidence")) {
    const json& e = j.at("evidence");
    if (!e.is_object()) invalid("'evidence' must be an object");
    only_keys(e, {"loop", "k_max"}, "evidence");
    cfg.k_max = integer(e, "k_max", 5);
    if (e.contains("loop")) cfg.evidence_loop = loop_from_json(e.at("loop"), cfg.base);
  }
  if (j.contains("checks")) {
    if (!j.at("checks").is_array()) invalid("'checks' must be an array of names");
    for (const json& c : j.at("checks")) {
      if (!c.is_string()) invalid("'checks' must be an array of names");
      const std::string name = c.get<std::string>();
      bool known = false;
      for (const CheckInfo& info : suite_checks()) known = known || info.name == name;
      if (!known) invalid("unknown check '" + name + "'");
      cfg.checks.push_back(name);
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(load_json_file(path)); }

void finalize_config(RunConfig& cfg, const MetricChart& chart) {
  if (cfg.base.size() != chart.dim()) {
    invalid("base has " + std::to_string(cfg.base.size()) + " coordinates, manifold has dimension " +
            std::to_string(chart.dim()));
  }
  if (!chart.contains(cfg.base)) invalid("base point lies outside the chart domain");
  if (cfg.protocol.n_polygons > 0 && !cfg.seed_given) {
    invalid("protocol draws random polygons; a seed is mandatory (config protocol.seed or --seed)");
  }
  for (const auto& [i, j] : cfg.protocol.planes) {
    if (i < 0 || j < 0 || i >= chart.dim() || j >= chart.dim() || i == j) {
      invalid("protocol plane out of range");
    }
  }
  if (cfg.p_star && cfg.p_star->size() != chart.dim()) invalid("p_star has the wrong dimension");
}

Curve develop_curve_of(const RunConfig& cfg, const MetricChart& chart) {
  const json& d = cfg.develop;
  if (d.is_null()) return coordinate_arc(cfg.base, 0, 1.0);
  const std::string kind = d.value("curve", std::string("coord_line"));
  if (kind == "coord_line") {
    only_keys(d, {"curve", "axis", "length"}, "develop");
    const int axis = integer(d, "axis", 0);
    if (axis < 0 || axis >= chart.dim()) invalid("develop axis out of range");
    return coordinate_arc(cfg.base, axis, num(d, "length", 1.0));
  }
  if (kind == "segment") {
    only_keys(d, {"curve", "to"}, "develop");
    if (!d.contains("to")) invalid("segment needs 'to'");
    const Vec to = vec_from_json(d.at("to"), "to");
    if (to.size() != chart.dim()) invalid("segment end has the wrong dimension");
    return straight_segment(cfg.base, to);
  }
  if (kind == "spline") {
    only_keys(d, {"curve", "points", "closed"}, "develop");
    if (!d.contains("points") || !d.at("points").is_array()) invalid("spline needs 'points'");
    std::vector<Vec> pts{cfg.base};
    for (const json& p : d.at("points")) pts.push_back(vec_from_json(p, "point"));
    return spline_through(pts, d.value("closed", false));
  }
  if (kind == "loop") {
    only_keys(d, {"curve", "loop"}, "develop");
    if (!d.contains("loop")) invalid("develop loop needs 'loop'");
    const LoopSpec loop = loop_from_json(d.at("loop"), cfg.base);
    return build_curve(chart, loop, orthonormal_frame(chart, cfg.base, cfg.tol), cfg.tol);
  }
  invalid("unknown develop curve '" + kind + "'");
}

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skip: return "SKIP";
  }
  return "?";
}

const std::vector<CheckInfo>& suite_checks() {
  static const std::vector<CheckInfo> checks = {
      {"flat-trivial", "the affine holonomy of a flat metric is trivial"},
      {"affine-splitting", "a flat factor is acted on trivially, translations included"},
      {"derham-splitting", "the tangent space splits orthogonally into a flat factor and invariant factors"},
      {"factor-dichotomy", "on each factor the translations either vanish or span the factor"},
      {"compact-iff-cones", "the affine holonomy has a fixed point exactly on products of cones"},
      {"einstein-semidirect", "Einstein metrics with nonzero constant have the full semidirect affine holonomy"},
      {"global-noncompactness", "rolling repeatedly along a closed geodesic gives unbounded translations"},
      {"cone-radial-field", "a cone carries V with nabla_X V + X = 0 and grad |V|^2 = -2V"},
      {"cone-homothety", "the flow of V scales the metric, F_t^* g = e^{-2t} g"},
      {"cone-curvature-nullity", "V lies in the curvature nullity, R(X, Y) V = 0 and Ric(V, V) = 0"},
      {"product-action", "on a product the holonomy acts factor by factor"},
      {"bundle-maps", "affine frames and the product bundle are equivariantly isomorphic"},
      {"rolling-sphere", "rolling along a great circle is a translation by the circle length"},
  };
  return checks;
}

namespace {

struct EntryRun {
  MetricChart chart;
  HolonomySample sample;
  ClassificationReport report;
};

class SuiteContext {
public:
  explicit SuiteContext(const SuiteOptions& o) : opt(o) {}

  const SuiteOptions& opt;

  const EntryRun& run(const CatalogEntry& e) {
    auto it = runs_.find(e.name);
    if (it != runs_.end()) return *it->second;
    MetricChart chart = chart_from_descriptor(e.descriptor);
    HolonomySample sample = sample_holonomy(chart, e.base, opt.protocol, opt.tol);
    ClassificationReport report = classify_sample(sample, opt.protocol, opt.tol, e.name);
    auto ptr = std::make_unique<EntryRun>(EntryRun{std::move(chart), std::move(sample), std::move(report)});
    return *runs_.emplace(e.name, std::move(ptr)).first->second;
  }

  // Certificate at the entry's base point. The fixed point comes from the
  // holonomy unless that is trivial, in which case the known apex is used.
  const ConeCertificate& certificate(const CatalogEntry& e) {
    auto it = certs_.find(e.name);
    if (it != certs_.end()) return it->second;
    const EntryRun& r = run(e);
    ConeOptions co;
    co.protocol = opt.protocol;
    std::optional<Vec> p;
    if (r.report.verdict == OverallVerdict::Trivial && e.apex_distance > 0.0) {
      p = Vec::Zero(r.chart.dim());
      (*p)[0] = -e.apex_distance;
    }
    return certs_.emplace(e.name, certify_cone(r.chart, e.base, p, co, opt.tol)).first->second;
  }

private:
  std::map<std::string, std::unique_ptr<EntryRun>> runs_;
  std::map<std::string, ConeCertificate> certs_;
};

using CheckFn = void (*)(SuiteContext&, CheckResult&);

void fail(CheckResult& r, const std::string& why) {
  r.status = CheckStatus::Fail;
  if (!r.detail.empty()) r.detail += "; ";
  r.detail += why;
}

void pass_if_untouched(CheckResult& r, bool any) {
  if (!any) {
    r.status = CheckStatus::Skip;
    r.detail = "no applicable manifold";
  } else if (r.status != CheckStatus::Fail) {
    r.status = CheckStatus::Pass;
  }
}

void flat_trivial(SuiteContext& ctx, CheckResult& r) {
  bool any = false;
  for (const CatalogEntry& e : ctx.opt.entries) {
    if (e.expected != "TRIVIAL") continue;
    any = true;
    const EntryRun& run = ctx.run(e);
    double dev = 0.0;
    for (const AffineIsometry& h : run.sample.elements) {
      dev = std::max(dev, (h.linear - Mat::Identity(h.dim(), h.dim())).cwiseAbs().maxCoeff());
      dev = std::max(dev, h.translation.cwiseAbs().maxCoeff());
    }
    r.residuals[e.name] = {{"max_deviation", dev}, {"loops", run.report.loop_count}};
    if (dev > 1e-8) fail(r, e.name + ": element deviates from identity by " + std::to_string(dev));
    if (run.report.verdict != OverallVerdict::Trivial) fail(r, e.name + ": verdict not TRIVIAL");
  }
  pass_if_untouched(r, any);
}

void affine_splitting(SuiteContext& ctx, CheckResult& r) {
  bool any = false;
  for (const CatalogEntry& e : ctx.opt.entries) {
    const EntryRun& run = ctx.run(e);
    const auto& f = run.report.factors;
    if (f.size() < 2 || !f.front().flat) continue;
    any = true;
    const ProductBlockReport& b = run.report.blocks;
    r.residuals[e.name] = {{"flat_dim", f.front().dim()},
                           {"max_flat_translation", b.max_flat_translation},
                           {"max_flat_linear", b.max_flat_linear}};
    if (b.max_flat_translation > 1e-8 || b.max_flat_linear > 1e-8) {
      fail(r, e.name + ": flat factor moved");
    }
  }
  pass_if_untouched(r, any);
}

void derham_splitting(SuiteContext& ctx, CheckResult& r) {
  bool any = false;
  for (const CatalogEntry& e : ctx.opt.entries) {
    any = true;
    const EntryRun& run = ctx.run(e);
    const SplittingResult split = derham_split(run.sample.elements, ctx.opt.tol);
    int total = 0;
    double cross = 0.0;
    Json dims = Json::array();
    for (std::size_t k = 0; k < split.subspaces.size(); ++k) {
      total += static_cast<int>(split.subspaces[k].cols());
      dims.push_back(split.subspaces[k].cols());
      for (std::size_t l = k + 1; l < split.subspaces.size(); ++l) {
        if (split.subspaces[k].cols() == 0 || split.subspaces[l].cols() == 0) continue;
        cross = std::max(cross, (split.subspaces[k].transpose() * split.subspaces[l]).cwiseAbs().maxCoeff());
      }
    }
    r.residuals[e.name] = {{"dims", dims}, {"max_leak", split.max_leak}, {"max_cross", cross}};
    if (total != run.chart.dim()) fail(r, e.name + ": subspace dimensions do not sum to m");
    if (split.max_leak >= ctx.opt.tol.tol_split) fail(r, e.name + ": subspace not invariant");
    if (cross >= ctx.opt.tol.tol_split) fail(r, e.name + ": subspaces not orthogonal");
  }
  pass_if_untouched(r, any);
}

void factor_dichotomy(SuiteContext& ctx, CheckResult& r) {
  bool any = false;
  for (const CatalogEntry& e : ctx.opt.entries) {
    any = true;
    const EntryRun& run = ctx.run(e);
    Json ranks = Json::array();
    for (const FactorReport& f : run.report.factors)
      ranks.push_back(Json::array({f.dim(), f.translation_rank}));
    r.residuals[e.name] = {{"dim_and_rank", ranks}};
    if (run.report.inconsistent) fail(r, e.name + ": intermediate translation rank");
  }
  pass_if_untouched(r, any);
}

void compact_iff_cones(SuiteContext& ctx, CheckResult& r) {
  bool any = false;
  for (const CatalogEntry& e : ctx.opt.entries) {
    if (e.expected.empty()) continue;
    any = true;
    const EntryRun& run = ctx.run(e);
    const std::string got(to_string(run.report.verdict));
    const FixedPointResult& fp = run.report.fixed_point;
    Json res = {{"verdict", got},
                {"fixed_point_verdict", std::string(to_string(fp.verdict))},
                {"fixed_point_residual", fp.residual},
                {"scale", fp.scale}};
    if (got != e.expected) fail(r, e.name + ": verdict " + got + ", expected " + e.expected);
    const bool compact = run.report.verdict == OverallVerdict::Compact;
    if (compact != (e.expected == "COMPACT")) fail(r, e.name + ": compactness mismatch");
    if (compact && !(fp.residual < ctx.opt.tol.tol_fp * fp.scale)) fail(r, e.name + ": fixed point residual");
    if (compact && e.apex_distance > 0.0) {
      Vec apex = Vec::Zero(run.chart.dim());
      apex[0] = -e.apex_distance;
      const double err = (fp.point - apex).norm();
      res["apex_error"] = err;
      if (!(err < 1e-3)) fail(r, e.name + ": fixed point is not the apex");
    }
    r.residuals[e.name] = res;
  }
  pass_if_untouched(r, any);
}

void einstein_semidirect(SuiteContext& ctx, CheckResult& r) {
  bool any = false;
  for (const CatalogEntry& e : ctx.opt.entries) {
    if (!e.einstein) continue;
    any = true;
    const EntryRun& run = ctx.run(e);
    const FixedPointResult& fp = run.report.fixed_point;
    double second = 0.0;
    int rank = 0;
    if (run.report.factors.size() == 1) {
      const auto& sv = run.report.factors.front().translation_singular_values;
      if (sv.size() > 1) second = sv[1];
      rank = run.report.factors.front().translation_rank;
    }
    r.residuals[e.name] = {{"verdict", std::string(to_string(run.report.verdict))},
                           {"translation_rank", rank},
                           {"second_singular_value", second},
                           {"fixed_point_residual", fp.residual},
                           {"scale", fp.scale},
                           {"fixed_point_verdict", std::string(to_string(fp.verdict))}};
    if (run.report.verdict != OverallVerdict::FullSemidirect) fail(r, e.name + ": not FULL_SEMIDIRECT");
    if (rank != run.chart.dim() || !(second > 1e-3)) fail(r, e.name + ": translations do not span");
    if (fp.verdict != FixedPointVerdict::NoFixedPoint) fail(r, e.name + ": solver found a fixed point");
    // The margin is only meaningful when the loops reach the curvature
    // scale; on the closed-geodesic entries the equator loop does.
    if (e.closed_geodesic_axis && !(fp.residual > 1e-2 * fp.scale)) {
      fail(r, e.name + ": fixed point residual too small");
    }
  }
  pass_if_untouched(r, any);
}

void global_noncompactness(SuiteContext& ctx, CheckResult& r) {
  bool any = false;
  for (const CatalogEntry& e : ctx.opt.entries) {
    const MetricChart chart = chart_from_descriptor(e.descriptor);
    if (e.closed_geodesic_axis) {
      any = true;
      const int a = *e.closed_geodesic_axis;
      const double length = chart.periods()[a] * std::sqrt(chart.metric(e.base)(a, a));
      const EvidenceReport ev =
          global_noncompactness_evidence(chart, LoopSpec::coord_line(e.base, a), ctx.opt.k_max, ctx.opt.tol);
      double err = 0.0;
      for (std::size_t k = 0; k < ev.translation_norms.size(); ++k)
        err = std::max(err, std::abs(ev.translation_norms[k] - (k + 1) * length));
      r.residuals[e.name] = {{"norms", ev.translation_norms},
                             {"max_error", err},
                             {"verdict", std::string(to_string(ev.verdict))}};
      if (!(err < 1e-3)) fail(r, e.name + ": |b_k| differs from k times the loop length");
      if (ev.verdict != EvidenceVerdict::EvidenceNoncompact) fail(r, e.name + ": no growth evidence");
    } else if (e.cone && e.apex_distance > 0.0) {
      // Loops around a cone apex: powers of a rotation about a fixed point.
      for (int a = 0; a < chart.dim(); ++a) {
        if (!chart.is_periodic(a)) continue;
        any = true;
        const EvidenceReport ev = global_noncompactness_evidence(
            chart, LoopSpec::coord_line(e.base, a), ctx.opt.k_max, ctx.opt.tol);
        double top = 0.0;
        for (double b : ev.translation_norms) top = std::max(top, b);
        const std::string key = e.name + "/axis" + std::to_string(a);
        r.residuals[key] = {{"norms", ev.translation_norms},
                            {"verdict", std::string(to_string(ev.verdict))}};
        if (top > 2.0 * e.apex_distance + 1e-6) fail(r, key + ": translations exceed 2 r0");
        if (ev.verdict == EvidenceVerdict::EvidenceNoncompact) fail(r, key + ": growth reported on a cone");
        break;
      }
    }
  }
  pass_if_untouched(r, any);
}

template <typename Pred>
void cone_check(SuiteContext& ctx, CheckResult& r, Pred residual_ok) {
  bool any = false;
  for (const CatalogEntry& e : ctx.opt.entries) {
    if (!e.cone) continue;
    any = true;
    const ConeCertificate& c = ctx.certificate(e);
    Json res = {{"verdict", std::string(to_string(c.verdict))},
                {"nabla", c.residual_nabla},
                {"gradient", c.residual_grad},
                {"homothety", c.residual_homothety},
                {"curvature", c.residual_curv}};
    r.residuals[e.name] = res;
    if (c.verdict != ConeVerdict::Cone) fail(r, e.name + ": verdict " + std::string(to_string(c.verdict)));
    if (!residual_ok(c)) fail(r, e.name + ": residual above tolerance");
  }
  pass_if_untouched(r, any);
}

void cone_radial_field(SuiteContext& ctx, CheckResult& r) {
  const double tol = ctx.opt.tol.tol_cone;
  cone_check(ctx, r, [tol](const ConeCertificate& c) { return c.residual_nabla < tol && c.residual_grad < tol; });
  // Negative controls: manifolds whose holonomy has no fixed point.
  for (const CatalogEntry& e : ctx.opt.entries) {
    if (e.cone || e.expected == "TRIVIAL" || e.expected == "COMPACT" || e.expected.empty()) continue;
    const EntryRun& run = ctx.run(e);
    ConeOptions co;
    co.protocol = ctx.opt.protocol;
    std::string outcome;
    try {
      const ConeCertificate c = certify_cone(run.chart, e.base, std::nullopt, co, ctx.opt.tol);
      const double worst = std::max({c.residual_nabla, c.residual_grad, c.residual_curv, c.residual_homothety});
      outcome = std::string(to_string(c.verdict));
      if (!(worst > 1e-2)) fail(r, e.name + ": negative control looks like a cone");
    } catch (const Error& err) {
      if (err.code() != ErrorCode::NoFixedPoint) throw;
      outcome = "NoFixedPoint";
    }
    r.residuals["control/" + e.name] = outcome;
  }
}

void cone_homothety(SuiteContext& ctx, CheckResult& r) {
  const double tol = ctx.opt.tol.tol_cone;
  cone_check(ctx, r, [tol](const ConeCertificate& c) { return c.residual_homothety < tol; });
}

void cone_curvature_nullity(SuiteContext& ctx, CheckResult& r) {
  const double tol = ctx.opt.tol.tol_curv;
  cone_check(ctx, r, [tol](const ConeCertificate& c) { return c.residual_curv < tol; });
}

void product_action(SuiteContext& ctx, CheckResult& r) {
  bool any = false;
  for (const CatalogEntry& e : ctx.opt.entries) {
    const EntryRun& run = ctx.run(e);
    if (run.report.factors.size() < 2) continue;
    any = true;
    const ProductBlockReport& b = run.report.blocks;
    Json fixed = Json::array();
    for (const FactorReport& f : run.report.factors)
      fixed.push_back(f.fixed_point_full ? to_json(*f.fixed_point_full) : Json(nullptr));
    r.residuals[e.name] = {{"max_off_block", b.max_off_block},
                           {"offending_element", b.offending_element},
                           {"factor_fixed_points", fixed}};
    if (!b.pass) fail(r, e.name + ": element " + std::to_string(b.offending_element) + " mixes factors");
  }
  pass_if_untouched(r, any);
}

void bundle_maps(SuiteContext& ctx, CheckResult& r) {
  Rng rng(ctx.opt.protocol.seed);
  const int m = 3;
  auto orthogonal = [&] {
    Mat a(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
    Eigen::HouseholderQR<Mat> qr(a);
    return Mat(qr.householderQ());
  };
  auto random_vec = [&] {
    Vec v(m);
    for (int i = 0; i < m; ++i) v[i] = rng.normal();
    return v;
  };
  auto random_frame = [&] {
    Vec d(m);
    for (int i = 0; i < m; ++i) d[i] = 0.5 + 1.5 * rng.uniform();
    return Mat(orthogonal() * d.asDiagonal() * orthogonal());
  };
  double equiv = 0, action = 0, frame_law = 0, conj = 0;
  for (int t = 0; t < ctx.opt.bundle_trials; ++t) {
    const AffineFrame af{random_vec(), random_frame()};
    const AffineIsometry g{orthogonal(), random_vec()}, g2{orthogonal(), random_vec()};
    const ProductPoint lhs = claimII_map(frame_right_action(af, g));
    const ProductPoint q = claimII_map(af);
    const ProductPoint rhs = product_right_action(q.frame, q.vector, g);
    equiv = std::max({equiv, (lhs.frame - rhs.frame).cwiseAbs().maxCoeff(),
                      (lhs.vector - rhs.vector).cwiseAbs().maxCoeff()});
    const ProductPoint once = product_right_action(q.frame, q.vector, g);
    const ProductPoint twice = product_right_action(once.frame, once.vector, g2);
    const ProductPoint direct = product_right_action(q.frame, q.vector, compose(g, g2));
    action = std::max({action, (twice.frame - direct.frame).cwiseAbs().maxCoeff(),
                       (twice.vector - direct.vector).cwiseAbs().maxCoeff()});
    const AffineFrame f2 = frame_right_action(frame_right_action(af, g), g2);
    const AffineFrame f1 = frame_right_action(af, compose(g, g2));
    frame_law = std::max({frame_law, (f2.point - f1.point).cwiseAbs().maxCoeff(),
                          (f2.frame - f1.frame).cwiseAbs().maxCoeff()});
    const Vec v = random_vec();
    const AffineIsometry c = conjugate(g, AffineIsometry{Mat::Identity(m, m), v});
    conj = std::max({conj, (c.linear - Mat::Identity(m, m)).cwiseAbs().maxCoeff(),
                     (c.translation - g.linear * v).cwiseAbs().maxCoeff()});
  }
  r.residuals = {{"trials", ctx.opt.bundle_trials},
                 {"equivariance", equiv},
                 {"product_action_law", action},
                 {"frame_action_law", frame_law},
                 {"conjugation", conj}};
  r.status = std::max({equiv, action, frame_law, conj}) < 1e-12 ? CheckStatus::Pass : CheckStatus::Fail;
  if (r.status == CheckStatus::Fail) r.detail = "identity violated beyond 1e-12";
}

void rolling_sphere(SuiteContext& ctx, CheckResult& r) {
  bool any = false;
  Tolerances tol = ctx.opt.tol;
  tol.rk4_step = std::min(tol.rk4_step, ctx.opt.rolling_step);
  for (const CatalogEntry& e : ctx.opt.entries) {
    if (!e.closed_geodesic_axis) continue;
    any = true;
    const MetricChart chart = chart_from_descriptor(e.descriptor);
    const int a = *e.closed_geodesic_axis;
    const double length = chart.periods()[a] * std::sqrt(chart.metric(e.base)(a, a));
    const FramePoint frame = orthonormal_frame(chart, e.base, tol);
    const AffineIsometry h = develop_loop(chart, LoopSpec::coord_line(e.base, a), frame, tol);
    const Vec tangent = frame.columns.partialPivLu().solve(Vec::Unit(chart.dim(), a));
    const double cosang = std::abs(h.translation.dot(tangent)) / (h.translation.norm() * tangent.norm());
    const double angle = std::acos(std::min(1.0, cosang));
    const double lin = linear_defect(h);
    const double len_err = std::abs(h.translation.norm() - length);
    r.residuals[e.name] = {{"linear_defect", lin},
                           {"translation_norm", h.translation.norm()},
                           {"loop_length", length},
                           {"angle_to_velocity", angle}};
    if (!(lin < 1e-6)) fail(r, e.name + ": linear part is not the identity");
    if (!(len_err < 1e-3)) fail(r, e.name + ": translation length differs from the loop length");
    if (!(angle < 1e-3)) fail(r, e.name + ": translation not along the initial velocity");
  }
  pass_if_untouched(r, any);
}

const std::map<std::string, CheckFn>& check_functions() {
  static const std::map<std::string, CheckFn> fns = {
      {"flat-trivial", flat_trivial},
      {"affine-splitting", affine_splitting},
      {"derham-splitting", derham_splitting},
      {"factor-dichotomy", factor_dichotomy},
      {"compact-iff-cones", compact_iff_cones},
      {"einstein-semidirect", einstein_semidirect},
      {"global-noncompactness", global_noncompactness},
      {"cone-radial-field", cone_radial_field},
      {"cone-homothety", cone_homothety},
      {"cone-curvature-nullity", cone_curvature_nullity},
      {"product-action", product_action},
      {"bundle-maps", bundle_maps},
      {"rolling-sphere", rolling_sphere},
  };
  return fns;
}

}  // namespace

SuiteReport run_suite(const SuiteOptions& options) {
  SuiteContext ctx(options);
  SuiteReport report;
  for (const CheckInfo& info : suite_checks()) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), info.name) == options.only.end()) {
      continue;
    }
    CheckResult r;
    r.name = info.name;
    r.statement = info.statement;
    try {
      check_functions().at(info.name)(ctx, r);
    } catch (const Error& e) {
      r.status = CheckStatus::Fail;
      r.detail = e.what();
    }
    switch (r.status) {
      case CheckStatus::Pass: ++report.passed; break;
      case CheckStatus::Fail: ++report.failed; break;
      case CheckStatus::Skip: ++report.skipped; break;
    }
    report.checks.push_back(std::move(r));
  }
  return report;
}

Json to_json(const SuiteReport& report, const SuiteOptions& options) {
  Json entries = Json::array();
  for (const CatalogEntry& e : options.entries) entries.push_back(e.name);
  Json checks = Json::array();
  for (const CheckResult& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"statement", c.statement},
                      {"status", std::string(to_string(c.status))},
                      {"residuals", c.residuals},
                      {"detail", c.detail}});
  }
  return {{"manifolds", entries},
          {"protocol", to_json(options.protocol)},
          {"tolerances", to_json(options.tol)},
          {"rolling_step", options.rolling_step},
          {"checks", checks},
          {"summary", {{"pass", report.passed}, {"fail", report.failed}, {"skip", report.skipped}}}};
}

}  // namespace cartan
