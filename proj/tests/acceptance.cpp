// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [path-to-cartan-cli]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "cartan/suite.hpp"

using namespace cartan;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [" << what << "]";
    }
  }
};

MetricChart chart_of(const std::string& name) { return chart_from_descriptor(catalog_entry(name).descriptor); }

Vec unit(int m, int i, double s = 1.0) {
  Vec v = Vec::Zero(m);
  v[i] = s;
  return v;
}

Outcome rolling_sphere() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const MetricChart s2 = sphere_chart();
  const Vec x{{pi / 2, 0.0}};
  Tolerances tol;
  tol.rk4_step = 1e-4;
  const FramePoint f = orthonormal_frame(s2, x, tol);
  const AffineIsometry h = develop_loop(s2, LoopSpec::coord_line(x, 1), f, tol);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Vec velocity = f.columns.partialPivLu().solve(unit(2, 1));
  const double angle =
      std::acos(std::min(1.0, std::abs(h.translation.dot(velocity)) / (h.translation.norm() * velocity.norm())));
  o.note << "|A-I|=" << linear_defect(h) << " |b|-2pi=" << h.translation.norm() - 2 * pi << " angle=" << angle
         << " time=" << seconds << "s";
  o.require(linear_defect(h) < 1e-6, "linear part");
  o.require(std::abs(h.translation.norm() - 2 * pi) < 1e-3, "length");
  o.require(angle < 1e-3, "direction");
  o.require(seconds < 1.0, "runtime");
  return o;
}

Outcome flat_triviality() {
  Outcome o;
  Protocol p;
  p.n_polygons = 200;
  double worst = 0.0;
  std::size_t loops = 0;
  for (const char* name : {"flat-r2", "flat-r3"}) {
    const CatalogEntry& e = catalog_entry(name);
    const HolonomySample s = sample_holonomy(chart_of(name), e.base, p);
    loops = std::min(loops == 0 ? s.elements.size() : loops, s.elements.size());
    for (const AffineIsometry& h : s.elements) {
      worst = std::max(worst, (h.linear - Mat::Identity(h.dim(), h.dim())).cwiseAbs().maxCoeff());
      worst = std::max(worst, h.translation.cwiseAbs().maxCoeff());
    }
  }
  o.note << "loops>=" << loops << " max deviation=" << worst;
  o.require(loops >= 200, "loop count");
  o.require(worst < 1e-8, "deviation");
  return o;
}

Outcome cone_compactness() {
  Outcome o;
  for (const char* name : {"cone-circle", "cone-sphere"}) {
    const CatalogEntry& e = catalog_entry(name);
    const ClassificationReport r = classify(chart_of(name), e.base, Protocol{});
    const FixedPointResult& fp = r.fixed_point;
    const double err = (fp.point - unit(static_cast<int>(e.base.size()), 0, -e.apex_distance)).norm();
    o.note << name << ": residual/scale=" << fp.residual / fp.scale << " apex error=" << err << "; ";
    o.require(fp.residual < 1e-4 * fp.scale, std::string(name) + " residual");
    o.require(err < 1e-3, std::string(name) + " apex");
    o.require(r.factors.size() == 1 && r.factors[0].verdict == FactorVerdict::CompactFixedPoint,
              std::string(name) + " factor verdict");
  }
  const CatalogEntry& pc = catalog_entry("cone-x-cone");
  const ClassificationReport r = classify(chart_of("cone-x-cone"), pc.base, Protocol{});
  o.note << "cone-x-cone: off-block=" << r.blocks.max_off_block << " verdict=" << to_string(r.verdict);
  o.require(r.blocks.pass && r.blocks.max_off_block < 1e-6, "product blocks");
  o.require(r.verdict == OverallVerdict::Compact, "product verdict");
  return o;
}

Outcome einstein_semidirect() {
  Outcome o;
  const CatalogEntry& e = catalog_entry("sphere-s2");
  const ClassificationReport r = classify(chart_of("sphere-s2"), e.base, Protocol{});
  const FixedPointResult& fp = r.fixed_point;
  const bool one = r.factors.size() == 1;
  const double s2 = one && r.factors[0].translation_singular_values.size() > 1 ? r.factors[0].translation_singular_values[1] : 0;
  o.note << "rank=" << (one ? r.factors[0].translation_rank : -1) << " sigma2=" << s2
         << " residual/scale=" << fp.residual / fp.scale << " verdict=" << to_string(r.verdict);
  o.require(one && r.factors[0].translation_rank == 2 && s2 > 1e-3, "translation span");
  o.require(fp.verdict == FixedPointVerdict::NoFixedPoint && fp.residual > 1e-2 * fp.scale, "fixed point");
  o.require(r.verdict == OverallVerdict::FullSemidirect, "verdict");
  return o;
}

Outcome derham_splitting() {
  Outcome o;
  const CatalogEntry& e = catalog_entry("flat-x-sphere");
  const HolonomySample s = sample_holonomy(chart_of("flat-x-sphere"), e.base, Protocol{});
  const SplittingResult split = derham_split(s);
  const ProductBlockReport b = verify_product_blocks(s.elements, split);
  o.note << "dims=";
  for (const Mat& q : split.subspaces) o.note << q.cols() << ",";
  o.note << " flat translation=" << b.max_flat_translation << " flat linear=" << b.max_flat_linear;
  o.require(split.subspaces.size() == 2 && split.subspaces[0].cols() == 1 && split.subspaces[1].cols() == 2,
            "dimensions");
  o.require(b.max_flat_translation < 1e-8 && b.max_flat_linear < 1e-8, "flat factor");
  return o;
}

Outcome cone_certificates() {
  Outcome o;
  for (const CatalogEntry& e : catalog()) {
    if (!e.cone) continue;
    const MetricChart chart = chart_of(e.name);
    std::optional<Vec> p;
    if (e.expected == "TRIVIAL") p = unit(chart.dim(), 0, -e.apex_distance);
    const ConeCertificate c = certify_cone(chart, e.base, p);
    const double worst = std::max({c.residual_nabla, c.residual_homothety, c.residual_curv, c.residual_grad});
    o.note << e.name << "=" << worst << " ";
    o.require(worst < 1e-4 && c.verdict == ConeVerdict::Cone, e.name);
  }
  for (const char* name : {"sphere-s2", "paraboloid"}) {
    try {
      const ConeCertificate c = certify_cone(chart_of(name), catalog_entry(name).base);
      const double worst = std::max({c.residual_nabla, c.residual_homothety, c.residual_curv, c.residual_grad});
      o.note << name << "=" << worst << " ";
      o.require(worst > 1e-2, std::string(name) + " control");
    } catch (const Error& err) {
      o.note << name << "=" << to_string(err.code()) << " ";
      o.require(err.code() == ErrorCode::NoFixedPoint, std::string(name) + " control");
    }
  }
  return o;
}

Outcome noncompactness() {
  Outcome o;
  const EvidenceReport r =
      global_noncompactness_evidence(sphere_chart(), LoopSpec::coord_line(Vec{{pi / 2, 0.0}}, 1), 5);
  double err = 0.0;
  for (std::size_t k = 0; k < r.translation_norms.size(); ++k)
    err = std::max(err, std::abs(r.translation_norms[k] - 2 * pi * static_cast<double>(k + 1)));
  o.note << "max | |b_k| - 2 pi k | = " << err;
  o.require(r.translation_norms.size() == 5 && err < 1e-3, "lengths");
  o.require(r.strictly_increasing, "increasing");
  return o;
}

Outcome structure_identities() {
  Outcome o;
  SuiteOptions opt;
  opt.only = {"bundle-maps"};
  const SuiteReport r = run_suite(opt);
  o.note << "equivariance=" << r.checks.at(0).residuals["equivariance"].get<double>() << " over "
         << opt.bundle_trials << " trials";
  o.require(opt.bundle_trials >= 100, "trials");
  o.require(r.ok(), "identities");
  return o;
}

Outcome numerical_quality() {
  Outcome o;
  double min_order = 1e9, min_lin = 1e9, max_lin = -1e9, min_tr = 1e9, drift = 0.0;
  const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
  for (const CatalogEntry& e : catalog()) {
    const MetricChart chart = chart_of(e.name);
    const FramePoint f = orthonormal_frame(chart, e.base);
    const GeodesicTrace g = geodesic(chart, e.base, f.columns.col(0), 0.5, Tolerances{}.rk4_step);
    drift = std::max(drift, g.max_speed_drift);

    // Most curved coordinate plane at the base point.
    int bi = 0, bj = 1;
    double top = 0.0;
    for (int i = 0; i < chart.dim(); ++i)
      for (int j = i + 1; j < chart.dim(); ++j) {
        const double k = in_frame(curvature_op(chart, e.base, {e.base, unit(chart.dim(), i)},
                                               {e.base, unit(chart.dim(), j)}),
                                  f)
                             .cwiseAbs()
                             .maxCoeff();
        if (k > top) top = k, bi = i, bj = j;
      }
    if (top < Tolerances{}.tol_curv) continue;

    std::vector<AffineIsometry> h;
    for (double step : {0.04, 0.02, 0.01}) {
      Tolerances tol;
      tol.rk4_step = step;
      h.push_back(develop_loop(chart, LoopSpec::rect(e.base, bi, bj, 0.4), f, tol));
    }
    auto gap = [](const AffineIsometry& a, const AffineIsometry& b) {
      return std::max((a.linear - b.linear).cwiseAbs().maxCoeff(), (a.translation - b.translation).cwiseAbs().maxCoeff());
    };
    min_order = std::min(min_order, std::log2(gap(h[0], h[1]) / gap(h[1], h[2])));

    const LoopFamily fam = small_loop_family(chart, e.base, eps, bi, bj);
    std::vector<double> a, b;
    for (const LoopDiagnostic& d : fam.diagnostics) {
      a.push_back(d.linear_defect);
      b.push_back(d.translation_norm);
    }
    min_lin = std::min(min_lin, loglog_slope(eps, a));
    max_lin = std::max(max_lin, loglog_slope(eps, a));
    min_tr = std::min(min_tr, loglog_slope(eps, b));
  }
  o.note << "order>=" << min_order << " linear slope in [" << min_lin << ", " << max_lin
         << "] translation slope>=" << min_tr << " speed drift=" << drift;
  o.require(min_order >= 3.5, "order");
  o.require(min_lin >= 1.8 && max_lin <= 2.2, "linear slope");
  o.require(min_tr >= 2.7, "translation slope");
  o.require(drift < 1e-6, "speed drift");
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const char* cli) {
  Outcome o;
  if (cli) {
    const auto dir = std::filesystem::temp_directory_path() / "cartan_acceptance";
    std::filesystem::create_directories(dir);
    std::string text[2];
    for (int run = 0; run < 2; ++run) {
      const auto out = dir / ("run" + std::to_string(run) + ".json");
      const std::string cmd = std::string("\"") + cli + "\" verify --all --seed 42 --no-meta --out \"" +
                              out.string() + "\" 2>/dev/null";
      const int rc = std::system(cmd.c_str());
      o.require(rc == 0, "run " + std::to_string(run) + " exit status");
      text[run] = slurp(out);
    }
    o.note << "cli reports of " << text[0].size() << " bytes";
    o.require(!text[0].empty() && text[0] == text[1], "byte identical");
    std::filesystem::remove_all(dir);
  } else {
    SuiteOptions opt;
    opt.entries = catalog();
    const std::string a = dump_json(to_json(run_suite(opt), opt));
    const std::string b = dump_json(to_json(run_suite(opt), opt));
    o.note << "in-process reports of " << a.size() << " bytes";
    o.require(a == b, "byte identical");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli = argc > 1 ? argv[1] : nullptr;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"rolling-sphere translation", rolling_sphere},
      {"flat triviality", flat_triviality},
      {"cone compactness", cone_compactness},
      {"einstein semidirect", einstein_semidirect},
      {"de rham splitting", derham_splitting},
      {"cone certificate identities", cone_certificates},
      {"noncompactness evidence", noncompactness},
      {"structure identities", structure_identities},
      {"numerical quality gates", numerical_quality},
      {"determinism", [cli] { return determinism(cli); }},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note << "error: " << e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << index << ". " << c.name << ": " << o.note.str() << "\n";
  }
  return failed == 0 ? 0 : 1;
}
