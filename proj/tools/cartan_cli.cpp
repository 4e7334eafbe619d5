#include <chrono>
#include <ctime>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cartan/suite.hpp"

using namespace cartan;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<double> step;
  std::string tol_file;
  std::string out;
  bool no_meta = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "seed for the random polygons");
  cmd->add_option("--step", c.step, "RK4 step in curve parameter")->check(CLI::PositiveNumber);
  cmd->add_option("--tol-file", c.tol_file, "JSON file of tolerance overrides")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "write the result here instead of stdout");
  cmd->add_flag("--no-meta", c.no_meta, "omit tool, version and timestamp");
}

void apply_common(const Common& c, Protocol& protocol, bool& seed_given, Tolerances& tol) {
  if (c.seed) {
    protocol.seed = *c.seed;
    seed_given = true;
  }
  if (!c.tol_file.empty()) tol = tolerances_from_json(load_json_file(c.tol_file), tol);
  if (c.step) tol.rk4_step = *c.step;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(Json j, const Common& c, const std::string& config_output) {
  if (!c.no_meta) j["meta"] = {{"tool", "cartan"}, {"version", kVersion}, {"timestamp", utc_timestamp()}};
  const std::string text = dump_json(j);
  const std::string& path = c.out.empty() ? config_output : c.out;
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

struct Loaded {
  RunConfig cfg;
  MetricChart chart;
};

Loaded load(const std::string& path, const Common& c) {
  RunConfig cfg = load_config(path);
  apply_common(c, cfg.protocol, cfg.seed_given, cfg.tol);
  MetricChart chart = chart_from_descriptor(cfg.entry.descriptor);
  finalize_config(cfg, chart);
  return {std::move(cfg), std::move(chart)};
}

int fail_json(const Error& e) {
  Json j = {{"status", "FAIL"}, {"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}};
  std::cout << dump_json(j);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine holonomy of Riemannian metrics: sampling, classification and cone certificates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto* cat = app.add_subcommand("catalog", "shipped manifolds");
  auto* cat_list = cat->add_subcommand("list", "print the catalog as JSON");
  cat->require_subcommand(1);

  Common common;
  std::string config;

  auto* hol = app.add_subcommand("holonomy", "develop the protocol loops and print the elements");
  auto* cls = app.add_subcommand("classify", "split the holonomy and classify each factor");
  auto* cone = app.add_subcommand("cone-check", "certify a cone structure at the base point");
  auto* dev = app.add_subcommand("develop", "development trace of a curve as CSV");
  for (auto* cmd : {hol, cls, cone, dev}) {
    cmd->add_option("config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    add_common(cmd, common);
  }

  auto* ver = app.add_subcommand("verify", "run the verification checks");
  bool all = false, list = false;
  std::vector<std::string> only;
  ver->add_option("config", config, "run configuration (JSON)")->check(CLI::ExistingFile);
  ver->add_flag("--all", all, "every catalog manifold");
  ver->add_flag("--list", list, "list the checks and exit");
  ver->add_option("--only", only, "restrict to these checks");
  add_common(ver, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cat_list->parsed()) {
      Json out = Json::array();
      for (const CatalogEntry& e : catalog()) {
        out.push_back({{"name", e.name},
                       {"summary", e.summary},
                       {"dimension", e.base.size()},
                       {"base", to_json(e.base)},
                       {"expected", e.expected},
                       {"cone", e.cone}});
      }
      std::cout << dump_json(out);
      return 0;
    }

    if (hol->parsed()) {
      Loaded l = load(config, common);
      const HolonomySample s = sample_holonomy(l.chart, l.cfg.base, l.cfg.protocol, l.cfg.tol);
      Json j = {{"status", "OK"}};
      j.update(to_json(s, l.cfg.entry.name));
      emit(j, common, l.cfg.output);
      return 0;
    }

    if (cls->parsed()) {
      Loaded l = load(config, common);
      const HolonomySample s = sample_holonomy(l.chart, l.cfg.base, l.cfg.protocol, l.cfg.tol);
      Json j = {{"status", "OK"}};
      const ClassificationReport r = classify_sample(s, l.cfg.protocol, l.cfg.tol, l.cfg.entry.name);
      j.update(to_json(r));
      if (r.verdict == OverallVerdict::Compact) {
        ConeOptions co = l.cfg.cone;
        co.protocol = l.cfg.protocol;
        try {
          j["cone"] = to_json(certify_cone(l.chart, l.cfg.base, l.cfg.p_star, co, l.cfg.tol));
        } catch (const Error& e) {
          j["cone"] = {{"status", "FAIL"}, {"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}};
        }
      }
      if (l.cfg.evidence_loop) {
        j["evidence"] = to_json(global_noncompactness_evidence(l.chart, *l.cfg.evidence_loop, l.cfg.k_max, l.cfg.tol));
      }
      emit(j, common, l.cfg.output);
      return 0;
    }

    if (cone->parsed()) {
      Loaded l = load(config, common);
      ConeOptions co = l.cfg.cone;
      co.protocol = l.cfg.protocol;
      Json j = {{"status", "OK"}, {"manifold", l.cfg.entry.name}};
      j.update(to_json(certify_cone(l.chart, l.cfg.base, l.cfg.p_star, co, l.cfg.tol)));
      emit(j, common, l.cfg.output);
      return 0;
    }

    if (dev->parsed()) {
      Loaded l = load(config, common);
      const Curve curve = develop_curve_of(l.cfg, l.chart);
      const FramePoint frame = orthonormal_frame(l.chart, l.cfg.base, l.cfg.tol);
      const std::string csv = to_csv(development_trace(l.chart, curve, frame, l.cfg.tol));
      const std::string& path = common.out.empty() ? l.cfg.output : common.out;
      if (path.empty()) {
        std::cout << csv;
      } else {
        write_file_atomic(path, csv);
      }
      return 0;
    }

    if (ver->parsed()) {
      if (list) {
        for (const CheckInfo& c : suite_checks()) std::cout << c.name << "  " << c.statement << "\n";
        return 0;
      }
      if (all == !config.empty()) {
        std::cerr << "verify: give either a config file or --all\n";
        return 2;
      }
      SuiteOptions opt;
      std::string config_output;
      if (all) {
        opt.entries = catalog();
        bool seed_given = true;
        apply_common(common, opt.protocol, seed_given, opt.tol);
      } else {
        Loaded l = load(config, common);
        opt.entries = {l.cfg.entry};
        opt.protocol = l.cfg.protocol;
        opt.tol = l.cfg.tol;
        opt.only = l.cfg.checks;
        opt.k_max = l.cfg.k_max;
        config_output = l.cfg.output;
      }
      for (const std::string& name : only) {
        bool known = false;
        for (const CheckInfo& c : suite_checks()) known = known || c.name == name;
        if (!known) throw Error(ErrorCode::ConfigInvalid, "unknown check '" + name + "'");
      }
      if (!only.empty()) opt.only = only;
      const SuiteReport report = run_suite(opt);
      Json j = {{"status", report.ok() ? "OK" : "FAIL"}};
      j.update(to_json(report, opt));
      emit(j, common, config_output);
      for (const CheckResult& c : report.checks) {
        std::cerr << to_string(c.status) << "  " << c.name;
        if (!c.detail.empty()) std::cerr << "  (" << c.detail << ")";
        std::cerr << "\n";
      }
      return report.ok() ? 0 : 1;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) {
      std::cerr << e.what() << "\n";
      return 2;
    }
    return fail_json(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
