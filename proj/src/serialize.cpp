#include "cartan/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cartan {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

std::string number_text(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write(std::ostringstream& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << inner << Json(it.key()).dump() << ": ";
        write(out, it.value(), indent + 1);
      }
      out << "\n" << pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (flat) {
        out << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out << ", ";
          write(out, j[i], indent + 1);
        }
        out << "]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ",\n";
        out << inner;
        write(out, j[i], indent + 1);
      }
      out << "\n" << pad << "]";
      return;
    }
    case Json::value_t::number_float:
      out << number_text(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

template <typename T>
T typed(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    invalid(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string dump_json(const Json& j) {
  std::ostringstream out;
  write(out, j, 0);
  out << "\n";
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::ConfigInvalid, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

Json to_json(const AffineIsometry& h) { return {{"A", to_json(h.linear)}, {"b", to_json(h.translation)}}; }

Json to_json(const Tolerances& t) {
  return {{"h_fd", t.h_fd},           {"eps_pd", t.eps_pd},
          {"eps_frame", t.eps_frame}, {"tol_speed", t.tol_speed},
          {"tol_curv", t.tol_curv},   {"tol_orth", t.tol_orth},
          {"tol_identity", t.tol_identity}, {"tol_fp", t.tol_fp},
          {"eps_ridge", t.eps_ridge}, {"tol_split", t.tol_split},
          {"eig_merge_gap", t.eig_merge_gap}, {"tol_rank", t.tol_rank},
          {"eps_v", t.eps_v},         {"tol_cone", t.tol_cone},
          {"rk4_step", t.rk4_step}};
}

Json to_json(const Protocol& p) {
  Json planes = Json::array();
  for (const auto& [i, j] : p.planes) planes.push_back(Json::array({i, j}));
  Json out = {{"eps_list", p.eps_list},
              {"planes", planes},
              {"periodic_loops", p.periodic_loops},
              {"n_polygons", p.n_polygons},
              {"polygon_vertices", p.polygon_vertices},
              {"polygon_side", p.polygon_side},
              {"seed", p.seed}};
  if (p.frame_rotation) out["frame_rotation"] = to_json(*p.frame_rotation);
  return out;
}

Json to_json(const LoopSpec& l) {
  Json out = {{"kind", std::string(to_string(l.kind))}, {"orientation", l.orientation}};
  switch (l.kind) {
    case LoopKind::CoordRect:
      out["plane"] = Json::array({l.axis_i, l.axis_j});
      out["eps"] = l.eps;
      break;
    case LoopKind::GeodesicPolygon: {
      Json dirs = Json::array();
      for (const Vec& d : l.directions) dirs.push_back(to_json(d));
      out["side"] = l.side;
      out["directions"] = dirs;
      break;
    }
    case LoopKind::ParamCurve:
      out["samples"] = static_cast<int>(l.samples.size());
      break;
    case LoopKind::CoordLine:
      out["axis"] = l.axis;
      out["turns"] = l.turns;
      break;
  }
  return out;
}

Json to_json(const FixedPointResult& fp) {
  return {{"verdict", std::string(to_string(fp.verdict))},
          {"point", to_json(fp.point)},
          {"residual", fp.residual},
          {"scale", fp.scale},
          {"rank", fp.rank}};
}

Json to_json(const HolonomySample& s, const std::string& manifold) {
  Json elements = Json::array();
  for (std::size_t i = 0; i < s.elements.size(); ++i) {
    Json e = to_json(s.elements[i]);
    e["loop"] = to_json(s.loops[i]);
    e["linear_defect"] = linear_defect(s.elements[i]);
    e["orthogonality_defect"] = orthogonality_defect(s.elements[i].linear);
    elements.push_back(e);
  }
  return {{"manifold", manifold},
          {"base", to_json(s.base)},
          {"frame", to_json(s.frame.columns)},
          {"element_count", static_cast<int>(s.elements.size())},
          {"elements", elements}};
}

Json to_json(const ClassificationReport& r) {
  Json factors = Json::array();
  for (const FactorReport& f : r.factors) {
    Json j = {{"dims", f.dim()},
              {"flat", f.flat},
              {"basis", to_json(f.basis)},
              {"verdict", std::string(to_string(f.verdict))},
              {"translation_rank", f.translation_rank},
              {"inconsistent", f.inconsistent},
              {"residuals",
               {{"fixed_point", f.fixed_point.residual},
                {"fixed_point_scale", f.fixed_point.scale},
                {"translation_singular_values", f.translation_singular_values}}}};
    if (f.fixed_point_full) j["fixed_point"] = to_json(*f.fixed_point_full);
    factors.push_back(j);
  }
  return {{"manifold", r.manifold},
          {"base", to_json(r.base)},
          {"verdict", std::string(to_string(r.verdict))},
          {"inconsistent", r.inconsistent},
          {"factors", factors},
          {"product_blocks",
           {{"pass", r.blocks.pass},
            {"max_off_block", r.blocks.max_off_block},
            {"max_flat_translation", r.blocks.max_flat_translation},
            {"max_flat_linear", r.blocks.max_flat_linear},
            {"offending_element", r.blocks.offending_element}}},
          {"fixed_point", to_json(r.fixed_point)},
          {"loop_count", r.loop_count},
          {"protocol", to_json(r.protocol)},
          {"tolerances", to_json(r.tolerances)},
          {"note", "local holonomy approximated by the loop protocol around the base point"}};
}

Json to_json(const ConeCertificate& c) {
  return {{"base", to_json(c.base)},
          {"p_star", to_json(c.p_star)},
          {"p_star_source", c.p_star_from_holonomy ? "holonomy" : "supplied"},
          {"fixed_point_residual", c.fixed_point_residual},
          {"field_at_base", to_json(c.field_at_base)},
          {"field_norm", c.field_norm},
          {"residuals",
           {{"nabla", c.residual_nabla},
            {"curvature", c.residual_curv},
            {"homothety", c.residual_homothety},
            {"gradient", c.residual_grad}}},
          {"probe_count", c.probe_count},
          {"verdict", std::string(to_string(c.verdict))}};
}

Json to_json(const EvidenceReport& e) {
  Json elements = Json::array();
  for (const AffineIsometry& h : e.elements) elements.push_back(to_json(h));
  return {{"loop", to_json(e.loop)},
          {"k", e.k},
          {"translation_norms", e.translation_norms},
          {"strictly_increasing", e.strictly_increasing},
          {"single_loop_fixed_point", std::string(to_string(e.single_loop_fixed_point))},
          {"verdict", std::string(to_string(e.verdict))},
          {"elements", elements},
          {"note", "finite-range evidence of translation growth, not a compactness proof"}};
}

std::string to_csv(const DevelopmentTrace& trace) {
  std::ostringstream out;
  const auto m = trace.samples.empty() ? 0 : trace.samples.front().dev.size();
  out << "t";
  for (Eigen::Index i = 1; i <= m; ++i) out << ",dev_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) out << ",pos_" << i;
  out << "\n";
  for (const TraceSample& s : trace.samples) {
    out << number_text(s.t);
    for (Eigen::Index i = 0; i < m; ++i) out << "," << number_text(s.dev[i]);
    for (Eigen::Index i = 0; i < m; ++i) out << "," << number_text(s.pos[i]);
    out << "\n";
  }
  return out.str();
}

Vec vec_from_json(const json& j, const char* what) {
  if (!j.is_array()) invalid(std::string(what) + " must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) invalid(std::string(what) + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Mat mat_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) invalid(std::string(what) + " must be a nonempty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Vec first = vec_from_json(j[0], what);
  Mat m(rows, first.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vec row = vec_from_json(j[static_cast<std::size_t>(r)], what);
    if (row.size() != first.size()) invalid(std::string(what) + " has ragged rows");
    m.row(r) = row.transpose();
  }
  return m;
}

AffineIsometry affine_from_json(const json& j) {
  if (!j.is_object() || !j.contains("A") || !j.contains("b")) invalid("affine map needs 'A' and 'b'");
  AffineIsometry h{mat_from_json(j.at("A"), "A"), vec_from_json(j.at("b"), "b")};
  if (h.linear.rows() != h.dim() || h.linear.cols() != h.dim()) invalid("affine map dimensions");
  return h;
}

Tolerances tolerances_from_json(const json& j, Tolerances t) {
  if (!j.is_object()) invalid("tolerances must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) invalid("tolerance '" + it.key() + "' must be a number");
    const double v = it.value().get<double>();
    if (!(v > 0.0)) invalid("tolerance '" + it.key() + "' must be positive");
    const std::string& k = it.key();
    if (k == "h_fd") t.h_fd = v;
    else if (k == "eps_pd") t.eps_pd = v;
    else if (k == "eps_frame") t.eps_frame = v;
    else if (k == "tol_speed") t.tol_speed = v;
    else if (k == "tol_curv") t.tol_curv = v;
    else if (k == "tol_orth") t.tol_orth = v;
    else if (k == "tol_identity") t.tol_identity = v;
    else if (k == "tol_fp") t.tol_fp = v;
    else if (k == "eps_ridge") t.eps_ridge = v;
    else if (k == "tol_split") t.tol_split = v;
    else if (k == "eig_merge_gap") t.eig_merge_gap = v;
    else if (k == "tol_rank") t.tol_rank = v;
    else if (k == "eps_v") t.eps_v = v;
    else if (k == "tol_cone") t.tol_cone = v;
    else if (k == "rk4_step") t.rk4_step = v;
    else invalid("unknown tolerance '" + k + "'");
  }
  return t;
}

Protocol protocol_from_json(const json& j, Protocol p) {
  if (!j.is_object()) invalid("protocol must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "eps_list") {
      const Vec e = vec_from_json(it.value(), "eps_list");
      p.eps_list.assign(e.data(), e.data() + e.size());
      for (double x : p.eps_list)
        if (!(x > 0.0)) invalid("eps_list entries must be positive");
    } else if (k == "planes") {
      if (!it.value().is_array()) invalid("planes must be an array of index pairs");
      p.planes.clear();
      for (const json& pl : it.value()) {
        if (!pl.is_array() || pl.size() != 2 || !pl[0].is_number_integer() || !pl[1].is_number_integer()) {
          invalid("planes must be an array of index pairs");
        }
        p.planes.emplace_back(pl[0].get<int>(), pl[1].get<int>());
      }
    } else if (k == "periodic_loops") {
      p.periodic_loops = typed<bool>(j, "periodic_loops");
    } else if (k == "n_polygons") {
      p.n_polygons = typed<int>(j, "n_polygons");
      if (p.n_polygons < 0) invalid("n_polygons must be nonnegative");
    } else if (k == "polygon_vertices") {
      p.polygon_vertices = typed<int>(j, "polygon_vertices");
      if (p.polygon_vertices < 2) invalid("polygon_vertices must be at least 2");
    } else if (k == "polygon_side") {
      p.polygon_side = typed<double>(j, "polygon_side");
      if (!(p.polygon_side > 0.0)) invalid("polygon_side must be positive");
    } else if (k == "seed") {
      if (!it.value().is_number_unsigned()) invalid("seed must be a nonnegative integer");
      p.seed = it.value().get<std::uint64_t>();
    } else if (k == "frame_rotation") {
      p.frame_rotation = mat_from_json(it.value(), "frame_rotation");
    } else {
      invalid("unknown protocol field '" + k + "'");
    }
  }
  return p;
}

}  // namespace cartan
