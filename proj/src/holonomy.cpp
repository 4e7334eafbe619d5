#include "cartan/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cartan/parallel.hpp"
#include "cartan/transport.hpp"

namespace cartan {

double Protocol::length_scale() const {
  double L = polygon_side;
  for (double e : eps_list) L = std::max(L, e);
  return L;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  return r * std::cos(a);
}

Vec Rng::unit_vector(int dim) {
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal();
  } while (v.norm() < 1e-8);
  return v.normalized();
}

std::vector<LoopSpec> protocol_loops(const MetricChart& chart, const Vec& x, const Protocol& protocol) {
  const int m = chart.dim();
  std::vector<std::pair<int, int>> planes = protocol.planes;
  if (planes.empty())
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) planes.emplace_back(i, j);

  std::vector<LoopSpec> loops;
  for (double eps : protocol.eps_list)
    for (const auto& [i, j] : planes) loops.push_back(LoopSpec::rect(x, i, j, eps));
  if (protocol.periodic_loops)
    for (int a = 0; a < m; ++a)
      if (chart.is_periodic(a)) loops.push_back(LoopSpec::coord_line(x, a));
  Rng rng(protocol.seed);
  for (int p = 0; p < protocol.n_polygons; ++p) {
    std::vector<Vec> dirs;
    for (int k = 0; k < protocol.polygon_vertices; ++k) dirs.push_back(rng.unit_vector(m));
    loops.push_back(LoopSpec::polygon(x, std::move(dirs), protocol.polygon_side));
  }
  return loops;
}

FramePoint protocol_frame(const MetricChart& chart, const Vec& x, const Protocol& protocol,
                          const Tolerances& tol) {
  FramePoint frame = orthonormal_frame(chart, x, tol);
  if (protocol.frame_rotation) {
    const Mat& q = *protocol.frame_rotation;
    if (q.rows() != chart.dim() || q.cols() != chart.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "frame rotation has the wrong size");
    }
    if (orthogonality_defect(q) > tol.tol_orth) {
      throw Error(ErrorCode::NonOrthogonalLinearPart, "frame rotation is not orthogonal");
    }
    frame.columns = frame.columns * q;
  }
  return frame;
}

namespace {

template <typename Runner>
HolonomySample sample_with(const MetricChart& chart, const Vec& x, const Protocol& protocol,
                           const Tolerances& tol, Runner run) {
  if (x.size() != chart.dim()) throw Error(ErrorCode::DimensionMismatch, "base point dimension");
  chart.require_inside(x);
  const FramePoint canonical = orthonormal_frame(chart, x, tol);
  HolonomySample sample;
  sample.base = x;
  sample.frame = protocol_frame(chart, x, protocol, tol);
  sample.loops = protocol_loops(chart, x, protocol);
  sample.elements.resize(sample.loops.size());
  run(sample.loops.size(), [&](std::size_t k) {
    const Curve curve = build_curve(chart, sample.loops[k], canonical, tol);
    sample.elements[k] = develop_curve(chart, curve, sample.frame, tol);
  });
  if (sample.elements.empty()) throw Error(ErrorCode::EmptySample, "protocol produced no loops");
  return sample;
}

// Orthonormal basis of range(P) read off the projector itself, so it does not
// depend on which basis the subspace was found in.
Mat canonical_basis(const Mat& u) {
  const int k = static_cast<int>(u.cols());
  Mat cols = u * u.transpose();
  Mat out(u.rows(), k);
  for (int c = 0; c < k; ++c) {
    Eigen::Index pivot = 0;
    cols.colwise().norm().maxCoeff(&pivot);
    Vec v = cols.col(pivot).normalized();
    if (v[pivot] < 0) v = -v;
    out.col(c) = v;
    cols -= v * (v.transpose() * cols);
  }
  return out;
}

bool lex_less(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) return a.cols() < b.cols();
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      if (a(r, c) != b(r, c)) return a(r, c) < b(r, c);
  return false;
}

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(a).singularValues()[0];
}

}  // namespace

HolonomySample sample_holonomy(const MetricChart& chart, const Vec& x, const Protocol& protocol,
                               const Tolerances& tol) {
  return sample_with(chart, x, protocol, tol,
                     [](std::size_t n, auto&& fn) { par::for_each_index(n, fn); });
}

HolonomySample sample_holonomy_serial(const MetricChart& chart, const Vec& x,
                                      const Protocol& protocol, const Tolerances& tol) {
  return sample_with(chart, x, protocol, tol,
                     [](std::size_t n, auto&& fn) { par::for_each_index_serial(n, fn); });
}

SplittingResult derham_split(const std::vector<AffineIsometry>& elements, const Tolerances& tol) {
  if (elements.empty()) throw Error(ErrorCode::EmptySample, "derham_split: no elements");
  const int m = elements.front().dim();
  const Mat I = Mat::Identity(m, m);
  Mat stacked(static_cast<Eigen::Index>(elements.size()) * m, m);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i].dim() != m) throw Error(ErrorCode::DimensionMismatch, "derham_split");
    stacked.middleRows(static_cast<Eigen::Index>(i) * m, m) = elements[i].linear - I;
  }

  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  const double cut = tol.tol_split * std::max(1.0, sv[0]);
  const int moving = static_cast<int>((sv.array() > cut).count());
  const Mat flat = svd.matrixV().rightCols(m - moving);
  const Mat rest = svd.matrixV().leftCols(moving);

  // Candidate factors: eigenspaces of the averaged (A - I)^T (A - I) on the
  // complement of the flat factor.
  std::vector<Mat> groups;
  if (moving > 0) {
    const Mat s = rest.transpose() * (stacked.transpose() * stacked) * rest;
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (s + s.transpose()));
    const Vec lambda = eig.eigenvalues();
    const double gap = tol.eig_merge_gap * std::max(1.0, lambda.cwiseAbs().maxCoeff());
    int start = 0;
    for (int k = 1; k <= moving; ++k) {
      if (k == moving || lambda[k] - lambda[k - 1] >= gap) {
        groups.push_back(rest * eig.eigenvectors().middleCols(start, k - start));
        start = k;
      }
    }
  }

  // Merge candidates until each one is invariant under every linear part.
  auto coupling = [&](const Mat& from, const Mat& to) {
    double c = 0.0;
    for (const AffineIsometry& h : elements)
      c = std::max(c, spectral_norm(to.transpose() * h.linear * from));
    return c;
  };
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t a = 0; a < groups.size() && !merged; ++a) {
      for (std::size_t b = 0; b < groups.size() && !merged; ++b) {
        if (a == b) continue;
        const double c = coupling(groups[a], groups[b]);
        if (c > tol.tol_split && c <= 10.0 * tol.tol_split) {
          throw Error(ErrorCode::ToleranceAmbiguity,
                      "factor coupling " + std::to_string(c) + " is within a decade of tol_split");
        }
        if (c > tol.tol_split) {
          Mat joined(m, groups[a].cols() + groups[b].cols());
          joined << groups[a], groups[b];
          const std::size_t lo = std::min(a, b), hi = std::max(a, b);
          groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(hi));
          groups[lo] = joined;
          merged = true;
        }
      }
    }
  }

  SplittingResult out;
  out.subspaces.push_back(flat.cols() > 0 ? canonical_basis(flat) : Mat(m, 0));
  std::vector<Mat> factors;
  for (const Mat& g : groups) factors.push_back(canonical_basis(g));
  std::sort(factors.begin(), factors.end(), lex_less);
  out.subspaces.insert(out.subspaces.end(), factors.begin(), factors.end());
  for (const Mat& q : out.subspaces) {
    out.projectors.push_back(q * q.transpose());
    if (q.cols() == 0) continue;
    for (const AffineIsometry& h : elements)
      out.max_leak = std::max(out.max_leak, spectral_norm((I - q * q.transpose()) * h.linear * q));
  }
  return out;
}

std::vector<AffineIsometry> restrict_to(const std::vector<AffineIsometry>& elements, const Mat& basis) {
  std::vector<AffineIsometry> out;
  out.reserve(elements.size());
  for (const AffineIsometry& h : elements)
    out.push_back({basis.transpose() * h.linear * basis, basis.transpose() * h.translation});
  return out;
}

ProductBlockReport verify_product_blocks(const std::vector<AffineIsometry>& elements,
                                         const SplittingResult& split, const Tolerances& tol) {
  ProductBlockReport r;
  const Mat& flat = split.subspaces.front();
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const AffineIsometry& h = elements[i];
    double off = 0.0, flat_b = 0.0, flat_a = 0.0;
    for (std::size_t k = 0; k < split.subspaces.size(); ++k)
      for (std::size_t l = 0; l < split.subspaces.size(); ++l) {
        if (k == l || split.subspaces[k].cols() == 0 || split.subspaces[l].cols() == 0) continue;
        off = std::max(off, spectral_norm(split.subspaces[k].transpose() * h.linear *
                                          split.subspaces[l]));
      }
    if (flat.cols() > 0) {
      flat_b = (flat.transpose() * h.translation).norm();
      flat_a = spectral_norm(flat.transpose() * h.linear * flat -
                             Mat::Identity(flat.cols(), flat.cols()));
    }
    r.max_off_block = std::max(r.max_off_block, off);
    r.max_flat_translation = std::max(r.max_flat_translation, flat_b);
    r.max_flat_linear = std::max(r.max_flat_linear, flat_a);
    const bool ok = off < tol.tol_split && flat_b < tol.tol_split && flat_a < tol.tol_split;
    if (!ok && r.offending_element < 0) r.offending_element = static_cast<int>(i);
  }
  r.pass = r.offending_element < 0;
  return r;
}

std::string_view to_string(FactorVerdict v) {
  switch (v) {
    case FactorVerdict::Trivial: return "TRIVIAL";
    case FactorVerdict::CompactFixedPoint: return "COMPACT_FIXED_POINT";
    case FactorVerdict::FullSemidirect: return "FULL_SEMIDIRECT";
  }
  return "?";
}

std::string_view to_string(OverallVerdict v) {
  switch (v) {
    case OverallVerdict::Trivial: return "TRIVIAL";
    case OverallVerdict::Compact: return "COMPACT";
    case OverallVerdict::FullSemidirect: return "FULL_SEMIDIRECT";
    case OverallVerdict::Noncompact: return "NONCOMPACT";
  }
  return "?";
}

ClassificationReport classify_sample(const HolonomySample& sample, const Protocol& protocol,
                                     const Tolerances& tol, const std::string& manifold) {
  // Rejects non-orthogonal linear parts before anything is split.
  compactness_verdict(sample.elements, tol);

  ClassificationReport report;
  report.manifold = manifold;
  report.base = sample.base;
  report.protocol = protocol;
  report.tolerances = tol;
  report.loop_count = static_cast<int>(sample.elements.size());
  report.fixed_point = solve_fixed_point(sample.elements, tol);

  const SplittingResult split = derham_split(sample.elements, tol);
  report.blocks = verify_product_blocks(sample.elements, split, tol);
  const double length = protocol.length_scale();

  for (std::size_t k = 0; k < split.subspaces.size(); ++k) {
    const Mat& q = split.subspaces[k];
    if (q.cols() == 0) continue;
    FactorReport f;
    f.basis = q;
    f.flat = k == 0;
    const std::vector<AffineIsometry> part = restrict_to(sample.elements, q);
    const int d = f.dim();
    f.fixed_point = solve_fixed_point(part, tol);

    Mat residual(d, static_cast<Eigen::Index>(part.size()));
    for (std::size_t i = 0; i < part.size(); ++i) {
      residual.col(static_cast<Eigen::Index>(i)) =
          part[i].translation - (Mat::Identity(d, d) - part[i].linear) * f.fixed_point.point;
    }
    const Vec sv = Eigen::JacobiSVD<Mat>(residual).singularValues();
    f.translation_singular_values.assign(sv.data(), sv.data() + sv.size());
    const double threshold = tol.tol_rank * std::max(sv.size() ? sv[0] : 0.0, length);
    f.translation_rank = static_cast<int>((sv.array() > threshold).count());

    const bool trivial = std::all_of(part.begin(), part.end(), [&](const AffineIsometry& h) {
      return is_identity(h, tol.tol_identity);
    });
    if (trivial) {
      f.verdict = FactorVerdict::Trivial;
      f.inconsistent = f.translation_rank != 0;
    } else if (f.fixed_point.verdict != FixedPointVerdict::NoFixedPoint) {
      f.verdict = FactorVerdict::CompactFixedPoint;
      f.fixed_point_full = q * f.fixed_point.point;
      f.inconsistent = f.translation_rank != 0;
    } else {
      f.verdict = FactorVerdict::FullSemidirect;
      f.inconsistent = f.translation_rank != d;
    }
    report.inconsistent = report.inconsistent || f.inconsistent;
    report.factors.push_back(std::move(f));
  }

  const auto all = [&](auto pred) { return std::all_of(report.factors.begin(), report.factors.end(), pred); };
  if (all([](const FactorReport& f) { return f.verdict == FactorVerdict::Trivial; })) {
    report.verdict = OverallVerdict::Trivial;
  } else if (all([](const FactorReport& f) { return f.verdict != FactorVerdict::FullSemidirect; })) {
    report.verdict = OverallVerdict::Compact;
  } else if (all([](const FactorReport& f) { return f.verdict == FactorVerdict::FullSemidirect; })) {
    report.verdict = OverallVerdict::FullSemidirect;
  } else {
    report.verdict = OverallVerdict::Noncompact;
  }
  return report;
}

ClassificationReport classify(const MetricChart& chart, const Vec& x, const Protocol& protocol,
                              const Tolerances& tol) {
  return classify_sample(sample_holonomy(chart, x, protocol, tol), protocol, tol, chart.label());
}

}  // namespace cartan
