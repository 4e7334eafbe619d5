#include "cartan/affine.hpp"

#include <cmath>

namespace cartan {

namespace {

void require_same_dim(int a, int b, const char* where) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch, std::string(where) + ": dimensions " +
                                                  std::to_string(a) + " and " + std::to_string(b));
  }
}

void require_square(const AffineIsometry& h, const char* where) {
  if (h.linear.rows() != h.dim() || h.linear.cols() != h.dim()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(where) + ": malformed affine map");
  }
}

}  // namespace

AffineIsometry compose(const AffineIsometry& h2, const AffineIsometry& h1) {
  require_square(h1, "compose");
  require_square(h2, "compose");
  require_same_dim(h2.dim(), h1.dim(), "compose");
  return {h2.linear * h1.linear, h2.linear * h1.translation + h2.translation};
}

AffineIsometry inverse(const AffineIsometry& h) {
  require_square(h, "inverse");
  Eigen::FullPivLU<Mat> lu(h.linear);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularLinearPart, "inverse of singular map");
  const Mat ainv = lu.inverse();
  return {ainv, -ainv * h.translation};
}

Vec act_affine(const AffineIsometry& h, const Vec& v) {
  require_square(h, "act_affine");
  require_same_dim(h.dim(), static_cast<int>(v.size()), "act_affine");
  return h.linear * v + h.translation;
}

AffineIsometry conjugate(const AffineIsometry& h, const AffineIsometry& tau) {
  return compose(h, compose(tau, inverse(h)));
}

AffineFrame frame_right_action(const AffineFrame& af, const AffineIsometry& g) {
  require_square(g, "frame_right_action");
  require_same_dim(static_cast<int>(af.point.size()), g.dim(), "frame_right_action");
  require_same_dim(static_cast<int>(af.frame.cols()), g.dim(), "frame_right_action");
  return {af.point + af.frame * g.translation, af.frame * g.linear};
}

ProductPoint product_right_action(const Mat& u, const Vec& v, const AffineIsometry& g) {
  require_square(g, "product_right_action");
  require_same_dim(static_cast<int>(v.size()), g.dim(), "product_right_action");
  Eigen::FullPivLU<Mat> lu(g.linear);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::SingularLinearPart, "product_right_action: singular linear part");
  }
  return {u * g.linear, lu.solve(v) - lu.solve(g.translation)};
}

ProductPoint claimII_map(const AffineFrame& af) {
  Eigen::FullPivLU<Mat> lu(af.frame);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularFrame, "claimII_map: singular frame");
  return {af.frame, lu.solve(Vec(-af.point))};
}

AffineFrame claimII_inverse(const ProductPoint& q) { return {-(q.frame * q.vector), q.frame}; }

AffineIsometry frame_difference(const AffineFrame& af0, const AffineFrame& af1) {
  Eigen::FullPivLU<Mat> lu(af0.frame);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularFrame, "frame_difference: singular frame");
  return {lu.solve(af1.frame), lu.solve(Vec(af1.point - af0.point))};
}

bool is_identity(const AffineIsometry& h, double tol) {
  const Mat d = h.linear - Mat::Identity(h.dim(), h.dim());
  return d.cwiseAbs().maxCoeff() <= tol && (h.dim() == 0 || h.translation.cwiseAbs().maxCoeff() <= tol);
}

double orthogonality_defect(const Mat& a) {
  if (a.size() == 0) return 0.0;
  return (a.transpose() * a - Mat::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff();
}

double linear_defect(const AffineIsometry& h) {
  if (h.dim() == 0) return 0.0;
  const Mat d = h.linear - Mat::Identity(h.dim(), h.dim());
  return Eigen::JacobiSVD<Mat>(d).singularValues()[0];
}

FixedPointResult solve_fixed_point(std::span<const AffineIsometry> samples, const Tolerances& tol) {
  if (samples.empty()) throw Error(ErrorCode::EmptySample, "solve_fixed_point: no samples");
  const int m = samples.front().dim();
  Mat normal = Mat::Zero(m, m);
  Vec rhs = Vec::Zero(m);
  Mat stacked(static_cast<Eigen::Index>(samples.size()) * m, m);
  double scale = 1.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const AffineIsometry& h = samples[i];
    require_square(h, "solve_fixed_point");
    require_same_dim(h.dim(), m, "solve_fixed_point");
    const Mat d = Mat::Identity(m, m) - h.linear;
    normal += d.transpose() * d;
    rhs += d.transpose() * h.translation;
    stacked.middleRows(static_cast<Eigen::Index>(i) * m, m) = d;
    scale = std::max(scale, h.translation.norm());
  }
  normal += tol.eps_ridge * Mat::Identity(m, m);

  FixedPointResult result;
  result.point = normal.ldlt().solve(rhs);
  result.scale = scale;

  double sq = 0.0;
  for (const AffineIsometry& h : samples) {
    sq += ((Mat::Identity(m, m) - h.linear) * result.point - h.translation).squaredNorm();
  }
  result.residual = std::sqrt(sq / static_cast<double>(samples.size()));

  const Vec sv = Eigen::JacobiSVD<Mat>(stacked).singularValues();
  const double cut = tol.tol_split * std::max(1.0, sv.size() ? sv[0] : 0.0);
  result.rank = static_cast<int>((sv.array() > cut).count());

  const bool consistent = result.residual < tol.tol_fp * scale;
  if (!consistent) {
    result.verdict = FixedPointVerdict::NoFixedPoint;
  } else if (result.rank < m) {
    result.verdict = FixedPointVerdict::Degenerate;
  } else {
    result.verdict = FixedPointVerdict::FixedPoint;
  }
  return result;
}

CompactnessVerdict compactness_verdict(std::span<const AffineIsometry> samples,
                                       const Tolerances& tol) {
  if (samples.empty()) throw Error(ErrorCode::EmptySample, "compactness_verdict: no samples");
  bool trivial = true;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double defect = orthogonality_defect(samples[i].linear);
    if (defect > tol.tol_orth) {
      throw Error(ErrorCode::NonOrthogonalLinearPart,
                  "sample " + std::to_string(i) + " has orthogonality defect " +
                      std::to_string(defect));
    }
    trivial = trivial && is_identity(samples[i], tol.tol_identity);
  }
  if (trivial) return CompactnessVerdict::Trivial;
  const FixedPointResult fp = solve_fixed_point(samples, tol);
  return fp.verdict == FixedPointVerdict::NoFixedPoint ? CompactnessVerdict::Noncompact
                                                       : CompactnessVerdict::Compact;
}

std::string_view to_string(FixedPointVerdict v) {
  switch (v) {
    case FixedPointVerdict::FixedPoint: return "FIXED_POINT";
    case FixedPointVerdict::NoFixedPoint: return "NO_FIXED_POINT";
    case FixedPointVerdict::Degenerate: return "DEGENERATE";
  }
  return "?";
}

std::string_view to_string(CompactnessVerdict v) {
  switch (v) {
    case CompactnessVerdict::Trivial: return "TRIVIAL";
    case CompactnessVerdict::Compact: return "COMPACT";
    case CompactnessVerdict::Noncompact: return "NONCOMPACT";
  }
  return "?";
}

}  // namespace cartan
