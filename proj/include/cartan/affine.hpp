#pragma once

#include <span>
#include <vector>

#include "cartan/geometry.hpp"

namespace cartan {

/// Affine map v -> A v + b of R^m, i.e. the block matrix (A b; 0 1). Holonomy
/// elements are stored in the coordinates of a fixed orthonormal frame at the
/// base point.
struct AffineIsometry {
  Mat linear;
  Vec translation;

  static AffineIsometry identity(int dim) { return {Mat::Identity(dim, dim), Vec::Zero(dim)}; }
  int dim() const { return static_cast<int>(translation.size()); }
};

/// Affine frame (p, u): a point p of the affine tangent space and a linear
/// frame u, both in chart components.
struct AffineFrame {
  Vec point;
  Mat frame;
};

/// Point (u, v) of the product bundle L(M) x R^m.
struct ProductPoint {
  Mat frame;
  Vec vector;
};

/// compose(h2, h1) applies h1 first: (A2 A1, A2 b1 + b2).
AffineIsometry compose(const AffineIsometry& h2, const AffineIsometry& h1);
AffineIsometry inverse(const AffineIsometry& h);
Vec act_affine(const AffineIsometry& h, const Vec& v);

/// h tau h^{-1}.
AffineIsometry conjugate(const AffineIsometry& h, const AffineIsometry& tau);

/// Right action on affine frames: (p, u) . (A, b) = (p + u b, u A).
AffineFrame frame_right_action(const AffineFrame& af, const AffineIsometry& g);

/// Right action on L(M) x R^m: (u, v) . (a, xi) = (u a, a^{-1} v - a^{-1} xi).
ProductPoint product_right_action(const Mat& u, const Vec& v, const AffineIsometry& g);

/// Bundle isomorphism A(M) -> L(M) x R^m, (p, u) -> (u, u^{-1}(o - p)).
ProductPoint claimII_map(const AffineFrame& af);

/// Inverse of claimII_map: (u, v) -> (-u v, u).
AffineFrame claimII_inverse(const ProductPoint& q);

/// The unique g with af0 . g = af1.
AffineIsometry frame_difference(const AffineFrame& af0, const AffineFrame& af1);

bool is_identity(const AffineIsometry& h, double tol);

/// max |A^T A - I|.
double orthogonality_defect(const Mat& a);

/// Spectral norm of A - I.
double linear_defect(const AffineIsometry& h);

enum class FixedPointVerdict { FixedPoint, NoFixedPoint, Degenerate };

struct FixedPointResult {
  Vec point;
  double residual = 0.0;  // RMS of |(I - A_i) p - b_i|
  double scale = 1.0;     // max(1, max_i |b_i|)
  int rank = 0;           // numerical rank of the stacked I - A_i
  FixedPointVerdict verdict = FixedPointVerdict::Degenerate;
};

/// Least-squares common fixed point of a family of affine maps, solved through
/// the ridge-regularised normal equations.
FixedPointResult solve_fixed_point(std::span<const AffineIsometry> samples,
                                   const Tolerances& tol = {});

enum class CompactnessVerdict { Trivial, Compact, Noncompact };

/// Compact iff the family has a common fixed point (or is trivial). Throws
/// NonOrthogonalLinearPart when a linear part is not orthogonal within
/// tol_orth, which signals a failed transport integration upstream.
CompactnessVerdict compactness_verdict(std::span<const AffineIsometry> samples,
                                       const Tolerances& tol = {});

std::string_view to_string(FixedPointVerdict v);
std::string_view to_string(CompactnessVerdict v);

}  // namespace cartan
