#pragma once

#include <vector>

#include "cartan/affine.hpp"
#include "cartan/curve.hpp"
#include "cartan/geometry.hpp"

namespace cartan {

/// Integration state along a curve: the transported frame (chart components,
/// one column per frame vector) and the development of the curve read in the
/// transported frame.
struct TransportState {
  Vec position;
  Mat frame_matrix;
  Vec dev_point;
};

struct TraceSample {
  double t;
  Vec dev;
  Vec pos;
};

struct DevelopmentTrace {
  std::vector<TraceSample> samples;
  double g_length = 0.0;    // Riemannian length of the curve
  double dev_length = 0.0;  // Euclidean length of the developed curve
};

/// max |F^T g F - I|.
double orthogonality_defect_g(const Mat& g, const Mat& f);

/// Integrates dF/ds = -C(x') F and (optionally) ddev/ds = F^{-1} x' along the
/// curve with fixed-step RK4. Throws OutOfDomain when a node leaves the chart
/// and StepTooLarge when F drifts from g-orthonormality by more than tol_orth
/// (only checked if F starts orthonormal). `trace`, when given, receives every
/// node.
TransportState integrate_transport(const MetricChart& chart, const Curve& curve, const Mat& frame0,
                                   bool develop, const Tolerances& tol = {},
                                   DevelopmentTrace* trace = nullptr);

TangentVector transport_linear(const MetricChart& chart, const Curve& curve, const TangentVector& v0,
                               const Tolerances& tol = {});

/// Affine holonomy of a closed curve, in the coordinates of frame0. The linear
/// part is A = F0^{-1} F_end; the translation is b = -A dev_end, which places
/// the fixed point of a cone loop at the apex and makes
/// H(c1 then c2) = compose(H(c2), H(c1)).
AffineIsometry develop_curve(const MetricChart& chart, const Curve& curve, const FramePoint& frame0,
                             const Tolerances& tol = {});

AffineIsometry develop_loop(const MetricChart& chart, const LoopSpec& loop, const FramePoint& frame0,
                            const Tolerances& tol = {});

struct LoopDiagnostic {
  double eps;
  double linear_defect;     // |A - I|
  double translation_norm;  // |b|
};

struct LoopFamily {
  std::vector<AffineIsometry> elements;
  std::vector<LoopDiagnostic> diagnostics;
};

/// Coordinate squares of side eps in the (i, j) plane at x, one per eps.
LoopFamily small_loop_family(const MetricChart& chart, const Vec& x, const std::vector<double>& eps_list,
                             int i, int j, const Tolerances& tol = {});
LoopFamily small_loop_family_serial(const MetricChart& chart, const Vec& x,
                                    const std::vector<double>& eps_list, int i, int j,
                                    const Tolerances& tol = {});

DevelopmentTrace development_trace(const MetricChart& chart, const Curve& curve,
                                   const FramePoint& frame0, const Tolerances& tol = {});

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cartan
