#pragma once

#include <vector>

#include "cartan/affine.hpp"
#include "cartan/curve.hpp"
#include "cartan/geometry.hpp"

namespace cartan {

enum class EvidenceVerdict { EvidenceNoncompact, Bounded, NotApplicable };
std::string_view to_string(EvidenceVerdict v);

/// Translation growth under repetition of one loop. This witnesses unbounded
/// translations within the sampled range; a chart is never complete, so it is
/// not a proof of noncompactness.
struct EvidenceReport {
  LoopSpec loop;
  std::vector<int> k;
  std::vector<double> translation_norms;
  std::vector<AffineIsometry> elements;
  bool strictly_increasing = false;
  FixedPointVerdict single_loop_fixed_point = FixedPointVerdict::Degenerate;
  EvidenceVerdict verdict = EvidenceVerdict::NotApplicable;
};

/// Develops the k-fold traversal of `loop` for k = 1..k_max (each one
/// integrated, not composed).
EvidenceReport global_noncompactness_evidence(const MetricChart& chart, const LoopSpec& loop,
                                              int k_max = 5, const Tolerances& tol = {});

}  // namespace cartan
