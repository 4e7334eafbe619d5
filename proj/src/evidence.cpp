#include "cartan/evidence.hpp"

#include "cartan/parallel.hpp"
#include "cartan/transport.hpp"

namespace cartan {

std::string_view to_string(EvidenceVerdict v) {
  switch (v) {
    case EvidenceVerdict::EvidenceNoncompact: return "EVIDENCE_NONCOMPACT";
    case EvidenceVerdict::Bounded: return "BOUNDED";
    case EvidenceVerdict::NotApplicable: return "NOT_APPLICABLE";
  }
  return "?";
}

EvidenceReport global_noncompactness_evidence(const MetricChart& chart, const LoopSpec& loop,
                                              int k_max, const Tolerances& tol) {
  if (k_max < 1) throw Error(ErrorCode::ConfigInvalid, "k_max must be at least 1");
  const FramePoint frame = orthonormal_frame(chart, loop.base, tol);
  const Curve once = build_curve(chart, loop, frame, tol);

  EvidenceReport r;
  r.loop = loop;
  r.elements.resize(static_cast<std::size_t>(k_max));
  par::for_each_index(r.elements.size(), [&](std::size_t i) {
    r.elements[i] = develop_curve(chart, repeated(once, static_cast<int>(i) + 1), frame, tol);
  });
  bool trivial = true;
  for (int k = 1; k <= k_max; ++k) {
    const AffineIsometry& h = r.elements[static_cast<std::size_t>(k - 1)];
    r.k.push_back(k);
    r.translation_norms.push_back(h.translation.norm());
    trivial = trivial && is_identity(h, tol.tol_identity);
  }
  r.strictly_increasing = true;
  for (std::size_t i = 1; i < r.translation_norms.size(); ++i)
    r.strictly_increasing = r.strictly_increasing && r.translation_norms[i] > r.translation_norms[i - 1];
  r.single_loop_fixed_point = solve_fixed_point(std::vector<AffineIsometry>{r.elements.front()}, tol).verdict;

  if (trivial) {
    r.verdict = EvidenceVerdict::NotApplicable;
  } else if (r.strictly_increasing && r.single_loop_fixed_point == FixedPointVerdict::NoFixedPoint) {
    r.verdict = EvidenceVerdict::EvidenceNoncompact;
  } else {
    r.verdict = EvidenceVerdict::Bounded;
  }
  return r;
}

}  // namespace cartan
