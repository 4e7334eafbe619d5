#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cartan/affine.hpp"
#include "cartan/curve.hpp"
#include "cartan/geometry.hpp"

namespace cartan {

/// Loop protocol for sampling the local holonomy at a point.
struct Protocol {
  std::vector<double> eps_list = {0.4, 0.2, 0.1, 0.05};
  /// Coordinate planes for the squares; empty means every plane.
  std::vector<std::pair<int, int>> planes;
  /// One loop around each periodic coordinate through the base point.
  bool periodic_loops = true;
  int n_polygons = 8;
  int polygon_vertices = 3;
  double polygon_side = 0.3;
  std::uint64_t seed = 42;
  /// Orthogonal change of reference frame, applied after Gram-Schmidt. Loops
  /// do not depend on it; only the coordinates the elements are written in.
  std::optional<Mat> frame_rotation;

  /// Largest loop size in the protocol, used as the translation length scale.
  double length_scale() const;
};

/// Deterministic generator behind the random polygons. The engine is fully
/// specified by the standard; the distributions are written out here because
/// the std:: ones differ between library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double normal();
  Vec unit_vector(int dim);

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct HolonomySample {
  Vec base;
  FramePoint frame;
  std::vector<AffineIsometry> elements;
  std::vector<LoopSpec> loops;
};

std::vector<LoopSpec> protocol_loops(const MetricChart& chart, const Vec& x, const Protocol& protocol);

/// Reference frame of a protocol: Gram-Schmidt at x, times frame_rotation.
FramePoint protocol_frame(const MetricChart& chart, const Vec& x, const Protocol& protocol,
                          const Tolerances& tol = {});

/// Develops every protocol loop (OpenMP over loops). Elements come back in
/// loop order, identical to the serial version.
HolonomySample sample_holonomy(const MetricChart& chart, const Vec& x, const Protocol& protocol,
                               const Tolerances& tol = {});
HolonomySample sample_holonomy_serial(const MetricChart& chart, const Vec& x,
                                      const Protocol& protocol, const Tolerances& tol = {});

/// Orthogonal decomposition of R^m: subspaces[0] is the flat factor (the
/// common fixed space of the linear parts, possibly with no columns), the rest
/// are the invariant factors.
struct SplittingResult {
  std::vector<Mat> subspaces;
  std::vector<Mat> projectors;
  double max_leak = 0.0;  // worst |(I - P) A P| over factors and elements

  int factor_count() const { return static_cast<int>(subspaces.size()); }
};

SplittingResult derham_split(const std::vector<AffineIsometry>& elements, const Tolerances& tol = {});
inline SplittingResult derham_split(const HolonomySample& sample, const Tolerances& tol = {}) {
  return derham_split(sample.elements, tol);
}

struct ProductBlockReport {
  bool pass = true;
  double max_off_block = 0.0;
  double max_flat_translation = 0.0;
  double max_flat_linear = 0.0;
  int offending_element = -1;
};

ProductBlockReport verify_product_blocks(const std::vector<AffineIsometry>& elements,
                                         const SplittingResult& split, const Tolerances& tol = {});

/// Restriction Q^T (A, b) Q of each element to an invariant subspace.
std::vector<AffineIsometry> restrict_to(const std::vector<AffineIsometry>& elements, const Mat& basis);

enum class FactorVerdict { Trivial, CompactFixedPoint, FullSemidirect };
enum class OverallVerdict { Trivial, Compact, FullSemidirect, Noncompact };
std::string_view to_string(FactorVerdict v);
std::string_view to_string(OverallVerdict v);

struct FactorReport {
  Mat basis;
  bool flat = false;
  FactorVerdict verdict = FactorVerdict::Trivial;
  FixedPointResult fixed_point;         // in factor coordinates
  std::optional<Vec> fixed_point_full;  // embedded into base frame coordinates
  std::vector<double> translation_singular_values;
  int translation_rank = 0;
  bool inconsistent = false;

  int dim() const { return static_cast<int>(basis.cols()); }
};

struct ClassificationReport {
  std::string manifold;
  Vec base;
  OverallVerdict verdict = OverallVerdict::Trivial;
  std::vector<FactorReport> factors;
  ProductBlockReport blocks;
  FixedPointResult fixed_point;  // whole sample
  Protocol protocol;
  Tolerances tolerances;
  int loop_count = 0;
  bool inconsistent = false;
};

ClassificationReport classify_sample(const HolonomySample& sample, const Protocol& protocol,
                                     const Tolerances& tol = {}, const std::string& manifold = "");

ClassificationReport classify(const MetricChart& chart, const Vec& x, const Protocol& protocol,
                              const Tolerances& tol = {});

}  // namespace cartan
