#include <numbers>

#include "cartan/catalog.hpp"
#include "cartan/holonomy.hpp"
#include "support.hpp"

using namespace cartan;
using cartan::testing::distance;
using cartan::testing::max_abs;
using cartan::testing::rotation;
using cartan::testing::vec;

namespace {

Mat block_rotation(double angle) {
  Mat a = Mat::Identity(3, 3);
  a.topLeftCorner(2, 2) = rotation(angle);
  return a;
}

// Rotation by `angle` in the (i, j) coordinate plane of R^m.
Mat plane_rotation(int m, int i, int j, double angle) {
  Mat a = Mat::Identity(m, m);
  a(i, i) = a(j, j) = std::cos(angle);
  a(i, j) = -std::sin(angle);
  a(j, i) = std::sin(angle);
  return a;
}

struct EntrySample {
  MetricChart chart;
  HolonomySample sample;
};

EntrySample sample_of(const std::string& name, const Protocol& p = {}) {
  const CatalogEntry& e = catalog_entry(name);
  MetricChart chart = chart_from_descriptor(e.descriptor);
  HolonomySample s = sample_holonomy(chart, e.base, p);
  return {std::move(chart), std::move(s)};
}

}  // namespace

TEST(Sample, FlatElementsAreIdentity) {
  Protocol p;
  p.n_polygons = 200;
  for (const char* name : {"flat-r2", "flat-r3"}) {
    const EntrySample s = sample_of(name, p);
    EXPECT_GE(s.sample.elements.size(), 200u);
    for (const AffineIsometry& h : s.sample.elements) EXPECT_TRUE(is_identity(h, 1e-8)) << name;
  }
}

TEST(Sample, SphereHasTranslations) {
  const EntrySample s = sample_of("sphere-s2");
  double top = 0;
  for (const AffineIsometry& h : s.sample.elements) top = std::max(top, h.translation.norm());
  EXPECT_GT(top, 1e-3);
}

TEST(Sample, ConeOverScaledSphereSharesFixedPoint) {
  const EntrySample s = sample_of("cone-sphere");
  const FixedPointResult fp = solve_fixed_point(s.sample.elements);
  EXPECT_LT(fp.residual, Tolerances{}.tol_fp);
}

TEST(Sample, ProtocolLoopCountAndOrder) {
  const CatalogEntry& e = catalog_entry("flat-x-sphere");
  const MetricChart chart = chart_from_descriptor(e.descriptor);
  const std::vector<LoopSpec> loops = protocol_loops(chart, e.base, Protocol{});
  // 4 sizes x 3 planes, one periodic axis, 8 polygons.
  ASSERT_EQ(loops.size(), 12u + 1u + 8u);
  EXPECT_EQ(loops.front().kind, LoopKind::CoordRect);
  EXPECT_EQ(loops[12].kind, LoopKind::CoordLine);
  EXPECT_EQ(loops.back().kind, LoopKind::GeodesicPolygon);
}

TEST(Sample, SeedDeterminesPolygons) {
  const CatalogEntry& e = catalog_entry("sphere-s2");
  const MetricChart chart = chart_from_descriptor(e.descriptor);
  Protocol a, b;
  b.seed = 43;
  const auto la = protocol_loops(chart, e.base, a), la2 = protocol_loops(chart, e.base, a);
  const auto lb = protocol_loops(chart, e.base, b);
  EXPECT_EQ(max_abs(la.back().directions[0] - la2.back().directions[0]), 0.0);
  EXPECT_GT(max_abs(la.back().directions[0] - lb.back().directions[0]), 0.0);
}

TEST(Sample, SerialAndParallelAgreeExactly) {
  for (const char* name : {"sphere-s2", "cone-x-cone"}) {
    const CatalogEntry& e = catalog_entry(name);
    const MetricChart chart = chart_from_descriptor(e.descriptor);
    const HolonomySample a = sample_holonomy(chart, e.base, Protocol{});
    const HolonomySample b = sample_holonomy_serial(chart, e.base, Protocol{});
    ASSERT_EQ(a.elements.size(), b.elements.size());
    for (std::size_t k = 0; k < a.elements.size(); ++k) EXPECT_EQ(distance(a.elements[k], b.elements[k]), 0.0);
  }
}

TEST(Rng, ReproducibleAndInRange) {
  Rng a(7), b(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NEAR(Rng(3).unit_vector(5).norm(), 1.0, 1e-15);
}

TEST(Split, AllIdentityIsOneFlatFactor) {
  const SplittingResult s = derham_split({AffineIsometry::identity(3), AffineIsometry::identity(3)});
  ASSERT_EQ(s.subspaces.size(), 1u);
  EXPECT_EQ(s.subspaces[0].cols(), 3);
}

TEST(Split, RotationBlockOnR3) {
  const std::vector<AffineIsometry> els{{block_rotation(0.4), Vec::Zero(3)}, {block_rotation(1.3), vec({1, 0, 0})}};
  const SplittingResult s = derham_split(els);
  ASSERT_EQ(s.subspaces.size(), 2u);
  ASSERT_EQ(s.subspaces[0].cols(), 1);
  EXPECT_LT((s.subspaces[0].col(0) - vec({0, 0, 1})).norm(), 1e-12);
  ASSERT_EQ(s.subspaces[1].cols(), 2);
  EXPECT_LT(max_abs(s.projectors[1] - Mat(vec({1, 1, 0}).asDiagonal())), 1e-12);
  EXPECT_LT(s.max_leak, 1e-12);
}

TEST(Split, FlatTimesSphereFromIntegratedData) {
  const EntrySample s = sample_of("flat-x-sphere");
  const SplittingResult split = derham_split(s.sample);
  ASSERT_EQ(split.subspaces.size(), 2u);
  ASSERT_EQ(split.subspaces[0].cols(), 1);
  EXPECT_LT((split.subspaces[0].col(0).cwiseAbs() - vec({1, 0, 0})).norm(), 1e-8);
  EXPECT_EQ(split.subspaces[1].cols(), 2);
  EXPECT_LT(split.max_leak, Tolerances{}.tol_split);
}

TEST(Split, TwoPlanesSeparateUnlessCoupled) {
  auto family = [](double mix) {
    const Mat base = plane_rotation(4, 0, 1, 0.5) * plane_rotation(4, 2, 3, 1.1);
    return std::vector<AffineIsometry>{{base, Vec::Zero(4)}, {plane_rotation(4, 1, 2, mix) * base, Vec::Zero(4)}};
  };
  const SplittingResult apart = derham_split(family(0.0));
  EXPECT_EQ(apart.subspaces.size(), 3u);
  EXPECT_EQ(apart.subspaces[0].cols(), 0);

  const SplittingResult joined = derham_split(family(0.3));
  ASSERT_EQ(joined.subspaces.size(), 2u);
  EXPECT_EQ(joined.subspaces[1].cols(), 4);

  try {
    derham_split(family(4e-6));
    FAIL() << "coupling just above tol_split was not reported";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ToleranceAmbiguity);
  }
}

TEST(Split, InvariantAndCompleteOnCatalog) {
  for (const CatalogEntry& e : catalog()) {
    const EntrySample s = sample_of(e.name);
    const SplittingResult split = derham_split(s.sample);
    int total = 0;
    for (const Mat& q : split.subspaces) total += static_cast<int>(q.cols());
    EXPECT_EQ(total, s.chart.dim()) << e.name;
    EXPECT_LT(split.max_leak, Tolerances{}.tol_split) << e.name;
  }
}

TEST(Blocks, ConeTimesConePassesWithFactorFixedPoints) {
  const EntrySample s = sample_of("cone-x-cone");
  const ClassificationReport r = classify_sample(s.sample, Protocol{});
  EXPECT_TRUE(r.blocks.pass);
  EXPECT_LT(r.blocks.max_off_block, 1e-6);
  ASSERT_EQ(r.factors.size(), 2u);
  for (const FactorReport& f : r.factors) {
    EXPECT_EQ(f.verdict, FactorVerdict::CompactFixedPoint);
    ASSERT_TRUE(f.fixed_point_full.has_value());
    // Apex of each factor: minus the unit radial frame vector of that factor.
    EXPECT_NEAR(f.fixed_point_full->norm(), 1.0, 1e-3);
  }
}

TEST(Blocks, FlatTimesSphereFlatPartIsIdentity) {
  const EntrySample s = sample_of("flat-x-sphere");
  const SplittingResult split = derham_split(s.sample);
  const ProductBlockReport b = verify_product_blocks(s.sample.elements, split);
  EXPECT_TRUE(b.pass);
  EXPECT_LT(b.max_flat_translation, 1e-8);
  EXPECT_LT(b.max_flat_linear, 1e-8);
}

TEST(Blocks, MixedElementIsReported) {
  const std::vector<AffineIsometry> good{{block_rotation(0.4), Vec::Zero(3)}, {block_rotation(1.3), Vec::Zero(3)}};
  const SplittingResult split = derham_split(good);
  std::vector<AffineIsometry> els = good;
  els.push_back({plane_rotation(3, 1, 2, 0.2), Vec::Zero(3)});
  const ProductBlockReport b = verify_product_blocks(els, split);
  EXPECT_FALSE(b.pass);
  EXPECT_EQ(b.offending_element, 2);
}

TEST(Classify, Examples) {
  const Protocol p;
  const CatalogEntry& flat = catalog_entry("flat-r3");
  EXPECT_EQ(classify(chart_from_descriptor(flat.descriptor), flat.base, p).verdict, OverallVerdict::Trivial);

  const CatalogEntry& s2 = catalog_entry("sphere-s2");
  const ClassificationReport rs = classify(chart_from_descriptor(s2.descriptor), s2.base, p);
  EXPECT_EQ(rs.verdict, OverallVerdict::FullSemidirect);
  ASSERT_EQ(rs.factors.size(), 1u);
  EXPECT_EQ(rs.factors[0].translation_rank, 2);
  EXPECT_EQ(rs.factors[0].fixed_point.verdict, FixedPointVerdict::NoFixedPoint);

  const CatalogEntry& cs = catalog_entry("cone-sphere");
  const ClassificationReport rc = classify(chart_from_descriptor(cs.descriptor), cs.base, p);
  EXPECT_EQ(rc.verdict, OverallVerdict::Compact);
  ASSERT_EQ(rc.factors.size(), 1u);
  EXPECT_EQ(rc.factors[0].verdict, FactorVerdict::CompactFixedPoint);
  EXPECT_LT((rc.fixed_point.point - vec({-1, 0, 0})).norm(), 1e-3);
}

TEST(Classify, CatalogVerdictsAndDichotomy) {
  for (const CatalogEntry& e : catalog()) {
    const EntrySample s = sample_of(e.name);
    const ClassificationReport r = classify_sample(s.sample, Protocol{}, Tolerances{}, e.name);
    EXPECT_EQ(std::string(to_string(r.verdict)), e.expected) << e.name;
    EXPECT_FALSE(r.inconsistent) << e.name;
    for (const FactorReport& f : r.factors) {
      EXPECT_TRUE(f.translation_rank == 0 || f.translation_rank == f.dim()) << e.name;
    }
  }
}

TEST(Classify, FrameCovariance) {
  // Orthogonal change of reference frame, fixed so the run is deterministic.
  for (const char* name : {"sphere-s2", "cone-circle", "flat-x-sphere"}) {
    const CatalogEntry& e = catalog_entry(name);
    const MetricChart chart = chart_from_descriptor(e.descriptor);
    const int m = chart.dim();
    const Mat q = m == 2 ? rotation(0.7) : Mat(plane_rotation(3, 0, 1, 0.7) * plane_rotation(3, 1, 2, -0.4));
    Protocol a, b;
    b.frame_rotation = q;
    const HolonomySample sa = sample_holonomy(chart, e.base, a), sb = sample_holonomy(chart, e.base, b);
    ASSERT_EQ(sa.elements.size(), sb.elements.size());
    const AffineIsometry change{q, Vec::Zero(m)};
    for (std::size_t k = 0; k < sa.elements.size(); ++k) {
      const AffineIsometry expect = compose(inverse(change), compose(sa.elements[k], change));
      EXPECT_LT(distance(expect, sb.elements[k]), 1e-8) << name << " loop " << k;
    }
    const ClassificationReport ra = classify_sample(sa, a), rb = classify_sample(sb, b);
    EXPECT_EQ(ra.verdict, rb.verdict) << name;
    EXPECT_NEAR(ra.fixed_point.residual, rb.fixed_point.residual, 1e-8) << name;
    ASSERT_EQ(ra.factors.size(), rb.factors.size()) << name;
    for (std::size_t k = 0; k < ra.factors.size(); ++k) {
      EXPECT_EQ(ra.factors[k].dim(), rb.factors[k].dim()) << name;
      EXPECT_EQ(ra.factors[k].verdict, rb.factors[k].verdict) << name;
      EXPECT_EQ(ra.factors[k].translation_rank, rb.factors[k].translation_rank) << name;
    }
  }
}

TEST(Classify, VerdictsStableUnderStepHalving) {
  Tolerances fine;
  fine.rk4_step = 0.5 * Tolerances{}.rk4_step;
  for (const CatalogEntry& e : catalog()) {
    const MetricChart chart = chart_from_descriptor(e.descriptor);
    const ClassificationReport coarse = classify(chart, e.base, Protocol{});
    const ClassificationReport halved = classify(chart, e.base, Protocol{}, fine);
    EXPECT_EQ(coarse.verdict, halved.verdict) << e.name;
  }
}

TEST(Classify, RejectsNonOrthogonalElements) {
  HolonomySample s;
  s.base = vec({0, 0});
  Mat shear = Mat::Identity(2, 2);
  shear(0, 1) = 0.1;
  s.elements = {{shear, vec({0, 0})}};
  try {
    classify_sample(s, Protocol{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonOrthogonalLinearPart);
  }
}
