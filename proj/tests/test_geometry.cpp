#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <tachibana/generators.hpp>
#include <tachibana/geometry.hpp>

using namespace tachibana;

namespace {

// Two triangles glued along their boundary: the simplest closed surface with one triangle shape.
std::shared_ptr<const SimplicialComplex> pillow() {
  return std::make_shared<const SimplicialComplex>(
      build_complex(std::vector<std::vector<int>>{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}));
}

}  // namespace

TEST(Metric, EquilateralTriangleArea) {
  const auto K = pillow();
  const MetricComplex mc = build_metric(K, std::vector<double>(6, 1.0), CurvatureMode::constant(1.0));
  for (double a : mc.volumes[2]) EXPECT_NEAR(a, std::sqrt(3.0) / 4.0, 1e-15);
  // regular tetrahedron boundary: 3 angles of pi/3 at each vertex, defect pi
  for (double d : mc.vertex_defect) EXPECT_NEAR(d, std::numbers::pi, 1e-14);
}

TEST(Metric, TriangleInequalityViolation) {
  // scale one corner so some face has lengths (1, 1, 2.5)
  const auto K = pillow();
  std::vector<double> lengths(6, 1.0);
  lengths[K->index_of(1, {0, 1})] = 2.5;
  try {
    build_metric(K, lengths, CurvatureMode::constant(1.0));
    FAIL() << "expected DegenerateSimplex";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_simplex);
  }
}

TEST(Metric, UnitIcosahedronDefects) {
  auto ico = icosphere(0);
  const MetricComplex mc = build_metric(ico.complex, std::vector<double>(ico.edge_lengths.size(), 1.0),
                                        CurvatureMode::vertex_defect());
  double total = 0.0;
  for (double d : mc.vertex_defect) {
    EXPECT_NEAR(d, std::numbers::pi / 3.0, 1e-13);
    total += d;
  }
  EXPECT_NEAR(total, 4.0 * std::numbers::pi, 1e-12);
}

TEST(Metric, GaussBonnetOnGeneratedSurfaces) {
  for (const Mesh& m : {icosphere(2), flat_torus2(8, 8), hyperbolic_genus2(1)}) {
    const MetricComplex mc = build_metric(m, CurvatureMode::vertex_defect());
    double total = 0.0;
    for (double d : mc.vertex_defect) total += d;
    const double expected = 2.0 * std::numbers::pi * euler_characteristic(m.K());
    EXPECT_NEAR(total, expected, 1e-9 * std::max(1.0, std::abs(expected))) << m.recipe.name;
  }
}

TEST(Metric, PrimalDualPairingGivesTotalVolume) {
  for (const Mesh& m : {icosphere(2), flat_torus2(6, 6), flat_torus3(3), sphere3(0)}) {
    const MetricComplex mc = build_metric(m);
    const double vol = mc.total_volume();
    for (int r = 0; r <= mc.dimension(); ++r)
      EXPECT_NEAR(primal_dual_pairing(mc, r), vol, 1e-10 * vol) << m.recipe.name << " r=" << r;
  }
}

TEST(Metric, FlatTorusCellVolumes) {
  // 8 x 8 unit squares split into triangles: total area 64
  const MetricComplex mc = build_metric(flat_torus2(8, 8));
  EXPECT_NEAR(mc.total_volume(), 64.0, 1e-11);
  // BCC lattice with unit cube edge: half a unit of volume per vertex
  EXPECT_NEAR(build_metric(flat_torus3(3)).total_volume(), 13.5, 1e-10);
}

TEST(Metric, DualVolumesArePositive) {
  for (const Mesh& m : {icosphere(3), flat_torus2(16, 16), hyperbolic_genus2(2), flat_torus3(4), sphere3(1)}) {
    const MetricComplex mc = build_metric(m);
    for (int r = 0; r <= mc.dimension(); ++r)
      for (double d : mc.dual_volumes[r]) ASSERT_GT(d, 0.0) << m.recipe.name;
  }
}

TEST(ConformalRescale, ZeroIsIdentity) {
  const Mesh m = icosphere(1);
  const MetricComplex mc = build_metric(m, CurvatureMode::vertex_defect());
  const MetricComplex same = conformal_rescale(mc, std::vector<double>(mc.count(0), 0.0));
  for (int e = 0; e < mc.count(1); ++e) EXPECT_EQ(same.edge_lengths[e], mc.edge_lengths[e]);
}

TEST(ConformalRescale, ConstantIsHomothety) {
  const Mesh m = icosphere(1);
  const MetricComplex mc = build_metric(m, CurvatureMode::vertex_defect());
  const double c = 0.3;
  const MetricComplex scaled = conformal_rescale(mc, std::vector<double>(mc.count(0), c));
  for (int e = 0; e < mc.count(1); ++e) EXPECT_NEAR(scaled.edge_lengths[e], std::exp(c) * mc.edge_lengths[e], 1e-14);
  for (int v = 0; v < mc.count(0); ++v) EXPECT_NEAR(scaled.vertex_defect[v], mc.vertex_defect[v], 1e-13);
}

TEST(ConformalRescale, SmoothFactorStaysValid) {
  const Mesh m = icosphere(2);
  const MetricComplex mc = build_metric(m, CurvatureMode::vertex_defect());
  std::vector<double> f(mc.count(0));
  for (int v = 0; v < mc.count(0); ++v) f[v] = 0.1 * m.vertices[v][0];
  EXPECT_NO_THROW(conformal_rescale(mc, f));
}

TEST(ConformalRescale, ConstantModeConflicts) {
  const MetricComplex mc = build_metric(icosphere(1));
  try {
    conformal_rescale(mc, std::vector<double>(mc.count(0), 0.1));
    FAIL() << "expected ModeConflict";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::mode_conflict);
  }
}

TEST(ConformalRescale, WildFactorIsRejected) {
  const Mesh m = flat_torus2(8, 8);
  const MetricComplex mc = build_metric(m, CurvatureMode::vertex_defect());
  std::vector<double> f(mc.count(0));
  for (int v = 0; v < mc.count(0); ++v) f[v] = (v % 2) ? 3.0 : -3.0;
  EXPECT_THROW(conformal_rescale(mc, f), Error);
}

TEST(Metric, DefectModeNeedsSurface) {
  const Mesh m = flat_torus3(3);
  try {
    build_metric(m, CurvatureMode::vertex_defect());
    FAIL() << "expected ModeUnsupported";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::mode_unsupported);
  }
}
