#include <gtest/gtest.h>

#include <tachibana/complex.hpp>
#include <tachibana/generators.hpp>

using namespace tachibana;

namespace {

std::vector<std::vector<int>> tetrahedron_boundary() { return {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}; }

bool boundary_squares_to_zero(const SimplicialComplex& K) {
  for (int r = 2; r <= K.dimension(); ++r) {
    const IncidenceMatrix dd = K.boundary(r - 1) * K.boundary(r);
    for (int k = 0; k < dd.outerSize(); ++k)
      for (IncidenceMatrix::InnerIterator it(dd, k); it; ++it)
        if (it.value() != 0) return false;
  }
  return true;
}

}  // namespace

TEST(BuildComplex, SingleTriangleIsNotClosed) {
  try {
    build_complex(std::vector<std::vector<int>>{{0, 1, 2}});
    FAIL() << "expected NonManifold";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_manifold);
  }
}

TEST(BuildComplex, TetrahedronBoundary) {
  const auto K = build_complex(tetrahedron_boundary());
  EXPECT_EQ(K.count(0), 4);
  EXPECT_EQ(K.count(1), 6);
  EXPECT_EQ(K.count(2), 4);
  EXPECT_TRUE(boundary_squares_to_zero(K));
  EXPECT_EQ(euler_characteristic(K), 2);
  EXPECT_EQ(homology_ranks(K), (std::vector<int>{1, 0, 1}));
}

TEST(BuildComplex, InconsistentInputOrientationIsRepaired) {
  // same surface with two cells listed in the opposite order
  const auto K = build_complex(std::vector<std::vector<int>>{{1, 3, 2}, {0, 3, 2}, {0, 3, 1}, {0, 2, 1}});
  EXPECT_TRUE(boundary_squares_to_zero(K));
  // the top boundary d_2 must annihilate the all-ones fundamental class after orientation
  Eigen::VectorXi ones = Eigen::VectorXi::Ones(K.count(2));
  Eigen::VectorXi image = K.boundary(2) * ones;
  EXPECT_EQ(image.cwiseAbs().sum(), 0);
}

TEST(BuildComplex, EdgeWithThreeTrianglesIsNonManifold) {
  auto cells = tetrahedron_boundary();
  cells.push_back({0, 1, 4});
  try {
    build_complex(cells);
    FAIL() << "expected NonManifold";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_manifold);
  }
}

TEST(BuildComplex, ProjectivePlaneIsNonOrientable) {
  // six-vertex real projective plane
  const std::vector<std::vector<int>> rp2{{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}, {0, 5, 1},
                                          {1, 2, 4}, {2, 3, 5}, {3, 4, 1}, {4, 5, 2}, {5, 1, 3}};
  try {
    build_complex(rp2);
    FAIL() << "expected NonOrientable";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_orientable);
  }
}

TEST(BuildComplex, IcosahedronCounts) {
  const Mesh m = icosphere(0);
  EXPECT_EQ(m.K().count(0), 12);
  EXPECT_EQ(m.K().count(1), 30);
  EXPECT_EQ(m.K().count(2), 20);
  EXPECT_TRUE(boundary_squares_to_zero(m.K()));
}

TEST(BuildComplex, ExternalIdsArePreserved) {
  const auto K = build_complex(std::vector<std::vector<std::int64_t>>{{11, 12, 13}, {10, 13, 12}, {10, 11, 13}, {10, 12, 11}});
  EXPECT_EQ(K.external_id(0), 10);
  EXPECT_EQ(K.external_id(3), 13);
}

TEST(Homology, FlatTorusGrid) {
  const Mesh m = flat_torus2(4, 4);
  EXPECT_EQ(euler_characteristic(m.K()), 0);
  EXPECT_EQ(homology_ranks(m.K()), (std::vector<int>{1, 2, 1}));
}

TEST(Homology, GenusTwo) {
  const Mesh m = hyperbolic_genus2(1);
  EXPECT_EQ(euler_characteristic(m.K()), -2);
  EXPECT_EQ(homology_ranks(m.K()), (std::vector<int>{1, 4, 1}));
}

TEST(Homology, FlatThreeTorus) {
  const Mesh m = flat_torus3(3);
  EXPECT_EQ(euler_characteristic(m.K()), 0);
  EXPECT_EQ(homology_ranks(m.K()), (std::vector<int>{1, 3, 3, 1}));
  EXPECT_TRUE(boundary_squares_to_zero(m.K()));
}

TEST(Homology, ThreeSphere) {
  const Mesh m = sphere3(0);
  EXPECT_EQ(homology_ranks(m.K()), (std::vector<int>{1, 0, 0, 1}));
}

TEST(Homology, BoundaryRankOfTetrahedron) {
  // hand computation: rank d_1 = 3 (spanning tree), rank d_2 = 3 (one relation among 4 faces)
  const auto K = build_complex(tetrahedron_boundary());
  EXPECT_EQ(boundary_rank(K, 1), 3);
  EXPECT_EQ(boundary_rank(K, 2), 3);
}
