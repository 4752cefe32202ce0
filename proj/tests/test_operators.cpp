#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <tachibana/generators.hpp>
#include <tachibana/operators.hpp>

using namespace tachibana;

namespace {

Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

double asymmetry(const SparseMatrix& A) {
  const SparseMatrix At = A.transpose();
  return (A - At).norm() / std::max(A.norm(), 1e-300);
}

struct Fixture {
  Mesh mesh;
  MetricComplex mc;
};

Fixture make(const Mesh& m) { return {m, build_metric(m)}; }

}  // namespace

TEST(Coboundary, ConstantsAreClosed) {
  const auto f = make(icosphere(2));
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(f.mc.count(0));
  EXPECT_EQ((coboundary(f.mc, 0) * one).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Coboundary, SquareIsZero) {
  for (const Mesh& m : {icosphere(2), flat_torus3(3), hyperbolic_genus2(1)}) {
    const auto mc = build_metric(m);
    for (int r = 0; r + 2 <= mc.dimension(); ++r) {
      const Eigen::VectorXd w = random_vector(mc.count(r), 7 + r);
      const Eigen::VectorXd ddw = coboundary(mc, r + 1) * (coboundary(mc, r) * w);
      EXPECT_LE(ddw.cwiseAbs().maxCoeff(), 1e-12 * w.cwiseAbs().maxCoeff());
    }
  }
}

TEST(Coboundary, FlatTorusCoordinateFormIsClosed) {
  const Mesh m = flat_torus2(8, 8);
  const auto mc = build_metric(m);
  Eigen::VectorXd w(mc.count(1));
  for (int e = 0; e < mc.count(1); ++e) {
    const auto& s = m.K().simplex(1, e);
    w(e) = m.displacement(s[0], s[1])[0];
  }
  EXPECT_GT(w.cwiseAbs().maxCoeff(), 0.5);
  EXPECT_LE((coboundary(mc, 1) * w).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Codifferential, DegreeZeroRejected) {
  const auto mc = build_metric(icosphere(0));
  EXPECT_THROW(codifferential(mc, 0), Error);
}

TEST(Codifferential, KillsExactConstants) {
  const auto mc = build_metric(icosphere(2));
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(mc.count(0));
  EXPECT_LE((codifferential(mc, 1) * (coboundary(mc, 0) * one)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Codifferential, SquareIsZero) {
  const auto mc = build_metric(icosphere(2));
  const Eigen::VectorXd w = random_vector(mc.count(2), 11);
  const Eigen::VectorXd sw = codifferential(mc, 2) * w;
  const Eigen::VectorXd ssw = codifferential(mc, 1) * sw;
  EXPECT_LE(ssw.cwiseAbs().maxCoeff(), 1e-12 * sw.cwiseAbs().maxCoeff());
}

TEST(Codifferential, AdjointOfCoboundary) {
  for (const Mesh& m : {icosphere(3), flat_torus3(4), sphere3(0)}) {
    const auto mc = build_metric(m);
    for (int r = 1; r <= mc.dimension(); ++r) {
      const Eigen::VectorXd a = random_vector(mc.count(r - 1), 3 * r);
      const Eigen::VectorXd b = random_vector(mc.count(r), 3 * r + 1);
      const Eigen::VectorXd da = coboundary(mc, r - 1) * a;
      const Eigen::VectorXd sb = codifferential(mc, r) * b;
      const double lhs = da.dot(mc.mass[r].cwiseProduct(b));
      const double rhs = a.dot(mc.mass[r - 1].cwiseProduct(sb));
      // Cauchy-Schwarz bound on the pairing as the scale
      const double scale = std::sqrt(da.dot(mc.mass[r].cwiseProduct(da)) * b.dot(mc.mass[r].cwiseProduct(b)));
      EXPECT_LE(std::abs(lhs - rhs), 1e-13 * scale);
    }
  }
}

TEST(HodgeForm, SymmetricAndSemidefinite) {
  const auto mc = build_metric(hyperbolic_genus2(1));
  for (int r = 0; r <= 2; ++r) {
    const auto q = hodge_form(mc, r);
    EXPECT_LE(asymmetry(q.stiffness), 1e-15);
    for (unsigned s = 0; s < 20; ++s) EXPECT_GE(q.energy(random_vector(q.size(), s)), -1e-12);
  }
}

TEST(HodgeForm, MatchesOperatorComposition) {
  // Q = d^T M d + M d M^-1 d^T M assembled locally must equal the explicit products
  const auto mc = build_metric(flat_torus3(3));
  const int r = 1;
  const SparseMatrix d = coboundary(mc, r);
  const SparseMatrix dp = coboundary(mc, r - 1);
  const SparseMatrix Mr1 = detail::diagonal(mc.mass[r + 1]);
  const SparseMatrix Mr = detail::diagonal(mc.mass[r]);
  const SparseMatrix Minv = detail::diagonal(mc.mass[r - 1].cwiseInverse());
  const SparseMatrix expected = SparseMatrix(d.transpose()) * Mr1 * d + Mr * dp * Minv * SparseMatrix(dp.transpose()) * Mr;
  EXPECT_LE((hodge_form(mc, r).stiffness - expected).norm(), 1e-12 * expected.norm());
}

TEST(CurvatureTerm, ConstantModeIsScaledMass) {
  const auto mc = build_metric(icosphere(2));
  const auto q = curvature_term(mc, 1);
  const SparseMatrix diff = q.stiffness - detail::diagonal(mc.mass[1]);
  EXPECT_LE(diff.norm(), 1e-15 * std::sqrt(mc.mass[1].squaredNorm()));
}

TEST(CurvatureTerm, FlatIsZero) {
  const auto mc = build_metric(flat_torus3(3));
  EXPECT_EQ(curvature_term(mc, 2).stiffness.norm(), 0.0);
}

TEST(CurvatureTerm, DefectModeApproximatesUnitCurvature) {
  const auto mc = build_metric(icosphere(3), CurvatureMode::vertex_defect());
  const Eigen::VectorXd kappa = curvature_weights(mc, 1);
  EXPECT_LE((kappa.array() - 1.0).abs().maxCoeff(), 0.15);
}

TEST(CurvatureTerm, DefectModeOnlyForOneForms) {
  const auto mc = build_metric(icosphere(1), CurvatureMode::vertex_defect());
  try {
    curvature_weights(mc, 2);
    FAIL() << "expected ModeUnsupported";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::mode_unsupported);
  }
}

TEST(CkForm, Coefficients) {
  const auto c = ck_coefficients(2, 1);
  EXPECT_DOUBLE_EQ(c.exterior, 0.25);
  EXPECT_DOUBLE_EQ(c.coexterior, 0.25);
  EXPECT_DOUBLE_EQ(c.curvature, 0.5);
  const auto c3 = ck_coefficients(3, 2);
  EXPECT_DOUBLE_EQ(c3.exterior, 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(c3.coexterior, 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(c3.curvature, 1.0 / 6.0);
}

TEST(CkForm, IcosphereDecomposition) {
  const auto mc = build_metric(icosphere(2));
  const auto q = ck_form(mc, 1);
  const auto h = hodge_form(mc, 1);
  const SparseMatrix expected = 0.25 * h.stiffness - 0.5 * detail::diagonal(mc.mass[1]);
  EXPECT_LE((q.stiffness - expected).norm(), 1e-14 * expected.norm());
}

TEST(CkForm, DegreeRange) {
  const auto mc = build_metric(icosphere(1));
  EXPECT_THROW(ck_form(mc, 0), Error);
  EXPECT_THROW(ck_form(mc, 2), Error);
  EXPECT_THROW(killing_form(mc, 2), Error);
}

TEST(CkForm, PenalizedFormsDominate) {
  const auto mc = build_metric(sphere3(0));
  for (int r = 1; r <= 2; ++r) {
    const auto t = ck_form(mc, r);
    const auto k = killing_form(mc, r);
    const auto p = planar_form(mc, r);
    EXPECT_LE(asymmetry(k.stiffness), 1e-15);
    for (unsigned s = 0; s < 20; ++s) {
      const Eigen::VectorXd w = random_vector(t.size(), 100 + s);
      EXPECT_GE(k.energy(w) - t.energy(w), -1e-12);
      EXPECT_GE(p.energy(w) - t.energy(w), -1e-12);
    }
  }
}

TEST(CkForm, ParallelFormsInFlatKernel) {
  const Mesh m = flat_torus2(8, 8);
  const auto mc = build_metric(m);
  Eigen::VectorXd w(mc.count(1));
  for (int e = 0; e < mc.count(1); ++e) {
    const auto& s = m.K().simplex(1, e);
    const auto d = m.displacement(s[0], s[1]);
    w(e) = 0.6 * d[0] - 0.8 * d[1];
  }
  for (FormKind kind : {FormKind::ck, FormKind::killing, FormKind::planar}) {
    const auto q = assemble(mc, 1, kind);
    EXPECT_LE(std::abs(q.energy(w)) / q.mass_norm2(w), 1e-10) << to_string(kind);
  }
}

TEST(EnergyIdentity, MatchesAssembledForm) {
  for (const Mesh& m : {icosphere(2), hyperbolic_genus2(1), sphere3(0)}) {
    const auto mc = build_metric(m);
    const auto q = ck_form(mc, 1);
    for (unsigned s = 0; s < 10; ++s) {
      const auto t = energy_terms(mc, q, random_vector(q.size(), 40 + s));
      EXPECT_LE(std::abs(t.form - t.assembled), 1e-12 * t.magnitude);
    }
  }
}

TEST(WriteCoordinate, Format) {
  SparseMatrix A(2, 3);
  A.insert(0, 1) = 0.5;
  A.insert(1, 2) = -2.0;
  A.makeCompressed();
  std::ostringstream out;
  write_coordinate(out, A);
  EXPECT_EQ(out.str(), "% rows 2 cols 3 nnz 2\n0 1 0.5\n1 2 -2\n");
}
