#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "errors.hpp"
#include "geometry.hpp"

namespace tachibana {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class FormKind { hodge, curvature, ck, killing, planar };

constexpr std::string_view to_string(FormKind kind) {
  switch (kind) {
    case FormKind::hodge: return "hodge";
    case FormKind::curvature: return "curvature";
    case FormKind::ck: return "ck";
    case FormKind::killing: return "killing";
    case FormKind::planar: return "planar";
  }
  return "unknown";
}

/// Symmetric stiffness Q on r-cochains paired with the diagonal mass M_r.
struct QuadraticForm {
  int degree = 0;
  SparseMatrix stiffness;
  Eigen::VectorXd mass;
  FormKind kind = FormKind::hodge;

  int size() const { return static_cast<int>(mass.size()); }
  double energy(const Eigen::VectorXd& w) const { return w.dot(stiffness * w); }
  double mass_norm2(const Eigen::VectorXd& w) const { return w.dot(mass.cwiseProduct(w)); }
};

/// d_r = transpose of the boundary d_{r+1}, mapping r-cochains to (r+1)-cochains.
inline SparseMatrix coboundary(const SimplicialComplex& K, int r) {
  require(r >= 0 && r < K.dimension(), "coboundary: degree out of range");
  return SparseMatrix(K.boundary(r + 1).cast<double>().transpose());
}

inline SparseMatrix coboundary(const MetricComplex& mc, int r) { return coboundary(mc.K(), r); }

/// delta_r = M_{r-1}^{-1} d_{r-1}^T M_r, the M-adjoint of d_{r-1}.
inline SparseMatrix codifferential(const MetricComplex& mc, int r) {
  require(r >= 1 && r <= mc.dimension(), "codifferential: degree out of range");
  SparseMatrix B = mc.K().boundary(r).cast<double>();  // = d_{r-1}^T
  const Eigen::VectorXd left = mc.mass[r - 1].cwiseInverse();
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) it.valueRef() *= left(it.row()) * mc.mass[r](it.col());
  return B;
}

namespace detail {

// d_r^T M_{r+1} d_r, assembled per (r+1)-simplex with mirrored off-diagonal entries.
inline SparseMatrix exterior_energy(const MetricComplex& mc, int r) {
  const int n = mc.dimension();
  SparseMatrix Q(mc.count(r), mc.count(r));
  if (r >= n) return Q;
  const SimplicialComplex& K = mc.K();
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < K.count(r + 1); ++t) {
    const auto& faces = K.faces(r + 1, t);
    const double w = mc.mass[r + 1](t);
    for (std::size_t a = 0; a < faces.size(); ++a) {
      const auto [i, si] = faces[a];
      trips.emplace_back(i, i, w);
      for (std::size_t b = a + 1; b < faces.size(); ++b) {
        const auto [j, sj] = faces[b];
        const double v = si * sj * w;
        trips.emplace_back(i, j, v);
        trips.emplace_back(j, i, v);
      }
    }
  }
  Q.setFromTriplets(trips.begin(), trips.end());
  return Q;
}

// M_r d_{r-1} M_{r-1}^{-1} d_{r-1}^T M_r, assembled per (r-1)-simplex.
inline SparseMatrix coexterior_energy(const MetricComplex& mc, int r) {
  SparseMatrix Q(mc.count(r), mc.count(r));
  if (r <= 0) return Q;
  const SimplicialComplex& K = mc.K();
  const Eigen::VectorXd& Mr = mc.mass[r];
  std::vector<Eigen::Triplet<double>> trips;
  for (int f = 0; f < K.count(r - 1); ++f) {
    const auto& co = K.cofaces(r - 1, f);
    const double inv = 1.0 / mc.mass[r - 1](f);
    for (std::size_t a = 0; a < co.size(); ++a) {
      const auto [i, si] = co[a];
      trips.emplace_back(i, i, Mr(i) * Mr(i) * inv);
      for (std::size_t b = a + 1; b < co.size(); ++b) {
        const auto [j, sj] = co[b];
        const double v = si * sj * (Mr(i) * Mr(j)) * inv;
        trips.emplace_back(i, j, v);
        trips.emplace_back(j, i, v);
      }
    }
  }
  Q.setFromTriplets(trips.begin(), trips.end());
  return Q;
}

inline SparseMatrix diagonal(const Eigen::VectorXd& d) {
  SparseMatrix D(d.size(), d.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < d.size(); ++i) trips.emplace_back(i, i, d(i));
  D.setFromTriplets(trips.begin(), trips.end());
  return D;
}

inline void require_ck_degree(const MetricComplex& mc, int r) {
  require(r >= 1 && r <= mc.dimension() - 1, "conformal Killing forms are assembled for 1 <= r <= n-1");
}

}  // namespace detail

/// Hodge-de Rham form: d*d part plus dd* part (boundary terms vanish at r = 0 and r = n).
inline QuadraticForm hodge_form(const MetricComplex& mc, int r) {
  require(r >= 0 && r <= mc.dimension(), "hodge_form: degree out of range");
  QuadraticForm q;
  q.degree = r;
  q.kind = FormKind::hodge;
  q.mass = mc.mass[r];
  q.stiffness = detail::exterior_energy(mc, r) + detail::coexterior_energy(mc, r);
  return q;
}

/// Diagonal curvature weights of F_r relative to M_r.
inline Eigen::VectorXd curvature_weights(const MetricComplex& mc, int r) {
  const int n = mc.dimension();
  if (mc.curvature.is_constant())
    return Eigen::VectorXd::Constant(mc.count(r), double(r) * (n - r) * mc.curvature.value);
  if (n != 2 || r != 1)
    fail(ErrorKind::mode_unsupported, "vertex_defect curvature term exists only for n = 2, r = 1");
  Eigen::VectorXd kappa(mc.count(1));
  for (int e = 0; e < mc.count(1); ++e) {
    const Simplex& s = mc.K().simplex(1, e);
    kappa(e) = 0.5 * (mc.vertex_curvature[s[0]] + mc.vertex_curvature[s[1]]);
  }
  return kappa;
}

/// Weitzenboeck curvature term F_r as a diagonal form.
inline QuadraticForm curvature_term(const MetricComplex& mc, int r) {
  require(r >= 0 && r <= mc.dimension(), "curvature_term: degree out of range");
  QuadraticForm q;
  q.degree = r;
  q.kind = FormKind::curvature;
  q.mass = mc.mass[r];
  q.stiffness = detail::diagonal(mc.mass[r].cwiseProduct(curvature_weights(mc, r)));
  return q;
}

/// Coefficients of the conformal Killing form: Q_T = c_d * (d*d) + c_delta * (dd*) - c_F * F_r.
struct CkCoefficients {
  double exterior;
  double coexterior;
  double curvature;
};

inline CkCoefficients ck_coefficients(int n, int r) {
  const double scale = 1.0 / (double(r) * (r + 1));
  return {scale * r / (r + 1.0), scale * (n - r) / (n - r + 1.0), scale};
}

/// Conformal Killing form Q_T (Laplacian of the conformal Killing operator via the Weitzenboeck substitution).
inline QuadraticForm ck_form(const MetricComplex& mc, int r) {
  detail::require_ck_degree(mc, r);
  const auto c = ck_coefficients(mc.dimension(), r);
  const Eigen::VectorXd F = mc.mass[r].cwiseProduct(curvature_weights(mc, r));
  QuadraticForm q;
  q.degree = r;
  q.kind = FormKind::ck;
  q.mass = mc.mass[r];
  q.stiffness = c.exterior * detail::exterior_energy(mc, r) + c.coexterior * detail::coexterior_energy(mc, r) -
                c.curvature * detail::diagonal(F);
  return q;
}

/// Q_T plus the dd* form: kernel is conformal Killing and co-closed.
inline QuadraticForm killing_form(const MetricComplex& mc, int r) {
  QuadraticForm q = ck_form(mc, r);
  q.kind = FormKind::killing;
  q.stiffness = q.stiffness + detail::coexterior_energy(mc, r);
  return q;
}

/// Q_T plus the d*d form: kernel is conformal Killing and closed.
inline QuadraticForm planar_form(const MetricComplex& mc, int r) {
  QuadraticForm q = ck_form(mc, r);
  q.kind = FormKind::planar;
  q.stiffness = q.stiffness + detail::exterior_energy(mc, r);
  return q;
}

inline QuadraticForm assemble(const MetricComplex& mc, int r, FormKind kind) {
  switch (kind) {
    case FormKind::hodge: return hodge_form(mc, r);
    case FormKind::curvature: return curvature_term(mc, r);
    case FormKind::ck: return ck_form(mc, r);
    case FormKind::killing: return killing_form(mc, r);
    case FormKind::planar: return planar_form(mc, r);
  }
  fail(ErrorKind::invalid_parameter, "unknown form kind");
}

/// Terms of the energy identity for Q_T evaluated on one cochain.
struct EnergyTerms {
  double form;        ///< w^T Q_T w
  double exterior;    ///< |dw|^2 in M_{r+1}
  double coexterior;  ///< |delta w|^2 in M_{r-1}
  double curvature;   ///< w^T F_r w
  double assembled;   ///< identity right-hand side
  double magnitude;   ///< sum of absolute term sizes, the scale for relative errors
};

inline EnergyTerms energy_terms(const MetricComplex& mc, const QuadraticForm& ck, const Eigen::VectorXd& w) {
  const int r = ck.degree;
  const auto c = ck_coefficients(mc.dimension(), r);
  EnergyTerms t{};
  t.form = ck.energy(w);
  const Eigen::VectorXd dw = coboundary(mc, r) * w;
  t.exterior = dw.dot(mc.mass[r + 1].cwiseProduct(dw));
  const Eigen::VectorXd sw = codifferential(mc, r) * w;
  t.coexterior = sw.dot(mc.mass[r - 1].cwiseProduct(sw));
  t.curvature = w.dot(mc.mass[r].cwiseProduct(curvature_weights(mc, r)).cwiseProduct(w));
  t.assembled = c.exterior * t.exterior + c.coexterior * t.coexterior - c.curvature * t.curvature;
  t.magnitude = std::abs(c.exterior * t.exterior) + std::abs(c.coexterior * t.coexterior) +
                std::abs(c.curvature * t.curvature);
  return t;
}

/// Coordinate-format dump: one "row col value" line per stored entry, 17 significant digits.
inline void write_coordinate(std::ostream& out, const SparseMatrix& A) {
  out << "% rows " << A.rows() << " cols " << A.cols() << " nnz " << A.nonZeros() << "\n";
  char buf[96];
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", static_cast<int>(it.row()), static_cast<int>(it.col()),
                    it.value());
      out << buf;
    }
}

}  // namespace tachibana
