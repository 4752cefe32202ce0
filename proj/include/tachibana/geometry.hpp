#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "complex.hpp"
#include "errors.hpp"

namespace tachibana {

/// How the curvature term of the Weitzenboeck identity is realized.
struct CurvatureMode {
  enum class Kind { constant, vertex_defect };
  Kind kind = Kind::constant;
  double value = 0.0;  ///< sectional curvature C in constant mode

  static CurvatureMode constant(double c) { return {Kind::constant, c}; }
  static CurvatureMode vertex_defect() { return {Kind::vertex_defect, 0.0}; }

  bool is_constant() const { return kind == Kind::constant; }
};

/// A complex with a piecewise-flat metric and its circumcentric diagonal Hodge stars.
struct MetricComplex {
  std::shared_ptr<const SimplicialComplex> complex;
  std::vector<double> edge_lengths;
  std::vector<std::vector<double>> volumes;       ///< primal volume per simplex, per degree
  std::vector<std::vector<double>> dual_volumes;  ///< circumcentric dual volume per simplex
  std::vector<Eigen::VectorXd> mass;              ///< diagonal of M_r = |dual s| / |s|
  std::vector<double> vertex_defect;              ///< 2*pi - incident angles (n = 2)
  std::vector<double> vertex_curvature;           ///< defect / dual area (n = 2)
  CurvatureMode curvature;

  const SimplicialComplex& K() const { return *complex; }
  int dimension() const { return complex->dimension(); }
  int count(int r) const { return complex->count(r); }
  double total_volume() const {
    double sum = 0.0;
    for (double v : volumes.back()) sum += v;
    return sum;
  }
};

namespace detail {

inline double edge_length(const SimplicialComplex& K, std::span<const double> lengths, int a, int b) {
  Simplex e = a < b ? Simplex{a, b} : Simplex{b, a};
  const int idx = K.index_of(1, e);
  if (idx < 0) fail(ErrorKind::invalid_parameter, "missing edge in simplex");
  return lengths[idx];
}

// Gram matrix of edge vectors from vertex 0: G_ij = (l_0i^2 + l_0j^2 - l_ij^2) / 2.
inline Eigen::MatrixXd gram_from_lengths(const SimplicialComplex& K, std::span<const double> lengths,
                                         const Simplex& s) {
  const int k = static_cast<int>(s.size()) - 1;
  Eigen::MatrixXd G(k, k);
  for (int i = 1; i <= k; ++i) {
    for (int j = i; j <= k; ++j) {
      const double l0i = edge_length(K, lengths, s[0], s[i]);
      const double l0j = edge_length(K, lengths, s[0], s[j]);
      const double lij = i == j ? 0.0 : edge_length(K, lengths, s[i], s[j]);
      G(i - 1, j - 1) = G(j - 1, i - 1) = 0.5 * (l0i * l0i + l0j * l0j - lij * lij);
    }
  }
  return G;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Volume from the Gram determinant (equivalent to the Cayley-Menger determinant).
inline double simplex_volume(const Eigen::MatrixXd& G, double scale) {
  const int k = static_cast<int>(G.rows());
  const double det = G.determinant();
  if (!(det > 1e-13 * std::pow(scale, 2 * k))) return -1.0;
  return std::sqrt(det) / factorial(k);
}

}  // namespace detail

/// Assembles volumes, circumcentric dual volumes, diagonal stars and (n = 2) vertex curvature.
inline MetricComplex build_metric(std::shared_ptr<const SimplicialComplex> complex, std::vector<double> lengths,
                                  CurvatureMode mode) {
  const SimplicialComplex& K = *complex;
  const int n = K.dimension();
  require(static_cast<int>(lengths.size()) == K.count(1), "build_metric: one length per edge required");
  double max_len = 0.0;
  for (std::size_t e = 0; e < lengths.size(); ++e) {
    if (!(lengths[e] > 0.0) || !std::isfinite(lengths[e]))
      fail(ErrorKind::degenerate_simplex, "edge " + std::to_string(e) + " has non-positive length");
    max_len = std::max(max_len, lengths[e]);
  }
  if (!mode.is_constant() && n != 2)
    fail(ErrorKind::mode_unsupported, "vertex_defect curvature is defined only for surfaces");

  MetricComplex mc;
  mc.complex = complex;
  mc.edge_lengths = std::move(lengths);
  mc.curvature = mode;
  const std::span<const double> L(mc.edge_lengths);

  mc.volumes.assign(n + 1, {});
  mc.volumes[0].assign(K.count(0), 1.0);
  mc.volumes[1] = mc.edge_lengths;
  for (int r = 2; r <= n; ++r) {
    mc.volumes[r].resize(K.count(r));
    for (int i = 0; i < K.count(r); ++i) {
      const Simplex& s = K.simplex(r, i);
      double local_scale = 0.0;
      for (std::size_t a = 0; a < s.size(); ++a)
        for (std::size_t b = a + 1; b < s.size(); ++b)
          local_scale = std::max(local_scale, detail::edge_length(K, L, s[a], s[b]));
      const double v = detail::simplex_volume(detail::gram_from_lengths(K, L, s), local_scale);
      if (v <= 0.0)
        fail(ErrorKind::degenerate_simplex,
             std::to_string(r) + "-simplex " + std::to_string(i) + " violates the Cayley-Menger condition");
      mc.volumes[r][i] = v;
    }
  }

  // Circumcentric duals: sum over flags s = s_k < s_{k+1} < ... < s_n of signed orthoscheme volumes.
  mc.dual_volumes.assign(n + 1, {});
  for (int r = 0; r <= n; ++r) mc.dual_volumes[r].assign(K.count(r), 0.0);
  const int nv = n + 1;
  const int full = (1 << nv) - 1;
  std::vector<Eigen::VectorXd> center(1 << nv);
  std::vector<int> global(1 << nv);
  std::vector<int> mask_degree(1 << nv);
  for (int t = 0; t < K.count(n); ++t) {
    const Simplex& T = K.simplex(n, t);
    const Eigen::MatrixXd G = detail::gram_from_lengths(K, L, T);
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
      fail(ErrorKind::degenerate_simplex, "top simplex " + std::to_string(t) + " cannot be embedded");
    const Eigen::MatrixXd Lc = llt.matrixL();
    std::vector<Eigen::VectorXd> pts(nv, Eigen::VectorXd::Zero(n));
    for (int i = 1; i < nv; ++i) pts[i] = Lc.row(i - 1).transpose();

    for (int mask = 1; mask <= full; ++mask) {
      std::vector<int> members;
      Simplex verts;
      for (int i = 0; i < nv; ++i)
        if (mask & (1 << i)) {
          members.push_back(i);
          verts.push_back(T[i]);
        }
      const int k = static_cast<int>(members.size()) - 1;
      mask_degree[mask] = k;
      global[mask] = K.index_of(k, verts);
      if (k == 0) {
        center[mask] = pts[members[0]];
        continue;
      }
      // Equidistance system in barycentric form.
      Eigen::MatrixXd A(k, k);
      Eigen::VectorXd b(k);
      for (int i = 1; i <= k; ++i) {
        const Eigen::VectorXd ei = pts[members[i]] - pts[members[0]];
        b(i - 1) = 0.5 * ei.squaredNorm();
        for (int j = 1; j <= k; ++j) A(i - 1, j - 1) = ei.dot(pts[members[j]] - pts[members[0]]);
      }
      const Eigen::VectorXd mu = A.ldlt().solve(b);
      Eigen::VectorXd c = pts[members[0]];
      for (int i = 1; i <= k; ++i) c += mu(i - 1) * (pts[members[i]] - pts[members[0]]);
      center[mask] = c;
    }

    // Depth-first over flags, accumulating the product of signed heights.
    auto walk = [&](auto&& self, int start_mask, int mask, double product) -> void {
      if (mask == full) {
        const int k = mask_degree[start_mask];
        mc.dual_volumes[k][global[start_mask]] += product / detail::factorial(n - k);
        return;
      }
      for (int a = 0; a < nv; ++a) {
        if (mask & (1 << a)) continue;
        const int next = mask | (1 << a);
        const Eigen::VectorXd d = center[next] - center[mask];
        const double h = d.norm();
        const double sign = d.dot(pts[a] - center[mask]) >= 0.0 ? 1.0 : -1.0;
        self(self, start_mask, next, product * sign * h);
      }
    };
    for (int mask = 1; mask < full; ++mask) walk(walk, mask, mask, 1.0);
  }
  for (int t = 0; t < K.count(n); ++t) mc.dual_volumes[n][t] = 1.0;

  for (int r = 0; r < n; ++r) {
    const double tol = 1e-10 * std::pow(max_len, n - r);
    for (int i = 0; i < K.count(r); ++i)
      if (!(mc.dual_volumes[r][i] > tol))
        fail(ErrorKind::negative_dual_volume,
             "dual volume of " + std::to_string(r) + "-simplex " + std::to_string(i) + " is " +
                 std::to_string(mc.dual_volumes[r][i]) + " (mesh not well-centered enough for the diagonal star)");
  }

  mc.mass.resize(n + 1);
  for (int r = 0; r <= n; ++r) {
    mc.mass[r].resize(K.count(r));
    for (int i = 0; i < K.count(r); ++i) mc.mass[r](i) = mc.dual_volumes[r][i] / mc.volumes[r][i];
  }

  if (n == 2) {
    mc.vertex_defect.assign(K.count(0), 2.0 * std::numbers::pi);
    for (int t = 0; t < K.count(2); ++t) {
      const Simplex& T = K.simplex(2, t);
      for (int i = 0; i < 3; ++i) {
        const int a = T[i], b = T[(i + 1) % 3], c = T[(i + 2) % 3];
        const double lab = detail::edge_length(K, L, a, b);
        const double lac = detail::edge_length(K, L, a, c);
        const double lbc = detail::edge_length(K, L, b, c);
        const double cosine = (lab * lab + lac * lac - lbc * lbc) / (2.0 * lab * lac);
        mc.vertex_defect[a] -= std::acos(std::clamp(cosine, -1.0, 1.0));
      }
    }
    mc.vertex_curvature.resize(K.count(0));
    for (int v = 0; v < K.count(0); ++v) mc.vertex_curvature[v] = mc.vertex_defect[v] / mc.dual_volumes[0][v];
  }
  return mc;
}

inline MetricComplex build_metric(const SimplicialComplex& K, std::vector<double> lengths, CurvatureMode mode) {
  return build_metric(std::make_shared<const SimplicialComplex>(K), std::move(lengths), mode);
}

/// Sum over r-simplices of |s| |dual s| weighted by r!(n-r)!/n!; equals the total volume.
inline double primal_dual_pairing(const MetricComplex& mc, int r) {
  const int n = mc.dimension();
  const double weight = detail::factorial(r) * detail::factorial(n - r) / detail::factorial(n);
  double sum = 0.0;
  for (int i = 0; i < mc.count(r); ++i) sum += mc.volumes[r][i] * mc.dual_volumes[r][i];
  return weight * sum;
}

/// Discrete conformal change g -> exp(2f) g: l_uv -> exp((f_u + f_v)/2) l_uv.
inline MetricComplex conformal_rescale(const MetricComplex& mc, std::span<const double> f) {
  require(static_cast<int>(f.size()) == mc.count(0), "conformal_rescale: one value per vertex required");
  if (mc.curvature.is_constant())
    fail(ErrorKind::mode_conflict, "a conformal rescale does not preserve constant curvature");
  std::vector<double> lengths(mc.edge_lengths.size());
  for (int e = 0; e < mc.count(1); ++e) {
    const Simplex& s = mc.K().simplex(1, e);
    lengths[e] = std::exp(0.5 * (f[s[0]] + f[s[1]])) * mc.edge_lengths[e];
  }
  return build_metric(mc.complex, std::move(lengths), mc.curvature);
}

}  // namespace tachibana
