#pragma once

#include <bit>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "generators.hpp"
#include "mesh.hpp"
#include "operators.hpp"

namespace tachibana {

/// Constant-coefficient exterior algebra on R^N, N <= 8. A form is a dense component vector
/// indexed by the bitmask of its increasing multi-index: (1 << i) | (1 << j) is dx^i ^ dx^j.
namespace exterior {

using Components = std::vector<double>;

inline int degree_of(unsigned mask) { return std::popcount(mask); }

inline Components zero(int N) { return Components(std::size_t(1) << N, 0.0); }

inline Components basis(int N, unsigned mask) {
  Components c = zero(N);
  c[mask] = 1.0;
  return c;
}

inline std::vector<int> indices(unsigned mask) {
  std::vector<int> out;
  for (int i = 0; mask; ++i, mask >>= 1)
    if (mask & 1u) out.push_back(i);
  return out;
}

inline unsigned mask_of(const std::vector<int>& idx) {
  unsigned m = 0;
  for (int i : idx) m |= 1u << i;
  return m;
}

/// All masks of popcount k in increasing numeric order of their index lists.
inline std::vector<unsigned> subsets(int N, int k) {
  std::vector<unsigned> out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > N) return out;
  while (true) {
    out.push_back(mask_of(idx));
    int i = k - 1;
    while (i >= 0 && idx[i] == N - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// Sign of moving index i to the front of an increasing multi-index: (-1)^(#members below i).
inline double front_sign(unsigned mask, int i) {
  return (std::popcount(mask & ((1u << i) - 1u)) % 2) ? -1.0 : 1.0;
}

/// Interior product i_v w.
inline Components interior(std::span<const double> v, const Components& w) {
  const int N = static_cast<int>(v.size());
  Components out = zero(N);
  for (unsigned m = 0; m < w.size(); ++m) {
    if (w[m] == 0.0) continue;
    for (int i = 0; i < N; ++i)
      if (m & (1u << i)) out[m & ~(1u << i)] += front_sign(m, i) * v[i] * w[m];
  }
  return out;
}

/// Euclidean Hodge star with e^I ^ *e^I = vol.
inline Components star(int N, const Components& w) {
  Components out = zero(N);
  const unsigned full = (1u << N) - 1u;
  for (unsigned m = 0; m < w.size(); ++m) {
    if (w[m] == 0.0) continue;
    // sign of the permutation (I, I^c)
    int inversions = 0;
    for (int i : indices(m)) inversions += std::popcount(~m & full & ((1u << i) - 1u));
    out[full & ~m] += (inversions % 2 ? -1.0 : 1.0) * w[m];
  }
  return out;
}

}  // namespace exterior

/// A differential r-form on a region of R^N given pointwise in ambient components.
struct FormField {
  int ambient = 0;
  int degree = 0;
  std::function<exterior::Components(std::span<const double>)> eval;
  json provenance = json::object();
  std::string label;
};

/// w_{i_1..i_r} = A_{k i_1..i_r} x^k + B_{i_1..i_r} with constant skew tensors A and B.
struct AmbientForm {
  int ambient = 0;
  int degree = 0;
  exterior::Components A;  ///< degree r + 1 components
  exterior::Components B;  ///< degree r components

  /// From dense row-major tensors of order r+1 and r (either may be empty for zero).
  static AmbientForm from_tensors(int N, int r, const std::vector<double>& A_full, const std::vector<double>& B_full) {
    require(N >= 1 && N <= 8 && r >= 0 && r < N, "AmbientForm: unsupported dimension or degree");
    AmbientForm f;
    f.ambient = N;
    f.degree = r;
    f.A = to_components(N, r + 1, A_full, "A");
    f.B = to_components(N, r, B_full, "B");
    return f;
  }

  static AmbientForm from_components(int N, int r, exterior::Components A, exterior::Components B) {
    require(N >= 1 && N <= 8 && r >= 0 && r < N, "AmbientForm: unsupported dimension or degree");
    const std::size_t size = std::size_t(1) << N;
    if (A.empty()) A.assign(size, 0.0);
    if (B.empty()) B.assign(size, 0.0);
    require(A.size() == size && B.size() == size, "AmbientForm: component vectors have the wrong size");
    for (unsigned m = 0; m < size; ++m) {
      require(A[m] == 0.0 || exterior::degree_of(m) == r + 1, "AmbientForm: A has components of the wrong degree");
      require(B[m] == 0.0 || exterior::degree_of(m) == r, "AmbientForm: B has components of the wrong degree");
    }
    return {N, r, std::move(A), std::move(B)};
  }

  exterior::Components operator()(std::span<const double> x) const {
    exterior::Components w = exterior::interior(x, A);
    for (std::size_t m = 0; m < w.size(); ++m) w[m] += B[m];
    return w;
  }

  FormField field(std::string label = {}) const {
    json prov;
    json a = json::array(), b = json::array();
    for (unsigned m = 0; m < A.size(); ++m) {
      if (A[m] != 0.0) a.push_back({{"indices", exterior::indices(m)}, {"value", A[m]}});
      if (B[m] != 0.0) b.push_back({{"indices", exterior::indices(m)}, {"value", B[m]}});
    }
    prov["A"] = a;
    prov["B"] = b;
    AmbientForm copy = *this;
    return {ambient, degree, [copy](std::span<const double> x) { return copy(x); }, prov, std::move(label)};
  }

 private:
  static exterior::Components to_components(int N, int k, const std::vector<double>& T, const char* name) {
    exterior::Components c = exterior::zero(N);
    if (T.empty()) return c;
    std::size_t size = 1;
    for (int i = 0; i < k; ++i) size *= N;
    require(T.size() == size, std::string("AmbientForm: tensor ") + name + " has the wrong size");
    double scale = 0.0;
    for (double t : T) scale = std::max(scale, std::abs(t));
    const double tol = 1e-14 * std::max(scale, 1.0);
    std::vector<int> idx(k, 0);
    auto flat = [&](const std::vector<int>& ix) {
      std::size_t f = 0;
      for (int i : ix) f = f * N + i;
      return f;
    };
    for (std::size_t f = 0; f < size; ++f) {
      std::size_t rest = f;
      for (int i = k - 1; i >= 0; --i) {
        idx[i] = static_cast<int>(rest % N);
        rest /= N;
      }
      for (int a = 0; a + 1 < k; ++a) {
        std::vector<int> swapped = idx;
        std::swap(swapped[a], swapped[a + 1]);
        if (std::abs(T[f] + T[flat(swapped)]) > tol)
          fail(ErrorKind::invalid_parameter, std::string("AmbientForm: tensor ") + name + " is not antisymmetric");
      }
      if (std::is_sorted(idx.begin(), idx.end()) && std::adjacent_find(idx.begin(), idx.end()) == idx.end())
        c[exterior::mask_of(idx)] = T[f];
    }
    return c;
  }
};

/// Co-closed conformal Killing r-forms on S^n: A = e^J for each (r+1)-subset J of the n+1 axes, B = 0.
inline std::vector<FormField> ambient_killing_family(int n, int r) {
  require(r >= 1 && r <= n - 1, "ambient_killing_family: need 1 <= r <= n-1");
  std::vector<FormField> out;
  for (unsigned J : exterior::subsets(n + 1, r + 1)) {
    auto f = AmbientForm::from_components(n + 1, r, exterior::basis(n + 1, J), {});
    std::string label = "killing";
    for (int i : exterior::indices(J)) label += "_" + std::to_string(i);
    out.push_back(f.field(label));
  }
  return out;
}

/// Closed conformal Killing r-forms on S^n as pointwise spherical duals i_nu *_E (i_x A) of the
/// Killing (n-r)-forms, with nu = x / |x|.
inline std::vector<FormField> ambient_planar_family(int n, int r) {
  require(r >= 1 && r <= n - 1, "ambient_planar_family: need 1 <= r <= n-1");
  const int N = n + 1;
  std::vector<FormField> out;
  for (unsigned J : exterior::subsets(N, n - r + 1)) {
    const AmbientForm killing = AmbientForm::from_components(N, n - r, exterior::basis(N, J), {});
    FormField f;
    f.ambient = N;
    f.degree = r;
    f.eval = [killing, N](std::span<const double> x) {
      double norm = 0.0;
      for (double xi : x) norm += xi * xi;
      norm = std::sqrt(norm);
      std::vector<double> nu(x.begin(), x.end());
      for (double& v : nu) v /= norm;
      return exterior::interior(nu, exterior::star(N, killing(x)));
    };
    f.provenance = {{"dual_of", {{"A", exterior::indices(J)}, {"degree", n - r}}}};
    f.label = "planar";
    for (int i : exterior::indices(J)) f.label += "_" + std::to_string(i);
    out.push_back(std::move(f));
  }
  return out;
}

/// Parallel r-forms dx^I on flat R^n (B-part only).
inline std::vector<FormField> flat_constant_family(int n, int r) {
  require(r >= 1 && r <= n - 1, "flat_constant_family: need 1 <= r <= n-1");
  std::vector<FormField> out;
  for (unsigned I : exterior::subsets(n, r)) {
    auto f = AmbientForm::from_components(n, r, {}, exterior::basis(n, I));
    std::string label = "constant";
    for (int i : exterior::indices(I)) label += "_" + std::to_string(i);
    out.push_back(f.field(label));
  }
  return out;
}

/// Quadrature on the reference r-simplex {s_i >= 0, sum s_i <= 1}.
struct SimplexRule {
  std::vector<std::vector<double>> points;  ///< reference coordinates s_1..s_r
  std::vector<double> weights;              ///< sum to 1 / r!
};

/// Gauss-Legendre nodes and weights on [0, 1] (Golub-Welsch).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int q) {
  require(q >= 1, "gauss_legendre: need at least one node");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
  for (int k = 1; k < q; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  std::vector<double> x(q), w(q);
  for (int i = 0; i < q; ++i) {
    x[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);  // 2 v0^2 on [-1,1], halved
  }
  return {x, w};
}

/// Collapsed (Duffy) tensor rule exact for polynomials of total degree <= `degree`.
inline SimplexRule simplex_rule(int r, int degree) {
  require(r >= 0 && degree >= 0, "simplex_rule: invalid arguments");
  SimplexRule rule;
  if (r == 0) {
    rule.points.push_back({});
    rule.weights.push_back(1.0);
    return rule;
  }
  // the collapsed direction carries an extra (1-u)^(r-1) factor
  const int q = std::max(1, (degree + r) / 2 + 1);
  const auto [x, w] = gauss_legendre(q);
  std::vector<int> at(r, 0);
  while (true) {
    std::vector<double> s(r);
    double remaining = 1.0, weight = 1.0;
    for (int i = 0; i < r; ++i) {
      s[i] = remaining * x[at[i]];
      remaining *= 1.0 - x[at[i]];
      // Jacobian of s(u) is prod_i (1 - u_i)^(r-1-i)
      weight *= w[at[i]] * std::pow(1.0 - x[at[i]], r - 1 - i);
    }
    rule.points.push_back(std::move(s));
    rule.weights.push_back(weight);
    int i = r - 1;
    while (i >= 0 && ++at[i] == q) at[i--] = 0;
    if (i < 0) break;
  }
  return rule;
}

/// Integrates a form over every oriented r-simplex of the mesh, taken as the straight simplex on
/// its vertex coordinates (lifted to the universal cover for tori). Top cells use the complex's
/// orientation, lower simplices their sorted vertex order.
inline Eigen::VectorXd de_rham_sample(const FormField& form, const Mesh& mesh, int r, int quadrature_degree = 4) {
  if (!mesh.has_embedding()) fail(ErrorKind::no_embedding, "de_rham_sample needs vertex coordinates");
  const SimplicialComplex& K = mesh.K();
  require(r == form.degree, "de_rham_sample: form degree does not match the cochain degree");
  require(r >= 0 && r <= K.dimension(), "de_rham_sample: degree out of range");
  const int N = static_cast<int>(mesh.vertices.front().size());
  require(N == form.ambient, "de_rham_sample: ambient dimension does not match the embedding");

  const SimplexRule rule = simplex_rule(r, quadrature_degree);
  const auto masks = exterior::subsets(N, r);
  Eigen::VectorXd out(K.count(r));
  std::vector<double> x(N);
  for (int i = 0; i < K.count(r); ++i) {
    const Simplex& s = K.simplex(r, i);
    const std::vector<double>& p0 = mesh.vertices[s[0]];
    Eigen::MatrixXd E(N, r);
    for (int a = 1; a <= r; ++a) {
      const auto d = mesh.displacement(s[0], s[a]);
      for (int c = 0; c < N; ++c) E(c, a - 1) = d[c];
    }
    // w(e_1..e_r) = sum_I w_I det(E restricted to the rows I)
    std::vector<double> minors(masks.size(), 1.0);
    for (std::size_t m = 0; m < masks.size(); ++m) {
      if (r == 0) break;
      const auto rows = exterior::indices(masks[m]);
      Eigen::MatrixXd sub(r, r);
      for (int a = 0; a < r; ++a) sub.row(a) = E.row(rows[a]);
      minors[m] = sub.determinant();
    }
    double total = 0.0;
    for (std::size_t qp = 0; qp < rule.weights.size(); ++qp) {
      for (int c = 0; c < N; ++c) {
        x[c] = p0[c];
        for (int a = 0; a < r; ++a) x[c] += rule.points[qp][a] * E(c, a);
      }
      const exterior::Components w = form.eval(x);
      double val = 0.0;
      for (std::size_t m = 0; m < masks.size(); ++m) val += w[masks[m]] * minors[m];
      total += rule.weights[qp] * val;
    }
    out(i) = K.orientation(r, i) * total;
  }
  return out;
}

inline std::vector<Eigen::VectorXd> sample_family(const std::vector<FormField>& family, const Mesh& mesh,
                                                  int quadrature_degree = 4) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& f : family) out.push_back(de_rham_sample(f, mesh, f.degree, quadrature_degree));
  return out;
}

/// Numerical rank of the M-Gram matrix, via singular values of M^{1/2} C.
inline int family_rank(const std::vector<Eigen::VectorXd>& cochains, const Eigen::VectorXd& mass,
                       double relative = 1e-8) {
  require(!cochains.empty(), "family_rank: empty family");
  Eigen::MatrixXd C(mass.size(), static_cast<int>(cochains.size()));
  const Eigen::VectorXd root = mass.cwiseSqrt();
  for (std::size_t j = 0; j < cochains.size(); ++j) {
    require(cochains[j].size() == mass.size(), "family_rank: cochain size does not match the mass");
    C.col(static_cast<int>(j)) = root.cwiseProduct(cochains[j]);
  }
  // QR first so the SVD acts on a small square factor
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
  const int k = static_cast<int>(std::min(C.rows(), C.cols()));
  const Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > relative * sv(0)) ++rank;
  return rank;
}

/// Rayleigh quotient w^T Q w / w^T M w.
inline double residual(const QuadraticForm& q, const Eigen::VectorXd& w) {
  require(w.size() == q.size(), "residual: cochain size does not match the form");
  const double den = q.mass_norm2(w);
  require(den > 0.0, "residual: zero cochain");
  return q.energy(w) / den;
}

/// The concircular 1-form f(t) dt on a warped torus, integrated exactly edge by edge.
inline Eigen::VectorXd warped_concircular(const Mesh& mesh) {
  if (!mesh.has_embedding()) fail(ErrorKind::no_embedding, "warped_concircular needs parameter coordinates");
  require(mesh.recipe.name == "warped_torus" && !mesh.recipe.warp_profile.empty(),
          "warped_concircular: mesh is not a warped torus");
  const WarpProfile f(mesh.recipe.warp_profile);
  const SimplicialComplex& K = mesh.K();
  Eigen::VectorXd w(K.count(1));
  for (int e = 0; e < K.count(1); ++e) {
    const Simplex& s = K.simplex(1, e);
    const double t = mesh.vertices[s[0]][0];
    const double dt = mesh.displacement(s[0], s[1])[0];
    w(e) = f.antiderivative(t + dt) - f.antiderivative(t);
  }
  return w;
}

inline json family_to_json(const std::vector<FormField>& family, const std::vector<Eigen::VectorXd>& cochains) {
  require(family.size() == cochains.size(), "family_to_json: size mismatch");
  json out = json::array();
  for (std::size_t i = 0; i < family.size(); ++i)
    out.push_back({{"label", family[i].label},
                   {"degree", family[i].degree},
                   {"provenance", family[i].provenance},
                   {"cochain", std::vector<double>(cochains[i].data(), cochains[i].data() + cochains[i].size())}});
  return out;
}

}  // namespace tachibana
