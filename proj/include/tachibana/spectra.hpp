#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <lapacke.h>

#include "complex.hpp"
#include "errors.hpp"
#include "generators.hpp"
#include "geometry.hpp"
#include "mesh.hpp"
#include "operators.hpp"

namespace tachibana {

enum class SolverKind { automatic, dense, iterative };

constexpr std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::automatic: return "auto";
    case SolverKind::dense: return "dense";
    case SolverKind::iterative: return "iterative";
  }
  return "unknown";
}

struct SolverOptions {
  SolverKind kind = SolverKind::automatic;
  std::uint64_t seed = 20240607;
  int dense_limit = 8000;
  double residual_tolerance = 1e-8;
  double shift = -0.05;
  int max_iterations = 400;
};

/// Resolves `automatic` by size, with the TACHIBANA_SOLVER environment override.
inline SolverKind resolve_solver(const SolverOptions& opt, int dim) {
  if (const char* env = std::getenv("TACHIBANA_SOLVER")) {
    const std::string v(env);
    if (v == "dense") return SolverKind::dense;
    if (v == "iterative") return SolverKind::iterative;
  }
  if (opt.kind != SolverKind::automatic) return opt.kind;
  return dim > opt.dense_limit ? SolverKind::iterative : SolverKind::dense;
}

struct SpectrumResult {
  int degree = 0;
  int requested = 0;
  SolverKind solver = SolverKind::dense;
  std::vector<double> eigenvalues;  ///< ascending
  Eigen::MatrixXd vectors;          ///< M-orthonormal columns
  std::vector<double> residuals;    ///< |Qx - lambda Mx|_{M^-1} relative to the operator scale
  bool usable = true;
  int iterations = 0;
  std::string backend;  ///< "lapack", "eigen" or "subspace"
};

namespace detail {

// Row-sum bound on |M^{-1/2} Q M^{-1/2}|.
inline double operator_scale(const QuadraticForm& q) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(q.size());
  const Eigen::VectorXd s = q.mass.cwiseSqrt().cwiseInverse();
  for (int k = 0; k < q.stiffness.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(q.stiffness, k); it; ++it)
      rows(it.row()) += std::abs(it.value()) * (s(it.row()) * s(it.col()));
  return std::max(rows.maxCoeff(), std::numeric_limits<double>::min());
}

inline void fill_residuals(const QuadraticForm& q, SpectrumResult& res, double tol) {
  const double anorm = operator_scale(q);
  const Eigen::VectorXd minv = q.mass.cwiseInverse();
  res.residuals.resize(res.eigenvalues.size());
  res.usable = true;
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i) {
    const Eigen::VectorXd x = res.vectors.col(static_cast<int>(i));
    const Eigen::VectorXd qx = q.stiffness * x;
    const Eigen::VectorXd r = qx - res.eigenvalues[i] * q.mass.cwiseProduct(x);
    const double rn = std::sqrt(r.dot(minv.cwiseProduct(r)));
    const double qn = std::sqrt(qx.dot(minv.cwiseProduct(qx)));
    const double xn = std::sqrt(x.dot(q.mass.cwiseProduct(x)));
    res.residuals[i] = rn / std::max(qn, anorm * xn);
    if (!(res.residuals[i] <= tol)) res.usable = false;
  }
}

inline SparseMatrix scaled_operator(const QuadraticForm& q) {
  const Eigen::VectorXd s = q.mass.cwiseSqrt().cwiseInverse();
  SparseMatrix A = q.stiffness;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) it.valueRef() *= s(it.row()) * s(it.col());
  return A;
}

inline Eigen::MatrixXd dense_scaled(const QuadraticForm& q) {
  const int n = q.size();
  const Eigen::VectorXd s = q.mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < q.stiffness.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(q.stiffness, k); it; ++it)
      A(it.row(), it.col()) = it.value() * (s(it.row()) * s(it.col()));
  return A;
}

inline SpectrumResult solve_dense(const QuadraticForm& q, int m) {
  const int n = q.size();
  const Eigen::VectorXd s = q.mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd A = dense_scaled(q);

  std::vector<double> w(n);
  Eigen::MatrixXd Z(n, m);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(std::max(m, 1)));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, A.data(), n, 0.0, 0.0, 1, m, LAPACKE_dlamch('S'), &found,
                     w.data(), Z.data(), n, support.data());
  if (info != 0 || found != m) fail(ErrorKind::solver_failure, "dsyevr failed with info " + std::to_string(info));

  SpectrumResult res;
  res.solver = SolverKind::dense;
  res.backend = "lapack";
  res.eigenvalues.assign(w.begin(), w.begin() + m);
  res.vectors = s.asDiagonal() * Z;
  return res;
}

// Full decomposition without BLAS; used when the LAPACK pairs fail the residual check.
inline SpectrumResult solve_dense_fallback(const QuadraticForm& q, int m) {
  const Eigen::VectorXd s = q.mass.cwiseSqrt().cwiseInverse();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense_scaled(q));
  if (eig.info() != Eigen::Success) fail(ErrorKind::solver_failure, "dense eigensolver failed");
  SpectrumResult res;
  res.solver = SolverKind::dense;
  res.backend = "eigen";
  for (int i = 0; i < m; ++i) res.eigenvalues.push_back(eig.eigenvalues()(i));
  res.vectors = s.asDiagonal() * eig.eigenvectors().leftCols(m);
  return res;
}

inline Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& X) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  return qr.householderQ() * Eigen::MatrixXd::Identity(X.rows(), X.cols());
}

// Shift-invert subspace iteration with Rayleigh-Ritz on A = M^{-1/2} Q M^{-1/2}.
inline SpectrumResult solve_iterative(const QuadraticForm& q, int m, const SolverOptions& opt) {
  const int n = q.size();
  const SparseMatrix A = scaled_operator(q);
  double sigma = opt.shift;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  for (int attempt = 0; attempt < 4; ++attempt) {
    SparseMatrix shifted = A;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
    ldlt.compute(shifted);
    if (ldlt.info() == Eigen::Success) break;
    sigma *= 1.37;
    if (attempt == 3) fail(ErrorKind::solver_failure, "shifted factorization failed");
  }

  const int block = std::min(n, m + std::max(8, m / 2));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd X(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = normal(rng);
  X = orthonormal_columns(X);

  const double anorm = std::max(operator_scale(q), std::abs(sigma));
  Eigen::VectorXd theta;
  bool converged = false;
  int it = 0;
  for (; it < opt.max_iterations && !converged; ++it) {
    X = orthonormal_columns(ldlt.solve(X));
    const Eigen::MatrixXd AX = A * X;
    const Eigen::MatrixXd H = X.transpose() * AX;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (H + H.transpose()));
    // order Ritz pairs by distance to the shift
    std::vector<int> order(block);
    for (int i = 0; i < block; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(eig.eigenvalues()(a) - sigma) < std::abs(eig.eigenvalues()(b) - sigma);
    });
    Eigen::MatrixXd V(block, block);
    theta.resize(block);
    for (int i = 0; i < block; ++i) {
      V.col(i) = eig.eigenvectors().col(order[i]);
      theta(i) = eig.eigenvalues()(order[i]);
    }
    X = X * V;
    const Eigen::MatrixXd R = A * X.leftCols(m) - X.leftCols(m) * theta.head(m).asDiagonal();
    converged = true;
    for (int i = 0; i < m; ++i)
      if (R.col(i).norm() > 0.1 * opt.residual_tolerance * anorm) converged = false;
  }

  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return theta(a) < theta(b); });
  SpectrumResult res;
  res.solver = SolverKind::iterative;
  res.backend = "subspace";
  res.iterations = it;
  res.vectors.resize(n, m);
  const Eigen::VectorXd s = q.mass.cwiseSqrt().cwiseInverse();
  for (int i = 0; i < m; ++i) {
    res.eigenvalues.push_back(theta(order[i]));
    res.vectors.col(i) = s.cwiseProduct(X.col(order[i]));
  }
  res.usable = converged;
  return res;
}

}  // namespace detail

/// Lowest m eigenpairs of Q x = lambda M x.
inline SpectrumResult solve_low_spectrum(const QuadraticForm& q, int m, const SolverOptions& opt = {}) {
  require(m >= 1 && m <= q.size(), "solve_low_spectrum: need 1 <= m <= dim");
  for (int i = 0; i < q.size(); ++i)
    if (!(q.mass(i) > 0.0)) fail(ErrorKind::invalid_parameter, "mass matrix must be positive");
  const SolverKind kind = resolve_solver(opt, q.size());
  SpectrumResult res = kind == SolverKind::dense ? detail::solve_dense(q, m) : detail::solve_iterative(q, m, opt);
  const bool converged = res.usable;
  detail::fill_residuals(q, res, opt.residual_tolerance);
  res.usable = res.usable && converged;
  if (kind == SolverKind::dense && !res.usable) {
    res = detail::solve_dense_fallback(q, m);
    detail::fill_residuals(q, res, opt.residual_tolerance);
  }
  res.degree = q.degree;
  res.requested = m;
  return res;
}

struct GapPolicy {
  double tau_abs = 0.3;
  double rho_min = 10.0;
  std::optional<double> fixed;  ///< count |lambda| < fixed instead of searching a gap
};

struct KernelEstimate {
  int count = 0;
  bool confident = false;
  double threshold = 0.0;     ///< geometric mean of the straddling magnitudes
  double gap_ratio = 0.0;     ///< infinite when every |lambda| exceeds tau_abs
  std::optional<double> below;
  std::optional<double> above;
};

/// Numerical kernel dimension from the low spectrum.
inline KernelEstimate kernel_dim(const SpectrumResult& s, const GapPolicy& policy = {}) {
  if (!s.usable) fail(ErrorKind::convergence_failure, "spectrum is flagged unusable");
  std::vector<double> a;
  for (double l : s.eigenvalues) a.push_back(std::abs(l));
  std::sort(a.begin(), a.end());
  const int m = static_cast<int>(a.size());
  KernelEstimate k;

  if (policy.fixed) {
    k.count = static_cast<int>(std::count_if(a.begin(), a.end(), [&](double x) { return x < *policy.fixed; }));
    if (k.count == m) fail(ErrorKind::window_too_small, "every eigenvalue in the window is below the fixed threshold");
    k.threshold = *policy.fixed;
    k.above = a[k.count];
    if (k.count > 0) k.below = a[k.count - 1];
    k.gap_ratio = k.count > 0 ? a[k.count] / std::max(a[k.count - 1], 1e-300) : std::numeric_limits<double>::infinity();
    k.confident = k.gap_ratio >= policy.rho_min;
    return k;
  }

  if (a[0] > policy.tau_abs) {
    k.count = 0;
    k.confident = true;
    k.gap_ratio = std::numeric_limits<double>::infinity();
    k.threshold = policy.tau_abs;
    k.above = a[0];
    return k;
  }
  // Largest admissible split: a near-kernel cluster may itself contain a smaller internal gap.
  const double floor = 1e-14 * std::max(a.back(), 1.0);
  int best = -1;
  double best_ratio = 0.0, max_ratio = 0.0;
  for (int i = 1; i < m; ++i) {
    if (a[i - 1] > policy.tau_abs) break;
    const double ratio = a[i] / std::max(a[i - 1], floor);
    max_ratio = std::max(max_ratio, ratio);
    if (ratio >= policy.rho_min) {
      best_ratio = ratio;
      best = i;
    }
  }
  if (best < 0)
    fail(ErrorKind::window_too_small, "no admissible spectral gap among " + std::to_string(m) +
                                          " eigenvalues (best ratio " + std::to_string(max_ratio) + ")");
  k.count = best;
  k.confident = true;
  k.gap_ratio = best_ratio;
  k.below = a[best - 1];
  k.above = a[best];
  k.threshold = std::sqrt(std::max(a[best - 1], floor) * a[best]);
  return k;
}

/// Eigenvalue window and kernel estimate for one form.
struct NumberDiagnostics {
  FormKind kind = FormKind::hodge;
  KernelEstimate estimate;
  std::vector<double> eigenvalues;
  int window = 0;
  SolverKind solver = SolverKind::dense;
  double max_residual = 0.0;
};

struct InvariantOptions {
  SolverOptions solver;
  GapPolicy policy;
  int window = 0;       ///< 0 selects max(24, 3 * expected + 8)
  bool strict = true;   ///< throw OracleMismatch instead of recording it
};

inline int default_window(int expected, int dim) { return std::min(dim, std::max(24, 3 * expected + 8)); }

/// Solves one form and estimates its kernel, widening the window when it is too small.
inline NumberDiagnostics form_kernel(const QuadraticForm& q, int expected, const InvariantOptions& opt) {
  int m = opt.window > 0 ? std::min(opt.window, q.size()) : default_window(expected, q.size());
  for (int attempt = 0;; ++attempt) {
    const SpectrumResult s = solve_low_spectrum(q, m, opt.solver);
    try {
      NumberDiagnostics d;
      d.kind = q.kind;
      d.estimate = kernel_dim(s, opt.policy);
      d.eigenvalues = s.eigenvalues;
      d.window = m;
      d.solver = s.solver;
      for (double r : s.residuals) d.max_residual = std::max(d.max_residual, r);
      if (d.estimate.count == m) fail(ErrorKind::window_too_small, "kernel fills the window");
      return d;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::window_too_small || opt.window > 0 || attempt >= 2 || m >= q.size()) throw;
      m = std::min(q.size(), 2 * m);
    }
  }
}

inline std::string describe(const CurvatureMode& mode) {
  return mode.is_constant() ? "constant" : "vertex_defect";
}

struct InvariantReport {
  std::string recipe;
  json params = json::object();
  int degree = 0;
  std::string curvature_mode;
  double curvature_constant = 0.0;
  int betti_oracle = 0;
  int betti = 0;
  int tachibana = 0;
  int killing = 0;
  int planar = 0;
  NumberDiagnostics hodge, ck, kill, plan;
  bool oracle_ok = true;

  bool confident() const {
    return hodge.estimate.confident && ck.estimate.confident && kill.estimate.confident && plan.estimate.confident;
  }
};

/// b_r, t_r, k_r, p_r as kernel dimensions, with b_r cross-checked against exact homology.
inline InvariantReport invariant_numbers(const MetricComplex& mc, int r, const InvariantOptions& opt = {}) {
  require(r >= 1 && r <= mc.dimension() - 1, "invariant_numbers: degree must be in 1..n-1");
  InvariantReport rep;
  rep.degree = r;
  rep.curvature_mode = describe(mc.curvature);
  rep.curvature_constant = mc.curvature.value;
  rep.betti_oracle = homology_ranks(mc.K())[r];

  rep.hodge = form_kernel(hodge_form(mc, r), rep.betti_oracle, opt);
  rep.betti = rep.hodge.estimate.count;
  rep.oracle_ok = rep.betti == rep.betti_oracle;
  if (!rep.oracle_ok && opt.strict)
    fail(ErrorKind::oracle_mismatch, "spectral b_" + std::to_string(r) + " = " + std::to_string(rep.betti) +
                                         " but exact homology gives " + std::to_string(rep.betti_oracle));

  rep.ck = form_kernel(ck_form(mc, r), rep.betti_oracle, opt);
  rep.tachibana = rep.ck.estimate.count;
  rep.kill = form_kernel(killing_form(mc, r), rep.tachibana, opt);
  rep.killing = rep.kill.estimate.count;
  rep.plan = form_kernel(planar_form(mc, r), rep.tachibana, opt);
  rep.planar = rep.plan.estimate.count;
  return rep;
}

inline InvariantReport invariant_numbers(const Mesh& mesh, const MetricComplex& mc, int r,
                                         const InvariantOptions& opt = {}) {
  InvariantReport rep = invariant_numbers(mc, r, opt);
  rep.recipe = mesh.recipe.name;
  rep.params = mesh.recipe.params;
  return rep;
}

inline json to_json(const KernelEstimate& k) {
  json j;
  j["count"] = k.count;
  j["confident"] = k.confident;
  j["threshold"] = k.threshold;
  j["gap_ratio"] = std::isfinite(k.gap_ratio) ? json(k.gap_ratio) : json();
  j["below"] = k.below ? json(*k.below) : json();
  j["above"] = k.above ? json(*k.above) : json();
  return j;
}

inline json to_json(const NumberDiagnostics& d) {
  json j = to_json(d.estimate);
  j["form"] = std::string(to_string(d.kind));
  j["eigenvalues"] = d.eigenvalues;
  j["window"] = d.window;
  j["solver"] = std::string(to_string(d.solver));
  j["max_residual"] = d.max_residual;
  return j;
}

/// Report JSON; diagnostics at the top level describe the conformal Killing form.
inline json to_json(const InvariantReport& rep, const InvariantOptions& opt = {}) {
  json j;
  j["mesh"] = {{"recipe", rep.recipe}, {"params", rep.params}};
  j["degree"] = rep.degree;
  j["numbers"] = {{"betti", rep.betti}, {"tachibana", rep.tachibana}, {"killing", rep.killing}, {"planar", rep.planar}};
  json diag;
  diag["eigenvalues"] = rep.ck.eigenvalues;
  diag["threshold"] = rep.ck.estimate.threshold;
  diag["gap_ratio"] = std::isfinite(rep.ck.estimate.gap_ratio) ? json(rep.ck.estimate.gap_ratio) : json();
  diag["solver"] = std::string(to_string(rep.ck.solver));
  diag["units"] = "eigenvalues of (Q, M) without area normalization";
  diag["curvature"] = {{"mode", rep.curvature_mode}, {"constant", rep.curvature_constant}};
  diag["policy"] = {{"tau_abs", opt.policy.tau_abs}, {"rho_min", opt.policy.rho_min},
                    {"fixed", opt.policy.fixed ? json(*opt.policy.fixed) : json()}};
  diag["solver_settings"] = {{"seed", opt.solver.seed},
                             {"dense_limit", opt.solver.dense_limit},
                             {"residual_tolerance", opt.solver.residual_tolerance}};
  diag["per_number"] = {{"betti", to_json(rep.hodge)},
                        {"tachibana", to_json(rep.ck)},
                        {"killing", to_json(rep.kill)},
                        {"planar", to_json(rep.plan)}};
  j["diagnostics"] = std::move(diag);
  j["checks"] = {{"betti_oracle", rep.oracle_ok ? "ok" : "mismatch"}, {"betti_exact", rep.betti_oracle},
                 {"confident", rep.confident()}};
  return j;
}

/// M-orthogonal split of a cochain into exact, coexact and harmonic parts.
struct HodgeParts {
  Eigen::VectorXd exact;
  Eigen::VectorXd coexact;
  Eigen::VectorXd harmonic;
};

namespace detail {

inline Eigen::VectorXd cg_solve(const SparseMatrix& A, const Eigen::VectorXd& b) {
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-15);
  cg.setMaxIterations(std::max<int>(1000, 20 * static_cast<int>(A.rows())));
  cg.compute(A);
  Eigen::VectorXd x = cg.solve(b);
  if (cg.info() == Eigen::NumericalIssue) fail(ErrorKind::solver_failure, "normal equations solve failed");
  return x;
}

}  // namespace detail

inline HodgeParts hodge_decompose(const MetricComplex& mc, int r, const Eigen::VectorXd& w) {
  const int n = mc.dimension();
  require(r >= 0 && r <= n, "hodge_decompose: degree out of range");
  require(w.size() == mc.count(r), "hodge_decompose: cochain length mismatch");
  HodgeParts parts;
  const Eigen::VectorXd& Mr = mc.mass[r];
  parts.exact = Eigen::VectorXd::Zero(w.size());
  parts.coexact = Eigen::VectorXd::Zero(w.size());
  if (r >= 1) {
    // min |w - d a|_M  ->  d^T M d a = d^T M w
    const SparseMatrix d = coboundary(mc, r - 1);
    const SparseMatrix L = SparseMatrix(d.transpose()) * Mr.asDiagonal() * d;
    const Eigen::VectorXd a = detail::cg_solve(L, d.transpose() * Mr.cwiseProduct(w));
    parts.exact = d * a;
  }
  if (r < n) {
    // coexact = M^{-1} d^T g with d M^{-1} d^T g = d w
    const SparseMatrix d = coboundary(mc, r);
    const SparseMatrix L = d * Mr.cwiseInverse().asDiagonal() * SparseMatrix(d.transpose());
    const Eigen::VectorXd g = detail::cg_solve(L, d * w);
    parts.coexact = Mr.cwiseInverse().cwiseProduct(d.transpose() * g);
  }
  parts.harmonic = w - parts.exact - parts.coexact;
  return parts;
}

inline double mass_inner(const Eigen::VectorXd& M, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(M.cwiseProduct(b));
}

/// One row of a refinement study.
struct ConvergenceRow {
  int level = 0;
  int vertices = 0;
  int edges = 0;
  int b = 0, t = 0, k = 0, p = 0;
  std::optional<double> kernel_max_abs_eig;
  std::optional<double> first_nonkernel_eig;
  double runtime_seconds = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  bool integers_stable = true;
  bool cluster_decreasing = true;
};

/// Mesh for `level` of a recipe: subdivision level, or grid size for the tori.
inline Mesh mesh_at_level(const std::string& recipe, int level, const json& extra = json::object()) {
  json params = extra.is_object() ? extra : json::object();
  if (recipe == "flat_torus2" || recipe == "warped_torus") {
    params["p"] = level;
    params["q"] = level;
  } else if (recipe == "flat_torus3") {
    params["p"] = level;
  } else {
    params["level"] = level;
  }
  return generate(recipe, params);
}

inline ConvergenceStudy convergence_study(const std::string& recipe, const std::vector<int>& levels, int r,
                                          const InvariantOptions& opt = {}, const json& extra = json::object()) {
  require(levels.size() >= 2, "convergence_study: at least two levels required");
  ConvergenceStudy study;
  for (int level : levels) {
    const auto start = std::chrono::steady_clock::now();
    const Mesh mesh = mesh_at_level(recipe, level, extra);
    const MetricComplex mc = build_metric(mesh);
    const InvariantReport rep = invariant_numbers(mc, r, opt);
    ConvergenceRow row;
    row.level = level;
    row.vertices = mesh.K().count(0);
    row.edges = mesh.K().count(1);
    row.b = rep.betti;
    row.t = rep.tachibana;
    row.k = rep.killing;
    row.p = rep.planar;
    if (rep.tachibana > 0) row.kernel_max_abs_eig = rep.ck.estimate.below;
    row.first_nonkernel_eig = rep.ck.estimate.above;
    row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!study.rows.empty()) {
      const auto& prev = study.rows.back();
      if (rep.confident() && (prev.b != row.b || prev.t != row.t || prev.k != row.k || prev.p != row.p))
        study.integers_stable = false;
      if (prev.kernel_max_abs_eig && row.kernel_max_abs_eig && !(*row.kernel_max_abs_eig < *prev.kernel_max_abs_eig))
        study.cluster_decreasing = false;
    }
    study.rows.push_back(row);
  }
  return study;
}

}  // namespace tachibana
