#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "spectra.hpp"

namespace tachibana {

/// One pass/fail record of a verification suite.
struct CheckRecord {
  std::string name;
  std::string recipe;
  json params = json::object();
  bool passed = false;
  std::string expected;
  std::string observed;
  json diagnostics = json::object();
};

struct SuiteReport {
  std::string name;
  std::vector<CheckRecord> checks;
  std::uint64_t seed = 0;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.passed; });
  }
};

struct SuiteConfig {
  InvariantOptions options;
  double amplitude = 0.1;  ///< conformal rescale amplitude, max |f|
  std::uint64_t seed = 20240607;
  int random_cochains = 100;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"duality", "decomposition", "vanishing", "conformal",
                                              "inclusion", "hodge",        "existence"};
  return names;
}

namespace detail {

struct Outcome {
  std::optional<InvariantReport> report;
  std::string error;
};

inline Outcome try_numbers(const Mesh& mesh, const MetricComplex& mc, int r, const InvariantOptions& opt) {
  try {
    return {invariant_numbers(mesh, mc, r, opt), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

inline std::string tuple_string(const InvariantReport& rep) {
  return "(b, t, k, p) = (" + std::to_string(rep.betti) + ", " + std::to_string(rep.tachibana) + ", " +
         std::to_string(rep.killing) + ", " + std::to_string(rep.planar) + ")";
}

inline CheckRecord record(std::string name, const Mesh& mesh, bool passed, std::string expected, std::string observed,
                          json diagnostics = json::object()) {
  return {std::move(name), mesh.recipe.name, mesh.recipe.params, passed, std::move(expected), std::move(observed),
          std::move(diagnostics)};
}

inline CheckRecord failed_run(std::string name, const Mesh& mesh, std::string expected, const std::string& error) {
  return record(std::move(name), mesh, false, std::move(expected), "error: " + error);
}

inline std::string degree_tag(int r) { return "r=" + std::to_string(r); }

// Smooth test function on an embedded sphere, scaled so that max |f| = amplitude.
inline std::vector<double> rescale_function(const Mesh& mesh, double amplitude) {
  std::vector<double> f(mesh.vertices.size());
  double peak = 0.0;
  for (std::size_t v = 0; v < f.size(); ++v) {
    const auto& x = mesh.vertices[v];
    f[v] = x[0] * x[1] + x[2];
    peak = std::max(peak, std::abs(f[v]));
  }
  for (double& value : f) value *= amplitude / peak;
  return f;
}

inline Eigen::VectorXd random_cochain(int size, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd w(size);
  for (int i = 0; i < size; ++i) w(i) = normal(rng);
  return w;
}

}  // namespace detail

/// t_r = t_{n-r} and k_r = p_{n-r} on the 3-dimensional acceptance manifolds, plus b_r = b_{n-r}.
inline SuiteReport duality_suite(const SuiteConfig& cfg) {
  SuiteReport rep{"duality", {}, cfg.seed};
  for (const Mesh& mesh : {flat_torus3(6), sphere3(0)}) {
    const MetricComplex mc = build_metric(mesh);
    const auto b = homology_ranks(mesh.K());
    rep.checks.push_back(detail::record("betti duality", mesh, b[0] == b[3] && b[1] == b[2], "b_r = b_{3-r}",
                                        "b = (" + std::to_string(b[0]) + ", " + std::to_string(b[1]) + ", " +
                                            std::to_string(b[2]) + ", " + std::to_string(b[3]) + ")"));
    const auto one = detail::try_numbers(mesh, mc, 1, cfg.options);
    const auto two = detail::try_numbers(mesh, mc, 2, cfg.options);
    if (!one.report || !two.report) {
      rep.checks.push_back(detail::failed_run("t_1 = t_2, k_1 = p_2, p_1 = k_2", mesh, "both degrees resolved",
                                              one.report ? two.error : one.error));
      continue;
    }
    const auto& a = *one.report;
    const auto& c = *two.report;
    const bool ok = a.tachibana == c.tachibana && a.killing == c.planar && a.planar == c.killing;
    rep.checks.push_back(detail::record("t_1 = t_2, k_1 = p_2, p_1 = k_2", mesh, ok, "dual numbers agree",
                                        "r=1 " + detail::tuple_string(a) + "; r=2 " + detail::tuple_string(c),
                                        {{"r1", to_json(a, cfg.options)}, {"r2", to_json(c, cfg.options)}}));
  }
  return rep;
}

/// t = k + p under constant positive curvature; the flat torus must violate it.
inline SuiteReport decomposition_suite(const SuiteConfig& cfg) {
  SuiteReport rep{"decomposition", {}, cfg.seed};
  struct Case {
    Mesh mesh;
    int r;
    bool split;  ///< expect t = k + p, otherwise expect t < k + p
  };
  const std::vector<Case> cases{{icosphere(3), 1, true}, {sphere3(0), 1, true}, {flat_torus2(16, 16), 1, false}};
  for (const auto& c : cases) {
    const MetricComplex mc = build_metric(c.mesh);
    const auto out = detail::try_numbers(c.mesh, mc, c.r, cfg.options);
    const std::string name = (c.split ? "t = k + p " : "t < k + p ") + detail::degree_tag(c.r);
    if (!out.report) {
      rep.checks.push_back(detail::failed_run(name, c.mesh, c.split ? "t = k + p" : "t < k + p", out.error));
      continue;
    }
    const auto& n = *out.report;
    const bool ok = n.confident() && (c.split ? n.tachibana == n.killing + n.planar : n.tachibana < n.killing + n.planar);
    rep.checks.push_back(detail::record(name, c.mesh, ok, c.split ? "t = k + p" : "t < k + p",
                                        detail::tuple_string(n), to_json(n, cfg.options)));
  }
  return rep;
}

/// No conformal Killing 1-forms under negative curvature, while b_1 = 4.
inline SuiteReport vanishing_suite(const SuiteConfig& cfg) {
  SuiteReport rep{"vanishing", {}, cfg.seed};
  const Mesh mesh = hyperbolic_genus2(2);
  const MetricComplex mc = build_metric(mesh);
  const auto out = detail::try_numbers(mesh, mc, 1, cfg.options);
  if (!out.report) {
    rep.checks.push_back(detail::failed_run("t_1 = 0 with b_1 = 4", mesh, "t_1 = 0", out.error));
    return rep;
  }
  const auto& n = *out.report;
  const double lowest = *std::min_element(n.ck.eigenvalues.begin(), n.ck.eigenvalues.end());
  rep.checks.push_back(detail::record("t_1 = 0 with b_1 = 4", mesh, n.tachibana == 0 && n.betti == 4, "t_1 = 0, b_1 = 4",
                                      detail::tuple_string(n), to_json(n, cfg.options)));
  rep.checks.push_back(detail::record("ck spectrum bounded below", mesh, lowest >= 0.35, "lambda_min >= 0.35",
                                      "lambda_min = " + std::to_string(lowest)));
  return rep;
}

/// t_1 unchanged by a conformal rescale of the icosphere metric (vertex-defect curvature).
inline SuiteReport conformal_suite(const SuiteConfig& cfg) {
  SuiteReport rep{"conformal", {}, cfg.seed};
  const Mesh mesh = icosphere(3);
  const MetricComplex before = build_metric(mesh, CurvatureMode::vertex_defect());
  const auto f = detail::rescale_function(mesh, cfg.amplitude);
  const MetricComplex after = conformal_rescale(before, f);
  const auto a = detail::try_numbers(mesh, before, 1, cfg.options);
  const auto b = detail::try_numbers(mesh, after, 1, cfg.options);
  if (!a.report || !b.report) {
    rep.checks.push_back(detail::failed_run("t_1 invariant", mesh, "t_1 before = after", a.report ? b.error : a.error));
    return rep;
  }
  const bool ok = a.report->tachibana == b.report->tachibana && a.report->confident() && b.report->confident();
  rep.checks.push_back(detail::record("t_1 invariant", mesh, ok, "t_1 before = after",
                                      std::to_string(a.report->tachibana) + " -> " + std::to_string(b.report->tachibana),
                                      {{"amplitude", cfg.amplitude},
                                       {"before", to_json(*a.report, cfg.options)},
                                       {"after", to_json(*b.report, cfg.options)}}));
  return rep;
}

/// Killing and planar kernels lie inside the conformal Killing kernel and are co-closed / closed.
inline SuiteReport inclusion_suite(const SuiteConfig& cfg) {
  SuiteReport rep{"inclusion", {}, cfg.seed};
  std::vector<double> warp(24);
  for (int i = 0; i < 24; ++i) warp[i] = 1.0 + 0.3 * std::cos(2.0 * std::numbers::pi * i / 24.0);
  const std::vector<Mesh> meshes{icosphere(3), flat_torus2(16, 16), hyperbolic_genus2(2), warped_torus(24, 24, warp)};
  for (const Mesh& mesh : meshes) {
    const MetricComplex mc = build_metric(mesh);
    const auto out = detail::try_numbers(mesh, mc, 1, cfg.options);
    if (!out.report) {
      rep.checks.push_back(detail::failed_run("t >= k, t >= p", mesh, "t >= max(k, p)", out.error));
      continue;
    }
    const auto& n = *out.report;
    rep.checks.push_back(detail::record("t >= k, t >= p", mesh, n.tachibana >= n.killing && n.tachibana >= n.planar,
                                        "t >= max(k, p)", detail::tuple_string(n)));

    // Kernel vectors of Q_K and Q_P measured against Q_T and against d, delta.
    const QuadraticForm ck = ck_form(mc, 1);
    const double bound = std::max(n.ck.estimate.threshold, 1e-12);
    auto inside = [&](const QuadraticForm& q, int count, bool closed) {
      if (count == 0) return std::pair{true, 0.0};
      const SpectrumResult s = solve_low_spectrum(q, std::min(q.size(), count + 4), cfg.options.solver);
      double worst = 0.0;
      bool ok = true;
      for (int j = 0; j < count; ++j) {
        const Eigen::VectorXd x = s.vectors.col(j);
        const double norm = q.mass_norm2(x);
        const double inner = ck.energy(x) / norm;
        double side;
        if (closed) {
          const Eigen::VectorXd dx = coboundary(mc, 1) * x;
          side = dx.dot(mc.mass[2].cwiseProduct(dx)) / norm;
        } else {
          const Eigen::VectorXd sx = codifferential(mc, 1) * x;
          side = sx.dot(mc.mass[0].cwiseProduct(sx)) / norm;
        }
        worst = std::max({worst, std::abs(inner), side});
        ok = ok && std::abs(inner) <= bound && side <= bound;
      }
      return std::pair{ok, worst};
    };
    const auto [kill_ok, kill_worst] = inside(killing_form(mc, 1), n.killing, false);
    rep.checks.push_back(detail::record("Killing kernel inside ck kernel, co-closed", mesh, kill_ok,
                                        "Rayleigh <= " + std::to_string(bound), "max " + std::to_string(kill_worst)));
    const auto [plan_ok, plan_worst] = inside(planar_form(mc, 1), n.planar, true);
    rep.checks.push_back(detail::record("planar kernel inside ck kernel, closed", mesh, plan_ok,
                                        "Rayleigh <= " + std::to_string(bound), "max " + std::to_string(plan_worst)));
  }
  return rep;
}

/// Spectral Betti numbers against exact homology in every degree, and Hodge decomposition checks.
inline SuiteReport hodge_suite(const SuiteConfig& cfg) {
  SuiteReport rep{"hodge", {}, cfg.seed};
  std::vector<Mesh> meshes;
  for (int l = 0; l <= 3; ++l) meshes.push_back(icosphere(l));
  for (int p : {8, 16, 24}) meshes.push_back(flat_torus2(p, p));
  for (int p : {12, 24}) {
    std::vector<double> warp(p);
    for (int i = 0; i < p; ++i) warp[i] = 1.0 + 0.3 * std::cos(2.0 * std::numbers::pi * i / p);
    meshes.push_back(warped_torus(p, p, warp));
  }
  for (int l = 1; l <= 2; ++l) meshes.push_back(hyperbolic_genus2(l));
  for (int p : {3, 4, 6}) meshes.push_back(flat_torus3(p));
  meshes.push_back(sphere3(0));

  for (const Mesh& mesh : meshes) {
    const MetricComplex mc = build_metric(mesh);
    const auto exact = homology_ranks(mesh.K());
    std::vector<int> spectral;
    std::string error;
    for (int r = 0; r <= mc.dimension() && error.empty(); ++r) {
      try {
        spectral.push_back(form_kernel(hodge_form(mc, r), exact[r], cfg.options).estimate.count);
      } catch (const Error& e) {
        error = e.what();
      }
    }
    auto show = [](const std::vector<int>& v) {
      std::string s = "(";
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
      return s + ")";
    };
    if (!error.empty())
      rep.checks.push_back(detail::failed_run("spectral Betti numbers", mesh, show(exact), error));
    else
      rep.checks.push_back(detail::record("spectral Betti numbers", mesh, spectral == exact, show(exact), show(spectral)));
  }

  std::mt19937_64 rng(cfg.seed);
  for (const Mesh& mesh : {icosphere(3), flat_torus2(16, 16)}) {
    const MetricComplex mc = build_metric(mesh);
    const Eigen::VectorXd& M = mc.mass[1];
    double worst_orth = 0.0, harmonic_ratio = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Eigen::VectorXd w = detail::random_cochain(mc.count(1), rng);
      const HodgeParts h = hodge_decompose(mc, 1, w);
      const double scale = mass_inner(M, w, w);
      worst_orth = std::max({worst_orth, std::abs(mass_inner(M, h.exact, h.coexact)) / scale,
                             std::abs(mass_inner(M, h.exact, h.harmonic)) / scale,
                             std::abs(mass_inner(M, h.coexact, h.harmonic)) / scale});
      harmonic_ratio = std::max(harmonic_ratio, std::sqrt(mass_inner(M, h.harmonic, h.harmonic) / scale));
    }
    rep.checks.push_back(detail::record("decomposition orthogonality", mesh, worst_orth <= 1e-9, "<= 1e-9",
                                        std::to_string(worst_orth)));
    const bool spherical = mesh.recipe.name == "icosphere";
    rep.checks.push_back(detail::record(spherical ? "harmonic part vanishes" : "harmonic part present", mesh,
                                        spherical ? harmonic_ratio <= 1e-8 : harmonic_ratio > 1e-3,
                                        spherical ? "|h| <= 1e-8 |w|" : "|h| > 1e-3 |w|", std::to_string(harmonic_ratio)));
  }
  return rep;
}

/// Conformal Killing forms exist on spheres, and the warped torus carries a planar 1-form.
inline SuiteReport existence_suite(const SuiteConfig& cfg) {
  SuiteReport rep{"existence", {}, cfg.seed};
  struct Case {
    Mesh mesh;
    int r;
  };
  const std::vector<Case> cases{{icosphere(3), 1}, {sphere3(0), 1}, {sphere3(0), 2}};
  for (const auto& c : cases) {
    const MetricComplex mc = build_metric(c.mesh);
    const auto out = detail::try_numbers(c.mesh, mc, c.r, cfg.options);
    const std::string name = "t_r > 0 " + detail::degree_tag(c.r);
    if (!out.report) {
      rep.checks.push_back(detail::failed_run(name, c.mesh, "t_r > 0", out.error));
      continue;
    }
    rep.checks.push_back(detail::record(name, c.mesh, out.report->tachibana > 0 && out.report->confident(), "t_r > 0",
                                        detail::tuple_string(*out.report)));
  }

  std::vector<double> previous;
  for (int p : {24, 48}) {
    std::vector<double> warp(p);
    for (int i = 0; i < p; ++i) warp[i] = 1.0 + 0.3 * std::cos(2.0 * std::numbers::pi * i / p);
    const Mesh mesh = warped_torus(p, p, warp);
    const MetricComplex mc = build_metric(mesh);
    const double res = std::abs(residual(planar_form(mc, 1), warped_concircular(mesh)));
    const bool ok = res <= 0.1 && (previous.empty() || res < previous.back());
    rep.checks.push_back(detail::record("concircular form residual", mesh, ok,
                                        previous.empty() ? "<= 0.1" : "< " + std::to_string(previous.back()),
                                        std::to_string(res)));
    previous.push_back(res);
    if (p == 24) {
      const auto out = detail::try_numbers(mesh, mc, 1, cfg.options);
      if (!out.report)
        rep.checks.push_back(detail::failed_run("p_1 >= 1", mesh, "p_1 >= 1", out.error));
      else
        rep.checks.push_back(detail::record("p_1 >= 1", mesh, out.report->planar >= 1 && out.report->confident(),
                                            "p_1 >= 1", detail::tuple_string(*out.report)));
    }
  }
  return rep;
}

inline SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg = {}) {
  if (name == "duality") return duality_suite(cfg);
  if (name == "decomposition") return decomposition_suite(cfg);
  if (name == "vanishing") return vanishing_suite(cfg);
  if (name == "conformal") return conformal_suite(cfg);
  if (name == "inclusion") return inclusion_suite(cfg);
  if (name == "hodge") return hodge_suite(cfg);
  if (name == "existence") return existence_suite(cfg);
  fail(ErrorKind::invalid_parameter, "unknown suite '" + name + "'");
}

inline json to_json(const SuiteReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name},
                      {"recipe", c.recipe},
                      {"params", c.params},
                      {"passed", c.passed},
                      {"expected", c.expected},
                      {"observed", c.observed},
                      {"diagnostics", c.diagnostics}});
  return {{"suite", rep.name}, {"seed", rep.seed}, {"passed", rep.passed()}, {"checks", checks}};
}

}  // namespace tachibana
