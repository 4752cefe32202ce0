// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <tachibana/analytic.hpp>
#include <tachibana/blas_runtime.hpp>
#include <tachibana/spectra.hpp>
#include <tachibana/suites.hpp>

using namespace tachibana;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = true;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::vector<InvariantReport> every_run;  // for the monotonicity check

std::string tuple(const InvariantReport& r) {
  return "(" + std::to_string(r.betti) + "," + std::to_string(r.tachibana) + "," + std::to_string(r.killing) + "," +
         std::to_string(r.planar) + ")";
}

std::string num(double v, const char* fmt = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::optional<InvariantReport> numbers(Outcome& out, const std::string& label, const Mesh& mesh,
                                       const MetricComplex& mc, int r) {
  try {
    InvariantReport rep = invariant_numbers(mesh, mc, r);
    every_run.push_back(rep);
    return rep;
  } catch (const Error& e) {
    out.expect(false, label + " r=" + std::to_string(r) + " (" + e.what() + ")");
    return std::nullopt;
  }
}

double min_ratio(const InvariantReport& r) {
  return std::min({r.hodge.estimate.gap_ratio, r.ck.estimate.gap_ratio, r.kill.estimate.gap_ratio,
                   r.plan.estimate.gap_ratio});
}

std::vector<double> cosine_warp(int p, double a) {
  std::vector<double> w(p);
  for (int i = 0; i < p; ++i) w[i] = 1.0 + a * std::cos(2.0 * std::numbers::pi * i / p);
  return w;
}

Outcome betti_oracle() {
  Outcome out;
  std::vector<std::pair<std::string, std::function<Mesh()>>> meshes;
  for (int l = 0; l <= 3; ++l) meshes.push_back({"icosphere " + std::to_string(l), [l] { return icosphere(l); }});
  for (int p : {8, 16, 24}) meshes.push_back({"flat_torus2 " + std::to_string(p), [p] { return flat_torus2(p, p); }});
  for (int p : {12, 24})
    meshes.push_back({"warped_torus " + std::to_string(p), [p] { return warped_torus(p, p, cosine_warp(p, 0.3)); }});
  for (int l = 1; l <= 2; ++l)
    meshes.push_back({"hyperbolic_genus2 " + std::to_string(l), [l] { return hyperbolic_genus2(l); }});
  for (int p = 3; p <= 6; ++p) meshes.push_back({"flat_torus3 " + std::to_string(p), [p] { return flat_torus3(p); }});
  meshes.push_back({"sphere3 0", [] { return sphere3(0); }});
  int checked = 0;
  for (const auto& [label, make] : meshes) {
    const Mesh mesh = make();
    const MetricComplex mc = build_metric(mesh);
    const auto exact = homology_ranks(mesh.K());
    for (int r = 0; r <= mc.dimension(); ++r) {
      try {
        const int b = form_kernel(hodge_form(mc, r), exact[r], {}).estimate.count;
        out.expect(b == exact[r], label + " b_" + std::to_string(r) + " = " + std::to_string(b) + " vs " +
                                      std::to_string(exact[r]));
      } catch (const Error& e) {
        out.expect(false, label + " b_" + std::to_string(r) + " (" + e.what() + ")");
      }
      ++checked;
    }
  }
  out.note(std::to_string(meshes.size()) + " meshes, " + std::to_string(checked) + " degrees");
  return out;
}

Outcome sphere_invariants() {
  Outcome out;
  const Mesh mesh = icosphere(3);
  const MetricComplex mc = build_metric(mesh);
  if (auto r = numbers(out, "icosphere 3", mesh, mc, 1)) {
    out.expect(r->betti == 0 && r->tachibana == 6 && r->killing == 3 && r->planar == 3, "(b,t,k,p) = (0,6,3,3)");
    out.expect(min_ratio(*r) >= 10.0, "gap ratio >= 10");
    out.expect(r->tachibana == r->killing + r->planar, "t = k + p");
    out.note("(b,t,k,p) = " + tuple(*r) + ", min gap ratio " + num(min_ratio(*r)));
  }
  return out;
}

Outcome flat_counterexample() {
  Outcome out;
  const Mesh mesh = flat_torus2(16, 16);
  const MetricComplex mc = build_metric(mesh);
  if (auto r = numbers(out, "flat_torus2 16", mesh, mc, 1)) {
    out.expect(r->betti == 2 && r->tachibana == 2 && r->killing == 2 && r->planar == 2, "(b,t,k,p) = (2,2,2,2)");
    out.expect(r->tachibana != r->killing + r->planar, "t != k + p");
    out.note("(b,t,k,p) = " + tuple(*r));
  }
  return out;
}

Outcome vanishing() {
  Outcome out;
  const Mesh mesh = hyperbolic_genus2(2);
  const MetricComplex mc = build_metric(mesh, CurvatureMode::constant(-1.0));
  if (auto r = numbers(out, "hyperbolic_genus2 2", mesh, mc, 1)) {
    const double lowest = *std::min_element(r->ck.eigenvalues.begin(), r->ck.eigenvalues.end());
    out.expect(r->tachibana == 0, "t_1 = 0");
    out.expect(r->betti == 4, "b_1 = 4");
    out.expect(lowest >= 0.35, "lambda_min >= 0.35");
    out.note("t_1 = " + std::to_string(r->tachibana) + ", b_1 = " + std::to_string(r->betti) + ", lambda_min = " +
             num(lowest, "%.4f"));
  }
  return out;
}

Outcome duality() {
  Outcome out;
  struct Case {
    std::string label;
    Mesh mesh;
    int t, k1, p1;
    bool split;  ///< t_r = k_r + p_r expected
  };
  for (const auto& c :
       {Case{"flat_torus3 6", flat_torus3(6), 3, 3, 3, false}, Case{"sphere3 0", sphere3(0), 10, 6, 4, true}}) {
    const MetricComplex mc = build_metric(c.mesh);
    const auto one = numbers(out, c.label, c.mesh, mc, 1);
    const auto two = numbers(out, c.label, c.mesh, mc, 2);
    if (one) {
      out.expect(one->tachibana == c.t && one->killing == c.k1 && one->planar == c.p1, c.label + " degree 1 values");
      out.expect(!c.split || one->tachibana == one->killing + one->planar, c.label + " t_1 = k_1 + p_1");
      out.note(c.label + " r=1 " + tuple(*one));
    }
    if (two) {
      out.expect(two->tachibana == c.t && two->killing == c.p1 && two->planar == c.k1, c.label + " degree 2 values");
      out.expect(!c.split || two->tachibana == two->killing + two->planar, c.label + " t_2 = k_2 + p_2");
      out.note(c.label + " r=2 " + tuple(*two));
    }
  }
  return out;
}

Outcome conformal() {
  Outcome out;
  const Mesh mesh = icosphere(3);
  const MetricComplex before = build_metric(mesh, CurvatureMode::vertex_defect());
  const MetricComplex after = conformal_rescale(before, detail::rescale_function(mesh, 0.1));
  const auto a = numbers(out, "icosphere 3 defect", mesh, before, 1);
  const auto b = numbers(out, "icosphere 3 rescaled", mesh, after, 1);
  if (a && b) {
    out.expect(a->tachibana == 6 && b->tachibana == 6, "t_1 = 6 before and after");
    out.note("t_1 " + std::to_string(a->tachibana) + " -> " + std::to_string(b->tachibana) + ", gap ratios " +
             num(a->ck.estimate.gap_ratio) + " / " + num(b->ck.estimate.gap_ratio));
  }
  return out;
}

Outcome warped_existence() {
  Outcome out;
  double res24 = 0.0, res48 = 0.0;
  for (int p : {24, 48}) {
    const Mesh mesh = warped_torus(p, p, cosine_warp(p, 0.3));
    const MetricComplex mc = build_metric(mesh);
    const double res = std::abs(residual(planar_form(mc, 1), warped_concircular(mesh)));
    (p == 24 ? res24 : res48) = res;
    if (p == 24)
      if (auto r = numbers(out, "warped_torus 24", mesh, mc, 1)) {
        out.expect(r->planar >= 1, "p_1 >= 1");
        out.note("p_1 = " + std::to_string(r->planar));
      }
  }
  out.expect(res24 <= 0.1, "residual(24) <= 0.1");
  out.expect(res48 < res24, "residual(48) < residual(24)");
  out.note("|residual| 24: " + num(res24) + ", 48: " + num(res48));
  return out;
}

Outcome analytic_families() {
  Outcome out;
  struct Case {
    std::string label;
    Mesh mesh;
    int n, r, k, p;
  };
  for (const auto& c : {Case{"icosphere 2", icosphere(2), 2, 1, 3, 3}, Case{"sphere3 0", sphere3(0), 3, 1, 6, 4}}) {
    const MetricComplex mc = build_metric(c.mesh);
    const auto ks = sample_family(ambient_killing_family(c.n, c.r), c.mesh);
    const auto ps = sample_family(ambient_planar_family(c.n, c.r), c.mesh);
    auto all = ks;
    all.insert(all.end(), ps.begin(), ps.end());
    const int rk = family_rank(ks, mc.mass[c.r]), rp = family_rank(ps, mc.mass[c.r]), ru = family_rank(all, mc.mass[c.r]);
    out.expect(rk == c.k && rp == c.p && ru == c.k + c.p, c.label + " ranks");
    out.note(c.label + " ranks (" + std::to_string(rk) + "," + std::to_string(rp) + "," + std::to_string(ru) + ")");
  }
  // finest levels of the sphere generators used here
  struct Fine {
    std::string label;
    Mesh mesh;
    int n;
  };
  for (const auto& f : {Fine{"icosphere 3", icosphere(3), 2}, Fine{"sphere3 1", sphere3(1), 3}}) {
    const MetricComplex mc = build_metric(f.mesh);
    const QuadraticForm ck = ck_form(mc, 1);
    double worst = 0.0;
    for (const auto& family : {ambient_killing_family(f.n, 1), ambient_planar_family(f.n, 1)})
      for (const auto& w : sample_family(family, f.mesh)) worst = std::max(worst, residual(ck, w));
    out.expect(worst <= 0.05, f.label + " ck residual <= 0.05");
    out.note(f.label + " max ck residual " + num(worst));
  }
  return out;
}

Outcome structural() {
  Outcome out;
  std::mt19937_64 rng(20240607);
  const std::vector<Mesh> meshes{icosphere(3), flat_torus2(16, 16), hyperbolic_genus2(2), flat_torus3(4), sphere3(0),
                                 warped_torus(24, 24, cosine_warp(24, 0.3))};
  double adjoint = 0.0, identity = 0.0, orthogonality = 0.0;
  bool boundary_ok = true;
  for (const Mesh& mesh : meshes) {
    const SimplicialComplex& K = mesh.K();
    const MetricComplex mc = build_metric(mesh);
    const int n = K.dimension();
    for (int r = 2; r <= n; ++r) {
      const Eigen::SparseMatrix<int> dd = K.boundary(r - 1) * K.boundary(r);
      for (int k = 0; k < dd.outerSize(); ++k)
        for (Eigen::SparseMatrix<int>::InnerIterator it(dd, k); it; ++it) boundary_ok = boundary_ok && it.value() == 0;
    }
    for (int r = 0; r < n; ++r) {
      const Eigen::VectorXd a = detail::random_cochain(mc.count(r), rng);
      const Eigen::VectorXd b = detail::random_cochain(mc.count(r + 1), rng);
      const Eigen::VectorXd da = coboundary(mc, r) * a;
      const Eigen::VectorXd sb = codifferential(mc, r + 1) * b;
      const double lhs = mass_inner(mc.mass[r + 1], da, b), rhs = mass_inner(mc.mass[r], a, sb);
      const double scale = std::sqrt(mass_inner(mc.mass[r + 1], da, da) * mass_inner(mc.mass[r + 1], b, b));
      adjoint = std::max(adjoint, std::abs(lhs - rhs) / scale);
    }
    for (int r = 1; r < n; ++r) {
      const QuadraticForm ck = ck_form(mc, r);
      for (int i = 0; i < 100; ++i) {
        const EnergyTerms t = energy_terms(mc, ck, detail::random_cochain(mc.count(r), rng));
        identity = std::max(identity, std::abs(t.form - t.assembled) / t.magnitude);
      }
      const Eigen::VectorXd w = detail::random_cochain(mc.count(r), rng);
      const HodgeParts h = hodge_decompose(mc, r, w);
      const Eigen::VectorXd& M = mc.mass[r];
      const double s = mass_inner(M, w, w);
      orthogonality = std::max({orthogonality, std::abs(mass_inner(M, h.exact, h.coexact)) / s,
                                std::abs(mass_inner(M, h.exact, h.harmonic)) / s,
                                std::abs(mass_inner(M, h.coexact, h.harmonic)) / s});
    }
  }
  bool monotone = true;
  for (const auto& r : every_run) monotone = monotone && r.tachibana >= r.killing && r.tachibana >= r.planar;
  out.expect(boundary_ok, "boundary of boundary = 0");
  out.expect(adjoint <= 1e-13, "adjointness <= 1e-13");
  out.expect(identity <= 1e-12, "energy identity <= 1e-12");
  out.expect(monotone && !every_run.empty(), "t >= k, t >= p on every run");
  out.expect(orthogonality <= 1e-9, "decomposition orthogonality <= 1e-9");
  out.note("adjointness " + num(adjoint) + ", energy identity " + num(identity) + ", orthogonality " +
           num(orthogonality) + ", monotonicity over " + std::to_string(every_run.size()) + " runs");
  return out;
}

}  // namespace

int main(int, char** argv) {
  ensure_reliable_blas(argv);
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Betti oracle equivalence", 300, betti_oracle},
      {2, "sphere invariants", 60, sphere_invariants},
      {3, "flat torus counterexample", 30, flat_counterexample},
      {4, "vanishing under negative curvature", 120, vanishing},
      {5, "duality", 600, duality},
      {6, "conformal invariance", 120, conformal},
      {7, "existence on a warped product", 120, warped_existence},
      {8, "analytic families", 300, analytic_families},
      {9, "structural properties", 120, structural},
  };
  int passed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.expect(false, std::string("with exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    out.expect(seconds <= c.budget_seconds, "runtime budget " + num(c.budget_seconds, "%.0f") + " s");
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", out.passed ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                seconds);
    passed += out.passed;
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
