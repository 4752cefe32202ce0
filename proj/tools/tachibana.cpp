// tachibana: mesh generation, invariant numbers, verification suites, refinement tables and
// analytic family checks from the command line.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include <tachibana/analytic.hpp>
#include <tachibana/blas_runtime.hpp>
#include <tachibana/spectra.hpp>
#include <tachibana/suites.hpp>

namespace fs = std::filesystem;
using namespace tachibana;

namespace {

enum Exit { ok = 0, verification_failed = 1, usage = 2, oracle = 3, window = 4 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::oracle_mismatch: return oracle;
    case ErrorKind::window_too_small: return window;
    case ErrorKind::convergence_failure:
    case ErrorKind::solver_failure: return verification_failed;
    default: return usage;
  }
}

// Writes to a sibling temporary and renames, so readers never see a partial file.
void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorKind::invalid_parameter, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(ErrorKind::invalid_parameter, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

CurvatureMode parse_curvature(const std::string& flag, const Mesh& mesh) {
  if (flag == "auto") return default_curvature(mesh);
  if (flag == "defect") return CurvatureMode::vertex_defect();
  if (flag.rfind("constant=", 0) == 0) {
    std::size_t used = 0;
    const std::string number = flag.substr(9);
    double c = 0.0;
    try {
      c = std::stod(number, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != number.size()) fail(ErrorKind::invalid_parameter, "bad curvature constant '" + number + "'");
    return CurvatureMode::constant(c);
  }
  fail(ErrorKind::invalid_parameter, "curvature must be auto, defect or constant=<C>");
}

SolverKind parse_solver(const std::string& s) {
  if (s == "auto") return SolverKind::automatic;
  if (s == "dense") return SolverKind::dense;
  if (s == "iterative") return SolverKind::iterative;
  fail(ErrorKind::invalid_parameter, "solver must be auto, dense or iterative");
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const int lo = std::stoi(text.substr(0, dots)), hi = std::stoi(text.substr(dots + 2));
      for (int l = lo; l <= hi; ++l) levels.push_back(l);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) levels.push_back(std::stoi(item));
    }
  } catch (const std::exception&) {
    fail(ErrorKind::invalid_parameter, "levels must look like 1,2,3 or 1..3");
  }
  return levels;
}

struct MeshFlags {
  std::string recipe;
  int level = -1;
  int p = -1, q = -1;
  double aspect = 1.0;
  double amplitude = 0.3;
  std::vector<double> warp;

  json params() const {
    json j = json::object();
    if (level >= 0) j["level"] = level;
    if (p >= 0) j["p"] = p;
    if (q >= 0) j["q"] = q;
    if (recipe == "flat_torus2") j["aspect"] = aspect;
    if (recipe == "warped_torus") {
      if (!warp.empty())
        j["warp"] = warp;
      else
        j["amplitude"] = amplitude;
    }
    return j;
  }
};

void add_mesh_flags(CLI::App* cmd, MeshFlags& f) {
  cmd->add_option("--recipe", f.recipe, "icosphere, flat_torus2, warped_torus, hyperbolic_genus2, flat_torus3, sphere3");
  cmd->add_option("--level", f.level, "subdivision level");
  cmd->add_option("--p", f.p, "grid size p (tori)");
  cmd->add_option("--q", f.q, "grid size q (2-tori)");
  cmd->add_option("--aspect", f.aspect, "cell aspect ratio (flat_torus2)");
  cmd->add_option("--amplitude", f.amplitude, "warp amplitude a in f = 1 + a cos (warped_torus)");
  cmd->add_option("--warp", f.warp, "explicit warp samples, one per column")->delimiter(',');
}

Mesh load_mesh(const std::string& path, const MeshFlags& f) {
  if (!path.empty()) return read_mesh(path);
  if (f.recipe.empty()) fail(ErrorKind::invalid_parameter, "give --mesh <file> or --recipe <name>");
  return generate(f.recipe, f.params());
}

struct SpectralFlags {
  std::string solver = "auto";
  std::uint64_t seed = SolverOptions{}.seed;
  int window = 0;
  double tau_abs = GapPolicy{}.tau_abs;
  double rho_min = GapPolicy{}.rho_min;
  double fixed = -1.0;

  InvariantOptions options() const {
    InvariantOptions opt;
    opt.solver.kind = parse_solver(solver);
    opt.solver.seed = seed;
    opt.window = window;
    opt.policy.tau_abs = tau_abs;
    opt.policy.rho_min = rho_min;
    if (fixed > 0.0) opt.policy.fixed = fixed;
    return opt;
  }
};

void add_spectral_flags(CLI::App* cmd, SpectralFlags& f) {
  cmd->add_option("--solver", f.solver, "auto, dense or iterative");
  cmd->add_option("--seed", f.seed, "seed for the iterative solver start block");
  cmd->add_option("--window", f.window, "eigenvalues per form (0 picks a default and grows it)");
  cmd->add_option("--tau-abs", f.tau_abs, "largest magnitude that can count as kernel");
  cmd->add_option("--rho-min", f.rho_min, "smallest accepted gap ratio");
  cmd->add_option("--fixed-threshold", f.fixed, "count |lambda| below this value instead of searching a gap");
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

std::string convergence_csv(const ConvergenceStudy& study) {
  std::string out = "level,V,E,b,t,k,p,kernel_max_abs_eig,first_nonkernel_eig,runtime_seconds\n";
  char buf[64];
  for (const auto& r : study.rows) {
    std::snprintf(buf, sizeof buf, "%.3f", r.runtime_seconds);
    out += std::to_string(r.level) + "," + std::to_string(r.vertices) + "," + std::to_string(r.edges) + "," +
           std::to_string(r.b) + "," + std::to_string(r.t) + "," + std::to_string(r.k) + "," + std::to_string(r.p) +
           "," + format_optional(r.kernel_max_abs_eig) + "," + format_optional(r.first_nonkernel_eig) + "," + buf + "\n";
  }
  return out;
}

void print_table(const SuiteReport& rep) {
  std::printf("suite %s\n", rep.name.c_str());
  for (const auto& c : rep.checks) {
    std::string mesh = c.recipe + " " + c.params.dump();
    std::printf("  %-4s %-44s %-40s expected %s, observed %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                mesh.c_str(), c.expected.c_str(), c.observed.c_str());
  }
  std::printf("%s: %s\n", rep.name.c_str(), rep.passed() ? "all checks passed" : "some checks failed");
}

}  // namespace

int main(int argc, char** argv) {
  ensure_reliable_blas(argv);

  CLI::App app{"Tachibana numbers and conformal Killing forms on simplicial manifolds"};
  app.require_subcommand(1);
  std::string out = "-";

  // generate
  MeshFlags gen_mesh;
  auto* gen = app.add_subcommand("generate", "write a mesh JSON file");
  add_mesh_flags(gen, gen_mesh);
  gen->get_option("--recipe")->required();
  gen->add_option("--out", out, "output path, - for standard output");

  // invariants
  MeshFlags inv_mesh;
  SpectralFlags inv_spec;
  std::string inv_path, curvature = "auto", matrix_prefix;
  int degree = 1;
  auto* inv = app.add_subcommand("invariants", "b_r, t_r, k_r, p_r with diagnostics");
  inv->add_option("--mesh", inv_path, "mesh JSON file");
  add_mesh_flags(inv, inv_mesh);
  inv->add_option("--degree", degree, "form degree r, 1 <= r <= n-1");
  inv->add_option("--curvature", curvature, "auto, defect or constant=<C>");
  inv->add_option("--dump-matrices", matrix_prefix, "write the four stiffness matrices and masses with this prefix");
  inv->add_option("--out", out, "report path, - for standard output");
  add_spectral_flags(inv, inv_spec);

  // verify
  std::string suite;
  SuiteConfig suite_cfg;
  SpectralFlags ver_spec;
  auto* ver = app.add_subcommand("verify", "run a verification suite");
  ver->add_option("suite", suite, "duality, decomposition, vanishing, conformal, inclusion, hodge, existence or all")
      ->required();
  ver->add_option("--amplitude", suite_cfg.amplitude, "conformal rescale amplitude");
  ver->add_option("--out", out, "JSON report path, - appends it to standard output");
  add_spectral_flags(ver, ver_spec);

  // converge
  MeshFlags conv_mesh;
  SpectralFlags conv_spec;
  std::string levels_text;
  auto* conv = app.add_subcommand("converge", "refinement table as CSV");
  conv->add_option("--recipe", conv_mesh.recipe, "recipe name")->required();
  conv->add_option("--levels", levels_text, "levels, e.g. 1,2,3 or 1..3 (grid sizes for tori)")->required();
  conv->add_option("--degree", degree, "form degree");
  conv->add_option("--amplitude", conv_mesh.amplitude, "warp amplitude (warped_torus)");
  conv->add_option("--out", out, "CSV path, - for standard output");
  add_spectral_flags(conv, conv_spec);

  // analytic
  MeshFlags ana_mesh;
  std::string ana_path, family = "all";
  int quadrature = 4;
  bool export_cochains = false;
  auto* ana = app.add_subcommand("analytic", "sample closed-form conformal Killing families");
  ana->add_option("--mesh", ana_path, "mesh JSON file");
  add_mesh_flags(ana, ana_mesh);
  ana->add_option("--degree", degree, "form degree");
  ana->add_option("--family", family, "killing, planar, constant, concircular or all");
  ana->add_option("--quadrature", quadrature, "quadrature degree");
  ana->add_flag("--export", export_cochains, "include sampled cochains in the output");
  ana->add_option("--out", out, "JSON path, - for standard output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "tachibana: " << e.what() << "\n";
    return usage;
  }

  try {
    if (*gen) {
      const Mesh mesh = generate(gen_mesh.recipe, gen_mesh.params());
      write_output(out, dump(mesh_to_json(mesh)));
      return ok;
    }

    if (*inv) {
      const Mesh mesh = load_mesh(inv_path, inv_mesh);
      const MetricComplex mc = build_metric(mesh, parse_curvature(curvature, mesh));
      const InvariantOptions opt = inv_spec.options();
      if (!matrix_prefix.empty()) {
        for (FormKind kind : {FormKind::hodge, FormKind::ck, FormKind::killing, FormKind::planar}) {
          const QuadraticForm q = assemble(mc, degree, kind);
          std::ostringstream stiff, mass;
          write_coordinate(stiff, q.stiffness);
          write_coordinate(mass, detail::diagonal(q.mass));
          write_output(matrix_prefix + "_" + std::string(to_string(kind)) + ".mtx", stiff.str());
          write_output(matrix_prefix + "_" + std::string(to_string(kind)) + "_mass.mtx", mass.str());
        }
      }
      const InvariantReport rep = invariant_numbers(mesh, mc, degree, opt);
      write_output(out, dump(to_json(rep, opt)));
      if (!rep.oracle_ok) return oracle;
      return rep.confident() ? ok : window;
    }

    if (*ver) {
      suite_cfg.options = ver_spec.options();
      suite_cfg.seed = ver_spec.seed;
      std::vector<std::string> names = suite == "all" ? suite_names() : std::vector<std::string>{suite};
      json all = json::array();
      bool passed = true;
      for (const auto& name : names) {
        const SuiteReport rep = run_suite(name, suite_cfg);
        print_table(rep);
        passed = passed && rep.passed();
        all.push_back(to_json(rep));
      }
      write_output(out, dump(names.size() == 1 ? all[0] : all));
      return passed ? ok : verification_failed;
    }

    if (*conv) {
      const auto levels = parse_levels(levels_text);
      if (levels.size() < 2) fail(ErrorKind::invalid_parameter, "converge needs at least two levels");
      json extra = json::object();
      if (conv_mesh.recipe == "warped_torus") extra["amplitude"] = conv_mesh.amplitude;
      const ConvergenceStudy study = convergence_study(conv_mesh.recipe, levels, degree, conv_spec.options(), extra);
      write_output(out, convergence_csv(study));
      return ok;
    }

    if (*ana) {
      const Mesh mesh = load_mesh(ana_path, ana_mesh);
      const MetricComplex mc = build_metric(mesh);
      const int n = mesh.K().dimension();
      json result;
      result["mesh"] = {{"recipe", mesh.recipe.name}, {"params", mesh.recipe.params}};
      result["degree"] = degree;
      result["quadrature_degree"] = quadrature;
      const QuadraticForm ck = ck_form(mc, degree), kf = killing_form(mc, degree), pf = planar_form(mc, degree);

      if (family == "concircular") {
        const Eigen::VectorXd w = warped_concircular(mesh);
        result["families"]["concircular"] = {{"planar_residual", residual(pf, w)}, {"ck_residual", residual(ck, w)}};
        write_output(out, dump(result));
        return ok;
      }

      std::vector<std::pair<std::string, std::vector<FormField>>> families;
      const bool flat = mesh.recipe.curvature_constant && *mesh.recipe.curvature_constant == 0.0;
      if (flat) {
        if (family == "all" || family == "constant") families.push_back({"constant", flat_constant_family(n, degree)});
      } else {
        if (family == "all" || family == "killing") families.push_back({"killing", ambient_killing_family(n, degree)});
        if (family == "all" || family == "planar") families.push_back({"planar", ambient_planar_family(n, degree)});
      }
      if (families.empty()) fail(ErrorKind::invalid_parameter, "family '" + family + "' does not apply to this mesh");

      std::vector<Eigen::VectorXd> union_samples;
      for (const auto& [name, members] : families) {
        const auto samples = sample_family(members, mesh, quadrature);
        json rows = json::array();
        for (std::size_t i = 0; i < members.size(); ++i)
          rows.push_back({{"label", members[i].label},
                          {"ck_residual", residual(ck, samples[i])},
                          {"killing_residual", residual(kf, samples[i])},
                          {"planar_residual", residual(pf, samples[i])}});
        result["families"][name] = {{"size", members.size()},
                                    {"rank", family_rank(samples, mc.mass[degree])},
                                    {"members", rows}};
        if (export_cochains) result["families"][name]["cochains"] = family_to_json(members, samples);
        union_samples.insert(union_samples.end(), samples.begin(), samples.end());
      }
      if (families.size() > 1) result["union_rank"] = family_rank(union_samples, mc.mass[degree]);
      write_output(out, dump(result));
      return ok;
    }
  } catch (const Error& e) {
    std::cerr << "tachibana: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "tachibana: " << e.what() << "\n";
    return usage;
  }
  return usage;
}
