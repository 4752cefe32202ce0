#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "complex.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace tachibana {

using json = nlohmann::json;

/// Provenance of a generated mesh.
struct ManifoldRecipe {
  std::string name;
  json params = json::object();
  std::optional<double> curvature_constant;
  std::vector<double> warp_profile;  ///< samples f_i, warped_torus only
};

/// A complex with edge lengths and optional vertex coordinates.
///
/// `vertices` are ambient coordinates (spheres) or parameter coordinates
/// (tori). For tori, `periods` lists the lattice of identifications so that
/// edge displacements can be lifted to the universal cover.
struct Mesh {
  std::shared_ptr<const SimplicialComplex> complex;
  std::vector<double> edge_lengths;
  std::vector<std::vector<double>> vertices;
  std::vector<std::vector<double>> periods;
  ManifoldRecipe recipe;

  const SimplicialComplex& K() const { return *complex; }
  bool has_embedding() const { return !vertices.empty(); }

  /// Displacement of vertex b relative to vertex a, reduced to the shortest lattice representative.
  std::vector<double> displacement(int a, int b) const {
    const auto& pa = vertices.at(a);
    const auto& pb = vertices.at(b);
    std::vector<double> d(pa.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = pb[i] - pa[i];
    if (periods.empty()) return d;
    const int dim = static_cast<int>(d.size());
    Eigen::MatrixXd P(dim, static_cast<int>(periods.size()));
    for (std::size_t j = 0; j < periods.size(); ++j)
      for (int i = 0; i < dim; ++i) P(i, static_cast<int>(j)) = periods[j][i];
    Eigen::VectorXd dv = Eigen::Map<Eigen::VectorXd>(d.data(), dim);
    const Eigen::VectorXd c = P.colPivHouseholderQr().solve(dv);
    for (int j = 0; j < c.size(); ++j) dv -= std::round(c(j)) * P.col(j);
    return {dv.data(), dv.data() + dim};
  }
};

/// Curvature mode implied by the recipe metadata: the recorded constant, else vertex defect.
inline CurvatureMode default_curvature(const Mesh& mesh) {
  if (mesh.recipe.curvature_constant) return CurvatureMode::constant(*mesh.recipe.curvature_constant);
  return CurvatureMode::vertex_defect();
}

inline MetricComplex build_metric(const Mesh& mesh, CurvatureMode mode) {
  return build_metric(mesh.complex, mesh.edge_lengths, mode);
}

inline MetricComplex build_metric(const Mesh& mesh) { return build_metric(mesh, default_curvature(mesh)); }

/// Mesh JSON: dimension, oriented cells, optional vertices, edge lengths, metadata.
inline json mesh_to_json(const Mesh& mesh) {
  const SimplicialComplex& K = mesh.K();
  const int n = K.dimension();
  json j;
  j["dimension"] = n;
  json cells = json::array();
  for (int t = 0; t < K.count(n); ++t) {
    std::vector<std::int64_t> cell;
    for (int v : K.simplex(n, t)) cell.push_back(K.external_id(v));
    if (K.top_orientation(t) < 0) std::swap(cell[0], cell[1]);
    cells.push_back(cell);
  }
  j["cells"] = std::move(cells);
  if (mesh.has_embedding()) j["vertices"] = mesh.vertices;
  json lengths = json::array();
  for (int e = 0; e < K.count(1); ++e) {
    const Simplex& s = K.simplex(1, e);
    lengths.push_back(json::array({K.external_id(s[0]), K.external_id(s[1]), mesh.edge_lengths[e]}));
  }
  j["edge_lengths"] = std::move(lengths);

  json meta;
  meta["recipe"] = mesh.recipe.name;
  meta["params"] = mesh.recipe.params;
  meta["curvature_constant"] = mesh.recipe.curvature_constant ? json(*mesh.recipe.curvature_constant) : json();
  meta["euler_characteristic"] = euler_characteristic(K);
  std::vector<int> counts;
  for (int r = 0; r <= n; ++r) counts.push_back(K.count(r));
  meta["counts"] = counts;
  if (!mesh.periods.empty()) meta["periods"] = mesh.periods;
  if (!mesh.recipe.warp_profile.empty()) meta["warp_profile"] = mesh.recipe.warp_profile;
  j["metadata"] = std::move(meta);
  return j;
}

inline Mesh mesh_from_json(const json& j) {
  Mesh mesh;
  try {
    const int n = j.at("dimension").get<int>();
    auto cells = j.at("cells").get<std::vector<std::vector<std::int64_t>>>();
    for (const auto& c : cells)
      if (static_cast<int>(c.size()) != n + 1) fail(ErrorKind::parse_error, "cell size does not match dimension");
    mesh.complex = std::make_shared<const SimplicialComplex>(build_complex(cells));
    const SimplicialComplex& K = *mesh.complex;

    // external id -> dense id
    std::map<std::int64_t, int> dense;
    for (int v = 0; v < K.count(0); ++v) dense[K.external_id(v)] = v;

    mesh.edge_lengths.assign(K.count(1), -1.0);
    for (const auto& entry : j.at("edge_lengths")) {
      const auto u = entry.at(0).get<std::int64_t>();
      const auto v = entry.at(1).get<std::int64_t>();
      const double len = entry.at(2).get<double>();
      if (!dense.count(u) || !dense.count(v)) fail(ErrorKind::parse_error, "edge length for unknown vertex");
      int a = dense[u], b = dense[v];
      if (a > b) std::swap(a, b);
      const int e = K.index_of(1, {a, b});
      if (e < 0) fail(ErrorKind::parse_error, "edge length for a pair that is not an edge");
      mesh.edge_lengths[e] = len;
    }
    for (double len : mesh.edge_lengths)
      if (len < 0.0) fail(ErrorKind::parse_error, "edge_lengths must cover every edge");

    if (j.contains("vertices") && !j["vertices"].is_null()) {
      auto raw = j["vertices"].get<std::vector<std::vector<double>>>();
      mesh.vertices.resize(K.count(0));
      for (int v = 0; v < K.count(0); ++v) {
        const auto ext = K.external_id(v);
        if (ext < 0 || ext >= static_cast<std::int64_t>(raw.size()))
          fail(ErrorKind::parse_error, "vertex id outside the vertices array");
        mesh.vertices[v] = raw[ext];
      }
    }
    if (j.contains("metadata")) {
      const json& meta = j["metadata"];
      mesh.recipe.name = meta.value("recipe", std::string("external"));
      if (meta.contains("params")) mesh.recipe.params = meta["params"];
      if (meta.contains("curvature_constant") && !meta["curvature_constant"].is_null())
        mesh.recipe.curvature_constant = meta["curvature_constant"].get<double>();
      if (meta.contains("periods")) mesh.periods = meta["periods"].get<std::vector<std::vector<double>>>();
      if (meta.contains("warp_profile")) mesh.recipe.warp_profile = meta["warp_profile"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::parse_error, e.what());
  }
  return mesh;
}

inline Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse_error, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::parse_error, e.what());
  }
  return mesh_from_json(j);
}

}  // namespace tachibana
