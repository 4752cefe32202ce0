#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "complex.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "mesh.hpp"

namespace tachibana {

/// Positive periodic warp f on [0, p) given by p equally spaced samples, extended by
/// trigonometric interpolation so that value, derivative and antiderivative are closed-form.
class WarpProfile {
 public:
  explicit WarpProfile(std::vector<double> samples) : samples_(std::move(samples)) {
    const int p = period();
    require(p >= 2, "warp profile needs at least two samples");
    for (double f : samples_)
      if (!(f > 0.0) || !std::isfinite(f)) fail(ErrorKind::invalid_parameter, "warp samples must be positive");
    a0_ = std::accumulate(samples_.begin(), samples_.end(), 0.0) / p;
    const int top = (p - 1) / 2;
    cos_.assign(top + 1, 0.0);
    sin_.assign(top + 1, 0.0);
    for (int k = 1; k <= top; ++k) {
      for (int i = 0; i < p; ++i) {
        const double phase = 2.0 * std::numbers::pi * k * i / p;
        cos_[k] += samples_[i] * std::cos(phase);
        sin_[k] += samples_[i] * std::sin(phase);
      }
      cos_[k] *= 2.0 / p;
      sin_[k] *= 2.0 / p;
    }
    if (p % 2 == 0)
      for (int i = 0; i < p; ++i) nyquist_ += (i % 2 == 0 ? 1.0 : -1.0) * samples_[i] / p;

    for (int i = 0; i < 16 * p; ++i)
      if (!(value(i / 16.0) > 0.0))
        fail(ErrorKind::invalid_parameter, "interpolated warp is not positive near t = " + std::to_string(i / 16.0));
  }

  int period() const { return static_cast<int>(samples_.size()); }
  const std::vector<double>& samples() const { return samples_; }

  double value(double t) const {
    double f = a0_;
    for (std::size_t k = 1; k < cos_.size(); ++k) {
      const double w = omega(static_cast<int>(k));
      f += cos_[k] * std::cos(w * t) + sin_[k] * std::sin(w * t);
    }
    return f + nyquist_ * std::cos(std::numbers::pi * t);
  }

  double derivative(double t) const {
    double df = 0.0;
    for (std::size_t k = 1; k < cos_.size(); ++k) {
      const double w = omega(static_cast<int>(k));
      df += w * (sin_[k] * std::cos(w * t) - cos_[k] * std::sin(w * t));
    }
    return df - nyquist_ * std::numbers::pi * std::sin(std::numbers::pi * t);
  }

  /// F with F' = f and F(0) = 0.
  double antiderivative(double t) const {
    double F = a0_ * t;
    for (std::size_t k = 1; k < cos_.size(); ++k) {
      const double w = omega(static_cast<int>(k));
      F += (cos_[k] * std::sin(w * t) + sin_[k] * (1.0 - std::cos(w * t))) / w;
    }
    return F + nyquist_ * std::sin(std::numbers::pi * t) / std::numbers::pi;
  }

 private:
  double omega(int k) const { return 2.0 * std::numbers::pi * k / period(); }

  std::vector<double> samples_;
  double a0_ = 0.0;
  double nyquist_ = 0.0;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

namespace detail {

inline Mesh finish_mesh(const std::vector<std::vector<int>>& cells, ManifoldRecipe recipe) {
  Mesh mesh;
  mesh.complex = std::make_shared<const SimplicialComplex>(build_complex(cells));
  mesh.recipe = std::move(recipe);
  return mesh;
}

inline void lengths_from_embedding(Mesh& mesh) {
  const SimplicialComplex& K = mesh.K();
  mesh.edge_lengths.resize(K.count(1));
  for (int e = 0; e < K.count(1); ++e) {
    const Simplex& s = K.simplex(1, e);
    const auto d = mesh.displacement(s[0], s[1]);
    double sq = 0.0;
    for (double x : d) sq += x * x;
    mesh.edge_lengths[e] = std::sqrt(sq);
  }
}

// Every recipe output must pass metric validation.
inline Mesh validated(Mesh mesh) {
  try {
    (void)build_metric(mesh);
  } catch (const Error& e) {
    fail(e.kind(), mesh.recipe.name + " " + mesh.recipe.params.dump() + ": " + e.what());
  }
  return mesh;
}

inline std::vector<double> normalized(std::vector<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return v;
}

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

// Staggered triangulated grid: `major` columns (even), `minor` rows. Column a is shifted by
// a/2 mod 1 along the minor direction. Returns cells and (major, minor) parameter positions.
struct StaggeredGrid {
  std::vector<std::vector<int>> cells;
  std::vector<std::array<double, 2>> coords;
};

inline StaggeredGrid staggered_grid(int major, int minor) {
  StaggeredGrid g;
  auto id = [&](int a, int b) { return ((a % major) + major) % major * minor + ((b % minor) + minor) % minor; };
  g.coords.resize(static_cast<std::size_t>(major) * minor);
  for (int a = 0; a < major; ++a)
    for (int b = 0; b < minor; ++b) g.coords[id(a, b)] = {double(a), b + 0.5 * (a % 2)};
  for (int a = 0; a < major; ++a) {
    const int a1 = a + 1;
    for (int b = 0; b < minor; ++b) {
      if (a % 2 == 0) {
        g.cells.push_back({id(a, b), id(a, b + 1), id(a1, b)});
        g.cells.push_back({id(a1, b), id(a1, b + 1), id(a, b + 1)});
      } else {
        g.cells.push_back({id(a, b), id(a, b + 1), id(a1, b + 1)});
        g.cells.push_back({id(a1, b), id(a1, b + 1), id(a, b)});
      }
    }
  }
  return g;
}

using HyperPoint = std::array<double, 3>;  // (x, y, w) on w^2 - x^2 - y^2 = 1

inline double lorentz_dot(const HyperPoint& a, const HyperPoint& b) {
  return a[2] * b[2] - a[0] * b[0] - a[1] * b[1];
}

inline double hyperbolic_distance(const HyperPoint& a, const HyperPoint& b) {
  const HyperPoint d{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
  const double chord = std::sqrt(std::max(0.0, -lorentz_dot(d, d)));
  return 2.0 * std::asinh(0.5 * chord);
}

inline HyperPoint hyperbolic_midpoint(const HyperPoint& a, const HyperPoint& b) {
  HyperPoint s{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
  const double scale = 1.0 / std::sqrt(lorentz_dot(s, s));
  for (double& x : s) x *= scale;
  return s;
}

inline HyperPoint hyperbolic_point(double radius, double angle) {
  return {std::sinh(radius) * std::cos(angle), std::sinh(radius) * std::sin(angle), std::cosh(radius)};
}

// Hyperbolic translation by `distance` along the geodesic through the origin in direction `angle`.
inline HyperPoint hyperbolic_translate(const HyperPoint& p, double angle, double distance) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double u = c * p[0] + s * p[1];
  const double v = -s * p[0] + c * p[1];
  const double bu = u * std::cosh(distance) + p[2] * std::sinh(distance);
  const double bw = u * std::sinh(distance) + p[2] * std::cosh(distance);
  return {c * bu - s * v, s * bu + c * v, bw};
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

/// Interior area of a hyperbolic triangle (curvature -1) from its side lengths.
inline double hyperbolic_triangle_area(double a, double b, double c) {
  auto angle = [](double opp, double s1, double s2) {
    const double cosine = (std::cosh(s1) * std::cosh(s2) - std::cosh(opp)) / (std::sinh(s1) * std::sinh(s2));
    return std::acos(std::clamp(cosine, -1.0, 1.0));
  };
  return std::numbers::pi - angle(a, b, c) - angle(b, c, a) - angle(c, a, b);
}

/// Side length of the regular hyperbolic octagon with interior angles pi/4.
inline double octagon_side_length() {
  return 2.0 * std::acosh(1.0 / std::tan(std::numbers::pi / 8.0));
}

/// Unit 2-sphere: subdivided icosahedron projected radially, chordal lengths.
inline Mesh icosphere(int level) {
  require(level >= 0 && level <= 6, "icosphere: level must be in [0, 6]");
  const double phi = std::numbers::phi;
  std::vector<std::vector<double>> pts;
  for (double s1 : {-1.0, 1.0})
    for (double s2 : {-1.0, 1.0}) {
      pts.push_back({s1, s2 * phi, 0.0});
      pts.push_back({0.0, s1, s2 * phi});
      pts.push_back({s2 * phi, 0.0, s1});
    }
  std::vector<std::vector<int>> faces;
  const int n0 = static_cast<int>(pts.size());
  auto adjacent = [&](int a, int b) { return std::abs(detail::distance(pts[a], pts[b]) - 2.0) < 1e-9; };
  for (int a = 0; a < n0; ++a)
    for (int b = a + 1; b < n0; ++b)
      for (int c = b + 1; c < n0; ++c)
        if (adjacent(a, b) && adjacent(b, c) && adjacent(a, c)) faces.push_back({a, b, c});
  for (auto& p : pts) p = detail::normalized(p);

  for (int round = 0; round < level; ++round) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      std::vector<double> m(3);
      for (int i = 0; i < 3; ++i) m[i] = 0.5 * (pts[a][i] + pts[b][i]);
      pts.push_back(detail::normalized(m));
      const int id = static_cast<int>(pts.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::vector<int>> next;
    for (const auto& f : faces) {
      const int a = f[0], b = f[1], c = f[2];
      const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  ManifoldRecipe recipe{"icosphere", {{"level", level}}, 1.0, {}};
  Mesh mesh = detail::finish_mesh(faces, std::move(recipe));
  mesh.vertices = std::move(pts);
  detail::lengths_from_embedding(mesh);
  return detail::validated(std::move(mesh));
}

/// Flat 2-torus of p x q cells with side ratio `aspect` (cell height / width).
///
/// Alternate columns (or rows) are shifted by half a cell so every triangle is
/// acute; the shifted direction needs an even count.
inline Mesh flat_torus2(int p, int q, double aspect = 1.0) {
  require(p >= 3 && q >= 3, "flat_torus2: p, q must be at least 3");
  require(aspect > 0.0 && std::isfinite(aspect), "flat_torus2: aspect must be positive");
  if (aspect < 1.0 / 3.0 || aspect > 3.0)
    fail(ErrorKind::negative_dual_volume,
         "flat_torus2: aspect " + std::to_string(aspect) + " outside [1/3, 3] gives degenerate dual cells");
  const double w = 1.0, h = aspect;
  bool stagger_columns;
  if (p % 2 == 0 && aspect < 2.0)
    stagger_columns = true;
  else if (q % 2 == 0 && aspect > 0.5)
    stagger_columns = false;
  else
    fail(ErrorKind::invalid_parameter, "flat_torus2: the staggered layout needs an even p (aspect < 2) or even q");

  const auto grid = stagger_columns ? detail::staggered_grid(p, q) : detail::staggered_grid(q, p);
  ManifoldRecipe recipe{"flat_torus2", {{"p", p}, {"q", q}, {"aspect", aspect}}, 0.0, {}};
  Mesh mesh = detail::finish_mesh(grid.cells, std::move(recipe));
  mesh.vertices.resize(grid.coords.size());
  for (std::size_t v = 0; v < grid.coords.size(); ++v) {
    const auto [a, b] = grid.coords[v];
    mesh.vertices[v] = stagger_columns ? std::vector<double>{a * w, b * h} : std::vector<double>{b * w, a * h};
  }
  mesh.periods = {{p * w, 0.0}, {0.0, q * h}};
  detail::lengths_from_embedding(mesh);
  return detail::validated(std::move(mesh));
}

/// Warped torus dt^2 + f(t)^2 dtheta^2 on p x q unit cells; t has period p, theta period q.
/// Edge lengths use the metric at the edge midpoint in parameter space.
inline Mesh warped_torus(int p, int q, const std::vector<double>& warp_samples) {
  require(p >= 4 && p % 2 == 0, "warped_torus: p must be even and at least 4");
  require(q >= 3, "warped_torus: q must be at least 3");
  require(static_cast<int>(warp_samples.size()) == p, "warped_torus: need one warp sample per column");
  const WarpProfile f(warp_samples);

  const auto grid = detail::staggered_grid(p, q);
  ManifoldRecipe recipe{"warped_torus", {{"p", p}, {"q", q}}, std::nullopt, warp_samples};
  Mesh mesh = detail::finish_mesh(grid.cells, std::move(recipe));
  mesh.vertices.resize(grid.coords.size());
  for (std::size_t v = 0; v < grid.coords.size(); ++v) mesh.vertices[v] = {grid.coords[v][0], grid.coords[v][1]};
  mesh.periods = {{double(p), 0.0}, {0.0, double(q)}};

  const SimplicialComplex& K = mesh.K();
  mesh.edge_lengths.resize(K.count(1));
  for (int e = 0; e < K.count(1); ++e) {
    const Simplex& s = K.simplex(1, e);
    const auto d = mesh.displacement(s[0], s[1]);
    const double fm = f.value(mesh.vertices[s[0]][0] + 0.5 * d[0]);
    mesh.edge_lengths[e] = std::sqrt(d[0] * d[0] + fm * fm * d[1] * d[1]);
  }
  try {
    return detail::validated(std::move(mesh));
  } catch (const Error& e) {
    std::string desc = "warp samples [";
    for (int i = 0; i < p; ++i) desc += (i ? ", " : "") + std::to_string(warp_samples[i]);
    fail(e.kind(), std::string(e.what()) + "; failing " + desc + "]");
  }
}

/// Closed genus-2 surface of curvature -1: regular octagon with angles pi/4 split into 16
/// equilateral triangles (center, side midpoints, corners), refined by `level` rounds of
/// geodesic midpoint subdivision before opposite sides are glued.
inline Mesh hyperbolic_genus2(int level) {
  if (level == 0)
    fail(ErrorKind::negative_dual_volume, "hyperbolic_genus2: level 0 is too coarse for a simplicial mesh");
  require(level >= 1 && level <= 3, "hyperbolic_genus2: level must be in {1, 2, 3}");
  const int rounds = level;
  const double pi = std::numbers::pi;
  const double cot = 1.0 / std::tan(pi / 8.0);
  const double radius = std::acosh(cot * cot);
  const double apothem = std::acosh(cot);

  // 0: center, 1..8: corners, 9..16: side midpoints.
  std::vector<detail::HyperPoint> pts{{0.0, 0.0, 1.0}};
  for (int k = 0; k < 8; ++k) pts.push_back(detail::hyperbolic_point(radius, (2 * k - 1) * pi / 8.0));
  for (int k = 0; k < 8; ++k) pts.push_back(detail::hyperbolic_point(apothem, k * pi / 4.0));
  auto corner = [](int k) { return 1 + ((k % 8) + 8) % 8; };
  auto side_mid = [](int k) { return 9 + ((k % 8) + 8) % 8; };
  std::map<std::pair<int, int>, int> mid;
  std::vector<std::array<int, 3>> tris;
  for (int k = 0; k < 8; ++k) {
    mid.emplace(std::minmax(corner(k), corner(k + 1)), side_mid(k));
    tris.push_back({0, side_mid(k), side_mid(k + 1)});
    tris.push_back({side_mid(k - 1), corner(k), side_mid(k)});
  }

  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    pts.push_back(detail::hyperbolic_midpoint(pts[a], pts[b]));
    const int id = static_cast<int>(pts.size()) - 1;
    mid.emplace(key, id);
    return id;
  };
  for (int round = 0; round < rounds; ++round) {
    std::vector<std::array<int, 3>> next;
    for (const auto& [a, b, c] : tris) {
      const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }

  // Ordered points along the side from corner a to corner b.
  auto side_points = [&](auto&& self, int a, int b, int depth) -> std::vector<int> {
    if (depth == 0) return {a, b};
    const int m = mid.at(std::minmax(a, b));
    auto left = self(self, a, m, depth - 1);
    auto right = self(self, m, b, depth - 1);
    left.insert(left.end(), right.begin() + 1, right.end());
    return left;
  };

  detail::UnionFind uf(static_cast<int>(pts.size()));
  for (int k = 0; k < 4; ++k) {
    const auto near = side_points(side_points, corner(k), corner(k + 1), rounds + 1);
    const auto far = side_points(side_points, corner(k + 4), corner(k + 5), rounds + 1);
    const int N = static_cast<int>(near.size()) - 1;
    for (int j = 0; j <= N; ++j) {
      const auto image = detail::hyperbolic_translate(pts[far[N - j]], k * pi / 4.0, 2.0 * apothem);
      double err = 0.0;
      for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(image[i] - pts[near[j]][i]));
      if (err > 1e-9 * pts[near[j]][2])
        fail(ErrorKind::oracle_mismatch, "hyperbolic_genus2: side pairing is not an isometry");
      uf.unite(near[j], far[N - j]);
    }
  }

  std::vector<int> cls(pts.size(), -1);
  int num_classes = 0;
  for (std::size_t v = 0; v < pts.size(); ++v) {
    const int root = uf.find(static_cast<int>(v));
    if (cls[root] < 0) cls[root] = num_classes++;
    cls[v] = cls[root];
  }
  std::vector<std::vector<int>> cells;
  std::map<std::pair<int, int>, double> length_of;
  for (const auto& t : tris) {
    cells.push_back({cls[t[0]], cls[t[1]], cls[t[2]]});
    for (int i = 0; i < 3; ++i) {
      const int a = t[i], b = t[(i + 1) % 3];
      length_of.emplace(std::minmax(cls[a], cls[b]), detail::hyperbolic_distance(pts[a], pts[b]));
    }
  }

  ManifoldRecipe recipe{"hyperbolic_genus2", {{"level", level}}, -1.0, {}};
  Mesh mesh = detail::finish_mesh(cells, std::move(recipe));
  const SimplicialComplex& K = mesh.K();
  mesh.edge_lengths.resize(K.count(1));
  for (int e = 0; e < K.count(1); ++e) {
    const Simplex& s = K.simplex(1, e);
    mesh.edge_lengths[e] = length_of.at({s[0], s[1]});
  }
  return detail::validated(std::move(mesh));
}

/// Flat 3-torus R^3 / (p L) for the body-centered cubic lattice L, tiled by
/// Sommerville tetrahedra (one cube edge, one opposite center-center edge).
inline Mesh flat_torus3(int p) {
  require(p >= 3, "flat_torus3: p must be at least 3");
  // Lattice coordinates of a point with doubled Cartesian coordinates D (all of one parity).
  auto vertex_id = [p](const std::array<int, 3>& D) {
    std::array<int, 3> c{(D[1] + D[2]) / 2, (D[0] + D[2]) / 2, (D[0] + D[1]) / 2};
    int id = 0;
    for (int i = 0; i < 3; ++i) id = id * p + ((c[i] % p) + p) % p;
    return id;
  };
  std::vector<std::vector<double>> coords(static_cast<std::size_t>(p) * p * p);
  std::vector<std::array<int, 3>> doubled(coords.size());
  for (int c1 = 0; c1 < p; ++c1)
    for (int c2 = 0; c2 < p; ++c2)
      for (int c3 = 0; c3 < p; ++c3) {
        const std::array<int, 3> D{-c1 + c2 + c3, c1 - c2 + c3, c1 + c2 - c3};
        const int id = vertex_id(D);
        doubled[id] = D;
        coords[id] = {0.5 * D[0], 0.5 * D[1], 0.5 * D[2]};
      }

  std::vector<std::vector<int>> cells;
  for (const auto& a : doubled) {
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      std::array<int, 3> b = a;
      b[i] += 2;
      // Centers around the cube edge, in cyclic order.
      const int sj[4] = {1, 1, -1, -1}, sk[4] = {1, -1, -1, 1};
      for (int m = 0; m < 4; ++m) {
        std::array<int, 3> c = a, d = a;
        c[i] += 1;
        d[i] += 1;
        c[j] += sj[m];
        c[k] += sk[m];
        d[j] += sj[(m + 1) % 4];
        d[k] += sk[(m + 1) % 4];
        std::vector<int> cell{vertex_id(a), vertex_id(b), vertex_id(c), vertex_id(d)};
        std::sort(cell.begin(), cell.end());
        if (std::adjacent_find(cell.begin(), cell.end()) != cell.end())
          fail(ErrorKind::invalid_parameter, "flat_torus3: tetrahedron collapses under the identification");
        cells.push_back(std::move(cell));
      }
    }
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

  ManifoldRecipe recipe{"flat_torus3", {{"p", p}}, 0.0, {}};
  Mesh mesh = detail::finish_mesh(cells, std::move(recipe));
  mesh.vertices = std::move(coords);
  const double h = 0.5 * p;
  mesh.periods = {{-h, h, h}, {h, -h, h}, {h, h, -h}};
  detail::lengths_from_embedding(mesh);
  return detail::validated(std::move(mesh));
}

/// Unit 3-sphere from the 600-cell (level 0) or its midpoint/centre refinement (level 1), chordal lengths.
inline Mesh sphere3(int level) {
  require(level == 0 || level == 1, "sphere3: level must be 0 or 1");
  const double phi = std::numbers::phi;
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 4; ++i)
    for (double s : {-1.0, 1.0}) {
      std::vector<double> v(4, 0.0);
      v[i] = s;
      pts.push_back(v);
    }
  for (int m = 0; m < 16; ++m) {
    std::vector<double> v(4);
    for (int i = 0; i < 4; ++i) v[i] = (m & (1 << i)) ? 0.5 : -0.5;
    pts.push_back(v);
  }
  // Even permutations of (phi, 1, 1/phi, 0) / 2 with all sign choices.
  const double base[4] = {phi / 2.0, 0.5, 0.5 / phi, 0.0};
  std::array<int, 4> perm{0, 1, 2, 3};
  do {
    std::vector<std::int64_t> as_vec(perm.begin(), perm.end());
    if (detail::permutation_sign(as_vec) != 1) continue;
    for (int m = 0; m < 8; ++m) {
      std::vector<double> v(4);
      for (int i = 0; i < 4; ++i) v[i] = base[perm[i]];
      int bit = 0;
      for (int i = 0; i < 4; ++i)
        if (perm[i] != 3) {
          if (m & (1 << bit)) v[i] = -v[i];
          ++bit;
        }
      pts.push_back(v);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  const int nv = static_cast<int>(pts.size());
  const double edge = 1.0 / phi;
  std::vector<std::vector<int>> nbr(nv);
  for (int a = 0; a < nv; ++a)
    for (int b = a + 1; b < nv; ++b)
      if (std::abs(detail::distance(pts[a], pts[b]) - edge) < 1e-9) {
        nbr[a].push_back(b);
        nbr[b].push_back(a);
      }
  auto linked = [&](int a, int b) { return std::find(nbr[a].begin(), nbr[a].end(), b) != nbr[a].end(); };
  std::vector<std::vector<int>> cells;
  for (int a = 0; a < nv; ++a)
    for (int b : nbr[a]) {
      if (b <= a) continue;
      for (int c : nbr[a]) {
        if (c <= b || !linked(b, c)) continue;
        for (int d : nbr[a])
          if (d > c && linked(b, d) && linked(c, d)) cells.push_back({a, b, c, d});
      }
    }

  if (level == 1) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      std::vector<double> m(4);
      for (int i = 0; i < 4; ++i) m[i] = 0.5 * (pts[a][i] + pts[b][i]);
      pts.push_back(detail::normalized(m));
      const int id = static_cast<int>(pts.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    // Refinement by edge midpoints and cell centres: each old vertex is joined to pairs of its
    // edge midpoints through the cell centre, and the inner triangle of every old face is
    // replaced by the segment between the centres of its two cells. (The 1-to-8 split is
    // circumcentrically degenerate on the inner octahedra of a regular cell.)
    std::vector<std::vector<int>> next;
    std::map<std::array<int, 3>, std::vector<int>> face_centres;
    for (auto t : cells) {
      std::sort(t.begin(), t.end());
      std::vector<double> centre(4, 0.0);
      for (int v : t)
        for (int i = 0; i < 4; ++i) centre[i] += 0.25 * pts[v][i];
      pts.push_back(detail::normalized(centre));
      const int o = static_cast<int>(pts.size()) - 1;
      for (int v : t) {
        std::vector<int> others;
        for (int w : t)
          if (w != v) others.push_back(w);
        for (int i = 0; i < 3; ++i)
          for (int j = i + 1; j < 3; ++j) next.push_back({o, v, midpoint(v, others[i]), midpoint(v, others[j])});
      }
      for (int skip = 0; skip < 4; ++skip) {
        std::array<int, 3> f{};
        for (int i = 0, k = 0; i < 4; ++i)
          if (i != skip) f[k++] = t[i];
        face_centres[f].push_back(o);
      }
    }
    for (const auto& [f, centres] : face_centres) {
      require(centres.size() == 2, "sphere3: face without two cells");
      const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ac = midpoint(f[0], f[2]);
      next.push_back({centres[0], centres[1], ab, bc});
      next.push_back({centres[0], centres[1], bc, ac});
      next.push_back({centres[0], centres[1], ac, ab});
    }
    cells = std::move(next);
  }

  ManifoldRecipe recipe{"sphere3", {{"level", level}}, 1.0, {}};
  Mesh mesh = detail::finish_mesh(cells, std::move(recipe));
  mesh.vertices = std::move(pts);
  detail::lengths_from_embedding(mesh);
  return detail::validated(std::move(mesh));
}

/// Dispatch by recipe name with integer/real parameters from JSON.
inline Mesh generate(const std::string& name, const json& params) {
  auto get_int = [&](const char* key, int fallback) { return params.contains(key) ? params.at(key).get<int>() : fallback; };
  if (name == "icosphere") return icosphere(get_int("level", 2));
  if (name == "flat_torus2")
    return flat_torus2(get_int("p", 8), get_int("q", 8), params.contains("aspect") ? params.at("aspect").get<double>() : 1.0);
  if (name == "warped_torus") {
    const int p = get_int("p", 24), q = get_int("q", 24);
    std::vector<double> samples;
    if (params.contains("warp")) {
      samples = params.at("warp").get<std::vector<double>>();
    } else {
      const double amp = params.contains("amplitude") ? params.at("amplitude").get<double>() : 0.3;
      for (int i = 0; i < p; ++i) samples.push_back(1.0 + amp * std::cos(2.0 * std::numbers::pi * i / p));
    }
    return warped_torus(p, q, samples);
  }
  if (name == "hyperbolic_genus2") return hyperbolic_genus2(get_int("level", 1));
  if (name == "flat_torus3") return flat_torus3(get_int("p", 3));
  if (name == "sphere3") return sphere3(get_int("level", 0));
  fail(ErrorKind::invalid_parameter, "unknown recipe '" + name + "'");
}

}  // namespace tachibana
