#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "errors.hpp"
#include "integer_rank.hpp"

namespace tachibana {

/// Sorted tuple of dense vertex ids.
using Simplex = std::vector<int>;

/// Integer boundary/coboundary matrix.
using IncidenceMatrix = Eigen::SparseMatrix<int>;

/// Oriented closed simplicial pseudomanifold.
///
/// Simplices of degree r < n are oriented by their sorted vertex order; the
/// boundary of [v0..vr] is sum_i (-1)^i [v0..^vi..vr]. Top simplices carry an
/// extra sign so that the induced orientations on every shared (n-1)-face
/// cancel.
class SimplicialComplex {
 public:
  int dimension() const { return dimension_; }
  int count(int r) const { return static_cast<int>(simplices_.at(r).size()); }
  const std::vector<Simplex>& simplices(int r) const { return simplices_.at(r); }
  const Simplex& simplex(int r, int index) const { return simplices_.at(r).at(index); }

  /// Orientation of top simplex `index` relative to its sorted vertex order.
  int top_orientation(int index) const { return top_orientation_.at(index); }
  /// Orientation sign of any simplex relative to sorted order (always +1 below the top degree).
  int orientation(int r, int index) const { return r == dimension_ ? top_orientation_[index] : 1; }

  /// Boundary matrix d_r : C_r -> C_{r-1}, defined for 1 <= r <= n.
  const IncidenceMatrix& boundary(int r) const { return boundary_.at(r); }

  /// Index of a sorted simplex, or -1 when absent.
  int index_of(int r, const Simplex& s) const {
    const auto& list = simplices_.at(r);
    auto it = std::lower_bound(list.begin(), list.end(), s);
    if (it == list.end() || *it != s) return -1;
    return static_cast<int>(it - list.begin());
  }

  /// (r+1)-simplices containing r-simplex `index`, with the incidence sign.
  const std::vector<std::pair<int, int>>& cofaces(int r, int index) const { return cofaces_.at(r).at(index); }
  /// Faces of r-simplex `index` in omission order, with the incidence sign.
  const std::vector<std::pair<int, int>>& faces(int r, int index) const { return faces_.at(r).at(index); }

  /// External vertex id for an internal dense id.
  std::int64_t external_id(int vertex) const { return external_ids_.at(vertex); }
  const std::vector<std::int64_t>& external_ids() const { return external_ids_; }

  friend SimplicialComplex build_complex(const std::vector<std::vector<std::int64_t>>& top_cells);

 private:
  int dimension_ = 0;
  std::vector<std::vector<Simplex>> simplices_;
  std::vector<int> top_orientation_;
  std::vector<IncidenceMatrix> boundary_;
  std::vector<std::vector<std::vector<std::pair<int, int>>>> faces_;
  std::vector<std::vector<std::vector<std::pair<int, int>>>> cofaces_;
  std::vector<std::int64_t> external_ids_;
};

namespace detail {

inline int permutation_sign(std::vector<std::int64_t> v) {
  int sign = 1;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j + 1 < v.size() - i; ++j)
      if (v[j] > v[j + 1]) {
        std::swap(v[j], v[j + 1]);
        sign = -sign;
      }
  return sign;
}

inline void collect_faces(const Simplex& s, int r, std::vector<Simplex>& out) {
  // all r-dimensional faces (r+1 vertices) of s
  const int k = r + 1;
  const int m = static_cast<int>(s.size());
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    Simplex f(k);
    for (int i = 0; i < k; ++i) f[i] = s[idx[i]];
    out.push_back(std::move(f));
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// Builds a closed oriented complex from top cells over arbitrary integer vertex ids.
/// Orientation is resolved by propagation from the first cell of each component.
inline SimplicialComplex build_complex(const std::vector<std::vector<std::int64_t>>& top_cells) {
  require(!top_cells.empty(), "build_complex: no cells");
  const std::size_t width = top_cells.front().size();
  require(width >= 2, "build_complex: cells need at least two vertices");
  for (const auto& cell : top_cells) {
    require(cell.size() == width, "build_complex: cells of mixed dimension");
    auto sorted = cell;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "build_complex: cell with repeated vertex");
  }

  SimplicialComplex K;
  const int n = static_cast<int>(width) - 1;
  K.dimension_ = n;

  std::map<std::int64_t, int> dense;
  for (const auto& cell : top_cells)
    for (auto v : cell) dense.emplace(v, 0);
  for (auto& [ext, id] : dense) {
    id = static_cast<int>(K.external_ids_.size());
    K.external_ids_.push_back(ext);
  }

  std::vector<Simplex> tops;
  std::vector<int> input_sign;
  tops.reserve(top_cells.size());
  for (const auto& cell : top_cells) {
    std::vector<std::int64_t> mapped;
    for (auto v : cell) mapped.push_back(dense.at(v));
    input_sign.push_back(detail::permutation_sign(mapped));
    Simplex s(mapped.begin(), mapped.end());
    std::sort(s.begin(), s.end());
    tops.push_back(std::move(s));
  }

  // Top cells sorted lexicographically, keeping the input sign with each.
  std::vector<int> order(tops.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return tops[a] < tops[b]; });

  K.simplices_.assign(n + 1, {});
  std::vector<int> seed_sign;
  for (int i : order) {
    if (!K.simplices_[n].empty() && K.simplices_[n].back() == tops[i])
      fail(ErrorKind::non_manifold, "duplicate top cell");
    K.simplices_[n].push_back(tops[i]);
    seed_sign.push_back(input_sign[i]);
  }

  for (int r = 0; r < n; ++r) {
    std::vector<Simplex> all;
    for (const auto& t : K.simplices_[n]) detail::collect_faces(t, r, all);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    K.simplices_[r] = std::move(all);
  }

  // Face/coface incidence, signs relative to sorted orientation.
  K.faces_.assign(n + 1, {});
  K.cofaces_.assign(n + 1, {});
  for (int r = 0; r <= n; ++r) {
    K.faces_[r].resize(K.simplices_[r].size());
    K.cofaces_[r].resize(K.simplices_[r].size());
  }
  for (int r = 1; r <= n; ++r) {
    for (int i = 0; i < K.count(r); ++i) {
      const Simplex& s = K.simplices_[r][i];
      for (int omit = 0; omit <= r; ++omit) {
        Simplex f;
        f.reserve(r);
        for (int j = 0; j <= r; ++j)
          if (j != omit) f.push_back(s[j]);
        const int fi = K.index_of(r - 1, f);
        const int sign = (omit % 2 == 0) ? 1 : -1;
        K.faces_[r][i].emplace_back(fi, sign);
        K.cofaces_[r - 1][fi].emplace_back(i, sign);
      }
    }
  }

  for (int f = 0; f < K.count(n - 1); ++f) {
    const auto& co = K.cofaces_[n - 1][f];
    if (co.size() != 2)
      fail(ErrorKind::non_manifold,
           "(n-1)-face shared by " + std::to_string(co.size()) + " top cells (expected 2)");
  }

  // Orientation propagation across shared (n-1)-faces.
  const int num_top = K.count(n);
  K.top_orientation_.assign(num_top, 0);
  for (int seed = 0; seed < num_top; ++seed) {
    if (K.top_orientation_[seed] != 0) continue;
    K.top_orientation_[seed] = seed_sign[seed];
    std::queue<int> queue;
    queue.push(seed);
    while (!queue.empty()) {
      const int t = queue.front();
      queue.pop();
      for (const auto& [f, sign_t] : K.faces_[n][t]) {
        for (const auto& [u, sign_u] : K.cofaces_[n - 1][f]) {
          if (u == t) continue;
          const int wanted = -K.top_orientation_[t] * sign_t * sign_u;
          if (K.top_orientation_[u] == 0) {
            K.top_orientation_[u] = wanted;
            queue.push(u);
          } else if (K.top_orientation_[u] != wanted) {
            fail(ErrorKind::non_orientable, "orientation propagation reached a contradiction");
          }
        }
      }
    }
  }
  for (int t = 0; t < num_top; ++t) {
    for (auto& [f, sign] : K.faces_[n][t]) sign *= K.top_orientation_[t];
  }
  for (int f = 0; f < K.count(n - 1); ++f) {
    for (auto& [t, sign] : K.cofaces_[n - 1][f]) sign = 0;
  }
  for (int t = 0; t < num_top; ++t)
    for (const auto& [f, sign] : K.faces_[n][t])
      for (auto& [u, s] : K.cofaces_[n - 1][f])
        if (u == t) s = sign;

  K.boundary_.assign(n + 1, IncidenceMatrix());
  for (int r = 1; r <= n; ++r) {
    std::vector<Eigen::Triplet<int>> trips;
    for (int i = 0; i < K.count(r); ++i)
      for (const auto& [f, sign] : K.faces_[r][i]) trips.emplace_back(f, i, sign);
    IncidenceMatrix B(K.count(r - 1), K.count(r));
    B.setFromTriplets(trips.begin(), trips.end());
    K.boundary_[r] = std::move(B);
  }
  return K;
}

/// Convenience overload for int vertex ids.
inline SimplicialComplex build_complex(const std::vector<std::vector<int>>& top_cells) {
  std::vector<std::vector<std::int64_t>> wide;
  wide.reserve(top_cells.size());
  for (const auto& c : top_cells) wide.emplace_back(c.begin(), c.end());
  return build_complex(wide);
}

inline int euler_characteristic(const SimplicialComplex& K) {
  int chi = 0;
  for (int r = 0; r <= K.dimension(); ++r) chi += (r % 2 == 0 ? 1 : -1) * K.count(r);
  return chi;
}

/// Exact rank of the boundary matrix d_r (0 outside 1..n).
inline int boundary_rank(const SimplicialComplex& K, int r) {
  if (r < 1 || r > K.dimension()) return 0;
  std::vector<IntColumn<std::int64_t>> cols(K.count(r));
  for (int i = 0; i < K.count(r); ++i) {
    for (const auto& [f, sign] : K.faces(r, i)) cols[i].emplace_back(f, sign);
    std::sort(cols[i].begin(), cols[i].end());
  }
  return integer_rank(cols, K.count(r - 1));
}

/// Betti numbers over Q from exact integer ranks of the boundary matrices.
inline std::vector<int> homology_ranks(const SimplicialComplex& K) {
  const int n = K.dimension();
  std::vector<int> ranks(n + 2, 0);
  for (int r = 1; r <= n; ++r) ranks[r] = boundary_rank(K, r);
  std::vector<int> betti(n + 1);
  int alternating = 0;
  for (int r = 0; r <= n; ++r) {
    betti[r] = K.count(r) - ranks[r] - ranks[r + 1];
    alternating += (r % 2 == 0 ? 1 : -1) * betti[r];
  }
  if (alternating != euler_characteristic(K))
    fail(ErrorKind::oracle_mismatch, "alternating Betti sum differs from Euler characteristic");
  return betti;
}

}  // namespace tachibana
