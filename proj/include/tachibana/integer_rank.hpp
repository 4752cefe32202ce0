#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace tachibana {

/// Sparse integer column: (row, value) pairs sorted by row, no explicit zeros.
template <typename Int>
using IntColumn = std::vector<std::pair<int, Int>>;

namespace detail {

struct IntegerOverflow {};

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw IntegerOverflow{};
  return out;
}
inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_sub_overflow(a, b, &out)) throw IntegerOverflow{};
  return out;
}
inline boost::multiprecision::cpp_int checked_mul(const boost::multiprecision::cpp_int& a,
                                                  const boost::multiprecision::cpp_int& b) {
  return a * b;
}
inline boost::multiprecision::cpp_int checked_sub(const boost::multiprecision::cpp_int& a,
                                                  const boost::multiprecision::cpp_int& b) {
  return a - b;
}

template <typename Int>
Int abs_value(const Int& v) {
  return v < 0 ? Int(-v) : v;
}

template <typename Int>
Int gcd_value(Int a, Int b) {
  a = abs_value(a);
  b = abs_value(b);
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// target <- pivot_value * target - target_value * pivot, dropping the pivot row.
// With a unit pivot this is an exact integer row operation without growth.
template <typename Int>
IntColumn<Int> eliminate(const IntColumn<Int>& target, const IntColumn<Int>& pivot, int pivot_row) {
  Int tv = 0;
  Int pv = 0;
  for (const auto& [row, v] : target)
    if (row == pivot_row) tv = v;
  for (const auto& [row, v] : pivot)
    if (row == pivot_row) pv = v;

  Int scale_target = pv;
  Int scale_pivot = tv;
  if (abs_value(pv) == 1) {
    scale_target = 1;
    scale_pivot = pv == 1 ? tv : Int(-tv);
  } else {
    Int g = gcd_value(pv, tv);
    scale_target = pv / g;
    scale_pivot = tv / g;
  }

  IntColumn<Int> out;
  out.reserve(target.size() + pivot.size());
  std::size_t i = 0, j = 0;
  while (i < target.size() || j < pivot.size()) {
    int row;
    Int value;
    if (j == pivot.size() || (i < target.size() && target[i].first < pivot[j].first)) {
      row = target[i].first;
      value = checked_mul(scale_target, target[i].second);
      ++i;
    } else if (i == target.size() || pivot[j].first < target[i].first) {
      row = pivot[j].first;
      value = checked_sub(Int(0), checked_mul(scale_pivot, pivot[j].second));
      ++j;
    } else {
      row = target[i].first;
      value = checked_sub(checked_mul(scale_target, target[i].second),
                          checked_mul(scale_pivot, pivot[j].second));
      ++i;
      ++j;
    }
    if (row != pivot_row && value != 0) out.emplace_back(row, value);
  }

  // Dividing by the content keeps entries small; rank is unaffected.
  Int content = 0;
  for (const auto& entry : out) content = gcd_value(content, entry.second);
  if (content > 1)
    for (auto& entry : out) entry.second /= content;
  return out;
}

template <typename Int>
int reduce_rank(std::vector<IntColumn<Int>> columns, int num_rows) {
  const int num_cols = static_cast<int>(columns.size());
  std::vector<std::set<int>> row_to_cols(num_rows);
  for (int c = 0; c < num_cols; ++c)
    for (const auto& [row, v] : columns[c]) row_to_cols[row].insert(c);

  std::vector<char> active(num_cols, 1);
  int rank = 0;
  const int max_rank = std::min(num_rows, num_cols);

  while (rank < max_rank) {
    // Markowitz pivot choice, preferring unit entries.
    int best_col = -1, best_row = -1;
    long long best_score = std::numeric_limits<long long>::max();
    for (int c = 0; c < num_cols; ++c) {
      if (!active[c] || columns[c].empty()) continue;
      const long long col_len = static_cast<long long>(columns[c].size());
      for (const auto& [row, v] : columns[c]) {
        const long long row_len = static_cast<long long>(row_to_cols[row].size());
        long long score = (col_len - 1) * (row_len - 1);
        if (abs_value(v) != 1) score += 1LL << 40;
        if (score < best_score) {
          best_score = score;
          best_col = c;
          best_row = row;
        }
      }
      if (best_score == 0) break;
    }
    if (best_col < 0) break;

    ++rank;
    active[best_col] = 0;
    const IntColumn<Int> pivot = columns[best_col];
    for (const auto& [row, v] : pivot) row_to_cols[row].erase(best_col);

    const std::vector<int> targets(row_to_cols[best_row].begin(), row_to_cols[best_row].end());
    for (int c : targets) {
      for (const auto& [row, v] : columns[c]) row_to_cols[row].erase(c);
      columns[c] = eliminate(columns[c], pivot, best_row);
      for (const auto& [row, v] : columns[c]) row_to_cols[row].insert(c);
    }
    columns[best_col].clear();
  }
  return rank;
}

}  // namespace detail

/// Exact rank of an integer matrix given column-wise. Runs in 64-bit arithmetic
/// and restarts with arbitrary precision if any intermediate entry overflows.
inline int integer_rank(const std::vector<IntColumn<std::int64_t>>& columns, int num_rows) {
  try {
    return detail::reduce_rank<std::int64_t>(columns, num_rows);
  } catch (const detail::IntegerOverflow&) {
    using Big = boost::multiprecision::cpp_int;
    std::vector<IntColumn<Big>> big(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c)
      for (const auto& [row, v] : columns[c]) big[c].emplace_back(row, Big(v));
    return detail::reduce_rank<Big>(std::move(big), num_rows);
  }
}

}  // namespace tachibana
