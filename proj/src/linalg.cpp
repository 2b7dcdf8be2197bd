#include "linalg.hpp"

#include <utility>

namespace rpomdp::detail {

Echelon reduce(Matrix augmented, std::size_t columns) {
  Echelon out;
  std::size_t row = 0;
  for (std::size_t col = 0; col < columns && row < augmented.size(); ++col) {
    std::size_t pivot = row;
    while (pivot < augmented.size() && augmented[pivot][col] == 0) ++pivot;
    if (pivot == augmented.size()) continue;
    std::swap(augmented[row], augmented[pivot]);
    Rational inv = 1 / augmented[row][col];
    for (auto& x : augmented[row]) x *= inv;
    for (std::size_t r = 0; r < augmented.size(); ++r) {
      if (r == row || augmented[r][col] == 0) continue;
      Rational factor = augmented[r][col];
      for (std::size_t c = 0; c <= columns; ++c) augmented[r][c] -= factor * augmented[row][c];
    }
    out.pivots.push_back(col);
    ++row;
  }
  for (std::size_t r = row; r < augmented.size(); ++r)
    if (augmented[r][columns] != 0) out.consistent = false;
  augmented.resize(row);
  out.rows = std::move(augmented);
  return out;
}

std::optional<std::vector<Rational>> solve_square(Matrix a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < n; ++i) a[i].push_back(b[i]);
  Echelon e = reduce(std::move(a), n);
  if (e.pivots.size() != n) return std::nullopt;
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[e.pivots[i]] = e.rows[i][n];
  return x;
}

}  // namespace rpomdp::detail
