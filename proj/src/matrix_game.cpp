#include "rpomdp/matrix_game.hpp"

#include "rpomdp/errors.hpp"

#include <algorithm>
#include <cstddef>

namespace rpomdp {

MatrixGameSolution solve_matrix_game(const std::vector<std::vector<Rational>>& payoff) {
  const std::size_t rows = payoff.size();
  if (rows == 0 || payoff[0].empty()) throw DomainError("empty payoff matrix");
  const std::size_t cols = payoff[0].size();
  Rational lowest = payoff[0][0];
  for (const auto& row : payoff) {
    if (row.size() != cols) throw DomainError("ragged payoff matrix");
    for (const auto& x : row) lowest = std::min(lowest, x);
  }
  // Shift every entry to be positive so the game value is positive.
  const Rational shift = 1 - lowest;

  // Column player's program: maximize sum(y) s.t. A' y <= 1, y >= 0.
  // Variables 0..cols-1 are y, cols..cols+rows-1 are the slacks.
  const std::size_t width = cols + rows;
  std::vector<std::vector<Rational>> tableau(rows, std::vector<Rational>(width + 1, Rational(0)));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) tableau[i][j] = payoff[i][j] + shift;
    tableau[i][cols + i] = 1;
    tableau[i][width] = 1;
  }
  std::vector<Rational> reduced(width + 1, Rational(0));
  for (std::size_t j = 0; j < cols; ++j) reduced[j] = -1;
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) basis[i] = cols + i;

  while (true) {
    std::size_t entering = width;
    for (std::size_t j = 0; j < width; ++j) {
      if (reduced[j] < 0) {
        entering = j;
        break;
      }
    }
    if (entering == width) break;
    std::size_t leaving = rows;
    Rational best_ratio;
    for (std::size_t i = 0; i < rows; ++i) {
      if (tableau[i][entering] <= 0) continue;
      Rational ratio = tableau[i][width] / tableau[i][entering];
      if (leaving == rows || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leaving])) {
        leaving = i;
        best_ratio = ratio;
      }
    }
    // The feasible region is bounded because every entry of A' is positive.
    if (leaving == rows) throw DomainError("unbounded matrix game program");
    Rational pivot = tableau[leaving][entering];
    for (auto& x : tableau[leaving]) x /= pivot;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == leaving || tableau[i][entering] == 0) continue;
      Rational f = tableau[i][entering];
      for (std::size_t j = 0; j <= width; ++j) tableau[i][j] -= f * tableau[leaving][j];
    }
    if (reduced[entering] != 0) {
      Rational f = reduced[entering];
      for (std::size_t j = 0; j <= width; ++j) reduced[j] -= f * tableau[leaving][j];
    }
    basis[leaving] = entering;
  }

  const Rational total = reduced[width];
  MatrixGameSolution out;
  out.value = 1 / total - shift;
  out.column_strategy.assign(cols, Rational(0));
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] < cols) out.column_strategy[basis[i]] = tableau[i][width] / total;
  out.row_strategy.assign(rows, Rational(0));
  for (std::size_t i = 0; i < rows; ++i) out.row_strategy[i] = reduced[cols + i] / total;
  return out;
}

}  // namespace rpomdp
