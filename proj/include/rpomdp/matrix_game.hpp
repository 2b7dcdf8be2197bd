#pragma once

#include "rpomdp/rational.hpp"

#include <vector>

/**
 * Exact solution of finite two-player zero-sum matrix games over rationals.
 */
namespace rpomdp {

/// Optimal mixed strategies and the value of a matrix game.
struct MatrixGameSolution {
  Rational value;
  /// Row player's strategy (maximizer), one weight per row.
  std::vector<Rational> row_strategy;
  /// Column player's strategy (minimizer), one weight per column.
  std::vector<Rational> column_strategy;
};

/**
 * Solves max_x min_y x^T A y exactly with the simplex method under Bland's
 * rule. `payoff[i][j]` is the row player's gain when row i meets column j.
 * Throws DomainError on an empty or ragged matrix.
 */
MatrixGameSolution solve_matrix_game(const std::vector<std::vector<Rational>>& payoff);

}  // namespace rpomdp
