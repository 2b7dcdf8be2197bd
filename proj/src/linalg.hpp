#pragma once

#include "rpomdp/rational.hpp"

#include <optional>
#include <vector>

namespace rpomdp::detail {

using Matrix = std::vector<std::vector<Rational>>;

/// Solves the square system `a x = b` exactly; std::nullopt if singular.
std::optional<std::vector<Rational>> solve_square(Matrix a, std::vector<Rational> b);

/// Result of reducing an augmented system to reduced row echelon form.
struct Echelon {
  /// Reduced rows, each of width `columns + 1` (last entry is the right-hand side).
  Matrix rows;
  /// Pivot column of each reduced row.
  std::vector<std::size_t> pivots;
  /// False iff some row reduced to `0 = c` with c nonzero.
  bool consistent = true;
};

/// Gauss-Jordan elimination of the augmented matrix with `columns` unknowns.
Echelon reduce(Matrix augmented, std::size_t columns);

}  // namespace rpomdp::detail
