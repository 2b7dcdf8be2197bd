#pragma once

#include "rpomdp/model.hpp"
#include "rpomdp/policies.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

/**
 * Best responses and saddle-point search for finite-horizon robust POMDPs.
 */
namespace rpomdp {

struct SolverConfig {
  /// The saddle search stops once upper - lower is at most this.
  Rational tolerance = Rational(1, 1000);
  /// Grid points per free variable when the nature value is not linear.
  std::size_t grid_points = 5;
  /// Local refinement rounds; round r probes at spacing / 2^r.
  std::size_t refinement_rounds = 8;
  /// Cap on enumerated deterministic agent policies.
  std::size_t policy_cap = 100000;
  /// Cap on double-oracle rounds.
  std::size_t max_rounds = 100;
  /// Result of detect_nature_linearity if already known; computed on demand otherwise.
  std::optional<bool> nature_linear;
};

struct SaddleResult {
  /// Worst case over nature's candidates and best response of the agent mixture.
  Rational lower_value;
  /// Agent's best-response value against the nature mixture.
  Rational upper_value;
  /// Mixed policies of the reported round.
  AgentPolicy agent_policy;
  NaturePolicy nature_policy;
  Rational gap;
  std::size_t iterations = 0;
  /// Finest grid spacing probed by the nature best responses (0 if only
  /// vertices were used).
  Rational grid_resolution;
  /// Whether nature's value was detected to be linear per decision block.
  bool nature_linear = false;
  /// Smallest gap seen up to each round.
  std::vector<Rational> gap_history;
  std::size_t agent_candidates = 0;
  std::size_t nature_candidates = 0;
};

/**
 * True iff, for every deterministic agent policy, the value as a polynomial
 * in nature's per-block choices has degree at most 1 in the variables of each
 * block. A block is a nature decision point with the assignments erased.
 * Throws CapacityError if there are more than `policy_cap` deterministic
 * agent policies.
 */
bool detect_nature_linearity(const Rpomdp& model, std::size_t horizon, std::size_t policy_cap = 100000);

/**
 * Deterministic nature policy minimizing the value against `pi` (any kind),
 * and that value. Exact over vertices when nature's value is linear;
 * otherwise a grid search with local refinement per decision point, whose
 * returned value is exact for the returned policy.
 */
std::pair<NaturePolicy, Rational> nature_best_response(const Rpomdp& model, const AgentPolicy& pi,
                                                       std::size_t horizon, const SolverConfig& config = {});

/**
 * Deterministic agent policy maximizing the value against `theta` (any kind),
 * and that value, by exact backward induction over agent histories. Ties go
 * to the lowest action.
 */
std::pair<AgentPolicy, Rational> agent_best_response(const Rpomdp& model, const NaturePolicy& theta,
                                                     std::size_t horizon, const SolverConfig& config = {});

/**
 * Double-oracle search over deterministic candidate policies with exact
 * matrix-game solves. Stops when the gap is within tolerance, no new
 * candidate appears, or the round cap is hit; reports the round with the
 * smallest gap.
 */
SaddleResult solve_saddle(const Rpomdp& model, std::size_t horizon, const SolverConfig& config = {});

}  // namespace rpomdp
