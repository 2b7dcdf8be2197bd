#pragma once

#include "rpomdp/model.hpp"
#include "rpomdp/policies.hpp"
#include "rpomdp/trajectories.hpp"

#include <cstddef>
#include <map>

/**
 * Exact finite-horizon values, belief updates and the occupancy-state
 * recursion over joint histories.
 */
namespace rpomdp {

/// Distribution over states; only positive entries are stored.
using Belief = std::map<StateId, Rational>;

/// Dirac belief on the initial state.
Belief initial_belief(const Rpomdp& model);

/**
 * Successor belief after playing `a` under assignment `u` and observing the
 * triple (z_agent, z_nature, z_public).
 * Throws ImpossibleObservationError if the observation has probability zero.
 */
Belief belief_update(const Rpomdp& model, const Belief& b, ActionId a, const Assignment& u, ObsId z_agent,
                     ObsId z_nature, ObsId z_public);

/// Belief after a joint history, folding belief_update from the initial state.
Belief belief_after(const Rpomdp& model, const JointHistory& h);

/**
 * Expected total reward of the first `horizon` steps under (pi, theta), by
 * exact enumeration. Mixed policies are evaluated as weighted sums over their
 * components. Throws ContractError if nature plays an assignment outside the
 * uncertainty set or against the fixed variables.
 */
Rational value_fh(const Rpomdp& model, const AgentPolicy& pi, const NaturePolicy& theta, std::size_t horizon);

/// Distribution over joint histories of length `t` together with the nature
/// decisions taken so far.
struct OccupancyState {
  std::map<JointHistory, Rational> dist;
  /// Stochastic nature policy holding the choices used at lengths below `t`.
  NaturePolicy nature_prefix;
  std::size_t t = 0;
};

/// Dirac occupancy on the initial joint observation.
OccupancyState occupancy_init(const Rpomdp& model);

/**
 * Occupancy after one more step in which the agent plays `pi_t` and nature
 * plays `theta_t` on the histories of length `occ.t`. Both policies must be
 * stochastic or deterministic. Throws ContractError if `theta_t` plays an
 * inadmissible assignment.
 */
OccupancyState occupancy_next(const Rpomdp& model, const OccupancyState& occ, const AgentPolicy& pi_t,
                              const NaturePolicy& theta_t);

/// Expected reward of the step taken from `occ` when the agent plays `pi_t`.
Rational expected_reward(const Rpomdp& model, const OccupancyState& occ, const AgentPolicy& pi_t);

/**
 * Sum of expected_reward along the occupancy recursion for `horizon` steps.
 * Mixed policies are first converted to their stochastic equivalents.
 */
Rational occupancy_value(const Rpomdp& model, const AgentPolicy& pi, const NaturePolicy& theta,
                         std::size_t horizon);

/// Truncated discounted value and an a-priori bound on the omitted tail.
struct DiscountedValue {
  Rational value;
  /// gamma^horizon * max|R| / (1 - gamma).
  Rational tail_bound;
};

/**
 * Discounted value truncated after `horizon` steps. Requires 0 <= gamma < 1;
 * throws DomainError otherwise.
 */
DiscountedValue discounted_value(const Rpomdp& model, const AgentPolicy& pi, const NaturePolicy& theta,
                                 const Rational& gamma, std::size_t horizon);

}  // namespace rpomdp
