#pragma once

#include "rpomdp/model.hpp"
#include "rpomdp/trajectories.hpp"

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <vector>

/**
 * Agent and nature policies (stochastic, deterministic, mixed), their
 * validity, path probabilities and distributions, and the conversions between
 * stochastic and mixed policies.
 */
namespace rpomdp {

using ActionDistribution = std::map<ActionId, Rational>;
using AssignmentDistribution = std::map<Assignment, Rational>;
/// Probability of each path of a fixed length.
using PathDistribution = std::map<Path, Rational>;

enum class PolicyKind { Stochastic, Deterministic, Mixed };

struct AgentComponent;

/**
 * Agent policy over agent histories.
 *
 * Stochastic and deterministic policies store a table of distributions
 * (Dirac for deterministic ones). Histories missing from the table fall back
 * to the first enabled action. Mixed policies store weighted deterministic
 * components.
 */
struct AgentPolicy {
  PolicyKind kind = PolicyKind::Deterministic;
  std::map<AgentHistory, ActionDistribution> table;
  std::vector<AgentComponent> mixture;

  /// Distribution at `h` (not for mixed policies).
  ActionDistribution at(const Rpomdp& model, const AgentHistory& h) const;
  bool defines(const AgentHistory& h) const { return table.count(h) != 0; }
};

struct AgentComponent {
  Rational weight;
  AgentPolicy policy;
};

AgentPolicy agent_deterministic(const std::map<AgentHistory, ActionId>& choices);
/// Drops zero entries; throws ContractError unless every distribution sums to 1.
AgentPolicy agent_stochastic(std::map<AgentHistory, ActionDistribution> table);
/// Drops zero weights; throws ContractError unless components are deterministic
/// and the weights sum to 1.
AgentPolicy agent_mixed(std::vector<AgentComponent> components);

/// Nature decision point: a nature history plus, in agent-first models, the
/// agent action nature has just observed.
struct NatureKey {
  NatureHistory history;
  std::optional<ActionId> action;
  friend auto operator<=>(const NatureKey&, const NatureKey&) = default;
  friend bool operator==(const NatureKey&, const NatureKey&) = default;
};

/// Decision point for `h` and the agent's action `a`; the action is dropped
/// in nature-first models.
NatureKey nature_key(const Rpomdp& model, const NatureHistory& h, ActionId a);

struct NaturePatternStep {
  ActionId action = 0;
  /// std::nullopt matches any assignment.
  std::optional<Assignment> assignment;
  ObsPair obs;
};

/// Nature history with wildcard assignments.
struct NaturePattern {
  ObsPair initial;
  std::vector<NaturePatternStep> steps;
  std::optional<ActionId> action;
  bool matches(const NatureKey& key) const;
};

struct NatureComponent;

/**
 * Nature policy over decision points.
 *
 * Lookup order: the exact table, then the first matching pattern, then the
 * fallback Dirac on the first vertex of the uncertainty set constrained by the
 * history's fixed variables.
 */
struct NaturePolicy {
  PolicyKind kind = PolicyKind::Deterministic;
  std::map<NatureKey, AssignmentDistribution> table;
  std::vector<std::pair<NaturePattern, AssignmentDistribution>> patterns;
  std::vector<NatureComponent> mixture;

  /// Distribution at `key` (not for mixed policies).
  AssignmentDistribution at(const Rpomdp& model, const NatureKey& key,
                            VertexCache* cache = nullptr) const;
  /// True iff the table or a pattern covers `key`.
  bool defines(const NatureKey& key) const;
};

struct NatureComponent {
  Rational weight;
  NaturePolicy policy;
};

NaturePolicy nature_deterministic(const std::map<NatureKey, Assignment>& choices);
/// Drops zero entries; throws ContractError unless every distribution sums to 1.
NaturePolicy nature_stochastic(std::map<NatureKey, AssignmentDistribution> table);
/// Drops zero weights; throws ContractError unless components are deterministic
/// and the weights sum to 1.
NaturePolicy nature_mixed(std::vector<NatureComponent> components);

/**
 * Validity of a nature policy: normalized finite distributions whose support
 * lies in the uncertainty set and agrees with the fixed variables of each
 * decision point. Explicit table entries are always checked; when `horizon`
 * is positive, every decision point reachable before `horizon` is checked too
 * (this covers pattern and fallback lookups).
 */
bool policy_valid(const Rpomdp& model, const NaturePolicy& theta, std::size_t horizon = 0);

/// Normalized distributions over enabled actions.
bool policy_valid(const Rpomdp& model, const AgentPolicy& pi);

/// Probability of a path; invalid steps contribute a factor 0.
Rational path_probability(const Rpomdp& model, const AgentPolicy& pi, const NaturePolicy& theta,
                          const Path& path);

/// Distribution over valid paths of length `horizon` with positive probability.
PathDistribution path_distribution(const Rpomdp& model, const AgentPolicy& pi,
                                   const NaturePolicy& theta, std::size_t horizon);

/**
 * Calls `visit(key, fixed, distribution)` once for every nature decision point
 * at depth below `horizon` that is reachable when nature plays inside the
 * support of `theta` (any agent action is allowed). Throws ContractError if a
 * supported assignment disagrees with the fixed variables.
 */
void for_each_nature_decision(
    const Rpomdp& model, const NaturePolicy& theta, std::size_t horizon,
    const std::function<void(const NatureKey&, const PartialAssignment&,
                             const AssignmentDistribution&)>& visit);

/**
 * Calls `visit(history, distribution)` once for every agent history at depth
 * below `horizon` reachable when the agent plays inside the support of `pi`
 * (observations range over all successors possible under the uncertainty set).
 */
void for_each_agent_decision(
    const Rpomdp& model, const AgentPolicy& pi, std::size_t horizon,
    const std::function<void(const AgentHistory&, const ActionDistribution&)>& visit);

/**
 * Mixed policy equivalent to a stochastic nature policy at `horizon`: one
 * deterministic component per combination of choices along its own reachable
 * decision points, weighted by the product of the choice probabilities.
 */
NaturePolicy mixed_from_stochastic(const Rpomdp& model, const NaturePolicy& theta, std::size_t horizon);
/// Agent counterpart of the nature conversion.
AgentPolicy mixed_from_stochastic(const Rpomdp& model, const AgentPolicy& pi, std::size_t horizon);

/**
 * Stochastic policy equivalent to a mixed nature policy at `horizon`: at each
 * relevant decision point, the choice distribution of the components that
 * reach it, weighted by their mixture weights.
 */
NaturePolicy stochastic_from_mixed(const Rpomdp& model, const NaturePolicy& theta_mix,
                                   std::size_t horizon);
/// Agent counterpart of the nature conversion.
AgentPolicy stochastic_from_mixed(const Rpomdp& model, const AgentPolicy& pi_mix, std::size_t horizon);

/// Number of distinct deterministic agent policies on histories shorter than `horizon`.
std::size_t count_deterministic_agent_policies(const Rpomdp& model, std::size_t horizon);

/**
 * All deterministic agent policies, each defined on exactly the histories it
 * can reach before `horizon`. Throws CapacityError (with the count) if there
 * are more than `cap`.
 */
std::vector<AgentPolicy> enumerate_deterministic_agent_policies(const Rpomdp& model,
                                                                std::size_t horizon,
                                                                std::size_t cap = 100000);

}  // namespace rpomdp
