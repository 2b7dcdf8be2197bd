#pragma once

#include "rpomdp/model.hpp"

#include <compare>
#include <optional>
#include <set>
#include <vector>

/**
 * Paths, the fixed-variable bookkeeping along them, validity, and the
 * projections of paths onto joint, agent and nature histories.
 */
namespace rpomdp {

/// One step of a path: action, nature's assignment, successor state.
struct Step {
  ActionId action = 0;
  Assignment assignment;
  StateId next = 0;
  friend auto operator<=>(const Step&, const Step&) = default;
  friend bool operator==(const Step&, const Step&) = default;
};

/// A path of length n has n steps and visits n + 1 states.
struct Path {
  StateId initial = 0;
  std::vector<Step> steps;

  std::size_t length() const { return steps.size(); }
  StateId last() const { return steps.empty() ? initial : steps.back().next; }
  /// State visited after `k` steps.
  StateId state(std::size_t k) const { return k == 0 ? initial : steps[k - 1].next; }
  /// The first `k` steps.
  Path prefix(std::size_t k) const;
  Path extended(Step step) const;

  friend auto operator<=>(const Path&, const Path&) = default;
  friend bool operator==(const Path&, const Path&) = default;
};

struct JointStep {
  ActionId action = 0;
  Assignment assignment;
  ObsTriple obs;
  friend auto operator<=>(const JointStep&, const JointStep&) = default;
  friend bool operator==(const JointStep&, const JointStep&) = default;
};

/// Both players' observations, all actions and all assignments.
struct JointHistory {
  ObsTriple initial;
  std::vector<JointStep> steps;
  std::size_t length() const { return steps.size(); }
  const ObsTriple& last() const { return steps.empty() ? initial : steps.back().obs; }
  JointHistory prefix(std::size_t k) const;
  friend auto operator<=>(const JointHistory&, const JointHistory&) = default;
  friend bool operator==(const JointHistory&, const JointHistory&) = default;
};

struct AgentStep {
  ActionId action = 0;
  ObsPair obs;
  friend auto operator<=>(const AgentStep&, const AgentStep&) = default;
};

/// Agent observation pairs interleaved with the agent's own actions.
struct AgentHistory {
  ObsPair initial;
  std::vector<AgentStep> steps;
  std::size_t length() const { return steps.size(); }
  const ObsPair& last() const { return steps.empty() ? initial : steps.back().obs; }
  AgentHistory prefix(std::size_t k) const;
  AgentHistory extended(ActionId a, ObsPair z) const;
  friend auto operator<=>(const AgentHistory&, const AgentHistory&) = default;
};

struct NatureStep {
  ActionId action = 0;
  Assignment assignment;
  ObsPair obs;
  friend auto operator<=>(const NatureStep&, const NatureStep&) = default;
  friend bool operator==(const NatureStep&, const NatureStep&) = default;
};

/// Nature observation pairs interleaved with (agent action, assignment) pairs.
struct NatureHistory {
  ObsPair initial;
  std::vector<NatureStep> steps;
  std::size_t length() const { return steps.size(); }
  const ObsPair& last() const { return steps.empty() ? initial : steps.back().obs; }
  NatureHistory prefix(std::size_t k) const;
  NatureHistory extended(ActionId a, Assignment u, ObsPair z) const;
  friend auto operator<=>(const NatureHistory&, const NatureHistory&) = default;
  friend bool operator==(const NatureHistory&, const NatureHistory&) = default;
};

/// Fixed partial assignment accumulated along a path.
PartialAssignment fix(const Rpomdp& model, const Path& path);

/// Fixed partial assignment determined by a nature history (nature observes
/// everything the update depends on).
PartialAssignment fix(const Rpomdp& model, const NatureHistory& history);

/// Validity: positive step probabilities, members of the uncertainty set, and
/// agreement of each assignment with the prefix's fixed variables.
bool path_valid(const Rpomdp& model, const Path& path);

JointHistory observe_joint(const Rpomdp& model, const Path& path);
AgentHistory observe_agent(const Rpomdp& model, const Path& path);
NatureHistory observe_nature(const Rpomdp& model, const Path& path);

/// Agent part of a joint history.
AgentHistory agent_part(const JointHistory& h);
/// Nature part of a joint history.
NatureHistory nature_part(const JointHistory& h);

/**
 * Successors of (s, a) that have positive probability for some member of the
 * uncertainty set, ascending.
 */
std::vector<StateId> possible_successors(const Rpomdp& model, StateId s, ActionId a);

/**
 * Valid paths of length exactly `length`. Nature's assignments range over the
 * vertices of the constrained uncertainty set at each step plus the average of
 * those vertices, so the enumeration is finite.
 */
std::vector<Path> enumerate_valid_paths(const Rpomdp& model, std::size_t length);

struct NaturePolicy;

/**
 * Joint histories of length `t` that the nature policy can reach, for any
 * agent behaviour. Throws ContractError on invalid choices.
 */
std::set<JointHistory> relevant_histories(const Rpomdp& model, const NaturePolicy& theta,
                                          std::size_t t);

}  // namespace rpomdp
