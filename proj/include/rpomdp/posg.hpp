#pragma once

#include "rpomdp/model.hpp"
#include "rpomdp/policies.hpp"
#include "rpomdp/trajectories.hpp"

#include <compare>
#include <map>
#include <optional>
#include <variant>
#include <vector>

/**
 * Turn-based two-player partially observable stochastic game of an RPOMDP,
 * in agent-first or nature-first form, with the bijections between RPOMDP and
 * game paths, histories and policies.
 */
namespace rpomdp {

/// State where the agent moves. In nature-first games it carries nature's
/// pending assignment.
struct PosgAgentState {
  StateId base = 0;
  PartialAssignment fixed;
  std::optional<Assignment> pending;
  friend auto operator<=>(const PosgAgentState&, const PosgAgentState&) = default;
  friend bool operator==(const PosgAgentState&, const PosgAgentState&) = default;
};

/// State where nature moves. `last_action` is the action just played
/// (agent-first) or the previous round's action, empty at the start
/// (nature-first).
struct PosgNatureState {
  StateId base = 0;
  PartialAssignment fixed;
  std::optional<ActionId> last_action;
  friend auto operator<=>(const PosgNatureState&, const PosgNatureState&) = default;
  friend bool operator==(const PosgNatureState&, const PosgNatureState&) = default;
};

using PosgState = std::variant<PosgAgentState, PosgNatureState>;
/// An agent action or a nature assignment.
using PosgMove = std::variant<ActionId, Assignment>;

/// Alternating sequence of states and moves; `states.size() == moves.size() + 1`.
struct PosgPath {
  std::vector<PosgState> states;
  std::vector<PosgMove> moves;
  friend auto operator<=>(const PosgPath&, const PosgPath&) = default;
  friend bool operator==(const PosgPath&, const PosgPath&) = default;
};

/// Nature's observation of a game state: its labels plus an action component
/// that is empty on agent states.
struct PosgNatureObs {
  ObsId priv = 0;
  ObsId pub = 0;
  std::optional<ActionId> action;
  friend auto operator<=>(const PosgNatureObs&, const PosgNatureObs&) = default;
  friend bool operator==(const PosgNatureObs&, const PosgNatureObs&) = default;
};

/// Both observations of a game state.
struct PosgJointObs {
  ObsPair agent;
  PosgNatureObs nature;
  friend auto operator<=>(const PosgJointObs&, const PosgJointObs&) = default;
  friend bool operator==(const PosgJointObs&, const PosgJointObs&) = default;
};

using PosgAgentHistory = std::vector<std::variant<ObsPair, ActionId>>;
using PosgNatureHistory = std::vector<std::variant<PosgNatureObs, Assignment>>;
using PosgJointHistory = std::vector<std::variant<PosgJointObs, PosgMove>>;

/**
 * On-demand game over an RPOMDP. Rewards live on agent moves; nature's moves
 * earn nothing. Nature may play exactly the members of the uncertainty set
 * that agree with the state's fixed variables.
 */
class Posg {
 public:
  Posg(const Rpomdp& model, std::size_t horizon);

  const Rpomdp& model() const { return *model_; }
  PlayOrder mode() const { return model_->play_order; }
  std::size_t horizon() const { return horizon_; }

  PosgState initial_state() const;
  static bool is_agent_state(const PosgState& s) { return std::holds_alternative<PosgAgentState>(s); }

  const std::vector<ActionId>& agent_actions(const PosgAgentState& s) const { return model_->enabled[s.base]; }
  /// True iff `u` is a legal nature move in `s`.
  bool nature_move_legal(const PosgNatureState& s, const Assignment& u) const;
  /// Vertices of nature's legal moves (a finite sample used for inspection).
  std::vector<Assignment> nature_move_vertices(const PosgNatureState& s) const;

  /// Successor distribution of an agent move.
  std::vector<std::pair<PosgState, Rational>> agent_step(const PosgAgentState& s, ActionId a) const;
  /// Successor distribution of a nature move; empty if the move is illegal.
  std::vector<std::pair<PosgState, Rational>> nature_step(const PosgNatureState& s, const Assignment& u) const;

  Rational reward(const PosgState& s, const PosgMove& move) const;
  ObsPair agent_observation(const PosgState& s) const;
  PosgNatureObs nature_observation(const PosgState& s) const;
  PosgJointObs joint_observation(const PosgState& s) const { return {agent_observation(s), nature_observation(s)}; }

 private:
  const Rpomdp* model_;
  std::size_t horizon_;
};

Posg build_posg(const Rpomdp& model, std::size_t horizon);

/// Game path of an RPOMDP path. Throws DomainError if the path is invalid.
PosgPath map_path(const Rpomdp& model, const Posg& posg, const Path& path);
/// Inverse of map_path. Throws DomainError on malformed input.
Path unmap_path(const Posg& posg, const PosgPath& path);

/// Observation sequences of game paths.
PosgJointHistory posg_observe_joint(const Posg& posg, const PosgPath& path);
PosgAgentHistory posg_observe_agent(const Posg& posg, const PosgPath& path);
PosgNatureHistory posg_observe_nature(const Posg& posg, const PosgPath& path);

/// History bijections. The mapped histories end at the game state that
/// corresponds to the last RPOMDP state.
PosgJointHistory map_joint_history(const Rpomdp& model, const JointHistory& h);
JointHistory unmap_joint_history(const Rpomdp& model, const PosgJointHistory& h);
PosgAgentHistory map_agent_history(const Rpomdp& model, const AgentHistory& h);
AgentHistory unmap_agent_history(const Rpomdp& model, const PosgAgentHistory& h);
PosgNatureHistory map_nature_history(const Rpomdp& model, const NatureHistory& h);
NatureHistory unmap_nature_history(const Rpomdp& model, const PosgNatureHistory& h);

struct PosgAgentComponent;
struct PosgNatureComponent;

/// Agent policy of the game, keyed by the agent's history at an agent state.
struct PosgAgentPolicy {
  PolicyKind kind = PolicyKind::Deterministic;
  std::map<PosgAgentHistory, ActionDistribution> table;
  std::vector<PosgAgentComponent> mixture;
};

/// Nature policy of the game, keyed by nature's history at a nature state.
struct PosgNaturePolicy {
  PolicyKind kind = PolicyKind::Deterministic;
  std::map<PosgNatureHistory, AssignmentDistribution> table;
  std::vector<PosgNatureComponent> mixture;
};

struct PosgAgentComponent {
  Rational weight;
  PosgAgentPolicy policy;
};

struct PosgNatureComponent {
  Rational weight;
  PosgNaturePolicy policy;
};

/// Game history at which the agent decides after RPOMDP agent history `h`.
PosgAgentHistory agent_decision_history(const Rpomdp& model, const AgentHistory& h);
/// Game history at which nature decides at the RPOMDP decision point `key`.
PosgNatureHistory nature_decision_history(const Rpomdp& model, const NatureKey& key);

/**
 * Game policy corresponding to an RPOMDP policy. Lookups are materialized on
 * every decision point reachable before `horizon`, so fallback entries are
 * carried over.
 */
PosgAgentPolicy map_agent_policy(const Rpomdp& model, const AgentPolicy& pi, std::size_t horizon);
PosgNaturePolicy map_nature_policy(const Rpomdp& model, const NaturePolicy& theta, std::size_t horizon);
/// Inverses of the policy maps on the stored entries.
AgentPolicy unmap_agent_policy(const Rpomdp& model, const PosgAgentPolicy& pi);
NaturePolicy unmap_nature_policy(const Rpomdp& model, const PosgNaturePolicy& theta);

/**
 * Expected reward of `horizon` rounds of the game by exact enumeration of game
 * paths. Throws ContractError if a reached history is missing from a policy.
 */
Rational posg_value(const Posg& posg, const PosgAgentPolicy& pi, const PosgNaturePolicy& theta,
                    std::size_t horizon);

}  // namespace rpomdp
