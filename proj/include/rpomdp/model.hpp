#pragma once

#include "rpomdp/errors.hpp"
#include "rpomdp/rational.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

/**
 * Robust POMDP data model: states, actions, the three observation maps, the
 * uncertainty set over transition variables, the affine transition template,
 * stickiness and order of play.
 */
namespace rpomdp {

using StateId = std::size_t;
using ActionId = std::size_t;
using VarId = std::size_t;
using ObsId = std::size_t;

/// Label used for placeholder observations (a player with no private signal).
inline const std::string kBottomLabel = "~";

/// Total assignment of rational values to the variables, indexed by VarId.
using Assignment = std::vector<Rational>;

/// Partial assignment; std::nullopt marks an undefined variable.
using PartialAssignment = std::vector<std::optional<Rational>>;

/// The totally undefined partial assignment over `n` variables.
PartialAssignment undefined_assignment(std::size_t n);

/// True iff `u` matches `partial` on every variable `partial` defines.
bool agrees(const Assignment& u, const PartialAssignment& partial);

/// Affine expression `constant + sum coeff * var` with exact coefficients.
struct AffineExpr {
  Rational constant = 0;
  /// Only nonzero coefficients are stored.
  std::map<VarId, Rational> coefficients;

  AffineExpr() = default;
  explicit AffineExpr(Rational c) : constant(std::move(c)) {}
  /// The expression `coeff * var`.
  static AffineExpr variable(VarId var, Rational coeff = 1);

  Rational evaluate(const Assignment& u) const;
  bool is_constant() const { return coefficients.empty(); }
  bool is_zero() const { return constant == 0 && coefficients.empty(); }
  /// True iff the variable has a nonzero coefficient.
  bool mentions(VarId var) const { return coefficients.count(var) != 0; }

  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);
  AffineExpr& operator*=(const Rational& factor);
  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(AffineExpr a, const Rational& f) { return a *= f; }
  friend bool operator==(const AffineExpr&, const AffineExpr&) = default;
};

/// Closed interval with rational endpoints.
struct Interval {
  Rational lo;
  Rational hi;
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Relation { Equal, LessEqual, GreaterEqual };

/// Linear constraint `sum coeff * var  (=|<=|>=)  rhs`.
struct LinearConstraint {
  std::map<VarId, Rational> coefficients;
  Relation relation = Relation::Equal;
  Rational rhs = 0;

  bool satisfied_by(const Assignment& u) const;
  friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

/**
 * Polytope of admissible assignments: one box per variable plus linear
 * couplings.
 */
struct UncertaintySet {
  std::vector<std::string> variables;
  std::vector<Interval> boxes;
  std::vector<LinearConstraint> couplings;

  std::size_t size() const { return variables.size(); }
  std::optional<VarId> find(const std::string& name) const;
  /// Index of a variable name; throws DomainError if unknown.
  VarId index_of(const std::string& name) const;
  /// Exact membership test.
  bool contains(const Assignment& u) const;

  friend bool operator==(const UncertaintySet&, const UncertaintySet&) = default;
};

/**
 * Vertices of the polytope in lexicographic order, duplicate-free.
 * Throws InfeasibleError if the set is empty.
 */
std::vector<Assignment> uncertainty_vertices(const UncertaintySet& set);

/**
 * Tightens the boxes of all variables defined by `partial` to points.
 * Throws InfeasibleError if the result has no member.
 */
UncertaintySet constrain(const UncertaintySet& set, const PartialAssignment& partial);

/**
 * Solves the couplings' equality part for a parametrisation of the affine hull.
 *
 * Every member is `base + sum_k y_k * direction_k` where the parameters `y_k`
 * range over the variables listed in `free_variables` (each direction is the
 * unit vector of its free variable extended through the equalities).
 */
struct AffineHull {
  Assignment base;
  std::vector<VarId> free_variables;
  std::vector<Assignment> directions;
  /// Point with the given free-variable values, equalities resolved.
  Assignment point(const std::vector<Rational>& free_values) const;
};

/// Affine hull of the equalities (couplings with Relation::Equal and point boxes).
/// Returns std::nullopt if the equalities are inconsistent.
std::optional<AffineHull> equality_hull(const UncertaintySet& set);

/// Memoizes the vertices of constrain(set, partial) per partial assignment.
/// Not thread-safe; use one instance per thread.
class VertexCache {
 public:
  explicit VertexCache(const UncertaintySet& set) : set_(&set) {}
  /// Vertices of constrain(set, partial); throws InfeasibleError if empty.
  const std::vector<Assignment>& vertices(const PartialAssignment& partial);

 private:
  const UncertaintySet* set_;
  std::map<PartialAssignment, std::vector<Assignment>> cache_;
};

enum class StickinessKind { Zero, Full, ObservationBased, Custom };

/// Entry of a custom stickiness table: (variable, nature obs, public obs, action).
using StickKey = std::tuple<VarId, ObsId, ObsId, ActionId>;

struct StickinessFunction {
  StickinessKind kind = StickinessKind::Zero;
  /// Custom only: the keys for which the variable sticks.
  std::set<StickKey> custom_table;
  /// ObservationBased only: influence[v] lists the (state, action) pairs whose
  /// transitions depend on v.
  std::vector<std::set<std::pair<StateId, ActionId>>> influence;

  friend bool operator==(const StickinessFunction&, const StickinessFunction&) = default;
};

enum class PlayOrder { AgentFirst, NatureFirst };

/// Observation pair seen by one player: (private label, public label).
struct ObsPair {
  ObsId priv = 0;
  ObsId pub = 0;
  friend auto operator<=>(const ObsPair&, const ObsPair&) = default;
};

/// The three observations of a state.
struct ObsTriple {
  ObsId agent = 0;
  ObsId nature = 0;
  ObsId pub = 0;
  ObsPair agent_pair() const { return {agent, pub}; }
  ObsPair nature_pair() const { return {nature, pub}; }
  friend auto operator<=>(const ObsTriple&, const ObsTriple&) = default;
};

/**
 * A robust POMDP.
 *
 * Every state has a nonempty set of enabled actions; states that look the same
 * to the agent must enable the same actions. The transition template is dense
 * over (state, action, successor) and is only meaningful for enabled actions.
 */
struct Rpomdp {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  StateId initial_state = 0;

  std::vector<std::string> agent_observations;
  std::vector<std::string> nature_observations;
  std::vector<std::string> public_observations;
  /// Per-state observation labels, indices into the alphabets above.
  std::vector<ObsId> obs_agent;
  std::vector<ObsId> obs_nature;
  std::vector<ObsId> obs_public;

  /// Per-state enabled actions in ascending order.
  std::vector<std::vector<ActionId>> enabled;
  /// rewards[s][a].
  std::vector<std::vector<Rational>> rewards;
  /// transitions[s][a][s'].
  std::vector<std::vector<std::vector<AffineExpr>>> transitions;

  UncertaintySet uncertainty;
  StickinessFunction stickiness;
  PlayOrder play_order = PlayOrder::AgentFirst;

  std::size_t num_states() const { return states.size(); }
  std::size_t num_actions() const { return actions.size(); }
  std::size_t num_variables() const { return uncertainty.size(); }

  StateId state_index(const std::string& name) const;
  ActionId action_index(const std::string& name) const;
  ObsId agent_obs_index(const std::string& name) const;
  ObsId nature_obs_index(const std::string& name) const;
  ObsId public_obs_index(const std::string& name) const;

  ObsTriple observe(StateId s) const { return {obs_agent[s], obs_nature[s], obs_public[s]}; }
  bool is_enabled(StateId s, ActionId a) const;
  /// Enabled actions of any state whose agent observation pair is `z`.
  /// Throws DomainError if no state carries that observation pair.
  const std::vector<ActionId>& enabled_for(const ObsPair& z) const;

  const AffineExpr& entry(StateId s, ActionId a, StateId next) const { return transitions[s][a][next]; }
  Rational probability(StateId s, ActionId a, StateId next, const Assignment& u) const {
    return transitions[s][a][next].evaluate(u);
  }
  /// Successors with a not-identically-zero template entry.
  std::vector<StateId> template_successors(StateId s, ActionId a) const;

  friend bool operator==(const Rpomdp&, const Rpomdp&) = default;
};

/// Creates an empty model with the given dimensions; all entries zero,
/// all actions enabled everywhere, zero stickiness, agent-first.
Rpomdp make_model(std::vector<std::string> states, std::vector<std::string> actions,
                  std::vector<std::string> agent_obs, std::vector<std::string> nature_obs,
                  std::vector<std::string> public_obs);

/// Graph-preservation status of one template entry.
struct GraphEntry {
  StateId state;
  ActionId action;
  StateId next;
  /// True iff the entry is zero for some member and positive for another.
  bool support_varies;
};

struct ValidationReport {
  std::vector<std::string> violations;
  /// One line per template entry whose support depends on the assignment.
  std::vector<GraphEntry> graph_changes;
  bool ok() const { return violations.empty(); }
  bool graph_preserving() const { return graph_changes.empty(); }
};

/// Lists every structural violation; never throws.
ValidationReport validate_model(const Rpomdp& model);

/// Stickiness predicate. Throws DomainError on unknown identifiers.
bool stick(const Rpomdp& model, VarId v, ObsId z_nature, ObsId z_public, ActionId a);

/// Variables that stick when `a` is played in `s`, ascending.
std::vector<VarId> sticking_variables(const Rpomdp& model, StateId s, ActionId a);

/// Influence relation read off the template: (s,a) is in influence[v] iff some
/// entry of row (s,a) has a nonzero coefficient on v.
std::vector<std::set<std::pair<StateId, ActionId>>> derive_influence(const Rpomdp& model);

/**
 * Updates the fixed partial assignment after nature plays `u` in a state
 * observed as (z_nature, z_public) with agent action `a`.
 * Throws InvalidChoiceError if `u` does not agree with `partial`.
 */
PartialAssignment upd(const Rpomdp& model, const PartialAssignment& partial, const Assignment& u,
                      ObsId z_nature, ObsId z_public, ActionId a);

/// Entry of a joint transition-observation template.
struct ObservedTransition {
  StateId next;
  ObsId agent;
  ObsId nature;
  ObsId pub;
  AffineExpr probability;
};

/**
 * Model whose observations are emitted stochastically together with the
 * successor state. `initial_observation` is the observation triple of the
 * initial state.
 */
struct RawRpomdp {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  StateId initial_state = 0;
  std::vector<std::string> agent_observations;
  std::vector<std::string> nature_observations;
  std::vector<std::string> public_observations;
  ObsTriple initial_observation;
  std::vector<std::vector<ActionId>> enabled;
  std::vector<std::vector<Rational>> rewards;
  /// joint[s][a] lists the successor/observation entries of row (s, a).
  std::vector<std::vector<std::vector<ObservedTransition>>> joint;
  UncertaintySet uncertainty;
  /// Custom tables refer to the shared observation alphabets; ObservationBased
  /// influence refers to original states and is lifted to product states.
  StickinessFunction stickiness;
  PlayOrder play_order = PlayOrder::AgentFirst;
};

/**
 * Product construction that moves observations into the state.
 *
 * States of the result are the reachable tuples (s, z_agent, z_nature, z_public),
 * named `s|za|zn|zp`; observation maps are the projections and rewards are
 * lifted. Throws DomainError on a malformed template.
 */
Rpomdp determinize_observations(const RawRpomdp& raw);

}  // namespace rpomdp
