#include "rpomdp/policies.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace rpomdp {

namespace {

template <class Dist>
void check_distribution(Dist& dist, const char* what) {
  Rational total = 0;
  for (auto it = dist.begin(); it != dist.end();) {
    if (it->second < 0) throw ContractError(std::string(what) + ": negative probability");
    if (it->second == 0) {
      it = dist.erase(it);
      continue;
    }
    total += it->second;
    ++it;
  }
  if (total != 1) throw ContractError(std::string(what) + ": distribution does not sum to 1");
}

template <class Dist>
bool is_distribution(const Dist& dist) {
  Rational total = 0;
  for (const auto& [x, p] : dist) {
    if (p <= 0) return false;
    total += p;
  }
  return total == 1;
}

/// Adds the newly sticking variables of `u` in place.
void stick_into(const Rpomdp& m, PartialAssignment& fixed, const Assignment& u, const ObsPair& z,
                ActionId a) {
  for (VarId v = 0; v < m.num_variables(); ++v)
    if (!fixed[v] && stick(m, v, z.priv, z.pub, a)) fixed[v] = u[v];
}

/// Union of the enabled actions of a set of states, ascending.
std::vector<ActionId> enabled_union(const Rpomdp& m, const std::set<StateId>& states) {
  std::set<ActionId> out;
  for (StateId s : states) out.insert(m.enabled[s].begin(), m.enabled[s].end());
  return {out.begin(), out.end()};
}

/// Successor groups of a nature node under (a, u), keyed by nature observation.
std::map<ObsPair, std::set<StateId>> nature_children(const Rpomdp& m, const std::set<StateId>& states,
                                                     ActionId a, const Assignment& u) {
  std::map<ObsPair, std::set<StateId>> out;
  for (StateId s : states) {
    if (!m.is_enabled(s, a)) continue;
    for (StateId t = 0; t < m.num_states(); ++t)
      if (m.probability(s, a, t, u) > 0) out[m.observe(t).nature_pair()].insert(t);
  }
  return out;
}

struct NatureNode {
  NatureHistory history;
  std::set<StateId> states;
  PartialAssignment fixed;
};

NatureNode nature_root(const Rpomdp& m) {
  return {NatureHistory{m.observe(m.initial_state).nature_pair(), {}}, {m.initial_state},
          undefined_assignment(m.num_variables())};
}

/// Children of a node after nature plays `u` and the agent plays `a`.
std::vector<NatureNode> expand_nature(const Rpomdp& m, const NatureNode& node, ActionId a,
                                      const Assignment& u) {
  if (!m.uncertainty.contains(u) || !agrees(u, node.fixed))
    throw ContractError("nature choice disagrees with the fixed variables");
  PartialAssignment fixed = node.fixed;
  stick_into(m, fixed, u, node.history.last(), a);
  std::vector<NatureNode> out;
  for (auto& [z, states] : nature_children(m, node.states, a, u))
    out.push_back({node.history.extended(a, u, z), std::move(states), fixed});
  return out;
}

struct AgentNode {
  AgentHistory history;
  std::set<StateId> states;
};

/// Per-model cache of successors possible under some member of the uncertainty set.
class PossibleSuccessors {
 public:
  explicit PossibleSuccessors(const Rpomdp& m) : m_(m), vertices_(uncertainty_vertices(m.uncertainty)) {}
  std::map<ObsPair, std::set<StateId>> children(const std::set<StateId>& states, ActionId a) const {
    std::map<ObsPair, std::set<StateId>> out;
    for (StateId s : states) {
      if (!m_.is_enabled(s, a)) continue;
      for (StateId t = 0; t < m_.num_states(); ++t) {
        const AffineExpr& e = m_.entry(s, a, t);
        if (e.is_zero()) continue;
        if (std::any_of(vertices_.begin(), vertices_.end(),
                        [&](const Assignment& u) { return e.evaluate(u) > 0; }))
          out[m_.observe(t).agent_pair()].insert(t);
      }
    }
    return out;
  }

 private:
  const Rpomdp& m_;
  std::vector<Assignment> vertices_;
};

AgentNode agent_root(const Rpomdp& m) {
  return {AgentHistory{m.observe(m.initial_state).agent_pair(), {}}, {m.initial_state}};
}

/// Calls fn(weight, pi_i, theta_j) over the pure pairs of two possibly mixed policies.
template <class Fn>
void for_each_pair(const AgentPolicy& pi, const NaturePolicy& theta, Fn&& fn) {
  auto agents = [&](auto&& inner) {
    if (pi.kind == PolicyKind::Mixed) {
      for (const auto& c : pi.mixture) inner(c.weight, c.policy);
    } else {
      inner(Rational(1), pi);
    }
  };
  agents([&](const Rational& wa, const AgentPolicy& p) {
    if (theta.kind == PolicyKind::Mixed) {
      for (const auto& c : theta.mixture) fn(wa * c.weight, p, c.policy);
    } else {
      fn(wa, p, theta);
    }
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction and lookup

ActionDistribution AgentPolicy::at(const Rpomdp& m, const AgentHistory& h) const {
  if (kind == PolicyKind::Mixed) throw ContractError("lookup on a mixed agent policy");
  if (auto it = table.find(h); it != table.end()) return it->second;
  return {{m.enabled_for(h.last()).front(), Rational(1)}};
}

AgentPolicy agent_deterministic(const std::map<AgentHistory, ActionId>& choices) {
  AgentPolicy p;
  p.kind = PolicyKind::Deterministic;
  for (const auto& [h, a] : choices) p.table[h] = {{a, Rational(1)}};
  return p;
}

AgentPolicy agent_stochastic(std::map<AgentHistory, ActionDistribution> table) {
  for (auto& [h, d] : table) check_distribution(d, "agent policy");
  AgentPolicy p;
  p.kind = PolicyKind::Stochastic;
  p.table = std::move(table);
  return p;
}

AgentPolicy agent_mixed(std::vector<AgentComponent> components) {
  AgentPolicy p;
  p.kind = PolicyKind::Mixed;
  Rational total = 0;
  for (auto& c : components) {
    if (c.weight < 0) throw ContractError("negative mixture weight");
    if (c.weight == 0) continue;
    if (c.policy.kind != PolicyKind::Deterministic)
      throw ContractError("mixture components must be deterministic");
    total += c.weight;
    p.mixture.push_back(std::move(c));
  }
  if (total != 1) throw ContractError("mixture weights do not sum to 1");
  return p;
}

NatureKey nature_key(const Rpomdp& m, const NatureHistory& h, ActionId a) {
  if (m.play_order == PlayOrder::AgentFirst) return {h, a};
  return {h, std::nullopt};
}

bool NaturePattern::matches(const NatureKey& key) const {
  if (key.action != action || key.history.initial != initial ||
      key.history.steps.size() != steps.size())
    return false;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& want = steps[k];
    const auto& got = key.history.steps[k];
    if (want.action != got.action || want.obs != got.obs) return false;
    if (want.assignment && *want.assignment != got.assignment) return false;
  }
  return true;
}

AssignmentDistribution NaturePolicy::at(const Rpomdp& m, const NatureKey& key, VertexCache* cache) const {
  if (kind == PolicyKind::Mixed) throw ContractError("lookup on a mixed nature policy");
  if (auto it = table.find(key); it != table.end()) return it->second;
  for (const auto& [pattern, dist] : patterns)
    if (pattern.matches(key)) return dist;
  PartialAssignment fixed = fix(m, key.history);
  if (cache) return {{cache->vertices(fixed).front(), Rational(1)}};
  return {{uncertainty_vertices(constrain(m.uncertainty, fixed)).front(), Rational(1)}};
}

bool NaturePolicy::defines(const NatureKey& key) const {
  if (table.count(key)) return true;
  return std::any_of(patterns.begin(), patterns.end(),
                     [&](const auto& entry) { return entry.first.matches(key); });
}

NaturePolicy nature_deterministic(const std::map<NatureKey, Assignment>& choices) {
  NaturePolicy p;
  p.kind = PolicyKind::Deterministic;
  for (const auto& [k, u] : choices) p.table[k] = {{u, Rational(1)}};
  return p;
}

NaturePolicy nature_stochastic(std::map<NatureKey, AssignmentDistribution> table) {
  for (auto& [k, d] : table) check_distribution(d, "nature policy");
  NaturePolicy p;
  p.kind = PolicyKind::Stochastic;
  p.table = std::move(table);
  return p;
}

NaturePolicy nature_mixed(std::vector<NatureComponent> components) {
  NaturePolicy p;
  p.kind = PolicyKind::Mixed;
  Rational total = 0;
  for (auto& c : components) {
    if (c.weight < 0) throw ContractError("negative mixture weight");
    if (c.weight == 0) continue;
    if (c.policy.kind != PolicyKind::Deterministic)
      throw ContractError("mixture components must be deterministic");
    total += c.weight;
    p.mixture.push_back(std::move(c));
  }
  if (total != 1) throw ContractError("mixture weights do not sum to 1");
  return p;
}

// ---------------------------------------------------------------------------
// Reachable decision points

void for_each_nature_decision(
    const Rpomdp& m, const NaturePolicy& theta, std::size_t horizon,
    const std::function<void(const NatureKey&, const PartialAssignment&, const AssignmentDistribution&)>&
        visit) {
  if (theta.kind == PolicyKind::Mixed) {
    for (const auto& c : theta.mixture) for_each_nature_decision(m, c.policy, horizon, visit);
    return;
  }
  VertexCache cache(m.uncertainty);
  std::vector<NatureNode> frontier{nature_root(m)};
  for (std::size_t t = 0; t < horizon; ++t) {
    std::vector<NatureNode> next;
    for (const auto& node : frontier) {
      auto actions = enabled_union(m, node.states);
      if (m.play_order == PlayOrder::AgentFirst) {
        for (ActionId a : actions) {
          NatureKey key{node.history, a};
          auto dist = theta.at(m, key, &cache);
          visit(key, node.fixed, dist);
          for (const auto& [u, p] : dist) {
            auto children = expand_nature(m, node, a, u);
            if (t + 1 < horizon) next.insert(next.end(), children.begin(), children.end());
          }
        }
      } else {
        NatureKey key{node.history, std::nullopt};
        auto dist = theta.at(m, key, &cache);
        visit(key, node.fixed, dist);
        for (const auto& [u, p] : dist)
          for (ActionId a : actions) {
            auto children = expand_nature(m, node, a, u);
            if (t + 1 < horizon) next.insert(next.end(), children.begin(), children.end());
          }
      }
    }
    frontier = std::move(next);
  }
}

void for_each_agent_decision(const Rpomdp& m, const AgentPolicy& pi, std::size_t horizon,
                             const std::function<void(const AgentHistory&, const ActionDistribution&)>& visit) {
  if (pi.kind == PolicyKind::Mixed) {
    for (const auto& c : pi.mixture) for_each_agent_decision(m, c.policy, horizon, visit);
    return;
  }
  PossibleSuccessors succ(m);
  std::vector<AgentNode> frontier{agent_root(m)};
  for (std::size_t t = 0; t < horizon; ++t) {
    std::vector<AgentNode> next;
    for (const auto& node : frontier) {
      auto dist = pi.at(m, node.history);
      visit(node.history, dist);
      if (t + 1 == horizon) continue;
      for (const auto& [a, p] : dist)
        for (auto& [z, states] : succ.children(node.states, a))
          next.push_back({node.history.extended(a, z), std::move(states)});
    }
    frontier = std::move(next);
  }
}

std::set<JointHistory> relevant_histories(const Rpomdp& m, const NaturePolicy& theta, std::size_t t) {
  if (theta.kind == PolicyKind::Mixed) {
    std::set<JointHistory> out;
    for (const auto& c : theta.mixture) {
      auto part = relevant_histories(m, c.policy, t);
      out.insert(part.begin(), part.end());
    }
    return out;
  }
  struct Node {
    JointHistory history;
    std::set<StateId> states;
    PartialAssignment fixed;
  };
  VertexCache cache(m.uncertainty);
  std::vector<Node> frontier{
      {JointHistory{m.observe(m.initial_state), {}}, {m.initial_state}, undefined_assignment(m.num_variables())}};
  for (std::size_t k = 0; k < t; ++k) {
    std::vector<Node> next;
    for (const auto& node : frontier) {
      NatureHistory hn = nature_part(node.history);
      for (ActionId a : enabled_union(m, node.states)) {
        for (const auto& [u, p] : theta.at(m, nature_key(m, hn, a), &cache)) {
          if (!m.uncertainty.contains(u) || !agrees(u, node.fixed))
            throw ContractError("nature choice disagrees with the fixed variables");
          PartialAssignment fixed = node.fixed;
          stick_into(m, fixed, u, node.history.last().nature_pair(), a);
          std::map<ObsTriple, std::set<StateId>> groups;
          for (StateId s : node.states) {
            if (!m.is_enabled(s, a)) continue;
            for (StateId s2 = 0; s2 < m.num_states(); ++s2)
              if (m.probability(s, a, s2, u) > 0) groups[m.observe(s2)].insert(s2);
          }
          for (auto& [z, states] : groups) {
            JointHistory h = node.history;
            h.steps.push_back({a, u, z});
            next.push_back({std::move(h), std::move(states), fixed});
          }
        }
      }
    }
    frontier = std::move(next);
  }
  std::set<JointHistory> out;
  for (auto& node : frontier) out.insert(std::move(node.history));
  return out;
}

// ---------------------------------------------------------------------------
// Validity

bool policy_valid(const Rpomdp& m, const NaturePolicy& theta, std::size_t horizon) {
  if (theta.kind == PolicyKind::Mixed) {
    Rational total = 0;
    for (const auto& c : theta.mixture) {
      if (c.weight <= 0 || c.policy.kind != PolicyKind::Deterministic) return false;
      if (!policy_valid(m, c.policy, horizon)) return false;
      total += c.weight;
    }
    return total == 1;
  }
  auto members_ok = [&](const AssignmentDistribution& d) {
    if (!is_distribution(d)) return false;
    if (theta.kind == PolicyKind::Deterministic && d.size() != 1) return false;
    return std::all_of(d.begin(), d.end(), [&](const auto& e) { return m.uncertainty.contains(e.first); });
  };
  const bool agent_first = m.play_order == PlayOrder::AgentFirst;
  for (const auto& [key, dist] : theta.table) {
    if (key.action.has_value() != agent_first) return false;
    if (!members_ok(dist)) return false;
    PartialAssignment fixed = fix(m, key.history);
    for (const auto& [u, p] : dist)
      if (!agrees(u, fixed)) return false;
  }
  for (const auto& [pattern, dist] : theta.patterns)
    if (!members_ok(dist)) return false;
  if (horizon == 0) return true;
  bool ok = true;
  try {
    for_each_nature_decision(m, theta, horizon,
                             [&](const NatureKey&, const PartialAssignment& fixed, const AssignmentDistribution& d) {
                               if (!members_ok(d)) ok = false;
                               for (const auto& [u, p] : d)
                                 if (!agrees(u, fixed)) ok = false;
                             });
  } catch (const ContractError&) {
    return false;
  }
  return ok;
}

bool policy_valid(const Rpomdp& m, const AgentPolicy& pi) {
  if (pi.kind == PolicyKind::Mixed) {
    Rational total = 0;
    for (const auto& c : pi.mixture) {
      if (c.weight <= 0 || c.policy.kind != PolicyKind::Deterministic) return false;
      if (!policy_valid(m, c.policy)) return false;
      total += c.weight;
    }
    return total == 1;
  }
  for (const auto& [h, dist] : pi.table) {
    if (!is_distribution(dist)) return false;
    if (pi.kind == PolicyKind::Deterministic && dist.size() != 1) return false;
    const std::vector<ActionId>* enabled = nullptr;
    try {
      enabled = &m.enabled_for(h.last());
    } catch (const DomainError&) {
      return false;
    }
    for (const auto& [a, p] : dist)
      if (!std::binary_search(enabled->begin(), enabled->end(), a)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Path probabilities

namespace {

Rational pure_path_probability(const Rpomdp& m, const AgentPolicy& pi, const NaturePolicy& theta,
                               const Path& path, VertexCache& cache) {
  if (path.initial != m.initial_state) return 0;
  Rational prob = 1;
  AgentHistory ha{m.observe(path.initial).agent_pair(), {}};
  NatureHistory hn{m.observe(path.initial).nature_pair(), {}};
  PartialAssignment fixed = undefined_assignment(m.num_variables());
  StateId s = path.initial;
  for (const auto& step : path.steps) {
    if (step.next >= m.num_states() || !m.is_enabled(s, step.action)) return 0;
    if (!m.uncertainty.contains(step.assignment) || !agrees(step.assignment, fixed)) return 0;
    auto da = pi.at(m, ha);
    auto ia = da.find(step.action);
    if (ia == da.end()) return 0;
    auto du = theta.at(m, nature_key(m, hn, step.action), &cache);
    auto iu = du.find(step.assignment);
    if (iu == du.end()) return 0;
    prob *= ia->second * iu->second * m.probability(s, step.action, step.next, step.assignment);
    if (prob == 0) return 0;
    stick_into(m, fixed, step.assignment, hn.last(), step.action);
    ObsTriple z = m.observe(step.next);
    ha.steps.push_back({step.action, z.agent_pair()});
    hn.steps.push_back({step.action, step.assignment, z.nature_pair()});
    s = step.next;
  }
  return prob;
}

void pure_path_distribution(const Rpomdp& m, const AgentPolicy& pi, const NaturePolicy& theta,
                            std::size_t horizon, const Rational& weight, PathDistribution& out,
                            VertexCache& cache) {
  struct Particle {
    Path path;
    AgentHistory ha;
    NatureHistory hn;
    PartialAssignment fixed;
    Rational prob;
  };
  ObsTriple z0 = m.observe(m.initial_state);
  std::vector<Particle> frontier{{Path{m.initial_state, {}}, AgentHistory{z0.agent_pair(), {}},
                                  NatureHistory{z0.nature_pair(), {}}, undefined_assignment(m.num_variables()),
                                  weight}};
  for (std::size_t t = 0; t < horizon; ++t) {
    std::vector<Particle> next;
    for (const auto& p : frontier) {
      StateId s = p.path.last();
      for (const auto& [a, pa] : pi.at(m, p.ha)) {
        if (!m.is_enabled(s, a)) continue;
        for (const auto& [u, pu] : theta.at(m, nature_key(m, p.hn, a), &cache)) {
          if (!m.uncertainty.contains(u) || !agrees(u, p.fixed)) continue;
          PartialAssignment fixed = p.fixed;
          stick_into(m, fixed, u, p.hn.last(), a);
          for (StateId s2 = 0; s2 < m.num_states(); ++s2) {
            Rational pt = m.probability(s, a, s2, u);
            if (pt <= 0) continue;
            ObsTriple z = m.observe(s2);
            next.push_back({p.path.extended({a, u, s2}), p.ha.extended(a, z.agent_pair()),
                            p.hn.extended(a, u, z.nature_pair()), fixed, p.prob * pa * pu * pt});
          }
        }
      }
    }
    frontier = std::move(next);
  }
  for (auto& p : frontier) out[p.path] += p.prob;
}

}  // namespace

Rational path_probability(const Rpomdp& m, const AgentPolicy& pi, const NaturePolicy& theta, const Path& path) {
  VertexCache cache(m.uncertainty);
  Rational total = 0;
  for_each_pair(pi, theta, [&](const Rational& w, const AgentPolicy& p, const NaturePolicy& q) {
    total += w * pure_path_probability(m, p, q, path, cache);
  });
  return total;
}

PathDistribution path_distribution(const Rpomdp& m, const AgentPolicy& pi, const NaturePolicy& theta,
                                   std::size_t horizon) {
  VertexCache cache(m.uncertainty);
  PathDistribution out;
  for_each_pair(pi, theta, [&](const Rational& w, const AgentPolicy& p, const NaturePolicy& q) {
    pure_path_distribution(m, p, q, horizon, w, out, cache);
  });
  for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

// ---------------------------------------------------------------------------
// Stochastic <-> mixed conversions

namespace {

/// Pending decision of the reduced-form expansion on the nature side.
struct NatureDecision {
  NatureNode node;
  std::optional<ActionId> action;
  std::size_t depth;
};

void push_nature_decisions(const Rpomdp& m, const NatureNode& node, std::size_t depth,
                           std::vector<NatureDecision>& queue) {
  if (m.play_order == PlayOrder::AgentFirst) {
    for (ActionId a : enabled_union(m, node.states)) queue.push_back({node, a, depth});
  } else {
    queue.push_back({node, std::nullopt, depth});
  }
}

void expand_nature_mixture(const Rpomdp& m, const NaturePolicy& theta, std::size_t horizon,
                           std::vector<NatureDecision> queue, Rational weight,
                           std::map<NatureKey, Assignment> choices, std::vector<NatureComponent>& out,
                           VertexCache& cache) {
  if (queue.empty()) {
    out.push_back({weight, nature_deterministic(choices)});
    return;
  }
  NatureDecision d = std::move(queue.back());
  queue.pop_back();
  NatureKey key{d.node.history, d.action};
  for (const auto& [u, p] : theta.at(m, key, &cache)) {
    auto next_queue = queue;
    if (d.depth + 1 < horizon) {
      std::vector<ActionId> actions =
          d.action ? std::vector<ActionId>{*d.action} : enabled_union(m, d.node.states);
      for (ActionId a : actions)
        for (const auto& child : expand_nature(m, d.node, a, u))
          push_nature_decisions(m, child, d.depth + 1, next_queue);
    }
    auto next_choices = choices;
    next_choices[key] = u;
    expand_nature_mixture(m, theta, horizon, std::move(next_queue), weight * p, std::move(next_choices), out,
                          cache);
  }
}

using AgentChoiceFn = std::function<ActionDistribution(const AgentHistory&)>;

void expand_agent_mixture(const Rpomdp& m, const PossibleSuccessors& succ, const AgentChoiceFn& choose,
                          std::size_t horizon, std::vector<std::pair<AgentNode, std::size_t>> queue,
                          Rational weight, std::map<AgentHistory, ActionId> choices,
                          std::vector<AgentComponent>& out) {
  if (queue.empty()) {
    out.push_back({weight, agent_deterministic(choices)});
    return;
  }
  auto [node, depth] = std::move(queue.back());
  queue.pop_back();
  for (const auto& [a, p] : choose(node.history)) {
    auto next_queue = queue;
    if (depth + 1 < horizon)
      for (auto& [z, states] : succ.children(node.states, a))
        next_queue.push_back({AgentNode{node.history.extended(a, z), std::move(states)}, depth + 1});
    auto next_choices = choices;
    next_choices[node.history] = a;
    expand_agent_mixture(m, succ, choose, horizon, std::move(next_queue), weight * p, std::move(next_choices),
                         out);
  }
}

std::vector<AgentComponent> agent_components(const Rpomdp& m, const AgentChoiceFn& choose, std::size_t horizon) {
  std::vector<AgentComponent> out;
  if (horizon == 0) {
    out.push_back({Rational(1), agent_deterministic({})});
    return out;
  }
  PossibleSuccessors succ(m);
  expand_agent_mixture(m, succ, choose, horizon, {{agent_root(m), 0}}, Rational(1), {}, out);
  return out;
}

}  // namespace

NaturePolicy mixed_from_stochastic(const Rpomdp& m, const NaturePolicy& theta, std::size_t horizon) {
  if (theta.kind == PolicyKind::Mixed) return theta;
  std::vector<NatureComponent> out;
  VertexCache cache(m.uncertainty);
  std::vector<NatureDecision> queue;
  if (horizon > 0) push_nature_decisions(m, nature_root(m), 0, queue);
  expand_nature_mixture(m, theta, horizon, std::move(queue), Rational(1), {}, out, cache);
  return nature_mixed(std::move(out));
}

AgentPolicy mixed_from_stochastic(const Rpomdp& m, const AgentPolicy& pi, std::size_t horizon) {
  if (pi.kind == PolicyKind::Mixed) return pi;
  return agent_mixed(agent_components(
      m, [&](const AgentHistory& h) { return pi.at(m, h); }, horizon));
}

NaturePolicy stochastic_from_mixed(const Rpomdp& m, const NaturePolicy& theta_mix, std::size_t horizon) {
  if (theta_mix.kind != PolicyKind::Mixed) return theta_mix;
  std::map<NatureKey, AssignmentDistribution> mass;
  std::map<NatureKey, Rational> reach;
  for (const auto& c : theta_mix.mixture)
    for_each_nature_decision(m, c.policy, horizon,
                             [&](const NatureKey& key, const PartialAssignment&, const AssignmentDistribution& d) {
                               reach[key] += c.weight;
                               for (const auto& [u, p] : d) mass[key][u] += c.weight * p;
                             });
  for (auto& [key, dist] : mass)
    for (auto& [u, p] : dist) p /= reach[key];
  return nature_stochastic(std::move(mass));
}

AgentPolicy stochastic_from_mixed(const Rpomdp& m, const AgentPolicy& pi_mix, std::size_t horizon) {
  if (pi_mix.kind != PolicyKind::Mixed) return pi_mix;
  std::map<AgentHistory, ActionDistribution> mass;
  std::map<AgentHistory, Rational> reach;
  for (const auto& c : pi_mix.mixture)
    for_each_agent_decision(m, c.policy, horizon, [&](const AgentHistory& h, const ActionDistribution& d) {
      reach[h] += c.weight;
      for (const auto& [a, p] : d) mass[h][a] += c.weight * p;
    });
  for (auto& [h, dist] : mass)
    for (auto& [a, p] : dist) p /= reach[h];
  return agent_stochastic(std::move(mass));
}

// ---------------------------------------------------------------------------
// Deterministic agent policies

namespace {

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
  return a * b;
}

std::size_t saturating_add(std::size_t a, std::size_t b) {
  return b > std::numeric_limits<std::size_t>::max() - a ? std::numeric_limits<std::size_t>::max() : a + b;
}

std::size_t count_from(const Rpomdp& m, const PossibleSuccessors& succ, const AgentNode& node, std::size_t depth,
                       std::size_t horizon) {
  std::size_t total = 0;
  for (ActionId a : m.enabled[*node.states.begin()]) {
    std::size_t product = 1;
    if (depth + 1 < horizon)
      for (auto& [z, states] : succ.children(node.states, a))
        product = saturating_mul(product, count_from(m, succ, AgentNode{node.history.extended(a, z), states},
                                                     depth + 1, horizon));
    total = saturating_add(total, product);
  }
  return total;
}

}  // namespace

std::size_t count_deterministic_agent_policies(const Rpomdp& m, std::size_t horizon) {
  if (horizon == 0) return 1;
  PossibleSuccessors succ(m);
  return count_from(m, succ, agent_root(m), 0, horizon);
}

std::vector<AgentPolicy> enumerate_deterministic_agent_policies(const Rpomdp& m, std::size_t horizon,
                                                                std::size_t cap) {
  std::size_t count = count_deterministic_agent_policies(m, horizon);
  if (count > cap)
    throw CapacityError("deterministic agent policy count " + std::to_string(count) + " exceeds cap " +
                            std::to_string(cap),
                        count);
  auto components = agent_components(
      m,
      [&](const AgentHistory& h) {
        ActionDistribution d;
        for (ActionId a : m.enabled_for(h.last())) d[a] = 1;
        return d;
      },
      horizon);
  std::vector<AgentPolicy> out;
  out.reserve(components.size());
  for (auto& c : components) out.push_back(std::move(c.policy));
  return out;
}

}  // namespace rpomdp
