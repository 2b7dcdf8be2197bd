#include "rpomdp/posg.hpp"

namespace rpomdp {

namespace {

PartialAssignment updated(const Rpomdp& m, const PartialAssignment& fixed, const Assignment& u, StateId s,
                          ActionId a) {
  return upd(m, fixed, u, m.obs_nature[s], m.obs_public[s], a);
}

template <class T, class V>
const T& expect(const V& v, const char* what) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw DomainError(std::string("malformed game sequence: expected ") + what);
}

ObsPair pair_of(const PosgNatureObs& z) { return {z.priv, z.pub}; }

}  // namespace

// ---------------------------------------------------------------------------
// Game

Posg::Posg(const Rpomdp& model, std::size_t horizon) : model_(&model), horizon_(horizon) {}

Posg build_posg(const Rpomdp& model, std::size_t horizon) { return Posg(model, horizon); }

PosgState Posg::initial_state() const {
  PartialAssignment none = undefined_assignment(model_->num_variables());
  if (mode() == PlayOrder::AgentFirst) return PosgAgentState{model_->initial_state, none, std::nullopt};
  return PosgNatureState{model_->initial_state, none, std::nullopt};
}

bool Posg::nature_move_legal(const PosgNatureState& s, const Assignment& u) const {
  return model_->uncertainty.contains(u) && agrees(u, s.fixed);
}

std::vector<Assignment> Posg::nature_move_vertices(const PosgNatureState& s) const {
  return uncertainty_vertices(constrain(model_->uncertainty, s.fixed));
}

std::vector<std::pair<PosgState, Rational>> Posg::agent_step(const PosgAgentState& s, ActionId a) const {
  const Rpomdp& m = *model_;
  if (!m.is_enabled(s.base, a)) throw DomainError("action not enabled in game state");
  std::vector<std::pair<PosgState, Rational>> out;
  if (mode() == PlayOrder::AgentFirst) {
    out.push_back({PosgNatureState{s.base, s.fixed, a}, Rational(1)});
    return out;
  }
  const Assignment& u = s.pending.value();
  PartialAssignment fixed = updated(m, s.fixed, u, s.base, a);
  for (StateId t = 0; t < m.num_states(); ++t) {
    Rational p = m.probability(s.base, a, t, u);
    if (p > 0) out.push_back({PosgNatureState{t, fixed, a}, p});
  }
  return out;
}

std::vector<std::pair<PosgState, Rational>> Posg::nature_step(const PosgNatureState& s, const Assignment& u) const {
  std::vector<std::pair<PosgState, Rational>> out;
  if (!nature_move_legal(s, u)) return out;
  const Rpomdp& m = *model_;
  if (mode() == PlayOrder::NatureFirst) {
    out.push_back({PosgAgentState{s.base, s.fixed, u}, Rational(1)});
    return out;
  }
  ActionId a = s.last_action.value();
  PartialAssignment fixed = updated(m, s.fixed, u, s.base, a);
  for (StateId t = 0; t < m.num_states(); ++t) {
    Rational p = m.probability(s.base, a, t, u);
    if (p > 0) out.push_back({PosgAgentState{t, fixed, std::nullopt}, p});
  }
  return out;
}

Rational Posg::reward(const PosgState& s, const PosgMove& move) const {
  const auto* agent = std::get_if<PosgAgentState>(&s);
  const auto* a = std::get_if<ActionId>(&move);
  if (!agent || !a) return 0;
  return model_->rewards[agent->base][*a];
}

ObsPair Posg::agent_observation(const PosgState& s) const {
  StateId base = std::visit([](const auto& x) { return x.base; }, s);
  return model_->observe(base).agent_pair();
}

PosgNatureObs Posg::nature_observation(const PosgState& s) const {
  StateId base = std::visit([](const auto& x) { return x.base; }, s);
  ObsPair z = model_->observe(base).nature_pair();
  std::optional<ActionId> action;
  if (const auto* n = std::get_if<PosgNatureState>(&s)) action = n->last_action;
  return {z.priv, z.pub, action};
}

// ---------------------------------------------------------------------------
// Paths

PosgPath map_path(const Rpomdp& m, const Posg& posg, const Path& path) {
  if (!path_valid(m, path) || path.initial != m.initial_state) throw DomainError("cannot map an invalid path");
  PosgPath out;
  out.states.push_back(posg.initial_state());
  PartialAssignment fixed = undefined_assignment(m.num_variables());
  StateId s = path.initial;
  for (const auto& step : path.steps) {
    PartialAssignment next_fixed = updated(m, fixed, step.assignment, s, step.action);
    if (m.play_order == PlayOrder::AgentFirst) {
      out.moves.push_back(step.action);
      out.states.push_back(PosgNatureState{s, fixed, step.action});
      out.moves.push_back(step.assignment);
      out.states.push_back(PosgAgentState{step.next, next_fixed, std::nullopt});
    } else {
      out.moves.push_back(step.assignment);
      out.states.push_back(PosgAgentState{s, fixed, step.assignment});
      out.moves.push_back(step.action);
      out.states.push_back(PosgNatureState{step.next, next_fixed, step.action});
    }
    fixed = std::move(next_fixed);
    s = step.next;
  }
  return out;
}

Path unmap_path(const Posg& posg, const PosgPath& gp) {
  if (gp.states.empty() || gp.states.size() != gp.moves.size() + 1 || gp.moves.size() % 2 != 0)
    throw DomainError("malformed game path");
  const bool agent_first = posg.mode() == PlayOrder::AgentFirst;
  Path path;
  if (agent_first) {
    path.initial = expect<PosgAgentState>(gp.states[0], "agent state").base;
  } else {
    path.initial = expect<PosgNatureState>(gp.states[0], "nature state").base;
  }
  for (std::size_t k = 0; 2 * k < gp.moves.size(); ++k) {
    Step step;
    if (agent_first) {
      step.action = expect<ActionId>(gp.moves[2 * k], "agent action");
      (void)expect<PosgNatureState>(gp.states[2 * k + 1], "nature state");
      step.assignment = expect<Assignment>(gp.moves[2 * k + 1], "nature assignment");
      step.next = expect<PosgAgentState>(gp.states[2 * k + 2], "agent state").base;
    } else {
      step.assignment = expect<Assignment>(gp.moves[2 * k], "nature assignment");
      (void)expect<PosgAgentState>(gp.states[2 * k + 1], "agent state");
      step.action = expect<ActionId>(gp.moves[2 * k + 1], "agent action");
      step.next = expect<PosgNatureState>(gp.states[2 * k + 2], "nature state").base;
    }
    path.steps.push_back(std::move(step));
  }
  return path;
}

PosgJointHistory posg_observe_joint(const Posg& posg, const PosgPath& path) {
  PosgJointHistory out;
  for (std::size_t i = 0; i < path.states.size(); ++i) {
    out.push_back(posg.joint_observation(path.states[i]));
    if (i < path.moves.size()) out.push_back(path.moves[i]);
  }
  return out;
}

PosgAgentHistory posg_observe_agent(const Posg& posg, const PosgPath& path) {
  PosgAgentHistory out;
  for (std::size_t i = 0; i < path.states.size(); ++i) {
    out.push_back(posg.agent_observation(path.states[i]));
    if (i < path.moves.size())
      if (const auto* a = std::get_if<ActionId>(&path.moves[i])) out.push_back(*a);
  }
  return out;
}

PosgNatureHistory posg_observe_nature(const Posg& posg, const PosgPath& path) {
  PosgNatureHistory out;
  for (std::size_t i = 0; i < path.states.size(); ++i) {
    out.push_back(posg.nature_observation(path.states[i]));
    if (i < path.moves.size())
      if (const auto* u = std::get_if<Assignment>(&path.moves[i])) out.push_back(*u);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Histories

namespace {

PosgJointObs joint_obs(const ObsTriple& z, std::optional<ActionId> a) {
  return {z.agent_pair(), {z.nature, z.pub, a}};
}

}  // namespace

PosgJointHistory map_joint_history(const Rpomdp& m, const JointHistory& h) {
  PosgJointHistory out;
  const bool agent_first = m.play_order == PlayOrder::AgentFirst;
  out.push_back(joint_obs(h.initial, std::nullopt));
  ObsTriple z = h.initial;
  std::optional<ActionId> previous;
  for (const auto& step : h.steps) {
    if (agent_first) {
      out.push_back(PosgMove{step.action});
      out.push_back(joint_obs(z, step.action));
      out.push_back(PosgMove{step.assignment});
      out.push_back(joint_obs(step.obs, std::nullopt));
    } else {
      out.push_back(PosgMove{step.assignment});
      out.push_back(joint_obs(z, std::nullopt));
      out.push_back(PosgMove{step.action});
      out.push_back(joint_obs(step.obs, step.action));
    }
    z = step.obs;
    previous = step.action;
  }
  return out;
}

JointHistory unmap_joint_history(const Rpomdp& m, const PosgJointHistory& h) {
  if (h.empty() || (h.size() - 1) % 4 != 0) throw DomainError("malformed game joint history");
  const bool agent_first = m.play_order == PlayOrder::AgentFirst;
  auto triple = [](const PosgJointObs& o) { return ObsTriple{o.agent.priv, o.nature.priv, o.agent.pub}; };
  const auto& first = expect<PosgJointObs>(h[0], "observation");
  if (first.nature.action) throw DomainError("initial observation carries an action");
  JointHistory out{triple(first), {}};
  for (std::size_t i = 1; i < h.size(); i += 4) {
    const auto& m1 = expect<PosgMove>(h[i], "move");
    const auto& mid = expect<PosgJointObs>(h[i + 1], "observation");
    const auto& m2 = expect<PosgMove>(h[i + 2], "move");
    const auto& end = expect<PosgJointObs>(h[i + 3], "observation");
    JointStep step;
    if (agent_first) {
      step.action = expect<ActionId>(m1, "agent action");
      step.assignment = expect<Assignment>(m2, "nature assignment");
      if (mid.nature.action != step.action || end.nature.action)
        throw DomainError("inconsistent action components");
    } else {
      step.assignment = expect<Assignment>(m1, "nature assignment");
      step.action = expect<ActionId>(m2, "agent action");
      if (mid.nature.action || end.nature.action != step.action)
        throw DomainError("inconsistent action components");
    }
    if (triple(mid) != out.last()) throw DomainError("repeated observation differs");
    step.obs = triple(end);
    out.steps.push_back(std::move(step));
  }
  return out;
}

PosgAgentHistory map_agent_history(const Rpomdp& m, const AgentHistory& h) {
  PosgAgentHistory out{h.initial};
  ObsPair z = h.initial;
  for (const auto& step : h.steps) {
    if (m.play_order == PlayOrder::AgentFirst) {
      out.push_back(step.action);
      out.push_back(z);
    } else {
      out.push_back(z);
      out.push_back(step.action);
    }
    out.push_back(step.obs);
    z = step.obs;
  }
  return out;
}

AgentHistory unmap_agent_history(const Rpomdp& m, const PosgAgentHistory& h) {
  if (h.empty() || (h.size() - 1) % 3 != 0) throw DomainError("malformed game agent history");
  AgentHistory out{expect<ObsPair>(h[0], "observation"), {}};
  for (std::size_t i = 1; i < h.size(); i += 3) {
    ActionId a;
    ObsPair dup;
    if (m.play_order == PlayOrder::AgentFirst) {
      a = expect<ActionId>(h[i], "agent action");
      dup = expect<ObsPair>(h[i + 1], "observation");
    } else {
      dup = expect<ObsPair>(h[i], "observation");
      a = expect<ActionId>(h[i + 1], "agent action");
    }
    if (dup != out.last()) throw DomainError("repeated observation differs");
    out.steps.push_back({a, expect<ObsPair>(h[i + 2], "observation")});
  }
  return out;
}

PosgNatureHistory map_nature_history(const Rpomdp& m, const NatureHistory& h) {
  PosgNatureHistory out{PosgNatureObs{h.initial.priv, h.initial.pub, std::nullopt}};
  ObsPair z = h.initial;
  for (const auto& step : h.steps) {
    if (m.play_order == PlayOrder::AgentFirst) {
      out.push_back(PosgNatureObs{z.priv, z.pub, step.action});
      out.push_back(step.assignment);
      out.push_back(PosgNatureObs{step.obs.priv, step.obs.pub, std::nullopt});
    } else {
      out.push_back(step.assignment);
      out.push_back(PosgNatureObs{z.priv, z.pub, std::nullopt});
      out.push_back(PosgNatureObs{step.obs.priv, step.obs.pub, step.action});
    }
    z = step.obs;
  }
  return out;
}

NatureHistory unmap_nature_history(const Rpomdp& m, const PosgNatureHistory& h) {
  if (h.empty() || (h.size() - 1) % 3 != 0) throw DomainError("malformed game nature history");
  const auto& first = expect<PosgNatureObs>(h[0], "observation");
  if (first.action) throw DomainError("initial observation carries an action");
  NatureHistory out{pair_of(first), {}};
  for (std::size_t i = 1; i < h.size(); i += 3) {
    NatureStep step;
    if (m.play_order == PlayOrder::AgentFirst) {
      const auto& mid = expect<PosgNatureObs>(h[i], "observation");
      if (!mid.action || pair_of(mid) != out.last()) throw DomainError("malformed pre-move observation");
      step.action = *mid.action;
      step.assignment = expect<Assignment>(h[i + 1], "nature assignment");
      const auto& end = expect<PosgNatureObs>(h[i + 2], "observation");
      if (end.action) throw DomainError("agent-state observation carries an action");
      step.obs = pair_of(end);
    } else {
      step.assignment = expect<Assignment>(h[i], "nature assignment");
      const auto& mid = expect<PosgNatureObs>(h[i + 1], "observation");
      if (mid.action || pair_of(mid) != out.last()) throw DomainError("malformed agent-state observation");
      const auto& end = expect<PosgNatureObs>(h[i + 2], "observation");
      if (!end.action) throw DomainError("nature-state observation lacks the action");
      step.action = *end.action;
      step.obs = pair_of(end);
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

PosgAgentHistory agent_decision_history(const Rpomdp& m, const AgentHistory& h) {
  PosgAgentHistory out = map_agent_history(m, h);
  if (m.play_order == PlayOrder::NatureFirst) out.push_back(h.last());
  return out;
}

PosgNatureHistory nature_decision_history(const Rpomdp& m, const NatureKey& key) {
  PosgNatureHistory out = map_nature_history(m, key.history);
  if (m.play_order == PlayOrder::AgentFirst) {
    ObsPair z = key.history.last();
    out.push_back(PosgNatureObs{z.priv, z.pub, key.action.value()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Policies

PosgAgentPolicy map_agent_policy(const Rpomdp& m, const AgentPolicy& pi, std::size_t horizon) {
  PosgAgentPolicy out;
  out.kind = pi.kind;
  if (pi.kind == PolicyKind::Mixed) {
    for (const auto& c : pi.mixture) out.mixture.push_back({c.weight, map_agent_policy(m, c.policy, horizon)});
    return out;
  }
  for_each_agent_decision(m, pi, horizon, [&](const AgentHistory& h, const ActionDistribution& d) {
    out.table[agent_decision_history(m, h)] = d;
  });
  return out;
}

PosgNaturePolicy map_nature_policy(const Rpomdp& m, const NaturePolicy& theta, std::size_t horizon) {
  PosgNaturePolicy out;
  out.kind = theta.kind;
  if (theta.kind == PolicyKind::Mixed) {
    for (const auto& c : theta.mixture)
      out.mixture.push_back({c.weight, map_nature_policy(m, c.policy, horizon)});
    return out;
  }
  for_each_nature_decision(m, theta, horizon,
                           [&](const NatureKey& key, const PartialAssignment&, const AssignmentDistribution& d) {
                             out.table[nature_decision_history(m, key)] = d;
                           });
  return out;
}

AgentPolicy unmap_agent_policy(const Rpomdp& m, const PosgAgentPolicy& pi) {
  AgentPolicy out;
  out.kind = pi.kind;
  if (pi.kind == PolicyKind::Mixed) {
    for (const auto& c : pi.mixture) out.mixture.push_back({c.weight, unmap_agent_policy(m, c.policy)});
    return out;
  }
  for (const auto& [key, d] : pi.table) {
    PosgAgentHistory h = key;
    if (m.play_order == PlayOrder::NatureFirst) {
      if (h.empty()) throw DomainError("empty game agent history");
      h.pop_back();
    }
    out.table[unmap_agent_history(m, h)] = d;
  }
  return out;
}

NaturePolicy unmap_nature_policy(const Rpomdp& m, const PosgNaturePolicy& theta) {
  NaturePolicy out;
  out.kind = theta.kind;
  if (theta.kind == PolicyKind::Mixed) {
    for (const auto& c : theta.mixture) out.mixture.push_back({c.weight, unmap_nature_policy(m, c.policy)});
    return out;
  }
  for (const auto& [key, d] : theta.table) {
    PosgNatureHistory h = key;
    std::optional<ActionId> action;
    if (m.play_order == PlayOrder::AgentFirst) {
      if (h.empty()) throw DomainError("empty game nature history");
      action = expect<PosgNatureObs>(h.back(), "observation").action;
      if (!action) throw DomainError("nature decision history lacks the action");
      h.pop_back();
    }
    out.table[NatureKey{unmap_nature_history(m, h), action}] = d;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Value

namespace {

struct GameParticle {
  PosgState state;
  PosgAgentHistory agent;
  PosgNatureHistory nature;
  Rational prob;
};

Rational pure_posg_value(const Posg& g, const PosgAgentPolicy& pi, const PosgNaturePolicy& theta,
                         std::size_t horizon) {
  auto agent_dist = [&](const PosgAgentHistory& h) -> const ActionDistribution& {
    auto it = pi.table.find(h);
    if (it == pi.table.end()) throw ContractError("game agent policy misses a reached history");
    return it->second;
  };
  auto nature_dist = [&](const PosgNatureHistory& h) -> const AssignmentDistribution& {
    auto it = theta.table.find(h);
    if (it == theta.table.end()) throw ContractError("game nature policy misses a reached history");
    return it->second;
  };
  auto observe_into = [&](GameParticle& p) {
    p.agent.push_back(g.agent_observation(p.state));
    p.nature.push_back(g.nature_observation(p.state));
  };

  Rational value = 0;
  GameParticle start{g.initial_state(), {}, {}, Rational(1)};
  observe_into(start);
  std::vector<GameParticle> frontier{start};
  // Each round is two moves; the game ends right after the last rewarded agent move.
  const bool agent_first = g.mode() == PlayOrder::AgentFirst;
  for (std::size_t move = 0; move < 2 * horizon; ++move) {
    const bool last_agent_move = agent_first ? move == 2 * horizon - 2 : move == 2 * horizon - 1;
    std::vector<GameParticle> next;
    for (const auto& p : frontier) {
      if (const auto* s = std::get_if<PosgAgentState>(&p.state)) {
        for (const auto& [a, pa] : agent_dist(p.agent)) {
          value += p.prob * pa * g.reward(p.state, a);
          if (last_agent_move) continue;
          for (auto& [succ, pt] : g.agent_step(*s, a)) {
            GameParticle q{std::move(succ), p.agent, p.nature, p.prob * pa * pt};
            q.agent.push_back(a);
            observe_into(q);
            next.push_back(std::move(q));
          }
        }
      } else {
        const auto& ns = std::get<PosgNatureState>(p.state);
        for (const auto& [u, pu] : nature_dist(p.nature)) {
          for (auto& [succ, pt] : g.nature_step(ns, u)) {
            GameParticle q{std::move(succ), p.agent, p.nature, p.prob * pu * pt};
            q.nature.push_back(u);
            observe_into(q);
            next.push_back(std::move(q));
          }
        }
      }
    }
    if (last_agent_move) break;
    frontier = std::move(next);
  }
  return value;
}

}  // namespace

Rational posg_value(const Posg& g, const PosgAgentPolicy& pi, const PosgNaturePolicy& theta, std::size_t horizon) {
  Rational total = 0;
  auto with_agent = [&](const Rational& wa, const PosgAgentPolicy& p) {
    if (theta.kind == PolicyKind::Mixed) {
      for (const auto& c : theta.mixture) total += wa * c.weight * pure_posg_value(g, p, c.policy, horizon);
    } else {
      total += wa * pure_posg_value(g, p, theta, horizon);
    }
  };
  if (pi.kind == PolicyKind::Mixed) {
    for (const auto& c : pi.mixture) with_agent(c.weight, c.policy);
  } else {
    with_agent(Rational(1), pi);
  }
  return total;
}

}  // namespace rpomdp
