#include "rpomdp/solver.hpp"

#include "rpomdp/evaluation.hpp"
#include "rpomdp/matrix_game.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace rpomdp {

namespace {

// ---------------------------------------------------------------------------
// Symbolic expansion for the linearity test

using Monomial = std::vector<std::pair<std::size_t, unsigned>>;
using Polynomial = std::map<Monomial, Rational>;

/// Affine expression over indeterminates.
struct SymAffine {
  Rational constant = 0;
  std::map<std::size_t, Rational> terms;
};

Monomial times(const Monomial& a, std::size_t var) {
  Monomial out = a;
  auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first >= var; });
  if (it != out.end() && it->first == var) {
    ++it->second;
  } else {
    out.insert(it, {var, 1u});
  }
  return out;
}

Polynomial multiply(const Polynomial& p, const SymAffine& f) {
  Polynomial out;
  for (const auto& [mono, c] : p) {
    if (f.constant != 0) out[mono] += c * f.constant;
    for (const auto& [var, k] : f.terms) out[times(mono, var)] += c * k;
  }
  for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

void add_scaled(Polynomial& into, const Polynomial& p, const Rational& k) {
  if (k == 0) return;
  for (const auto& [mono, c] : p) {
    auto& slot = into[mono];
    slot += c * k;
    if (slot == 0) into.erase(mono);
  }
}

/// Nature history with assignments erased.
NatureHistory erase_assignments(NatureHistory h) {
  for (auto& step : h.steps) step.assignment.clear();
  return h;
}

class LinearityProbe {
 public:
  LinearityProbe(const Rpomdp& m, std::size_t horizon) : m_(m), horizon_(horizon), hull_(equality_hull(m.uncertainty)) {
    if (!hull_) throw InfeasibleError("uncertainty set is empty");
  }

  /// True iff the value polynomial of `pi` is affine in every block.
  bool linear_for(const AgentPolicy& pi) {
    struct Particle {
      std::vector<std::optional<SymAffine>> fixed;
      Polynomial weight;
    };
    using Key = std::tuple<StateId, AgentHistory, NatureHistory>;
    ObsTriple z0 = m_.observe(m_.initial_state);
    std::map<Key, Particle> frontier;
    frontier[{m_.initial_state, AgentHistory{z0.agent_pair(), {}}, NatureHistory{z0.nature_pair(), {}}}] =
        Particle{std::vector<std::optional<SymAffine>>(m_.num_variables()), Polynomial{{Monomial{}, Rational(1)}}};
    Polynomial value;
    for (std::size_t t = 0; t < horizon_; ++t) {
      std::map<Key, Particle> next;
      for (const auto& [key, particle] : frontier) {
        const auto& [s, ha, hn] = key;
        for (const auto& [a, pa] : pi.at(m_, ha)) {
          add_scaled(value, particle.weight, pa * m_.rewards[s][a]);
          if (t + 1 == horizon_) continue;
          NatureKey block{hn, m_.play_order == PlayOrder::AgentFirst ? std::optional<ActionId>(a) : std::nullopt};
          std::vector<SymAffine> vars = variables_at(block, particle.fixed);
          std::vector<std::optional<SymAffine>> fixed = particle.fixed;
          for (VarId v = 0; v < m_.num_variables(); ++v)
            if (!fixed[v] && stick(m_, v, m_.obs_nature[s], m_.obs_public[s], a)) fixed[v] = vars[v];
          for (StateId s2 = 0; s2 < m_.num_states(); ++s2) {
            const AffineExpr& e = m_.entry(s, a, s2);
            if (e.is_zero()) continue;
            SymAffine prob{e.constant, {}};
            for (const auto& [v, c] : e.coefficients) {
              prob.constant += c * vars[v].constant;
              for (const auto& [x, k] : vars[v].terms) prob.terms[x] += c * k;
            }
            Polynomial w = multiply(particle.weight, prob);
            for (auto& [x, k] : w) k *= pa;
            if (w.empty()) continue;
            ObsTriple z = m_.observe(s2);
            Key child{s2, ha.extended(a, z.agent_pair()), hn.extended(a, {}, z.nature_pair())};
            auto [it, inserted] = next.try_emplace(child, Particle{fixed, {}});
            add_scaled(it->second.weight, w, Rational(1));
          }
        }
      }
      frontier = std::move(next);
    }
    for (const auto& [mono, c] : value) {
      std::map<std::size_t, unsigned> degree;
      for (const auto& [x, e] : mono)
        if ((degree[block_of_[x]] += e) > 1) return false;
    }
    return true;
  }

 private:
  /// Expressions of all variables at a block: stuck values or fresh indeterminates.
  std::vector<SymAffine> variables_at(const NatureKey& block, const std::vector<std::optional<SymAffine>>& fixed) {
    std::size_t block_id = blocks_.try_emplace(erase_assignments(block.history), blocks_.size()).first->second;
    block_id = block_ids_.try_emplace({block_id, block.action}, block_ids_.size()).first->second;
    std::vector<std::size_t> params;
    for (std::size_t k = 0; k < hull_->free_variables.size(); ++k) {
      auto [it, inserted] = indeterminates_.try_emplace({block_id, k}, block_of_.size());
      if (inserted) block_of_.push_back(block_id);
      params.push_back(it->second);
    }
    std::vector<SymAffine> out(m_.num_variables());
    for (VarId v = 0; v < m_.num_variables(); ++v) {
      if (fixed[v]) {
        out[v] = *fixed[v];
        continue;
      }
      out[v].constant = hull_->base[v];
      for (std::size_t k = 0; k < params.size(); ++k)
        if (hull_->directions[k][v] != 0) out[v].terms[params[k]] += hull_->directions[k][v];
    }
    return out;
  }

  const Rpomdp& m_;
  std::size_t horizon_;
  std::optional<AffineHull> hull_;
  std::map<NatureHistory, std::size_t> blocks_;
  std::map<std::pair<std::size_t, std::optional<ActionId>>, std::size_t> block_ids_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> indeterminates_;
  std::vector<std::size_t> block_of_;
};

// ---------------------------------------------------------------------------
// Nature best response

template <class Policy, class Component>
std::vector<std::pair<Rational, const Policy*>> components_of(const Policy& p,
                                                              const std::vector<Component>& mixture) {
  std::vector<std::pair<Rational, const Policy*>> out;
  if (p.kind == PolicyKind::Mixed) {
    for (const auto& c : mixture) out.push_back({c.weight, &c.policy});
  } else {
    out.push_back({Rational(1), &p});
  }
  return out;
}

using NatureChoices = std::map<NatureKey, Assignment>;

struct NatureOutcome {
  Rational value;
  NatureChoices choices;
};

class NatureSearch {
 public:
  NatureSearch(const Rpomdp& m, const AgentPolicy& pi, std::size_t horizon, const SolverConfig& config, bool linear)
      : m_(m),
        agents_(components_of(pi, pi.mixture)),
        horizon_(horizon),
        config_(config),
        linear_(linear),
        cache_(m.uncertainty) {}

  NatureOutcome run() {
    ObsTriple z0 = m_.observe(m_.initial_state);
    std::vector<Particle> particles;
    for (std::size_t i = 0; i < agents_.size(); ++i)
      particles.push_back({i, m_.initial_state, AgentHistory{z0.agent_pair(), {}}, agents_[i].first});
    return node(NatureHistory{z0.nature_pair(), {}}, undefined_assignment(m_.num_variables()), particles, 0);
  }

  const Rational& finest_step() const { return finest_step_; }

 private:
  struct Particle {
    std::size_t component;
    StateId state;
    AgentHistory agent;
    Rational prob;
  };

  /// Children of nature's choice `u` for the particles after they played their
  /// actions; each entry is (agent action, particles with action probability folded in).
  using ActedParticles = std::vector<std::pair<ActionId, Particle>>;

  NatureOutcome node(const NatureHistory& hn, const PartialAssignment& fixed, const std::vector<Particle>& particles,
                     std::size_t t) {
    NatureOutcome out{Rational(0), {}};
    std::map<ActionId, std::vector<Particle>> by_action;
    for (const auto& p : particles) {
      for (const auto& [a, pa] : agents_[p.component].second->at(m_, p.agent)) {
        Rational w = p.prob * pa;
        out.value += w * m_.rewards[p.state][a];
        by_action[a].push_back({p.component, p.state, p.agent, w});
      }
    }
    if (t + 1 >= horizon_) return out;

    if (m_.play_order == PlayOrder::AgentFirst) {
      for (const auto& [a, group] : by_action) {
        ActedParticles acted;
        for (const auto& p : group) acted.push_back({a, p});
        NatureKey key{hn, a};
        NatureOutcome best = choose(key, fixed, acted, t);
        out.value += best.value;
        merge(out.choices, std::move(best.choices));
      }
    } else {
      ActedParticles acted;
      for (const auto& [a, group] : by_action)
        for (const auto& p : group) acted.push_back({a, p});
      NatureOutcome best = choose(NatureKey{hn, std::nullopt}, fixed, acted, t);
      out.value += best.value;
      merge(out.choices, std::move(best.choices));
    }
    return out;
  }

  static void merge(NatureChoices& into, NatureChoices&& from) {
    for (auto& [k, u] : from) into.emplace(k, std::move(u));
  }

  /// Value of the subtree after nature plays `u` at `key`.
  NatureOutcome after_choice(const NatureKey& key, const PartialAssignment& fixed, const ActedParticles& acted,
                             const Assignment& u, std::size_t t) {
    const NatureHistory& hn = key.history;
    ObsPair zn = hn.last();
    std::map<std::pair<ActionId, ObsPair>, std::vector<Particle>> children;
    for (const auto& [a, p] : acted) {
      for (StateId s2 = 0; s2 < m_.num_states(); ++s2) {
        Rational pt = m_.probability(p.state, a, s2, u);
        if (pt <= 0) continue;
        ObsTriple z = m_.observe(s2);
        children[{a, z.nature_pair()}].push_back(
            {p.component, s2, p.agent.extended(a, z.agent_pair()), p.prob * pt});
      }
    }
    NatureOutcome out{Rational(0), {}};
    std::map<ActionId, PartialAssignment> fixed_after;
    for (auto& [ka, group] : children) {
      auto [a, z] = ka;
      auto it = fixed_after.find(a);
      if (it == fixed_after.end()) it = fixed_after.emplace(a, upd(m_, fixed, u, zn.priv, zn.pub, a)).first;
      NatureOutcome child = node(hn.extended(a, u, z), it->second, group, t + 1);
      out.value += child.value;
      merge(out.choices, std::move(child.choices));
    }
    out.choices.emplace(key, u);
    return out;
  }

  /// Variables whose value can change the subtree below this decision.
  std::vector<VarId> relevant_variables(const NatureKey& key, const PartialAssignment& fixed,
                                        const ActedParticles& acted) const {
    std::set<VarId> out;
    ObsPair zn = key.history.last();
    std::set<std::pair<StateId, ActionId>> rows;
    std::set<ActionId> actions;
    for (const auto& [a, p] : acted) {
      rows.insert({p.state, a});
      actions.insert(a);
    }
    for (const auto& [s, a] : rows)
      for (StateId s2 = 0; s2 < m_.num_states(); ++s2)
        for (const auto& [v, c] : m_.entry(s, a, s2).coefficients) out.insert(v);
    for (VarId v = 0; v < m_.num_variables(); ++v) {
      if (fixed[v]) {
        out.erase(v);
        continue;
      }
      for (ActionId a : actions)
        if (stick(m_, v, zn.priv, zn.pub, a)) out.insert(v);
    }
    return {out.begin(), out.end()};
  }

  static Assignment project(const Assignment& u, const std::vector<VarId>& vars) {
    Assignment out;
    for (VarId v : vars) out.push_back(u[v]);
    return out;
  }

  NatureOutcome choose(const NatureKey& key, const PartialAssignment& fixed, const ActedParticles& acted,
                       std::size_t t) {
    const auto& vertices = cache_.vertices(fixed);
    std::vector<VarId> relevant = relevant_variables(key, fixed, acted);
    if (relevant.empty()) return after_choice(key, fixed, acted, vertices.front(), t);

    std::map<Assignment, Rational> seen;
    std::optional<NatureOutcome> best;
    Assignment best_point;
    auto consider = [&](const Assignment& u) {
      Assignment proj = project(u, relevant);
      if (seen.count(proj)) return false;
      NatureOutcome o = after_choice(key, fixed, acted, u, t);
      seen.emplace(std::move(proj), o.value);
      if (!best || o.value < best->value) {
        best = std::move(o);
        best_point = u;
        return true;
      }
      return false;
    };
    for (const auto& v : vertices) consider(v);
    if (linear_) return std::move(*best);

    UncertaintySet local = constrain(m_.uncertainty, fixed);
    std::optional<AffineHull> hull = equality_hull(local);
    if (!hull) return std::move(*best);
    std::vector<std::size_t> axes;
    for (std::size_t k = 0; k < hull->free_variables.size(); ++k)
      for (VarId v : relevant)
        if (hull->directions[k][v] != 0) {
          axes.push_back(k);
          break;
        }
    if (axes.empty()) return std::move(*best);

    std::vector<Rational> lo, spacing;
    for (std::size_t k : axes) {
      const Interval& box = local.boxes[hull->free_variables[k]];
      lo.push_back(box.lo);
      spacing.push_back(config_.grid_points > 1 ? Rational((box.hi - box.lo) / (config_.grid_points - 1))
                                                : Rational(box.hi - box.lo));
    }
    auto free_values_of = [&](const Assignment& u) {
      std::vector<Rational> out;
      for (VarId v : hull->free_variables) out.push_back(u[v]);
      return out;
    };
    auto try_point = [&](const std::vector<Rational>& free) {
      Assignment u = hull->point(free);
      if (!local.contains(u)) return false;
      return consider(u);
    };

    // Full grid over the relevant free axes; other axes keep the first vertex's values.
    const std::size_t n = std::max<std::size_t>(config_.grid_points, 1);
    std::vector<Rational> start = free_values_of(vertices.front());
    std::vector<std::size_t> index(axes.size(), 0);
    while (true) {
      std::vector<Rational> free = start;
      for (std::size_t j = 0; j < axes.size(); ++j) free[axes[j]] = lo[j] + spacing[j] * index[j];
      try_point(free);
      std::size_t j = 0;
      while (j < axes.size() && ++index[j] == n) index[j++] = 0;
      if (j == axes.size()) break;
    }

    // Pattern search around the incumbent with halving steps.
    Rational step_scale = 1;
    for (std::size_t r = 1; r <= config_.refinement_rounds; ++r) {
      step_scale /= 2;
      for (std::size_t moves = 0; moves < 8; ++moves) {
        bool improved = false;
        std::vector<Rational> centre = free_values_of(best_point);
        for (std::size_t j = 0; j < axes.size(); ++j) {
          for (int sign : {-1, 1}) {
            std::vector<Rational> free = centre;
            free[axes[j]] += spacing[j] * step_scale * sign;
            if (try_point(free)) improved = true;
          }
        }
        if (!improved) break;
      }
    }
    for (const auto& h : spacing) {
      Rational fine = h * step_scale;
      if (fine > 0 && (finest_step_ == 0 || fine < finest_step_)) finest_step_ = fine;
    }
    return std::move(*best);
  }

  const Rpomdp& m_;
  std::vector<std::pair<Rational, const AgentPolicy*>> agents_;
  std::size_t horizon_;
  const SolverConfig& config_;
  bool linear_;
  VertexCache cache_;
  Rational finest_step_ = 0;
};

std::pair<NaturePolicy, Rational> nature_best_response_impl(const Rpomdp& m, const AgentPolicy& pi,
                                                            std::size_t horizon, const SolverConfig& config,
                                                            Rational* finest_step) {
  bool linear = config.nature_linear ? *config.nature_linear : detect_nature_linearity(m, horizon, config.policy_cap);
  NatureSearch search(m, pi, horizon, config, linear);
  NatureOutcome o = search.run();
  if (finest_step && search.finest_step() > 0 && (*finest_step == 0 || search.finest_step() < *finest_step))
    *finest_step = search.finest_step();
  return {nature_deterministic(o.choices), o.value};
}

// ---------------------------------------------------------------------------
// Agent best response

class AgentSearch {
 public:
  AgentSearch(const Rpomdp& m, const NaturePolicy& theta, std::size_t horizon)
      : m_(m), natures_(components_of(theta, theta.mixture)), horizon_(horizon), cache_(m.uncertainty) {}

  std::pair<Rational, std::map<AgentHistory, ActionId>> run() {
    ObsTriple z0 = m_.observe(m_.initial_state);
    NatureHistory hn{z0.nature_pair(), {}};
    Particles particles;
    for (std::size_t j = 0; j < natures_.size(); ++j)
      particles[{j, m_.initial_state, hn}] = {undefined_assignment(m_.num_variables()), natures_[j].first};
    std::map<AgentHistory, ActionId> choices;
    Rational value = horizon_ == 0 ? Rational(0) : node(AgentHistory{z0.agent_pair(), {}}, particles, 0, choices);
    return {value, std::move(choices)};
  }

 private:
  using ParticleKey = std::tuple<std::size_t, StateId, NatureHistory>;
  struct ParticleData {
    PartialAssignment fixed;
    Rational prob;
  };
  using Particles = std::map<ParticleKey, ParticleData>;

  Rational node(const AgentHistory& ha, const Particles& particles, std::size_t t,
                std::map<AgentHistory, ActionId>& choices) {
    std::optional<Rational> best;
    ActionId best_action = 0;
    std::map<AgentHistory, ActionId> best_choices;
    for (ActionId a : m_.enabled_for(ha.last())) {
      Rational value = 0;
      std::map<AgentHistory, ActionId> sub;
      std::map<ObsPair, Particles> children;
      for (const auto& [key, data] : particles) {
        const auto& [j, s, hn] = key;
        value += data.prob * m_.rewards[s][a];
        if (t + 1 == horizon_) continue;
        for (const auto& [u, pu] : natures_[j].second->at(m_, nature_key(m_, hn, a), &cache_)) {
          if (!m_.uncertainty.contains(u) || !agrees(u, data.fixed))
            throw ContractError("nature plays an inadmissible assignment");
          PartialAssignment next_fixed = upd(m_, data.fixed, u, m_.obs_nature[s], m_.obs_public[s], a);
          for (StateId s2 = 0; s2 < m_.num_states(); ++s2) {
            Rational pt = m_.probability(s, a, s2, u);
            if (pt <= 0) continue;
            ObsTriple z = m_.observe(s2);
            auto& slot = children[z.agent_pair()];
            auto [it, inserted] =
                slot.try_emplace({j, s2, hn.extended(a, u, z.nature_pair())}, ParticleData{next_fixed, Rational(0)});
            it->second.prob += data.prob * pu * pt;
          }
        }
      }
      for (const auto& [z, group] : children) value += node(ha.extended(a, z), group, t + 1, sub);
      if (!best || value > *best) {
        best = value;
        best_action = a;
        best_choices = std::move(sub);
      }
    }
    choices.emplace(ha, best_action);
    for (auto& [h, a] : best_choices) choices.emplace(h, a);
    return *best;
  }

  const Rpomdp& m_;
  std::vector<std::pair<Rational, const NaturePolicy*>> natures_;
  std::size_t horizon_;
  VertexCache cache_;
};

// ---------------------------------------------------------------------------
// Double oracle helpers

template <class Policy>
std::size_t find_or_add(std::vector<Policy>& set, Policy&& p, bool& added) {
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set[i].table == p.table) {
      added = false;
      return i;
    }
  set.push_back(std::move(p));
  added = true;
  return set.size() - 1;
}

}  // namespace

bool detect_nature_linearity(const Rpomdp& m, std::size_t horizon, std::size_t policy_cap) {
  LinearityProbe probe(m, horizon);
  for (const auto& pi : enumerate_deterministic_agent_policies(m, horizon, policy_cap))
    if (!probe.linear_for(pi)) return false;
  return true;
}

std::pair<NaturePolicy, Rational> nature_best_response(const Rpomdp& m, const AgentPolicy& pi, std::size_t horizon,
                                                       const SolverConfig& config) {
  return nature_best_response_impl(m, pi, horizon, config, nullptr);
}

std::pair<AgentPolicy, Rational> agent_best_response(const Rpomdp& m, const NaturePolicy& theta,
                                                     std::size_t horizon, const SolverConfig&) {
  AgentSearch search(m, theta, horizon);
  auto [value, choices] = search.run();
  return {agent_deterministic(choices), value};
}

SaddleResult solve_saddle(const Rpomdp& m, std::size_t horizon, const SolverConfig& config_in) {
  SolverConfig config = config_in;
  if (!config.nature_linear) config.nature_linear = detect_nature_linearity(m, horizon, config.policy_cap);

  SaddleResult result;
  result.nature_linear = *config.nature_linear;
  Rational finest = 0;

  std::vector<AgentPolicy> agents;
  std::vector<NaturePolicy> natures;
  agents.push_back(agent_best_response(m, nature_deterministic({}), horizon, config).first);
  natures.push_back(nature_best_response_impl(m, agents.front(), horizon, config, &finest).first);

  // payoff[i][j] = V(agents[i], natures[j]), filled lazily.
  std::vector<std::vector<std::optional<Rational>>> payoff;
  auto entry = [&](std::size_t i, std::size_t j) -> const Rational& {
    if (payoff.size() <= i) payoff.resize(i + 1);
    if (payoff[i].size() <= j) payoff[i].resize(j + 1);
    if (!payoff[i][j]) payoff[i][j] = value_fh(m, agents[i], natures[j], horizon);
    return *payoff[i][j];
  };

  std::optional<Rational> best_gap;
  for (std::size_t round = 1; round <= std::max<std::size_t>(config.max_rounds, 1); ++round) {
    std::vector<std::vector<Rational>> matrix(agents.size(), std::vector<Rational>(natures.size()));
    for (std::size_t i = 0; i < agents.size(); ++i)
      for (std::size_t j = 0; j < natures.size(); ++j) matrix[i][j] = entry(i, j);
    MatrixGameSolution game = solve_matrix_game(matrix);

    std::vector<AgentComponent> xs;
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (game.row_strategy[i] > 0) xs.push_back({game.row_strategy[i], agents[i]});
    std::vector<NatureComponent> ys;
    for (std::size_t j = 0; j < natures.size(); ++j)
      if (game.column_strategy[j] > 0) ys.push_back({game.column_strategy[j], natures[j]});
    AgentPolicy x = agent_mixed(xs);
    NaturePolicy y = nature_mixed(ys);

    auto [nature_br, nature_value] = nature_best_response_impl(m, x, horizon, config, &finest);
    auto [agent_br, agent_value] = agent_best_response(m, y, horizon, config);

    Rational lower = nature_value;
    for (std::size_t j = 0; j < natures.size(); ++j) {
      Rational v = 0;
      for (std::size_t i = 0; i < agents.size(); ++i)
        if (game.row_strategy[i] > 0) v += game.row_strategy[i] * matrix[i][j];
      lower = std::min(lower, v);
    }
    Rational upper = agent_value;
    Rational gap = upper - lower;
    if (!best_gap || gap < *best_gap) {
      best_gap = gap;
      result.lower_value = lower;
      result.upper_value = upper;
      result.gap = gap;
      result.agent_policy = x;
      result.nature_policy = y;
    }
    result.gap_history.push_back(*best_gap);
    result.iterations = round;
    if (gap <= config.tolerance) break;

    bool added_agent = false;
    bool added_nature = false;
    find_or_add(agents, std::move(agent_br), added_agent);
    find_or_add(natures, std::move(nature_br), added_nature);
    if (!added_agent && !added_nature) break;
  }
  result.agent_candidates = agents.size();
  result.nature_candidates = natures.size();
  result.grid_resolution = finest;
  return result;
}

}  // namespace rpomdp
