#include "rpomdp/evaluation.hpp"

#include <algorithm>
#include <tuple>
#include <vector>

namespace rpomdp {

namespace {

void check_admissible(const Rpomdp& m, const Assignment& u, const PartialAssignment& fixed) {
  if (!m.uncertainty.contains(u)) throw ContractError("nature plays an assignment outside the uncertainty set");
  if (!agrees(u, fixed)) throw ContractError("nature plays against the fixed variables");
}

void require_behavioural(const AgentPolicy& pi, const NaturePolicy& theta) {
  if (pi.kind == PolicyKind::Mixed || theta.kind == PolicyKind::Mixed)
    throw ContractError("occupancy steps need stochastic or deterministic policies");
}

/// Particle key of the exact evaluation: merging is sound because the future
/// depends on the path only through these three components.
struct ParticleKey {
  StateId state;
  AgentHistory agent;
  NatureHistory nature;
  friend auto operator<=>(const ParticleKey&, const ParticleKey&) = default;
};

/// Expected reward of each step below `horizon` for a pure policy pair.
void add_pure_step_rewards(const Rpomdp& m, const AgentPolicy& pi, const NaturePolicy& theta, std::size_t horizon,
                           const Rational& weight, std::vector<Rational>& out, VertexCache& cache) {
  ObsTriple z0 = m.observe(m.initial_state);
  std::map<ParticleKey, Rational> frontier{
      {{m.initial_state, AgentHistory{z0.agent_pair(), {}}, NatureHistory{z0.nature_pair(), {}}}, weight}};
  std::map<NatureHistory, PartialAssignment> fixed_of{
      {NatureHistory{z0.nature_pair(), {}}, undefined_assignment(m.num_variables())}};
  for (std::size_t t = 0; t < horizon; ++t) {
    std::map<ParticleKey, Rational> next;
    for (const auto& [key, prob] : frontier) {
      const auto& fixed = fixed_of.at(key.nature);
      for (const auto& [a, pa] : pi.at(m, key.agent)) {
        if (!m.is_enabled(key.state, a)) throw ContractError("agent plays a disabled action");
        out[t] += prob * pa * m.rewards[key.state][a];
        if (t + 1 == horizon) continue;
        for (const auto& [u, pu] : theta.at(m, nature_key(m, key.nature, a), &cache)) {
          check_admissible(m, u, fixed);
          PartialAssignment next_fixed;
          bool fixed_known = false;
          for (StateId s2 = 0; s2 < m.num_states(); ++s2) {
            Rational pt = m.probability(key.state, a, s2, u);
            if (pt <= 0) continue;
            ObsTriple z = m.observe(s2);
            ParticleKey child{s2, key.agent.extended(a, z.agent_pair()), key.nature.extended(a, u, z.nature_pair())};
            if (!fixed_known) {
              next_fixed = upd(m, fixed, u, m.obs_nature[key.state], m.obs_public[key.state], a);
              fixed_known = true;
            }
            fixed_of.emplace(child.nature, next_fixed);
            next[std::move(child)] += prob * pa * pu * pt;
          }
        }
      }
    }
    frontier = std::move(next);
  }
}

std::vector<Rational> step_rewards(const Rpomdp& m, const AgentPolicy& pi, const NaturePolicy& theta,
                                   std::size_t horizon) {
  std::vector<Rational> out(horizon, Rational(0));
  VertexCache cache(m.uncertainty);
  auto with_agent = [&](const Rational& wa, const AgentPolicy& p) {
    if (theta.kind == PolicyKind::Mixed) {
      for (const auto& c : theta.mixture) add_pure_step_rewards(m, p, c.policy, horizon, wa * c.weight, out, cache);
    } else {
      add_pure_step_rewards(m, p, theta, horizon, wa, out, cache);
    }
  };
  if (pi.kind == PolicyKind::Mixed) {
    for (const auto& c : pi.mixture) with_agent(c.weight, c.policy);
  } else {
    with_agent(Rational(1), pi);
  }
  return out;
}

}  // namespace

Belief initial_belief(const Rpomdp& m) { return {{m.initial_state, Rational(1)}}; }

Belief belief_update(const Rpomdp& m, const Belief& b, ActionId a, const Assignment& u, ObsId z_agent,
                     ObsId z_nature, ObsId z_public) {
  Belief out;
  Rational total = 0;
  for (StateId s2 = 0; s2 < m.num_states(); ++s2) {
    if (m.obs_agent[s2] != z_agent || m.obs_nature[s2] != z_nature || m.obs_public[s2] != z_public) continue;
    Rational mass = 0;
    for (const auto& [s, p] : b)
      if (m.is_enabled(s, a)) mass += p * m.probability(s, a, s2, u);
    if (mass > 0) {
      out[s2] = mass;
      total += mass;
    }
  }
  if (total == 0) throw ImpossibleObservationError("observation has probability zero under the belief");
  for (auto& [s, p] : out) p /= total;
  return out;
}

Belief belief_after(const Rpomdp& m, const JointHistory& h) {
  if (m.observe(m.initial_state) != h.initial)
    throw ImpossibleObservationError("history does not start with the initial observation");
  Belief b = initial_belief(m);
  for (const auto& step : h.steps) b = belief_update(m, b, step.action, step.assignment, step.obs.agent,
                                                     step.obs.nature, step.obs.pub);
  return b;
}

Rational value_fh(const Rpomdp& m, const AgentPolicy& pi, const NaturePolicy& theta, std::size_t horizon) {
  Rational total = 0;
  for (const auto& r : step_rewards(m, pi, theta, horizon)) total += r;
  return total;
}

DiscountedValue discounted_value(const Rpomdp& m, const AgentPolicy& pi, const NaturePolicy& theta,
                                 const Rational& gamma, std::size_t horizon) {
  if (gamma < 0 || gamma >= 1) throw DomainError("discount factor must lie in [0, 1)");
  DiscountedValue out{Rational(0), Rational(0)};
  Rational weight = 1;
  for (const auto& r : step_rewards(m, pi, theta, horizon)) {
    out.value += weight * r;
    weight *= gamma;
  }
  Rational r_max = 0;
  for (const auto& row : m.rewards)
    for (const auto& r : row) r_max = std::max(r_max, abs(r));
  out.tail_bound = weight * r_max / (1 - gamma);
  return out;
}

// ---------------------------------------------------------------------------
// Occupancy states

OccupancyState occupancy_init(const Rpomdp& m) {
  OccupancyState occ;
  occ.dist[JointHistory{m.observe(m.initial_state), {}}] = 1;
  occ.nature_prefix.kind = PolicyKind::Stochastic;
  return occ;
}

OccupancyState occupancy_next(const Rpomdp& m, const OccupancyState& occ, const AgentPolicy& pi_t,
                              const NaturePolicy& theta_t) {
  require_behavioural(pi_t, theta_t);
  VertexCache cache(m.uncertainty);
  OccupancyState out;
  out.nature_prefix = occ.nature_prefix;
  out.t = occ.t + 1;
  Rational total = 0;
  for (const auto& [h, mass] : occ.dist) {
    if (mass == 0) continue;
    Belief b = belief_after(m, h);
    AgentHistory ha = agent_part(h);
    NatureHistory hn = nature_part(h);
    PartialAssignment fixed = fix(m, hn);
    for (const auto& [a, pa] : pi_t.at(m, ha)) {
      NatureKey key = nature_key(m, hn, a);
      AssignmentDistribution du = theta_t.at(m, key, &cache);
      out.nature_prefix.table.emplace(key, du);
      for (const auto& [u, pu] : du) {
        check_admissible(m, u, fixed);
        for (const auto& [s, ps] : b) {
          if (!m.is_enabled(s, a)) continue;
          for (StateId s2 = 0; s2 < m.num_states(); ++s2) {
            Rational pt = m.probability(s, a, s2, u);
            if (pt <= 0) continue;
            Rational w = pt * pu * pa * ps * mass;
            JointHistory child = h;
            child.steps.push_back({a, u, m.observe(s2)});
            out.dist[std::move(child)] += w;
            total += w;
          }
        }
      }
    }
  }
  if (total == 0) throw ContractError("occupancy has no successor mass");
  for (auto& [h, p] : out.dist) p /= total;
  return out;
}

Rational expected_reward(const Rpomdp& m, const OccupancyState& occ, const AgentPolicy& pi_t) {
  if (pi_t.kind == PolicyKind::Mixed) throw ContractError("occupancy steps need stochastic or deterministic policies");
  Rational total = 0;
  for (const auto& [h, mass] : occ.dist) {
    if (mass == 0) continue;
    Belief b = belief_after(m, h);
    for (const auto& [a, pa] : pi_t.at(m, agent_part(h)))
      for (const auto& [s, ps] : b)
        if (m.is_enabled(s, a)) total += m.rewards[s][a] * pa * ps * mass;
  }
  return total;
}

Rational occupancy_value(const Rpomdp& m, const AgentPolicy& pi, const NaturePolicy& theta, std::size_t horizon) {
  AgentPolicy pi_b = pi.kind == PolicyKind::Mixed ? stochastic_from_mixed(m, pi, horizon) : pi;
  NaturePolicy theta_b = theta.kind == PolicyKind::Mixed ? stochastic_from_mixed(m, theta, horizon) : theta;
  Rational total = 0;
  OccupancyState occ = occupancy_init(m);
  for (std::size_t t = 0; t < horizon; ++t) {
    total += expected_reward(m, occ, pi_b);
    if (t + 1 < horizon) occ = occupancy_next(m, occ, pi_b, theta_b);
  }
  return total;
}

}  // namespace rpomdp
