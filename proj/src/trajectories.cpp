#include "rpomdp/trajectories.hpp"

#include <algorithm>

namespace rpomdp {

Path Path::prefix(std::size_t k) const {
  Path p{initial, {}};
  p.steps.assign(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(std::min(k, steps.size())));
  return p;
}

Path Path::extended(Step step) const {
  Path p = *this;
  p.steps.push_back(std::move(step));
  return p;
}

JointHistory JointHistory::prefix(std::size_t k) const {
  JointHistory h{initial, {}};
  h.steps.assign(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(std::min(k, steps.size())));
  return h;
}

AgentHistory AgentHistory::prefix(std::size_t k) const {
  AgentHistory h{initial, {}};
  h.steps.assign(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(std::min(k, steps.size())));
  return h;
}

AgentHistory AgentHistory::extended(ActionId a, ObsPair z) const {
  AgentHistory h = *this;
  h.steps.push_back({a, z});
  return h;
}

NatureHistory NatureHistory::prefix(std::size_t k) const {
  NatureHistory h{initial, {}};
  h.steps.assign(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(std::min(k, steps.size())));
  return h;
}

NatureHistory NatureHistory::extended(ActionId a, Assignment u, ObsPair z) const {
  NatureHistory h = *this;
  h.steps.push_back({a, std::move(u), z});
  return h;
}

namespace {

/// Adds the newly sticking variables of `u` without the agreement check.
void stick_into(const Rpomdp& m, PartialAssignment& fixed, const Assignment& u, ObsId zn, ObsId zp,
                ActionId a) {
  for (VarId v = 0; v < m.num_variables(); ++v)
    if (!fixed[v] && stick(m, v, zn, zp, a)) fixed[v] = u[v];
}

}  // namespace

PartialAssignment fix(const Rpomdp& m, const Path& path) {
  PartialAssignment fixed = undefined_assignment(m.num_variables());
  StateId s = path.initial;
  for (const auto& step : path.steps) {
    stick_into(m, fixed, step.assignment, m.obs_nature[s], m.obs_public[s], step.action);
    s = step.next;
  }
  return fixed;
}

PartialAssignment fix(const Rpomdp& m, const NatureHistory& h) {
  PartialAssignment fixed = undefined_assignment(m.num_variables());
  ObsPair z = h.initial;
  for (const auto& step : h.steps) {
    stick_into(m, fixed, step.assignment, z.priv, z.pub, step.action);
    z = step.obs;
  }
  return fixed;
}

bool path_valid(const Rpomdp& m, const Path& path) {
  if (path.initial >= m.num_states()) return false;
  PartialAssignment fixed = undefined_assignment(m.num_variables());
  StateId s = path.initial;
  for (const auto& step : path.steps) {
    if (step.next >= m.num_states() || !m.is_enabled(s, step.action)) return false;
    if (!m.uncertainty.contains(step.assignment) || !agrees(step.assignment, fixed)) return false;
    if (m.probability(s, step.action, step.next, step.assignment) <= 0) return false;
    stick_into(m, fixed, step.assignment, m.obs_nature[s], m.obs_public[s], step.action);
    s = step.next;
  }
  return true;
}

JointHistory observe_joint(const Rpomdp& m, const Path& path) {
  JointHistory h{m.observe(path.initial), {}};
  for (const auto& step : path.steps) h.steps.push_back({step.action, step.assignment, m.observe(step.next)});
  return h;
}

AgentHistory observe_agent(const Rpomdp& m, const Path& path) {
  return agent_part(observe_joint(m, path));
}

NatureHistory observe_nature(const Rpomdp& m, const Path& path) {
  return nature_part(observe_joint(m, path));
}

AgentHistory agent_part(const JointHistory& h) {
  AgentHistory out{h.initial.agent_pair(), {}};
  for (const auto& step : h.steps) out.steps.push_back({step.action, step.obs.agent_pair()});
  return out;
}

NatureHistory nature_part(const JointHistory& h) {
  NatureHistory out{h.initial.nature_pair(), {}};
  for (const auto& step : h.steps) out.steps.push_back({step.action, step.assignment, step.obs.nature_pair()});
  return out;
}

std::vector<StateId> possible_successors(const Rpomdp& m, StateId s, ActionId a) {
  auto vertices = uncertainty_vertices(m.uncertainty);
  std::vector<StateId> out;
  for (StateId t = 0; t < m.num_states(); ++t) {
    const AffineExpr& e = m.entry(s, a, t);
    if (e.is_zero()) continue;
    if (std::any_of(vertices.begin(), vertices.end(), [&](const Assignment& u) { return e.evaluate(u) > 0; }))
      out.push_back(t);
  }
  return out;
}

std::vector<Path> enumerate_valid_paths(const Rpomdp& m, std::size_t length) {
  VertexCache cache(m.uncertainty);
  struct Item {
    Path path;
    PartialAssignment fixed;
  };
  std::vector<Item> frontier{{Path{m.initial_state, {}}, undefined_assignment(m.num_variables())}};
  for (std::size_t k = 0; k < length; ++k) {
    std::vector<Item> next;
    for (const auto& item : frontier) {
      StateId s = item.path.last();
      std::vector<Assignment> candidates = cache.vertices(item.fixed);
      if (candidates.size() > 1) {
        Assignment centre(m.num_variables(), Rational(0));
        for (const auto& v : candidates)
          for (VarId i = 0; i < centre.size(); ++i) centre[i] += v[i];
        for (auto& x : centre) x /= static_cast<long>(candidates.size());
        if (std::find(candidates.begin(), candidates.end(), centre) == candidates.end())
          candidates.push_back(centre);
      }
      for (ActionId a : m.enabled[s])
        for (const auto& u : candidates) {
          PartialAssignment fixed = item.fixed;
          stick_into(m, fixed, u, m.obs_nature[s], m.obs_public[s], a);
          for (StateId t = 0; t < m.num_states(); ++t)
            if (m.probability(s, a, t, u) > 0) next.push_back({item.path.extended({a, u, t}), fixed});
        }
    }
    frontier = std::move(next);
  }
  std::vector<Path> out;
  out.reserve(frontier.size());
  for (auto& item : frontier) out.push_back(std::move(item.path));
  return out;
}

}  // namespace rpomdp
