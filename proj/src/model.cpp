#include "rpomdp/model.hpp"

#include "linalg.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <sstream>

namespace rpomdp {

PartialAssignment undefined_assignment(std::size_t n) { return PartialAssignment(n); }

bool agrees(const Assignment& u, const PartialAssignment& partial) {
  if (u.size() != partial.size()) return false;
  for (std::size_t v = 0; v < u.size(); ++v)
    if (partial[v] && *partial[v] != u[v]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// AffineExpr and constraints

AffineExpr AffineExpr::variable(VarId var, Rational coeff) {
  AffineExpr e;
  if (coeff != 0) e.coefficients.emplace(var, std::move(coeff));
  return e;
}

Rational AffineExpr::evaluate(const Assignment& u) const {
  Rational value = constant;
  for (const auto& [v, c] : coefficients) value += c * u.at(v);
  return value;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  constant += other.constant;
  for (const auto& [v, c] : other.coefficients) {
    Rational& slot = coefficients[v];
    slot += c;
    if (slot == 0) coefficients.erase(v);
  }
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) { return *this += other * Rational(-1); }

AffineExpr& AffineExpr::operator*=(const Rational& factor) {
  if (factor == 0) {
    constant = 0;
    coefficients.clear();
    return *this;
  }
  constant *= factor;
  for (auto& [v, c] : coefficients) c *= factor;
  return *this;
}

bool LinearConstraint::satisfied_by(const Assignment& u) const {
  Rational lhs = 0;
  for (const auto& [v, c] : coefficients) lhs += c * u.at(v);
  switch (relation) {
    case Relation::Equal: return lhs == rhs;
    case Relation::LessEqual: return lhs <= rhs;
    case Relation::GreaterEqual: return lhs >= rhs;
  }
  return false;
}

// ---------------------------------------------------------------------------
// UncertaintySet

std::optional<VarId> UncertaintySet::find(const std::string& name) const {
  auto it = std::find(variables.begin(), variables.end(), name);
  if (it == variables.end()) return std::nullopt;
  return static_cast<VarId>(it - variables.begin());
}

VarId UncertaintySet::index_of(const std::string& name) const {
  if (auto v = find(name)) return *v;
  throw DomainError("unknown variable '" + name + "'");
}

bool UncertaintySet::contains(const Assignment& u) const {
  if (u.size() != variables.size()) return false;
  for (std::size_t v = 0; v < u.size(); ++v)
    if (u[v] < boxes[v].lo || u[v] > boxes[v].hi) return false;
  return std::all_of(couplings.begin(), couplings.end(),
                     [&](const LinearConstraint& c) { return c.satisfied_by(u); });
}

Assignment AffineHull::point(const std::vector<Rational>& free_values) const {
  Assignment x = base;
  for (std::size_t k = 0; k < directions.size(); ++k)
    for (std::size_t v = 0; v < x.size(); ++v) x[v] += free_values[k] * directions[k][v];
  return x;
}

std::optional<AffineHull> equality_hull(const UncertaintySet& set) {
  const std::size_t n = set.size();
  detail::Matrix rows;
  for (std::size_t v = 0; v < n; ++v) {
    if (set.boxes[v].lo != set.boxes[v].hi) continue;
    std::vector<Rational> row(n + 1);
    row[v] = 1;
    row[n] = set.boxes[v].lo;
    rows.push_back(std::move(row));
  }
  for (const auto& c : set.couplings) {
    if (c.relation != Relation::Equal) continue;
    std::vector<Rational> row(n + 1);
    for (const auto& [v, coeff] : c.coefficients) row[v] = coeff;
    row[n] = c.rhs;
    rows.push_back(std::move(row));
  }
  detail::Echelon e = detail::reduce(std::move(rows), n);
  if (!e.consistent) return std::nullopt;

  AffineHull hull;
  hull.base.assign(n, Rational(0));
  std::vector<bool> is_pivot(n, false);
  for (std::size_t r = 0; r < e.pivots.size(); ++r) {
    is_pivot[e.pivots[r]] = true;
    hull.base[e.pivots[r]] = e.rows[r][n];
  }
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    Assignment dir(n, Rational(0));
    dir[f] = 1;
    for (std::size_t r = 0; r < e.pivots.size(); ++r) dir[e.pivots[r]] = -e.rows[r][f];
    hull.free_variables.push_back(f);
    hull.directions.push_back(std::move(dir));
  }
  return hull;
}

namespace {

/// Inequality `coeffs . y <= rhs` over the hull parameters.
struct HullInequality {
  std::vector<Rational> coeffs;
  Rational rhs;
};

/// Rewrites `g . x <= h` in terms of the hull parameters.
HullInequality to_hull(const AffineHull& hull, const std::vector<Rational>& g, const Rational& h) {
  HullInequality out;
  out.rhs = h;
  for (std::size_t v = 0; v < g.size(); ++v) out.rhs -= g[v] * hull.base[v];
  out.coeffs.resize(hull.directions.size());
  for (std::size_t k = 0; k < hull.directions.size(); ++k)
    for (std::size_t v = 0; v < g.size(); ++v) out.coeffs[k] += g[v] * hull.directions[k][v];
  return out;
}

std::vector<HullInequality> hull_inequalities(const UncertaintySet& set, const AffineHull& hull) {
  const std::size_t n = set.size();
  std::vector<HullInequality> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (set.boxes[v].lo == set.boxes[v].hi) continue;
    std::vector<Rational> g(n);
    g[v] = 1;
    out.push_back(to_hull(hull, g, set.boxes[v].hi));
    g[v] = -1;
    out.push_back(to_hull(hull, g, -set.boxes[v].lo));
  }
  for (const auto& c : set.couplings) {
    if (c.relation == Relation::Equal) continue;
    std::vector<Rational> g(n);
    Rational sign = c.relation == Relation::LessEqual ? 1 : -1;
    for (const auto& [v, coeff] : c.coefficients) g[v] = sign * coeff;
    out.push_back(to_hull(hull, g, sign * c.rhs));
  }
  return out;
}

bool satisfies(const std::vector<HullInequality>& rows, const std::vector<Rational>& y) {
  for (const auto& row : rows) {
    Rational lhs = 0;
    for (std::size_t k = 0; k < y.size(); ++k) lhs += row.coeffs[k] * y[k];
    if (lhs > row.rhs) return false;
  }
  return true;
}

}  // namespace

std::vector<Assignment> uncertainty_vertices(const UncertaintySet& set) {
  for (std::size_t v = 0; v < set.size(); ++v)
    if (set.boxes[v].lo > set.boxes[v].hi)
      throw InfeasibleError("empty box for variable '" + set.variables[v] + "'");
  auto hull = equality_hull(set);
  if (!hull) throw InfeasibleError("inconsistent equality constraints");
  auto rows = hull_inequalities(set, *hull);
  const std::size_t d = hull->directions.size();

  std::set<Assignment> found;
  if (d == 0) {
    if (satisfies(rows, {})) found.insert(hull->base);
  } else {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (std::any_of(rows[i].coeffs.begin(), rows[i].coeffs.end(),
                      [](const Rational& c) { return c != 0; }))
        active.push_back(i);
    // Enumerate all d-subsets of the nondegenerate inequalities.
    std::vector<std::size_t> pick(d);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t start) {
      if (depth == d) {
        detail::Matrix a;
        std::vector<Rational> b;
        for (std::size_t idx : pick) {
          a.push_back(rows[active[idx]].coeffs);
          b.push_back(rows[active[idx]].rhs);
        }
        auto y = detail::solve_square(std::move(a), std::move(b));
        if (y && satisfies(rows, *y)) found.insert(hull->point(*y));
        return;
      }
      for (std::size_t i = start; i + (d - depth) <= active.size(); ++i) {
        pick[depth] = i;
        rec(depth + 1, i + 1);
      }
    };
    rec(0, 0);
  }
  if (found.empty()) throw InfeasibleError("uncertainty set has no member");
  return {found.begin(), found.end()};
}

UncertaintySet constrain(const UncertaintySet& set, const PartialAssignment& partial) {
  if (partial.size() != set.size()) throw DomainError("partial assignment has wrong arity");
  UncertaintySet out = set;
  for (std::size_t v = 0; v < partial.size(); ++v) {
    if (!partial[v]) continue;
    if (*partial[v] < set.boxes[v].lo || *partial[v] > set.boxes[v].hi)
      throw InfeasibleError("fixed value of '" + set.variables[v] + "' lies outside its box");
    out.boxes[v] = {*partial[v], *partial[v]};
  }
  (void)uncertainty_vertices(out);
  return out;
}

const std::vector<Assignment>& VertexCache::vertices(const PartialAssignment& partial) {
  auto it = cache_.find(partial);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(partial, uncertainty_vertices(constrain(*set_, partial))).first->second;
}

// ---------------------------------------------------------------------------
// Rpomdp

namespace {

std::size_t index_in(const std::vector<std::string>& names, const std::string& name,
                     const char* what) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DomainError(std::string("unknown ") + what + " '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

StateId Rpomdp::state_index(const std::string& name) const { return index_in(states, name, "state"); }
ActionId Rpomdp::action_index(const std::string& name) const {
  return index_in(actions, name, "action");
}
ObsId Rpomdp::agent_obs_index(const std::string& name) const {
  return index_in(agent_observations, name, "agent observation");
}
ObsId Rpomdp::nature_obs_index(const std::string& name) const {
  return index_in(nature_observations, name, "nature observation");
}
ObsId Rpomdp::public_obs_index(const std::string& name) const {
  return index_in(public_observations, name, "public observation");
}

bool Rpomdp::is_enabled(StateId s, ActionId a) const {
  return s < enabled.size() && std::binary_search(enabled[s].begin(), enabled[s].end(), a);
}

const std::vector<ActionId>& Rpomdp::enabled_for(const ObsPair& z) const {
  for (StateId s = 0; s < num_states(); ++s)
    if (obs_agent[s] == z.priv && obs_public[s] == z.pub) return enabled[s];
  throw DomainError("no state carries the given agent observation");
}

std::vector<StateId> Rpomdp::template_successors(StateId s, ActionId a) const {
  std::vector<StateId> out;
  for (StateId t = 0; t < num_states(); ++t)
    if (!transitions[s][a][t].is_zero()) out.push_back(t);
  return out;
}

Rpomdp make_model(std::vector<std::string> states, std::vector<std::string> actions,
                  std::vector<std::string> agent_obs, std::vector<std::string> nature_obs,
                  std::vector<std::string> public_obs) {
  Rpomdp m;
  const std::size_t ns = states.size();
  const std::size_t na = actions.size();
  m.states = std::move(states);
  m.actions = std::move(actions);
  m.agent_observations = std::move(agent_obs);
  m.nature_observations = std::move(nature_obs);
  m.public_observations = std::move(public_obs);
  m.obs_agent.assign(ns, 0);
  m.obs_nature.assign(ns, 0);
  m.obs_public.assign(ns, 0);
  std::vector<ActionId> all(na);
  for (ActionId a = 0; a < na; ++a) all[a] = a;
  m.enabled.assign(ns, all);
  m.rewards.assign(ns, std::vector<Rational>(na, Rational(0)));
  m.transitions.assign(ns, std::vector<std::vector<AffineExpr>>(na, std::vector<AffineExpr>(ns)));
  return m;
}

ValidationReport validate_model(const Rpomdp& m) {
  ValidationReport report;
  auto add = [&](const std::string& msg) { report.violations.push_back(msg); };
  const std::size_t ns = m.num_states();
  const std::size_t na = m.num_actions();
  const std::size_t nv = m.num_variables();

  if (ns == 0) add("model has no states");
  if (na == 0) add("model has no actions");
  if (m.initial_state >= ns) add("initial state out of range");
  if (m.obs_agent.size() != ns || m.obs_nature.size() != ns || m.obs_public.size() != ns) {
    add("observation maps do not cover every state");
    return report;
  }
  for (StateId s = 0; s < ns; ++s) {
    if (m.obs_agent[s] >= m.agent_observations.size())
      add("state '" + m.states[s] + "': agent observation out of range");
    if (m.obs_nature[s] >= m.nature_observations.size())
      add("state '" + m.states[s] + "': nature observation out of range");
    if (m.obs_public[s] >= m.public_observations.size())
      add("state '" + m.states[s] + "': public observation out of range");
  }
  if (m.enabled.size() != ns || m.rewards.size() != ns || m.transitions.size() != ns) {
    add("enabled actions, rewards or transitions do not cover every state");
    return report;
  }
  for (StateId s = 0; s < ns; ++s) {
    if (m.enabled[s].empty()) add("state '" + m.states[s] + "' enables no action");
    if (!std::is_sorted(m.enabled[s].begin(), m.enabled[s].end()) ||
        std::adjacent_find(m.enabled[s].begin(), m.enabled[s].end()) != m.enabled[s].end())
      add("state '" + m.states[s] + "': enabled actions not strictly ascending");
    for (ActionId a : m.enabled[s])
      if (a >= na) add("state '" + m.states[s] + "': enabled action out of range");
    if (m.rewards[s].size() != na || m.transitions[s].size() != na) {
      add("state '" + m.states[s] + "': reward or transition row has wrong width");
      return report;
    }
    for (ActionId a = 0; a < na; ++a)
      if (m.transitions[s][a].size() != ns) {
        add("state '" + m.states[s] + "': transition row has wrong width");
        return report;
      }
  }
  for (StateId s = 0; s < ns; ++s)
    for (StateId t = s + 1; t < ns; ++t)
      if (m.obs_agent[s] == m.obs_agent[t] && m.obs_public[s] == m.obs_public[t] &&
          m.enabled[s] != m.enabled[t])
        add("states '" + m.states[s] + "' and '" + m.states[t] +
            "' share the agent observation but enable different actions");

  // Uncertainty set.
  const auto& U = m.uncertainty;
  if (U.boxes.size() != nv) {
    add("uncertainty set: one box per variable required");
    return report;
  }
  for (VarId v = 0; v < nv; ++v)
    if (U.boxes[v].lo > U.boxes[v].hi) add("variable '" + U.variables[v] + "': empty box");
  for (std::size_t i = 0; i < U.couplings.size(); ++i)
    for (const auto& [v, c] : U.couplings[i].coefficients)
      if (v >= nv) add("coupling " + std::to_string(i) + " references an unknown variable");
  std::vector<Assignment> vertices;
  try {
    vertices = uncertainty_vertices(U);
  } catch (const InfeasibleError& e) {
    add(std::string("uncertainty set is empty: ") + e.what());
  }

  // Transition template.
  for (StateId s = 0; s < ns; ++s) {
    for (ActionId a : m.enabled[s]) {
      if (a >= na) continue;
      AffineExpr sum;
      bool bad_var = false;
      for (StateId t = 0; t < ns; ++t) {
        sum += m.transitions[s][a][t];
        for (const auto& [v, c] : m.transitions[s][a][t].coefficients)
          if (v >= nv) bad_var = true;
      }
      std::string where = "(" + m.states[s] + ", " + m.actions[a] + ")";
      if (bad_var) {
        add("row " + where + " references an unknown variable");
        continue;
      }
      if (sum != AffineExpr(1)) add("row " + where + " does not sum to the constant 1");
      for (StateId t = 0; t < ns; ++t) {
        const AffineExpr& e = m.transitions[s][a][t];
        if (e.is_zero()) continue;
        bool some_zero = false;
        bool some_positive = false;
        bool out_of_range = false;
        for (const auto& u : vertices) {
          Rational p = e.evaluate(u);
          if (p < 0 || p > 1) out_of_range = true;
          if (p == 0) some_zero = true;
          if (p > 0) some_positive = true;
        }
        if (out_of_range)
          add("entry " + where + " -> " + m.states[t] + " leaves [0,1] on the uncertainty set");
        if (some_zero && some_positive) report.graph_changes.push_back({s, a, t, true});
      }
    }
  }

  // Stickiness tables.
  const auto& st = m.stickiness;
  if (st.kind == StickinessKind::ObservationBased) {
    if (st.influence.size() != nv) add("observation-based stickiness needs one influence set per variable");
    for (const auto& set : st.influence)
      for (const auto& [s, a] : set)
        if (s >= ns || a >= na) add("influence entry references an unknown state or action");
  }
  if (st.kind == StickinessKind::Custom)
    for (const auto& [v, zn, zp, a] : st.custom_table)
      if (v >= nv || zn >= m.nature_observations.size() || zp >= m.public_observations.size() ||
          a >= na)
        add("custom stickiness entry references an unknown identifier");
  return report;
}

bool stick(const Rpomdp& m, VarId v, ObsId zn, ObsId zp, ActionId a) {
  if (v >= m.num_variables()) throw DomainError("unknown variable id");
  if (zn >= m.nature_observations.size()) throw DomainError("unknown nature observation id");
  if (zp >= m.public_observations.size()) throw DomainError("unknown public observation id");
  if (a >= m.num_actions()) throw DomainError("unknown action id");
  switch (m.stickiness.kind) {
    case StickinessKind::Zero: return false;
    case StickinessKind::Full: return true;
    case StickinessKind::Custom: return m.stickiness.custom_table.count({v, zn, zp, a}) != 0;
    case StickinessKind::ObservationBased: {
      if (v >= m.stickiness.influence.size()) return false;
      for (const auto& [s, act] : m.stickiness.influence[v])
        if (act == a && m.obs_nature[s] == zn && m.obs_public[s] == zp) return true;
      return false;
    }
  }
  return false;
}

std::vector<VarId> sticking_variables(const Rpomdp& m, StateId s, ActionId a) {
  if (s >= m.num_states()) throw DomainError("unknown state id");
  if (a >= m.num_actions()) throw DomainError("unknown action id");
  std::vector<VarId> out;
  for (VarId v = 0; v < m.num_variables(); ++v)
    if (stick(m, v, m.obs_nature[s], m.obs_public[s], a)) out.push_back(v);
  return out;
}

std::vector<std::set<std::pair<StateId, ActionId>>> derive_influence(const Rpomdp& m) {
  std::vector<std::set<std::pair<StateId, ActionId>>> out(m.num_variables());
  for (StateId s = 0; s < m.num_states(); ++s)
    for (ActionId a : m.enabled[s])
      for (StateId t = 0; t < m.num_states(); ++t)
        for (const auto& [v, c] : m.transitions[s][a][t].coefficients) out[v].insert({s, a});
  return out;
}

PartialAssignment upd(const Rpomdp& m, const PartialAssignment& partial, const Assignment& u,
                      ObsId zn, ObsId zp, ActionId a) {
  if (!agrees(u, partial)) throw InvalidChoiceError("assignment disagrees with the fixed variables");
  PartialAssignment out = partial;
  for (VarId v = 0; v < m.num_variables(); ++v)
    if (!out[v] && stick(m, v, zn, zp, a)) out[v] = u[v];
  return out;
}

// ---------------------------------------------------------------------------
// Determinization of observations

Rpomdp determinize_observations(const RawRpomdp& raw) {
  const std::size_t ns = raw.states.size();
  const std::size_t na = raw.actions.size();
  if (raw.initial_state >= ns) throw DomainError("initial state out of range");
  if (raw.joint.size() != ns || raw.enabled.size() != ns || raw.rewards.size() != ns)
    throw DomainError("template does not cover every state");
  auto check_obs = [&](const ObsTriple& z) {
    if (z.agent >= raw.agent_observations.size() || z.nature >= raw.nature_observations.size() ||
        z.pub >= raw.public_observations.size())
      throw DomainError("observation index out of range");
  };
  check_obs(raw.initial_observation);
  for (StateId s = 0; s < ns; ++s) {
    if (raw.joint[s].size() != na || raw.rewards[s].size() != na)
      throw DomainError("template row has wrong width");
    for (ActionId a : raw.enabled[s]) {
      if (a >= na) throw DomainError("enabled action out of range");
      AffineExpr sum;
      for (const auto& e : raw.joint[s][a]) {
        if (e.next >= ns) throw DomainError("successor state out of range");
        check_obs({e.agent, e.nature, e.pub});
        sum += e.probability;
      }
      if (sum != AffineExpr(1))
        throw DomainError("row (" + raw.states[s] + ", " + raw.actions[a] +
                          ") does not sum to the constant 1");
    }
  }

  using Key = std::tuple<StateId, ObsId, ObsId, ObsId>;
  std::map<Key, StateId> index;
  std::vector<Key> keys;
  std::queue<StateId> frontier;
  auto intern = [&](const Key& k) {
    auto [it, inserted] = index.emplace(k, keys.size());
    if (inserted) {
      keys.push_back(k);
      frontier.push(it->second);
    }
    return it->second;
  };
  const auto& z0 = raw.initial_observation;
  intern({raw.initial_state, z0.agent, z0.nature, z0.pub});
  // edges[p][a] lists (target product state, probability) pairs.
  std::vector<std::vector<std::vector<std::pair<StateId, AffineExpr>>>> edges;
  while (!frontier.empty()) {
    StateId p = frontier.front();
    frontier.pop();
    StateId s = std::get<0>(keys[p]);
    if (edges.size() <= p) edges.resize(p + 1);
    edges[p].assign(na, {});
    for (ActionId a : raw.enabled[s])
      for (const auto& e : raw.joint[s][a])
        edges[p][a].push_back({intern({e.next, e.agent, e.nature, e.pub}), e.probability});
  }

  std::vector<std::string> names;
  for (const auto& [s, za, zn, zp] : keys)
    names.push_back(raw.states[s] + "|" + raw.agent_observations[za] + "|" +
                    raw.nature_observations[zn] + "|" + raw.public_observations[zp]);
  Rpomdp m = make_model(std::move(names), raw.actions, raw.agent_observations,
                        raw.nature_observations, raw.public_observations);
  const std::size_t np = keys.size();
  m.initial_state = 0;
  for (StateId p = 0; p < np; ++p) {
    const auto& [s, za, zn, zp] = keys[p];
    m.obs_agent[p] = za;
    m.obs_nature[p] = zn;
    m.obs_public[p] = zp;
    m.enabled[p] = raw.enabled[s];
    std::sort(m.enabled[p].begin(), m.enabled[p].end());
    m.rewards[p] = raw.rewards[s];
    for (ActionId a = 0; a < na; ++a)
      for (const auto& [q, prob] : edges[p][a]) m.transitions[p][a][q] += prob;
  }
  m.uncertainty = raw.uncertainty;
  m.play_order = raw.play_order;
  m.stickiness.kind = raw.stickiness.kind;
  m.stickiness.custom_table = raw.stickiness.custom_table;
  if (raw.stickiness.kind == StickinessKind::ObservationBased) {
    m.stickiness.influence.assign(raw.stickiness.influence.size(), {});
    for (VarId v = 0; v < raw.stickiness.influence.size(); ++v)
      for (const auto& [s, a] : raw.stickiness.influence[v])
        for (StateId p = 0; p < np; ++p)
          if (std::get<0>(keys[p]) == s) m.stickiness.influence[v].insert({p, a});
  }
  return m;
}

}  // namespace rpomdp
