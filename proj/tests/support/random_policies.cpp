#include "support/random_policies.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace rpomdp::testing {

namespace {

/// Bounds the mixture size that the stochastic-to-mixed conversion produces.
constexpr std::size_t kMaxSupport = 3;

/// Random distribution over `options`: a nonempty random subset of at most
/// kMaxSupport options with integer weights.
template <class T>
std::map<T, Rational> random_distribution(const std::vector<T>& options, bool deterministic, Rng& rng) {
  std::map<T, Rational> out;
  if (deterministic) {
    out[options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)]] = 1;
    return out;
  }
  std::vector<std::pair<T, long>> picked;
  std::uniform_int_distribution<long> weight(1, 9);
  std::bernoulli_distribution keep(0.7);
  for (const auto& o : options)
    if (picked.size() < kMaxSupport && keep(rng)) picked.push_back({o, weight(rng)});
  if (picked.empty()) picked.push_back({options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)], 1});
  long total = 0;
  for (const auto& [o, w] : picked) total += w;
  for (const auto& [o, w] : picked) out[o] += Rational(w, total);
  return out;
}

AgentPolicy random_agent(const Rpomdp& m, std::size_t horizon, bool deterministic, Rng& rng) {
  AgentPolicy pi;
  pi.kind = deterministic ? PolicyKind::Deterministic : PolicyKind::Stochastic;
  // Each pass fills the histories reachable under the entries chosen so far.
  for (std::size_t pass = 0; pass <= horizon; ++pass) {
    std::vector<AgentHistory> missing;
    for_each_agent_decision(m, pi, horizon, [&](const AgentHistory& h, const ActionDistribution&) {
      if (!pi.defines(h)) missing.push_back(h);
    });
    if (missing.empty()) break;
    for (const auto& h : missing) pi.table[h] = random_distribution(m.enabled_for(h.last()), deterministic, rng);
  }
  return pi;
}

std::vector<Assignment> nature_options(const Rpomdp& m, const PartialAssignment& fixed) {
  std::vector<Assignment> verts = uncertainty_vertices(constrain(m.uncertainty, fixed));
  if (verts.size() > 1) {
    Assignment centre(m.num_variables(), Rational(0));
    for (const auto& v : verts)
      for (VarId i = 0; i < v.size(); ++i) centre[i] += v[i];
    for (auto& x : centre) x /= static_cast<long>(verts.size());
    if (std::find(verts.begin(), verts.end(), centre) == verts.end()) verts.push_back(centre);
  }
  return verts;
}

NaturePolicy random_nature(const Rpomdp& m, std::size_t horizon, bool deterministic, Rng& rng) {
  NaturePolicy theta;
  theta.kind = deterministic ? PolicyKind::Deterministic : PolicyKind::Stochastic;
  for (std::size_t pass = 0; pass <= horizon; ++pass) {
    std::vector<std::pair<NatureKey, PartialAssignment>> missing;
    for_each_nature_decision(m, theta, horizon,
                             [&](const NatureKey& k, const PartialAssignment& fixed, const AssignmentDistribution&) {
                               if (!theta.defines(k)) missing.push_back({k, fixed});
                             });
    if (missing.empty()) break;
    for (const auto& [k, fixed] : missing)
      theta.table[k] = random_distribution(nature_options(m, fixed), deterministic, rng);
  }
  return theta;
}

std::vector<Rational> random_weights(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<long> weight(1, 9);
  std::vector<long> raw(n);
  long total = 0;
  for (auto& w : raw) total += (w = weight(rng));
  std::vector<Rational> out;
  for (long w : raw) out.push_back(Rational(w, total));
  return out;
}

}  // namespace

AgentPolicy random_agent_stochastic(const Rpomdp& m, std::size_t horizon, Rng& rng) {
  return random_agent(m, horizon, false, rng);
}

AgentPolicy random_agent_deterministic(const Rpomdp& m, std::size_t horizon, Rng& rng) {
  return random_agent(m, horizon, true, rng);
}

AgentPolicy random_agent_mixed(const Rpomdp& m, std::size_t horizon, Rng& rng) {
  std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  auto w = random_weights(n, rng);
  std::vector<AgentComponent> parts;
  for (std::size_t i = 0; i < n; ++i) parts.push_back({w[i], random_agent_deterministic(m, horizon, rng)});
  return agent_mixed(std::move(parts));
}

AgentPolicy random_agent_policy(const Rpomdp& m, std::size_t horizon, Rng& rng) {
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return random_agent_stochastic(m, horizon, rng);
    case 1: return random_agent_deterministic(m, horizon, rng);
    default: return random_agent_mixed(m, horizon, rng);
  }
}

NaturePolicy random_nature_stochastic(const Rpomdp& m, std::size_t horizon, Rng& rng) {
  return random_nature(m, horizon, false, rng);
}

NaturePolicy random_nature_deterministic(const Rpomdp& m, std::size_t horizon, Rng& rng) {
  return random_nature(m, horizon, true, rng);
}

NaturePolicy random_nature_mixed(const Rpomdp& m, std::size_t horizon, Rng& rng) {
  std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  auto w = random_weights(n, rng);
  std::vector<NatureComponent> parts;
  for (std::size_t i = 0; i < n; ++i) parts.push_back({w[i], random_nature_deterministic(m, horizon, rng)});
  return nature_mixed(std::move(parts));
}

NaturePolicy random_nature_policy(const Rpomdp& m, std::size_t horizon, Rng& rng) {
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return random_nature_stochastic(m, horizon, rng);
    case 1: return random_nature_deterministic(m, horizon, rng);
    default: return random_nature_mixed(m, horizon, rng);
  }
}

}  // namespace rpomdp::testing
