// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "rpomdp/benchmarks.hpp"
#include "rpomdp/evaluation.hpp"
#include "rpomdp/io.hpp"
#include "rpomdp/posg.hpp"
#include "rpomdp/solver.hpp"
#include "support/random_policies.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace rpomdp;
using rpomdp::testing::Rng;

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Accumulates failure notes; keeps the first few.
class Checker {
 public:
  void expect(bool ok, const std::string& note) {
    if (ok) return;
    ++failures_;
    if (notes_.size() < 5) notes_.push_back(note);
  }
  Outcome outcome(const std::string& summary) const {
    Outcome o;
    o.pass = failures_ == 0;
    std::ostringstream out;
    out << summary;
    if (failures_ != 0) {
      out << "; " << failures_ << " failure(s)";
      for (const auto& n : notes_) out << " [" << n << "]";
    }
    o.detail = out.str();
    return o;
  }

 private:
  std::size_t failures_ = 0;
  std::vector<std::string> notes_;
};

struct ModelCase {
  std::string name;
  Rpomdp model;
  std::size_t horizon;
};

/// Every benchmark in both orders of play, at horizon at most 3.
std::vector<ModelCase> property_models() {
  std::vector<ModelCase> out;
  for (BenchmarkId id : all_benchmarks()) {
    for (PlayOrder order : {PlayOrder::AgentFirst, PlayOrder::NatureFirst}) {
      BenchmarkVariant v;
      v.play_order = order;
      std::string name = benchmark_name(id) + (order == PlayOrder::AgentFirst ? "/agent-first" : "/nature-first");
      out.push_back({name, build_benchmark(id, v), std::min<std::size_t>(benchmark_horizon(id), 3)});
    }
  }
  return out;
}

const ReferenceCase& reference(const std::string& name) {
  static const std::vector<ReferenceCase> cases = reference_cases();
  for (const auto& c : cases)
    if (c.name == name) return c;
  throw std::logic_error("no reference case " + name);
}

/// Solves a reference case and checks the value (exactly or within tolerance)
/// and, if `check_pair`, the tabulated pair.
void check_reference(Checker& chk, const std::string& name, bool check_pair) {
  const ReferenceCase& c = reference(name);
  Rpomdp m = build_benchmark(c.id, c.variant);
  SolverConfig config;
  SaddleResult r = solve_saddle(m, c.horizon, config);
  if (c.exact) {
    chk.expect(r.gap == 0, name + " gap " + to_string(r.gap));
    chk.expect(r.lower_value == c.value && r.upper_value == c.value,
               name + " solver " + to_string(r.lower_value) + ".." + to_string(r.upper_value));
  } else {
    chk.expect(abs(r.lower_value - c.value) <= config.tolerance && abs(r.upper_value - c.value) <= config.tolerance,
               name + " solver " + to_string(r.lower_value) + ".." + to_string(r.upper_value));
  }
  if (check_pair) {
    AgentPolicy pi = parse_agent_policy(m, c.agent_policy);
    NaturePolicy theta = parse_nature_policy(m, c.nature_policy);
    Rational v = value_fh(m, pi, theta, c.horizon);
    chk.expect(v == c.value, name + " pair " + to_string(v));
  }
}

Outcome criterion_1() {
  Checker chk;
  check_reference(chk, "fig2_full", true);
  return chk.outcome("fig2 full stickiness K=4: saddle and tabulated pair equal 200/3");
}

Outcome criterion_2() {
  Checker chk;
  check_reference(chk, "fig2_zero", true);
  return chk.outcome("fig2 zero stickiness K=4: saddle equals 131/2");
}

Outcome criterion_3() {
  Checker chk;
  check_reference(chk, "fig3_agent_first", false);
  check_reference(chk, "fig3_nature_first", false);
  return chk.outcome("fig3: agent-first 30, nature-first 150");
}

Outcome criterion_4() {
  Checker chk;
  check_reference(chk, "appD4_agent_first", false);
  check_reference(chk, "appD4_nature_first", false);
  return chk.outcome("appD4: agent-first 40, nature-first 360/7 within 1/1000");
}

Outcome criterion_5() {
  Checker chk;
  for (const char* name : {"appC_full", "appC_observation", "appC_zero"}) check_reference(chk, name, true);
  return chk.outcome("appC: 28871/390, 719/10, 24655/348 by solver and tabulated pairs");
}

Outcome criterion_6() {
  Checker chk;
  Rng rng(6001);
  std::size_t pairs = 0;
  for (const auto& mc : property_models()) {
    Posg g = build_posg(mc.model, mc.horizon);
    for (int i = 0; i < 50; ++i) {
      AgentPolicy pi = testing::random_agent_policy(mc.model, mc.horizon, rng);
      NaturePolicy theta = testing::random_nature_policy(mc.model, mc.horizon, rng);
      Rational a = value_fh(mc.model, pi, theta, mc.horizon);
      Rational b = posg_value(g, map_agent_policy(mc.model, pi, mc.horizon),
                              map_nature_policy(mc.model, theta, mc.horizon), mc.horizon);
      chk.expect(a == b, mc.name + " pair " + std::to_string(i) + ": " + to_string(a) + " vs " + to_string(b));
      ++pairs;
    }
  }
  return chk.outcome(std::to_string(pairs) + " random pairs: model value equals game value");
}

Outcome criterion_7() {
  Checker chk;
  Rng rng(7001);
  std::size_t checks = 0;
  for (const auto& mc : property_models()) {
    const Rpomdp& m = mc.model;
    std::size_t k = mc.horizon;
    for (int i = 0; i < 20; ++i) {
      AgentPolicy pi = testing::random_agent_policy(m, k, rng);
      NaturePolicy theta = testing::random_nature_stochastic(m, k, rng);
      NaturePolicy g = mixed_from_stochastic(m, theta, k);
      NaturePolicy fg = stochastic_from_mixed(m, g, k);
      PathDistribution base = path_distribution(m, pi, theta, k);
      chk.expect(base == path_distribution(m, pi, g, k), mc.name + " nature g #" + std::to_string(i));
      chk.expect(base == path_distribution(m, pi, fg, k), mc.name + " nature f(g) #" + std::to_string(i));

      AgentPolicy sigma = testing::random_agent_stochastic(m, k, rng);
      NaturePolicy opp = testing::random_nature_policy(m, k, rng);
      AgentPolicy ag = mixed_from_stochastic(m, sigma, k);
      AgentPolicy afg = stochastic_from_mixed(m, ag, k);
      PathDistribution abase = path_distribution(m, sigma, opp, k);
      chk.expect(abase == path_distribution(m, ag, opp, k), mc.name + " agent g #" + std::to_string(i));
      chk.expect(abase == path_distribution(m, afg, opp, k), mc.name + " agent f(g) #" + std::to_string(i));
      checks += 4;
    }
  }
  return chk.outcome(std::to_string(checks) + " path-distribution equalities");
}

Outcome criterion_8() {
  Checker chk;
  Rng rng(8001);
  std::size_t pairs = 0;
  for (const auto& mc : property_models()) {
    for (int i = 0; i < 20; ++i) {
      AgentPolicy pi = testing::random_agent_policy(mc.model, mc.horizon, rng);
      NaturePolicy theta = testing::random_nature_policy(mc.model, mc.horizon, rng);
      Rational a = occupancy_value(mc.model, pi, theta, mc.horizon);
      Rational b = value_fh(mc.model, pi, theta, mc.horizon);
      chk.expect(a == b, mc.name + " pair " + std::to_string(i) + ": " + to_string(a) + " vs " + to_string(b));
      ++pairs;
    }
  }
  return chk.outcome(std::to_string(pairs) + " random pairs: occupancy recursion equals path enumeration");
}

Outcome criterion_9() {
  Checker chk;
  std::size_t paths = 0;
  for (BenchmarkId id : {BenchmarkId::Fig2Sticky, BenchmarkId::Fig3OrderSmall}) {
    for (PlayOrder order : {PlayOrder::AgentFirst, PlayOrder::NatureFirst}) {
      BenchmarkVariant v;
      v.play_order = order;
      Rpomdp m = build_benchmark(id, v);
      Posg g = build_posg(m, 3);
      std::string tag = benchmark_name(id) + (order == PlayOrder::AgentFirst ? "/agent-first" : "/nature-first");
      for (std::size_t len = 0; len <= 3; ++len) {
        for (const Path& tau : enumerate_valid_paths(m, len)) {
          ++paths;
          PosgPath gp = map_path(m, g, tau);
          chk.expect(unmap_path(g, gp) == tau, tag + " path roundtrip");

          JointHistory hj = observe_joint(m, tau);
          AgentHistory ha = observe_agent(m, tau);
          NatureHistory hn = observe_nature(m, tau);
          PosgJointHistory gj = map_joint_history(m, hj);
          PosgAgentHistory ga = map_agent_history(m, ha);
          PosgNatureHistory gn = map_nature_history(m, hn);
          chk.expect(unmap_joint_history(m, gj) == hj, tag + " joint history roundtrip");
          chk.expect(unmap_agent_history(m, ga) == ha, tag + " agent history roundtrip");
          chk.expect(unmap_nature_history(m, gn) == hn, tag + " nature history roundtrip");
          chk.expect(posg_observe_joint(g, gp) == gj, tag + " joint observation commutes");
          chk.expect(posg_observe_agent(g, gp) == ga, tag + " agent observation commutes");
          chk.expect(posg_observe_nature(g, gp) == gn, tag + " nature observation commutes");
        }
      }
    }
  }
  return chk.outcome(std::to_string(paths) + " valid paths: path and history roundtrips");
}

Outcome criterion_10() {
  Checker chk;
  std::size_t certified = 0;
  for (const auto& c : reference_cases()) {
    Rpomdp m = build_benchmark(c.id, c.variant);
    SolverConfig config;
    SaddleResult r = solve_saddle(m, c.horizon, config);
    if (r.gap != 0) continue;
    config.nature_linear = r.nature_linear;
    Rational agent_gain = agent_best_response(m, r.nature_policy, c.horizon, config).second;
    Rational nature_gain = nature_best_response(m, r.agent_policy, c.horizon, config).second;
    Rational v = r.lower_value;
    chk.expect(agent_gain == v, c.name + " agent deviation " + to_string(agent_gain) + " vs " + to_string(v));
    if (r.nature_linear) {
      chk.expect(nature_gain == v, c.name + " nature deviation " + to_string(nature_gain) + " vs " + to_string(v));
    } else {
      chk.expect(nature_gain >= v - config.tolerance,
                 c.name + " nature deviation " + to_string(nature_gain) + " vs " + to_string(v));
    }
    chk.expect(value_fh(m, r.agent_policy, r.nature_policy, c.horizon) == v, c.name + " value of the returned pair");
    ++certified;
  }
  chk.expect(certified > 0, "no gap-0 result");
  return chk.outcome(std::to_string(certified) + " gap-0 results pass the no-improvement check");
}

struct Criterion {
  int number;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, 10, criterion_1}, {2, 10, criterion_2}, {3, 10, criterion_3}, {4, 60, criterion_4},
      {5, 300, criterion_5}, {6, 60, criterion_6}, {7, 60, criterion_7}, {8, 60, criterion_8},
      {9, 30, criterion_9}, {10, 300, criterion_10},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = secs <= c.budget_seconds;
    bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << "criterion " << c.number << ": " << (pass ? "PASS" : "FAIL") << " - " << o.detail << " ("
              << secs << " s of " << c.budget_seconds << " s)" << (in_time ? "" : " over time budget") << "\n"
              << std::flush;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
