// Command-line front end: validate, transform, evaluate, solve and bench.

#include "rpomdp/benchmarks.hpp"
#include "rpomdp/evaluation.hpp"
#include "rpomdp/io.hpp"
#include "rpomdp/posg.hpp"
#include "rpomdp/solver.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

namespace {

using namespace rpomdp;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitCapacity = 3;

Rational parse_option_rational(const std::string& text, const char* what) {
  auto r = parse_rational(text);
  if (!r) throw ParseError(0, 0, std::string("invalid ") + what + " '" + text + "'");
  return *r;
}

/// Number of reachable decision points answered by the fallback rule.
template <class Policy, class Walk>
std::size_t count_fallbacks(const Policy& p, Walk&& walk) {
  std::size_t n = 0;
  if (p.kind == PolicyKind::Mixed) {
    for (const auto& c : p.mixture) n += count_fallbacks(c.policy, walk);
    return n;
  }
  walk(p, n);
  return n;
}

int cmd_validate(const std::string& path) {
  Rpomdp m = parse_model(read_text_file(path), false);
  ValidationReport report = validate_model(m);
  for (const auto& v : report.violations) std::cout << "violation: " << v << "\n";
  for (const auto& g : report.graph_changes)
    std::cout << "graph-change: " << m.states[g.state] << " " << m.actions[g.action] << " " << m.states[g.next]
              << "\n";
  std::cout << "valid=" << (report.ok() ? "true" : "false") << "\n";
  std::cout << "graph_preserving=" << (report.graph_preserving() ? "true" : "false") << "\n";
  return report.ok() ? kExitOk : kExitFailure;
}

int cmd_transform(const std::string& path, std::size_t horizon, bool dump) {
  Rpomdp m = parse_model(read_text_file(path));
  Posg g = build_posg(m, horizon);
  std::string text = dump_posg_fragment(g, horizon);
  if (dump) {
    std::cout << text;
  } else {
    std::cout << text.substr(0, text.find('\n') + 1);
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& path, const std::string& agent_path, const std::string& nature_path,
                 std::size_t horizon) {
  Rpomdp m = parse_model(read_text_file(path));
  AgentPolicy pi = parse_agent_policy(m, read_text_file(agent_path));
  NaturePolicy theta = parse_nature_policy(m, read_text_file(nature_path));
  if (!policy_valid(m, pi)) throw ContractError("agent policy is not valid for the model");
  if (!policy_valid(m, theta, horizon)) throw ContractError("nature policy is not valid for the model");
  Rational value = value_fh(m, pi, theta, horizon);
  std::size_t agent_fallbacks = count_fallbacks(pi, [&](const AgentPolicy& p, std::size_t& n) {
    for_each_agent_decision(m, p, horizon, [&](const AgentHistory& h, const ActionDistribution&) {
      if (!p.defines(h)) ++n;
    });
  });
  std::size_t nature_fallbacks = count_fallbacks(theta, [&](const NaturePolicy& p, std::size_t& n) {
    for_each_nature_decision(m, p, horizon, [&](const NatureKey& k, const PartialAssignment&, const AssignmentDistribution&) {
      if (!p.defines(k)) ++n;
    });
  });
  std::cout << "value " << to_string(value) << " (" << to_decimal(value) << ")\n";
  std::cout << "value=" << to_string(value) << "\n";
  std::cout << "agent_fallbacks=" << agent_fallbacks << "\n";
  std::cout << "nature_fallbacks=" << nature_fallbacks << "\n";
  return kExitOk;
}

int cmd_solve(const std::string& path, std::size_t horizon, const SolverConfig& config, const std::string& plot) {
  Rpomdp m = parse_model(read_text_file(path));
  SaddleResult r = solve_saddle(m, horizon, config);
  std::cout << "lower value  " << to_string(r.lower_value) << " (" << to_decimal(r.lower_value) << ")\n"
            << "upper value  " << to_string(r.upper_value) << " (" << to_decimal(r.upper_value) << ")\n"
            << "gap          " << to_string(r.gap) << "\n"
            << "rounds       " << r.iterations << "\n"
            << "nature value " << (r.nature_linear ? "linear per block" : "nonlinear") << "\n\n"
            << serialize_policy(m, r.agent_policy) << "\n"
            << serialize_policy(m, r.nature_policy) << "\n";
  std::cout << "lower=" << to_string(r.lower_value) << "\n"
            << "upper=" << to_string(r.upper_value) << "\n"
            << "gap=" << to_string(r.gap) << "\n"
            << "value=" << to_string(r.gap == 0 ? r.lower_value : Rational((r.lower_value + r.upper_value) / 2))
            << "\n"
            << "iterations=" << r.iterations << "\n"
            << "grid_resolution=" << to_string(r.grid_resolution) << "\n";
  if (!plot.empty()) {
    std::ofstream out(plot);
    if (!out) throw ParseError(0, 0, "cannot write '" + plot + "'");
    for (std::size_t i = 0; i < r.gap_history.size(); ++i)
      out << (i + 1) << " " << to_decimal(r.gap_history[i], 9) << "\n";
  }
  return kExitOk;
}

int cmd_bench(const std::string& only, const SolverConfig& config) {
  std::optional<BenchmarkId> filter;
  if (!only.empty()) {
    filter = parse_benchmark_id(only);
    if (!filter) throw ParseError(0, 0, "unknown benchmark '" + only + "'");
  }
  bool all_pass = true;
  std::cout << "case                 expected       pair   solver  lower          upper          seconds\n";
  for (const auto& c : reference_cases()) {
    if (filter && c.id != *filter) continue;
    Rpomdp m = build_benchmark(c.id, c.variant);
    bool pair_pass = true;
    if (!c.agent_policy.empty()) {
      AgentPolicy pi = parse_agent_policy(m, c.agent_policy);
      NaturePolicy theta = parse_nature_policy(m, c.nature_policy);
      pair_pass = value_fh(m, pi, theta, c.horizon) == c.value;
    }
    auto start = std::chrono::steady_clock::now();
    SaddleResult r = solve_saddle(m, c.horizon, config);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool solve_pass = c.exact ? (r.gap == 0 && r.lower_value == c.value)
                              : (abs(r.lower_value - c.value) <= config.tolerance &&
                                 abs(r.upper_value - c.value) <= config.tolerance);
    all_pass = all_pass && pair_pass && solve_pass;
    std::string name = c.name;
    name.resize(std::max<std::size_t>(name.size(), 20), ' ');
    std::string expected = to_string(c.value);
    expected.resize(std::max<std::size_t>(expected.size(), 14), ' ');
    std::string lo = to_string(r.lower_value), hi = to_string(r.upper_value);
    lo.resize(std::max<std::size_t>(lo.size(), 14), ' ');
    hi.resize(std::max<std::size_t>(hi.size(), 14), ' ');
    std::cout << name << " " << expected << " " << (pair_pass ? "PASS" : "FAIL") << "   "
              << (solve_pass ? "PASS" : "FAIL") << "    " << lo << " " << hi << " " << secs << "\n";
  }
  return all_pass ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact finite-horizon analysis of robust POMDPs"};
  app.require_subcommand(1);

  std::string model_path, agent_path, nature_path, plot_path, bench_id;
  std::size_t horizon = 0;
  bool dump = false;
  std::string tolerance = "1/1000";
  std::size_t grid = 5;
  std::size_t rounds = 8;

  auto* validate = app.add_subcommand("validate", "Check a model document");
  validate->add_option("model", model_path, "Model file")->required();

  auto* transform = app.add_subcommand("transform", "Build the game fragment of a model");
  transform->add_option("model", model_path, "Model file")->required();
  transform->add_option("--horizon", horizon, "Rounds to unfold")->required();
  transform->add_flag("--dump", dump, "Print every state and edge");

  auto* evaluate = app.add_subcommand("evaluate", "Exact value of a policy pair");
  evaluate->add_option("model", model_path, "Model file")->required();
  evaluate->add_option("--agent", agent_path, "Agent policy file")->required();
  evaluate->add_option("--nature", nature_path, "Nature policy file")->required();
  evaluate->add_option("--horizon", horizon, "Horizon")->required();

  auto* solve = app.add_subcommand("solve", "Saddle-point search");
  solve->add_option("model", model_path, "Model file")->required();
  solve->add_option("--horizon", horizon, "Horizon")->required();
  solve->add_option("--tolerance", tolerance, "Target gap as a rational literal");
  solve->add_option("--grid", grid, "Grid points per variable for nonlinear nature values");
  solve->add_option("--refine", rounds, "Refinement rounds");
  solve->add_option("--plot-data", plot_path, "Write 'round gap' pairs to this file");

  auto* bench = app.add_subcommand("bench", "Reproduce the reference values");
  bench->add_option("--id", bench_id, "Restrict to one benchmark");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    SolverConfig config;
    config.tolerance = parse_option_rational(tolerance, "tolerance");
    config.grid_points = grid;
    config.refinement_rounds = rounds;
    if (*validate) return cmd_validate(model_path);
    if (*transform) return cmd_transform(model_path, horizon, dump);
    if (*evaluate) return cmd_evaluate(model_path, agent_path, nature_path, horizon);
    if (*solve) return cmd_solve(model_path, horizon, config, plot_path);
    if (*bench) return cmd_bench(bench_id, config);
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << " (count " << e.count() << ")\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
