#include "rpomdp/benchmarks.hpp"
#include "rpomdp/evaluation.hpp"
#include "rpomdp/io.hpp"
#include "rpomdp/matrix_game.hpp"
#include "rpomdp/solver.hpp"

#include <gtest/gtest.h>

namespace rpomdp {
namespace {

Rational R(long n, long d = 1) { return Rational(n, d); }

const ReferenceCase& reference(const std::string& name) {
  static const std::vector<ReferenceCase> cases = reference_cases();
  for (const auto& c : cases)
    if (c.name == name) return c;
  throw std::logic_error(name);
}

Rpomdp build(const std::string& name) {
  const auto& c = reference(name);
  return build_benchmark(c.id, c.variant);
}

Rpomdp linear_single_variable() {
  return parse_model(R"(
states s0 good bad
actions go
observations.agent za
observations.nature zn
observations.public z g b
initial s0
observe s0 za zn z
observe good za zn g
observe bad za zn b
variable p 1/10 9/10
reward good go 10
transition s0 go good p
transition s0 go bad 1 - p
transition good go good 1
transition bad go bad 1
stickiness zero
)");
}

TEST(MatrixGame, MatchingPennies) {
  auto s = solve_matrix_game({{R(1), R(-1)}, {R(-1), R(1)}});
  EXPECT_EQ(s.value, 0);
  EXPECT_EQ(s.row_strategy, (std::vector<Rational>{R(1, 2), R(1, 2)}));
  EXPECT_EQ(s.column_strategy, (std::vector<Rational>{R(1, 2), R(1, 2)}));
}

TEST(MatrixGame, SaddleEntryAndShift) {
  // Pure saddle at row 0, column 1 with negative entries elsewhere.
  auto s = solve_matrix_game({{R(3), R(2)}, {R(-5), R(1)}});
  EXPECT_EQ(s.value, 2);
  EXPECT_EQ(s.row_strategy, (std::vector<Rational>{R(1), R(0)}));
  EXPECT_EQ(s.column_strategy, (std::vector<Rational>{R(0), R(1)}));
}

TEST(MatrixGame, RectangularMixed) {
  // The third column is dominated; equalizing 3x + 1 = 3 - 2x gives x = 2/5.
  auto s = solve_matrix_game({{R(4), R(1), R(5)}, {R(1), R(3), R(6)}});
  EXPECT_EQ(s.value, R(11, 5));
  EXPECT_EQ(s.row_strategy, (std::vector<Rational>{R(2, 5), R(3, 5)}));
  EXPECT_EQ(s.column_strategy, (std::vector<Rational>{R(2, 5), R(3, 5), R(0)}));
}

TEST(MatrixGame, RejectsMalformed) {
  EXPECT_THROW(solve_matrix_game({}), DomainError);
  EXPECT_THROW(solve_matrix_game({{R(1)}, {R(1), R(2)}}), DomainError);
}

TEST(Linearity, Fig2BothModes) {
  EXPECT_TRUE(detect_nature_linearity(build("fig2_full"), 4));
  EXPECT_TRUE(detect_nature_linearity(build("fig2_zero"), 4));
}

TEST(Linearity, AppCFullIsNonlinear) { EXPECT_FALSE(detect_nature_linearity(build("appC_full"), 5)); }

TEST(Linearity, SingleVariableAffineValue) { EXPECT_TRUE(detect_nature_linearity(linear_single_variable(), 3)); }

TEST(Linearity, CapacityError) { EXPECT_THROW(detect_nature_linearity(build("fig2_full"), 4, 2), CapacityError); }

TEST(NatureBestResponse, Fig3AgentFirstPlaysA) {
  Rpomdp m = build("fig3_agent_first");
  AgentPolicy pi = agent_deterministic({{AgentHistory{m.observe(0).agent_pair(), {}}, m.action_index("a")}});
  auto [theta, value] = nature_best_response(m, pi, 2);
  EXPECT_EQ(value, 30);
  NatureKey key = nature_key(m, NatureHistory{m.observe(0).nature_pair(), {}}, m.action_index("a"));
  AssignmentDistribution expected = {{Assignment{R(1, 10)}, R(1)}};
  EXPECT_EQ(theta.at(m, key), expected);
  EXPECT_EQ(value_fh(m, pi, theta, 2), value);
}

TEST(NatureBestResponse, ConstantRewardModel) {
  Rpomdp m = linear_single_variable();
  m.rewards[m.state_index("good")][0] = 0;
  m.rewards[0][0] = 7;
  EXPECT_EQ(nature_best_response(m, agent_deterministic({}), 3).second, 7);
}

TEST(NatureBestResponse, Fig2ZeroTabulatedAgent) {
  const auto& c = reference("fig2_zero");
  Rpomdp m = build_benchmark(c.id, c.variant);
  auto [theta, value] = nature_best_response(m, parse_agent_policy(m, c.agent_policy), c.horizon);
  EXPECT_EQ(value, R(131, 2));
}

TEST(AgentBestResponse, SingleAction) {
  Rpomdp m = linear_single_variable();
  auto [pi, value] = agent_best_response(m, nature_deterministic({}), 3);
  // Fallback p = 1/10 reaches `good` after one step and stays: 1/10 * 10 twice.
  EXPECT_EQ(value, 2);
  for (const auto& [h, d] : pi.table) EXPECT_EQ(d.begin()->first, 0u);
}

TEST(AgentBestResponse, Fig3NatureFirstTieGoesToFirstAction) {
  const auto& c = reference("fig3_nature_first");
  Rpomdp m = build_benchmark(c.id, c.variant);
  auto [pi, value] = agent_best_response(m, parse_nature_policy(m, c.nature_policy), c.horizon);
  EXPECT_EQ(value, 150);
  AgentHistory root{m.observe(0).agent_pair(), {}};
  ActionDistribution expected = {{m.action_index("a"), R(1)}};
  EXPECT_EQ(pi.at(m, root), expected);
}

TEST(AgentBestResponse, AppD4TabulatedNature) {
  const auto& c = reference("appD4_agent_first");
  Rpomdp m = build_benchmark(c.id, c.variant);
  EXPECT_EQ(agent_best_response(m, parse_nature_policy(m, c.nature_policy), c.horizon).second, 40);
}

TEST(SolveSaddle, ReferenceValues) {
  for (const auto& c : reference_cases()) {
    Rpomdp m = build_benchmark(c.id, c.variant);
    SolverConfig config;
    SaddleResult r = solve_saddle(m, c.horizon, config);
    EXPECT_LE(r.lower_value, r.upper_value) << c.name;
    EXPECT_EQ(r.gap, r.upper_value - r.lower_value) << c.name;
    if (c.exact) {
      EXPECT_EQ(r.gap, 0) << c.name;
      EXPECT_EQ(r.lower_value, c.value) << c.name;
    } else {
      EXPECT_LE(abs(r.lower_value - c.value), config.tolerance) << c.name;
      EXPECT_LE(abs(r.upper_value - c.value), config.tolerance) << c.name;
    }
    for (std::size_t i = 1; i < r.gap_history.size(); ++i) EXPECT_LE(r.gap_history[i], r.gap_history[i - 1]);
    EXPECT_EQ(r.agent_policy.kind, PolicyKind::Mixed);
    EXPECT_EQ(r.nature_policy.kind, PolicyKind::Mixed);
  }
}

TEST(SolveSaddle, NashCertificateInLinearCases) {
  for (const char* name : {"fig2_full", "fig2_zero", "fig3_agent_first", "fig3_nature_first", "appD4_agent_first"}) {
    const auto& c = reference(name);
    Rpomdp m = build_benchmark(c.id, c.variant);
    SaddleResult r = solve_saddle(m, c.horizon);
    ASSERT_EQ(r.gap, 0) << name;
    EXPECT_TRUE(r.nature_linear) << name;
    EXPECT_EQ(agent_best_response(m, r.nature_policy, c.horizon).second, r.lower_value) << name;
    EXPECT_EQ(nature_best_response(m, r.agent_policy, c.horizon).second, r.upper_value) << name;
  }
}

TEST(SolveSaddle, RewardScalingScalesValues) {
  const auto& c = reference("fig2_zero");
  Rpomdp m = build_benchmark(c.id, c.variant);
  Rpomdp scaled = m;
  for (auto& row : scaled.rewards)
    for (auto& r : row) r *= 3;
  SaddleResult a = solve_saddle(m, c.horizon), b = solve_saddle(scaled, c.horizon);
  EXPECT_EQ(b.lower_value, 3 * a.lower_value);
  EXPECT_EQ(b.upper_value, 3 * a.upper_value);
  ASSERT_EQ(a.agent_policy.mixture.size(), b.agent_policy.mixture.size());
  for (std::size_t i = 0; i < a.agent_policy.mixture.size(); ++i)
    EXPECT_EQ(a.agent_policy.mixture[i].policy.table, b.agent_policy.mixture[i].policy.table);
}

TEST(SolveSaddle, RoundCapReportsGap) {
  SolverConfig config;
  config.max_rounds = 1;
  SaddleResult r = solve_saddle(build("fig2_zero"), 4, config);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_GE(r.gap, 0);
}

}  // namespace
}  // namespace rpomdp
