#include "rpomdp/benchmarks.hpp"
#include "rpomdp/evaluation.hpp"
#include "rpomdp/io.hpp"
#include "support/random_policies.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace rpomdp {
namespace {

Rational R(long n, long d = 1) { return Rational(n, d); }

const char* kSmall = R"(# two-state chain
states s0 s1
actions go stay
observations.agent za
observations.nature zn
observations.public start end
initial s0
observe s0 za zn start
observe s1 za zn end
enabled s1 stay
variable p 0.1 9/10
variable q 1/10 9/10
coupling p + q <= 1
reward s0 go 5
transition s0 go s1 1 - p
transition s0 go s0 p
transition s0 stay s0 1
transition s1 stay s1 1
stickiness custom
stick p zn start go
play nature-first
)";

/// Line of the ParseError thrown by `f`, or 0 if none was thrown.
template <class F>
std::size_t error_line(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(ParseModel, ReadsEveryDirective) {
  Rpomdp m = parse_model(kSmall);
  EXPECT_EQ(m.num_states(), 2u);
  EXPECT_EQ(m.uncertainty.boxes[0].lo, R(1, 10));
  EXPECT_EQ(m.enabled[1], std::vector<ActionId>{1});
  EXPECT_EQ(m.enabled[0], (std::vector<ActionId>{0, 1}));
  EXPECT_EQ(m.rewards[0][0], 5);
  EXPECT_EQ(m.entry(0, 0, 1), AffineExpr(1) - AffineExpr::variable(0));
  EXPECT_EQ(m.uncertainty.couplings.size(), 1u);
  EXPECT_EQ(m.stickiness.kind, StickinessKind::Custom);
  EXPECT_TRUE(stick(m, 0, 0, 0, 0));
  EXPECT_FALSE(stick(m, 1, 0, 0, 0));
  EXPECT_EQ(m.play_order, PlayOrder::NatureFirst);
}

TEST(ParseModel, RoundTrip) {
  Rpomdp m = parse_model(kSmall);
  EXPECT_EQ(parse_model(serialize_model(m)), m);
}

TEST(ParseModel, BenchmarksRoundTrip) {
  for (BenchmarkId id : all_benchmarks()) {
    for (StickinessKind k : {StickinessKind::Zero, StickinessKind::Full, StickinessKind::ObservationBased}) {
      Rpomdp m = build_benchmark(id, {k, std::nullopt});
      EXPECT_EQ(parse_model(serialize_model(m)), m) << benchmark_name(id);
    }
  }
}

TEST(ParseModel, ErrorsCarryLocation) {
  std::string bad = kSmall;
  bad.replace(bad.find("transition s0 go s0 p"), 20, "transition s0 go s9 p");
  EXPECT_EQ(error_line([&] { parse_model(bad); }), 16u);
  try {
    parse_model("states s0\nactions go\nbogus line\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 1u);
  }
}

TEST(ParseModel, MissingObservationNamesState) {
  std::string bad = kSmall;
  bad.erase(bad.find("observe s1 za zn end\n"), 21);
  try {
    parse_model(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.reason().find("s1"), std::string::npos);
  }
}

TEST(ParseModel, SemanticViolationsAreErrors) {
  std::string bad = kSmall;
  bad.replace(bad.find("transition s0 go s0 p"), 21, "transition s0 go s0 2*p");
  EXPECT_THROW(parse_model(bad), ParseError);
  EXPECT_NO_THROW(parse_model(bad, false));
}

TEST(ParseModel, BenchmarkShapes) {
  Rpomdp f2 = build_benchmark(BenchmarkId::Fig2Sticky);
  std::set<Rational> rewards;
  for (const auto& row : f2.rewards) rewards.insert(row.begin(), row.end());
  EXPECT_EQ(rewards, (std::set<Rational>{R(0), R(100), R(200)}));
  EXPECT_EQ(f2.uncertainty.boxes, (std::vector<Interval>{{R(1, 10), R(9, 10)}, {R(1, 10), R(9, 10)}}));
  Rpomdp f3 = build_benchmark(BenchmarkId::Fig3OrderSmall);
  rewards.clear();
  for (const auto& row : f3.rewards) rewards.insert(row.begin(), row.end());
  EXPECT_EQ(rewards, (std::set<Rational>{R(0), R(300)}));
  Rpomdp d4 = build_benchmark(BenchmarkId::AppD4Arect);
  EXPECT_EQ(d4.uncertainty.boxes, (std::vector<Interval>{{R(1, 10), R(2, 5)}, {R(1, 10), R(2, 5)}}));
  bool half_minus_q = false;
  AffineExpr target = AffineExpr(R(1, 2)) - AffineExpr::variable(d4.uncertainty.index_of("q"));
  for (const auto& rows : d4.transitions)
    for (const auto& row : rows)
      for (const auto& e : row) half_minus_q = half_minus_q || e == target;
  EXPECT_TRUE(half_minus_q);
}

TEST(Policies, ParseAndSerializeRoundTrip) {
  for (const auto& c : reference_cases()) {
    Rpomdp m = build_benchmark(c.id, c.variant);
    AgentPolicy pi = parse_agent_policy(m, c.agent_policy);
    NaturePolicy theta = parse_nature_policy(m, c.nature_policy);
    AgentPolicy pi2 = parse_agent_policy(m, serialize_policy(m, pi));
    NaturePolicy theta2 = parse_nature_policy(m, serialize_policy(m, theta));
    EXPECT_EQ(value_fh(m, pi2, theta2, c.horizon), c.value) << c.name;
    EXPECT_EQ(pi2.table, pi.table) << c.name;
  }
}

TEST(Policies, RandomPoliciesRoundTrip) {
  testing::Rng rng(51);
  for (PlayOrder order : {PlayOrder::AgentFirst, PlayOrder::NatureFirst}) {
    Rpomdp m = build_benchmark(BenchmarkId::Fig2Sticky, {std::nullopt, order});
    for (int i = 0; i < 5; ++i) {
      AgentPolicy pi = testing::random_agent_mixed(m, 4, rng);
      NaturePolicy theta = testing::random_nature_policy(m, 4, rng);
      AgentPolicy pi2 = parse_agent_policy(m, serialize_policy(m, pi));
      NaturePolicy theta2 = parse_nature_policy(m, serialize_policy(m, theta));
      EXPECT_EQ(value_fh(m, pi2, theta2, 4), value_fh(m, pi, theta, 4));
    }
  }
}

TEST(Policies, Errors) {
  Rpomdp m = build_benchmark(BenchmarkId::Fig3OrderSmall);
  EXPECT_EQ(error_line([&] { parse_agent_policy(m, "policy agent\nkind stochastic\nza|start => a:1/2\n"); }), 3u);
  EXPECT_EQ(error_line([&] { parse_agent_policy(m, "policy agent\nkind deterministic\nza|nowhere => a\n"); }), 3u);
  EXPECT_EQ(error_line([&] { parse_nature_policy(m, "policy nature\nkind deterministic\nzn|start @ a => {r=1}\n"); }),
            3u);
  EXPECT_THROW(parse_agent_policy(m, "policy nature\n"), ParseError);
}

TEST(Format, Expressions) {
  Rpomdp m = build_benchmark(BenchmarkId::Fig2Sticky);
  EXPECT_EQ(format_expression(m, AffineExpr(1) - AffineExpr::variable(0)), "1 - p");
  EXPECT_EQ(format_assignment(m, {R(1, 3), R(1, 10)}), "{p=1/3,q=1/10}");
  EXPECT_EQ(format_history(m, AgentHistory{m.observe(0).agent_pair(), {}}), "za|white");
}

#ifdef RPOMDP_CLI_PATH
/// Runs the command-line tool and returns its exit status.
int run_cli(const std::string& args) {
  std::string cmd = std::string(RPOMDP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / ("rpomdp_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string write(const std::string& name, const std::string& text) {
    auto path = dir_ / name;
    std::ofstream(path) << text;
    return path.string();
  }
  std::filesystem::path dir_;
};

TEST_F(Cli, ExitCodes) {
  std::string good = write("good.model", kSmall);
  std::string bad_text = kSmall;
  bad_text.replace(bad_text.find("transition s0 go s0 p"), 21, "transition s0 go s0 2*p");
  std::string bad = write("bad.model", bad_text);
  EXPECT_EQ(run_cli("validate " + good), 0);
  EXPECT_EQ(run_cli("validate " + bad), 1);
  EXPECT_EQ(run_cli("validate " + (dir_ / "missing").string()), 2);
  EXPECT_EQ(run_cli("solve " + good + " --horizon 2"), 0);
  EXPECT_EQ(run_cli("transform " + good + " --horizon 2 --dump"), 0);
}

TEST_F(Cli, EvaluatePrintsValue) {
  const ReferenceCase c = reference_cases().front();
  Rpomdp m = build_benchmark(c.id, c.variant);
  std::string model = write("fig2.model", serialize_model(m));
  std::string agent = write("agent.policy", c.agent_policy);
  std::string nature = write("nature.policy", c.nature_policy);
  std::string out = (dir_ / "out.txt").string();
  std::string cmd = std::string(RPOMDP_CLI_PATH) + " evaluate " + model + " --agent " + agent + " --nature " + nature +
                    " --horizon 4 > " + out;
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::string text = read_text_file(out);
  EXPECT_NE(text.find("value=200/3"), std::string::npos);
}
#endif

}  // namespace
}  // namespace rpomdp
