#include "rpomdp/benchmarks.hpp"
#include "rpomdp/policies.hpp"
#include "rpomdp/trajectories.hpp"

#include <gtest/gtest.h>

namespace rpomdp {
namespace {

Rational R(long n, long d = 1) { return Rational(n, d); }

Rpomdp fig2(StickinessKind k) { return build_benchmark(BenchmarkId::Fig2Sticky, {k, std::nullopt}); }

/// Folds upd along the path steps.
PartialAssignment fold_upd(const Rpomdp& m, const Path& path) {
  PartialAssignment fixed = undefined_assignment(m.num_variables());
  for (std::size_t k = 0; k < path.length(); ++k) {
    StateId s = path.state(k);
    fixed = upd(m, fixed, path.steps[k].assignment, m.obs_nature[s], m.obs_public[s], path.steps[k].action);
  }
  return fixed;
}

TEST(Fix, EmptyPathIsUndefined) {
  Rpomdp m = fig2(StickinessKind::Full);
  EXPECT_EQ(fix(m, Path{m.initial_state, {}}), undefined_assignment(2));
}

TEST(Fix, FullStickinessFixesAtFirstStep) {
  Rpomdp m = fig2(StickinessKind::Full);
  Path p{0, {{m.action_index("go"), {R(1, 3), R(1, 3)}, m.state_index("s2")}}};
  PartialAssignment expected = {R(1, 3), R(1, 3)};
  EXPECT_EQ(fix(m, p), expected);
}

TEST(Fix, ZeroStickinessNeverFixes) {
  Rpomdp m = fig2(StickinessKind::Zero);
  for (const Path& p : enumerate_valid_paths(m, 3)) EXPECT_EQ(fix(m, p), undefined_assignment(2));
}

TEST(PathValid, Basics) {
  Rpomdp m = fig2(StickinessKind::Full);
  ActionId go = m.action_index("go");
  EXPECT_TRUE(path_valid(m, Path{0, {}}));
  Path ok{0, {{go, {R(1, 2), R(1, 2)}, m.state_index("s2")}, {go, {R(1, 2), R(1, 2)}, m.state_index("s4")}}};
  EXPECT_TRUE(path_valid(m, ok));
  Path changed = ok;
  changed.steps[1].assignment = {R(1, 10), R(1, 2)};
  EXPECT_FALSE(path_valid(m, changed));
  Path outside{0, {{go, {R(1), R(1, 2)}, m.state_index("s2")}}};
  EXPECT_FALSE(path_valid(m, outside));
  Path zero_edge{0, {{go, {R(1, 2), R(1, 2)}, m.state_index("s4")}}};
  EXPECT_FALSE(path_valid(m, zero_edge));
}

TEST(PathValid, Fig3HasNoSelfLoop) {
  Rpomdp m = build_benchmark(BenchmarkId::Fig3OrderSmall);
  StateId s1 = m.state_index("s1");
  EXPECT_FALSE(path_valid(m, Path{s1, {{m.action_index("a"), {R(1, 2)}, s1}}}));
}

TEST(Observe, LengthZeroPath) {
  Rpomdp m = fig2(StickinessKind::Full);
  Path p{0, {}};
  EXPECT_EQ(observe_joint(m, p).initial, m.observe(0));
  EXPECT_EQ(observe_joint(m, p).length(), 0u);
  EXPECT_EQ(observe_agent(m, p).initial, m.observe(0).agent_pair());
  EXPECT_EQ(observe_nature(m, p).initial, m.observe(0).nature_pair());
}

TEST(Observe, ProjectionsAreConsistent) {
  for (BenchmarkId id : all_benchmarks()) {
    Rpomdp m = build_benchmark(id);
    for (std::size_t len = 0; len <= 2; ++len) {
      for (const Path& p : enumerate_valid_paths(m, len)) {
        JointHistory j = observe_joint(m, p);
        NatureHistory n = observe_nature(m, p);
        EXPECT_EQ(agent_part(j), observe_agent(m, p));
        EXPECT_EQ(nature_part(j), n);
        for (std::size_t k = 0; k < p.length(); ++k) EXPECT_EQ(n.steps[k].assignment, p.steps[k].assignment);
      }
    }
  }
}

TEST(Properties, FixMatchesFoldedUpdAndIsMonotone) {
  for (BenchmarkId id : all_benchmarks()) {
    for (StickinessKind k : {StickinessKind::Zero, StickinessKind::Full, StickinessKind::ObservationBased}) {
      Rpomdp m = build_benchmark(id, {k, std::nullopt});
      for (std::size_t len = 0; len <= 3; ++len) {
        for (const Path& p : enumerate_valid_paths(m, len)) {
          PartialAssignment f = fix(m, p);
          EXPECT_EQ(f, fold_upd(m, p));
          EXPECT_EQ(fix(m, observe_nature(m, p)), f);
          for (std::size_t j = 0; j < len; ++j) {
            EXPECT_TRUE(path_valid(m, p.prefix(j)));
            PartialAssignment g = fix(m, p.prefix(j));
            for (VarId v = 0; v < g.size(); ++v)
              if (g[v]) EXPECT_EQ(f[v], g[v]);
          }
        }
      }
    }
  }
}

TEST(EnumerateValidPaths, Fig2Counts) {
  // Full stickiness: vertices and centroid of [1/10,9/10]^2 give 5 choices at
  // the root and one thereafter; branching over s2/s3 and s4/s5.
  Rpomdp m = fig2(StickinessKind::Full);
  EXPECT_EQ(enumerate_valid_paths(m, 0).size(), 1u);
  EXPECT_EQ(enumerate_valid_paths(m, 1).size(), 10u);
  // s2 -> s4, s5 and s3 -> s5.
  EXPECT_EQ(enumerate_valid_paths(m, 2).size(), 15u);
  for (const Path& p : enumerate_valid_paths(m, 3)) EXPECT_TRUE(path_valid(m, p));
}

TEST(RelevantHistories, BaseCase) {
  Rpomdp m = fig2(StickinessKind::Full);
  auto h = relevant_histories(m, nature_deterministic({}), 0);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.begin()->initial, m.observe(0));
}

TEST(RelevantHistories, DeterministicRootChoice) {
  // The single root choice u and the only action lead to s2 or s3.
  Rpomdp m = fig2(StickinessKind::Full);
  ObsPair root = m.observe(0).nature_pair();
  ActionId go = m.action_index("go");
  Assignment u = {R(1, 2), R(1, 2)};
  NaturePolicy theta = nature_deterministic({{NatureKey{NatureHistory{root, {}}, go}, u}});
  auto h = relevant_histories(m, theta, 1);
  ASSERT_EQ(h.size(), 2u);
  for (const auto& j : h) EXPECT_EQ(j.steps[0].assignment, u);
}

TEST(RelevantHistories, StochasticIsUnionOfDeterministic) {
  Rpomdp m = fig2(StickinessKind::Full);
  ObsPair root = m.observe(0).nature_pair();
  NatureKey key{NatureHistory{root, {}}, m.action_index("go")};
  Assignment u1 = {R(1, 10), R(1, 10)}, u2 = {R(9, 10), R(9, 10)};
  auto a = relevant_histories(m, nature_deterministic({{key, u1}}), 2);
  auto b = relevant_histories(m, nature_deterministic({{key, u2}}), 2);
  auto both = relevant_histories(m, nature_stochastic({{key, {{u1, R(1, 2)}, {u2, R(1, 2)}}}}), 2);
  std::set<JointHistory> expected = a;
  expected.insert(b.begin(), b.end());
  EXPECT_EQ(both, expected);
}

}  // namespace
}  // namespace rpomdp
