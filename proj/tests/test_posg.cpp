#include "rpomdp/benchmarks.hpp"
#include "rpomdp/evaluation.hpp"
#include "rpomdp/io.hpp"
#include "rpomdp/posg.hpp"
#include "support/random_policies.hpp"

#include <gtest/gtest.h>

#include <set>

namespace rpomdp {
namespace {

Rational R(long n, long d = 1) { return Rational(n, d); }

Rpomdp model(BenchmarkId id, PlayOrder order, std::optional<StickinessKind> k = std::nullopt) {
  return build_benchmark(id, {k, order});
}

TEST(BuildPosg, InitialStateMatchesOrder) {
  Rpomdp af = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst);
  Posg g = build_posg(af, 3);
  ASSERT_TRUE(Posg::is_agent_state(g.initial_state()));
  EXPECT_EQ(std::get<PosgAgentState>(g.initial_state()).fixed, undefined_assignment(2));

  Rpomdp nf = model(BenchmarkId::Fig2Sticky, PlayOrder::NatureFirst);
  Posg h = build_posg(nf, 3);
  ASSERT_FALSE(Posg::is_agent_state(h.initial_state()));
  EXPECT_FALSE(std::get<PosgNatureState>(h.initial_state()).last_action);
}

TEST(BuildPosg, ZeroStickinessNeverFixes) {
  Rpomdp m = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst, StickinessKind::Zero);
  Posg g = build_posg(m, 3);
  std::set<std::pair<StateId, PartialAssignment>> seen;
  for (std::size_t len = 0; len <= 3; ++len)
    for (const Path& p : enumerate_valid_paths(m, len))
      for (const auto& s : map_path(m, g, p).states)
        if (auto* a = std::get_if<PosgAgentState>(&s)) {
          EXPECT_EQ(a->fixed, undefined_assignment(2));
          seen.insert({a->base, a->fixed});
        }
  EXPECT_LE(seen.size(), m.num_states());
}

TEST(BuildPosg, FullStickinessRootChoicesGiveDistinctStates) {
  Rpomdp m = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst, StickinessKind::Full);
  Posg g = build_posg(m, 3);
  auto after = g.agent_step(std::get<PosgAgentState>(g.initial_state()), m.action_index("go"));
  ASSERT_EQ(after.size(), 1u);
  const auto& ns = std::get<PosgNatureState>(after[0].first);
  std::set<PosgState> successors;
  for (const auto& u : g.nature_move_vertices(ns))
    for (const auto& [s, w] : g.nature_step(ns, u)) successors.insert(s);
  EXPECT_EQ(successors.size(), 8u);
}

TEST(BuildPosg, AgentFirstNatureObservesAction) {
  Rpomdp m = model(BenchmarkId::AppD4Arect, PlayOrder::AgentFirst);
  Posg g = build_posg(m, 2);
  ActionId b = m.action_index("b");
  auto after = g.agent_step(std::get<PosgAgentState>(g.initial_state()), b);
  EXPECT_EQ(g.nature_observation(after[0].first).action, std::optional<ActionId>(b));
  EXPECT_FALSE(g.nature_observation(g.initial_state()).action);
}

TEST(BuildPosg, NatureMovesAreLegalAndRewardless) {
  Rpomdp m = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst, StickinessKind::Full);
  Posg g = build_posg(m, 3);
  for (const Path& p : enumerate_valid_paths(m, 3)) {
    PosgPath gp = map_path(m, g, p);
    for (std::size_t i = 0; i < gp.moves.size(); ++i) {
      if (auto* ns = std::get_if<PosgNatureState>(&gp.states[i])) {
        const auto& u = std::get<Assignment>(gp.moves[i]);
        EXPECT_TRUE(g.nature_move_legal(*ns, u));
        EXPECT_TRUE(agrees(u, ns->fixed));
        EXPECT_EQ(g.reward(gp.states[i], gp.moves[i]), 0);
      }
    }
  }
  PosgNatureState root{0, {R(1, 2), R(1, 2)}, m.action_index("go")};
  EXPECT_FALSE(g.nature_move_legal(root, {R(1, 10), R(1, 2)}));
  EXPECT_TRUE(g.nature_step(root, {R(1, 10), R(1, 2)}).empty());
}

TEST(MapPath, BaseCaseAndOneStep) {
  Rpomdp m = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst);
  Posg g = build_posg(m, 3);
  PosgPath p0 = map_path(m, g, Path{0, {}});
  ASSERT_EQ(p0.states.size(), 1u);
  EXPECT_EQ(p0.states[0], PosgState(PosgAgentState{0, undefined_assignment(2), std::nullopt}));

  ActionId go = m.action_index("go");
  Assignment u = {R(1, 2), R(1, 2)};
  PosgPath p1 = map_path(m, g, Path{0, {{go, u, m.state_index("s2")}}});
  ASSERT_EQ(p1.moves.size(), 2u);
  EXPECT_EQ(p1.moves[0], PosgMove(go));
  EXPECT_EQ(p1.states[1], PosgState(PosgNatureState{0, undefined_assignment(2), go}));
  EXPECT_EQ(p1.moves[1], PosgMove(u));
}

TEST(MapPath, InvalidPathThrows) {
  Rpomdp m = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst);
  Posg g = build_posg(m, 3);
  EXPECT_THROW(map_path(m, g, Path{0, {{m.action_index("go"), {R(1, 2), R(1, 2)}, m.state_index("s4")}}}),
               DomainError);
}

TEST(MapHistory, AgentBaseCaseAndDuplication) {
  Rpomdp m = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst);
  ObsPair z0 = m.observe(0).agent_pair();
  PosgAgentHistory h0 = map_agent_history(m, AgentHistory{z0, {}});
  ASSERT_EQ(h0.size(), 1u);
  EXPECT_EQ(std::get<ObsPair>(h0[0]), z0);
  ActionId go = m.action_index("go");
  ObsPair z1 = m.observe(m.state_index("s2")).agent_pair();
  PosgAgentHistory h1 = map_agent_history(m, AgentHistory{z0, {{go, z1}}});
  PosgAgentHistory expected = {z0, go, z0, z1};
  EXPECT_EQ(h1, expected);
}

TEST(MapHistory, NatureGainsBottomTaggedObservation) {
  Rpomdp m = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst);
  ObsPair z0 = m.observe(0).nature_pair();
  ObsPair z1 = m.observe(m.state_index("s2")).nature_pair();
  ActionId go = m.action_index("go");
  Assignment u = {R(1, 2), R(1, 2)};
  PosgNatureHistory h = map_nature_history(m, NatureHistory{z0, {{go, u, z1}}});
  PosgNatureHistory expected = {PosgNatureObs{z0.priv, z0.pub, std::nullopt}, PosgNatureObs{z0.priv, z0.pub, go}, u,
                                PosgNatureObs{z1.priv, z1.pub, std::nullopt}};
  EXPECT_EQ(h, expected);
}

TEST(MapHistory, MalformedThrows) {
  Rpomdp m = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst);
  EXPECT_THROW(unmap_agent_history(m, PosgAgentHistory{}), DomainError);
  EXPECT_THROW(unmap_agent_history(m, PosgAgentHistory{ObsPair{0, 0}, ActionId{0}}), DomainError);
}

TEST(Bijections, ExhaustiveRoundTripsOnAllBenchmarks) {
  for (BenchmarkId id : all_benchmarks()) {
    for (PlayOrder order : {PlayOrder::AgentFirst, PlayOrder::NatureFirst}) {
      Rpomdp m = model(id, order);
      Posg g = build_posg(m, 3);
      for (std::size_t len = 0; len <= 3; ++len) {
        for (const Path& p : enumerate_valid_paths(m, len)) {
          PosgPath gp = map_path(m, g, p);
          ASSERT_EQ(unmap_path(g, gp), p);
          EXPECT_EQ(unmap_joint_history(m, map_joint_history(m, observe_joint(m, p))), observe_joint(m, p));
          EXPECT_EQ(unmap_agent_history(m, map_agent_history(m, observe_agent(m, p))), observe_agent(m, p));
          EXPECT_EQ(unmap_nature_history(m, map_nature_history(m, observe_nature(m, p))), observe_nature(m, p));
          // The fixed variables of each agent state are those of the unmapped prefix.
          std::size_t round = 0;
          for (const auto& s : gp.states) {
            if (auto* a = std::get_if<PosgAgentState>(&s)) {
              EXPECT_EQ(a->fixed, fix(m, p.prefix(round)));
              ++round;
            }
          }
        }
      }
    }
  }
}

TEST(PolicyMaps, DiracMapsToDiracAndRoundTrips) {
  for (PlayOrder order : {PlayOrder::AgentFirst, PlayOrder::NatureFirst}) {
    Rpomdp m = model(BenchmarkId::Fig2Sticky, order);
    testing::Rng rng(31);
    AgentPolicy pi = testing::random_agent_deterministic(m, 4, rng);
    NaturePolicy theta = testing::random_nature_stochastic(m, 4, rng);
    PosgAgentPolicy gpi = map_agent_policy(m, pi, 4);
    for (const auto& [h, d] : gpi.table) EXPECT_EQ(d.size(), 1u);
    AgentPolicy back = unmap_agent_policy(m, gpi);
    for (const auto& [h, d] : pi.table) EXPECT_EQ(back.table.at(h), d);
    NaturePolicy tback = unmap_nature_policy(m, map_nature_policy(m, theta, 4));
    for (const auto& [k, d] : theta.table) EXPECT_EQ(tback.table.at(k), d);
  }
}

TEST(PosgValue, SimpleCases) {
  Rpomdp m = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst);
  Posg g = build_posg(m, 4);
  AgentPolicy pi = agent_deterministic({});
  NaturePolicy theta = nature_deterministic({});
  EXPECT_EQ(posg_value(g, map_agent_policy(m, pi, 4), map_nature_policy(m, theta, 4), 0), 0);
  Rpomdp zero = m;
  for (auto& row : zero.rewards)
    for (auto& r : row) r = 0;
  Posg gz = build_posg(zero, 4);
  EXPECT_EQ(posg_value(gz, map_agent_policy(zero, pi, 4), map_nature_policy(zero, theta, 4), 4), 0);
}

TEST(PosgValue, Fig3NatureFirstTabulatedPair) {
  for (const auto& c : reference_cases()) {
    if (c.name != "fig3_nature_first" && c.name != "fig2_full") continue;
    Rpomdp m = build_benchmark(c.id, c.variant);
    Posg g = build_posg(m, c.horizon);
    AgentPolicy pi = parse_agent_policy(m, c.agent_policy);
    NaturePolicy theta = parse_nature_policy(m, c.nature_policy);
    EXPECT_EQ(posg_value(g, map_agent_policy(m, pi, c.horizon), map_nature_policy(m, theta, c.horizon), c.horizon),
              c.value)
        << c.name;
  }
}

TEST(PosgValue, MatchesModelValueOnRandomPairs) {
  testing::Rng rng(32);
  for (PlayOrder order : {PlayOrder::AgentFirst, PlayOrder::NatureFirst}) {
    Rpomdp m = model(BenchmarkId::Fig2Sticky, order);
    Posg g = build_posg(m, 3);
    for (int i = 0; i < 20; ++i) {
      AgentPolicy pi = testing::random_agent_policy(m, 3, rng);
      NaturePolicy theta = testing::random_nature_policy(m, 3, rng);
      EXPECT_EQ(posg_value(g, map_agent_policy(m, pi, 3), map_nature_policy(m, theta, 3), 3),
                value_fh(m, pi, theta, 3));
    }
  }
}

TEST(PosgValue, MissingHistoryIsContractError) {
  Rpomdp m = model(BenchmarkId::Fig2Sticky, PlayOrder::AgentFirst);
  Posg g = build_posg(m, 3);
  EXPECT_THROW(posg_value(g, PosgAgentPolicy{}, map_nature_policy(m, nature_deterministic({}), 3), 3),
               ContractError);
}

TEST(Dump, ListsFragment) {
  Rpomdp m = model(BenchmarkId::Fig3OrderSmall, PlayOrder::AgentFirst);
  std::string text = dump_posg_fragment(build_posg(m, 2), 2);
  EXPECT_NE(text.find("s1"), std::string::npos);
  EXPECT_NE(text.find("win"), std::string::npos);
}

}  // namespace
}  // namespace rpomdp
