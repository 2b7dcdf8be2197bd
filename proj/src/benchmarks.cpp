#include "rpomdp/benchmarks.hpp"

#include "rpomdp/io.hpp"

#include <map>

namespace rpomdp {

namespace {

// Each model is written in the document format and parsed; the default
// stickiness and order of play come from the document.

const char* kFig1U1 = R"(
states s1 s2
actions go
observations.agent za
observations.nature zn
observations.public s1 s2
initial s1
observe s1 za zn s1
observe s2 za zn s2
variable p 1/10 9/10
variable q 1/10 9/10
reward s2 go 1
transition s1 go s2 p
transition s1 go s1 1 - p
transition s2 go s1 q
transition s2 go s2 1 - q
stickiness zero
play agent-first
)";

const char* kFig1U2 = R"(
states s1 s2
actions go
observations.agent za
observations.nature zn
observations.public s1 s2
initial s1
observe s1 za zn s1
observe s2 za zn s2
variable p 1/10 4/10
variable q 1/10 9/10
coupling q - 2*p = 0
reward s2 go 1
transition s1 go s2 p
transition s1 go s1 1 - p
transition s2 go s1 q
transition s2 go s2 1 - q
stickiness zero
play agent-first
)";

const char* kFig2 = R"(
states s1 s2 s3 s4 s5 s6 s7 s8 s9 end
actions go a b
observations.agent za
observations.nature zn
observations.public white light dark dashed dotted end
initial s1
observe s1 za zn white
observe s2 za zn light
observe s3 za zn dark
observe s4 za zn dashed
observe s5 za zn dashed
observe s6 za zn dotted
observe s7 za zn dotted
observe s8 za zn dotted
observe s9 za zn dotted
observe end za zn end
enabled s1 go
enabled s2 go
enabled s3 go
enabled s4 go
enabled s5 go
enabled s6 a b
enabled s7 a b
enabled s8 a b
enabled s9 a b
enabled end go
variable p 1/10 9/10
variable q 1/10 9/10
transition s1 go s2 1/2
transition s1 go s3 1/2
transition s2 go s4 9/10
transition s2 go s5 1/10
transition s3 go s5 1
transition s4 go s6 p
transition s4 go s7 1 - p
transition s5 go s8 q
transition s5 go s9 1 - q
reward s6 a 200
reward s7 b 100
reward s8 b 200
reward s9 a 100
transition s6 a end 1
transition s6 b end 1
transition s7 a end 1
transition s7 b end 1
transition s8 a end 1
transition s8 b end 1
transition s9 a end 1
transition s9 b end 1
transition end go end 1
stickiness full
play agent-first
)";

const char* kFig3 = R"(
states s1 win lose end
actions a b go
observations.agent za
observations.nature zn
observations.public start win lose end
initial s1
observe s1 za zn start
observe win za zn win
observe lose za zn lose
observe end za zn end
enabled s1 a b
enabled win go
enabled lose go
enabled end go
variable p 1/10 9/10
transition s1 a win p
transition s1 a lose 1 - p
transition s1 b lose p
transition s1 b win 1 - p
reward win go 300
transition win go end 1
transition lose go end 1
transition end go end 1
stickiness zero
play agent-first
)";

const char* kFig5Left = R"(
states s1 s2
actions a
observations.agent za
observations.nature zn
observations.public light dark
initial s1
observe s1 za zn light
observe s2 za zn dark
variable p 1/10 9/10
variable q 1/10 9/10
reward s2 a 1
transition s1 a s2 p
transition s1 a s1 1 - p
transition s2 a s1 q
transition s2 a s2 1 - q
stickiness observation
play agent-first
)";

const char* kFig5Right = R"(
states s1 s2
actions a
observations.agent za
observations.nature zn
observations.public shade
initial s1
observe s1 za zn shade
observe s2 za zn shade
variable p 1/10 9/10
variable q 1/10 9/10
reward s2 a 1
transition s1 a s2 p
transition s1 a s1 1 - p
transition s2 a s1 q
transition s2 a s2 1 - q
stickiness observation
play agent-first
)";

const char* kAppC = R"(
states s1 s2 s3 s4 s5 s6 s7 s8 s9 r200 r100 r0 end
actions go a b
observations.agent za
observations.nature zn
observations.public white light dark dashed dotted boxed end
initial s1
observe s1 za zn white
observe s2 za zn light
observe s3 za zn dark
observe s4 za zn dashed
observe s5 za zn dashed
observe s6 za zn dotted
observe s7 za zn dotted
observe s8 za zn dotted
observe s9 za zn dotted
observe r200 za zn boxed
observe r100 za zn boxed
observe r0 za zn boxed
observe end za zn end
enabled s1 go
enabled s2 go
enabled s3 go
enabled s4 go
enabled s5 go
enabled s6 a b
enabled s7 a b
enabled s8 a b
enabled s9 a b
enabled r200 go
enabled r100 go
enabled r0 go
enabled end go
variable p 1/10 9/10
variable q 1/10 9/10
transition s1 go s2 1/2
transition s1 go s3 1/2
transition s2 go s4 9/10
transition s2 go s5 1/10
transition s3 go s5 1
transition s4 go s6 p
transition s4 go s7 1 - p
transition s5 go s8 q
transition s5 go s9 1 - q
reward s6 a 200
reward s7 b 100
reward s8 b 200
transition s6 a end 1
transition s6 b end 1
transition s7 a end 1
transition s7 b end 1
transition s8 a end 1
transition s8 b end 1
transition s9 a r200 p
transition s9 a r100 1 - p
transition s9 b r200 q
transition s9 b r0 1 - q
reward r200 go 200
reward r100 go 100
transition r200 go end 1
transition r100 go end 1
transition r0 go end 1
transition end go end 1
stickiness full
play nature-first
)";

const char* kAppD4 = R"(
states s1 s2 r300 r100 r0 end
actions a b go
observations.agent za
observations.nature zn
observations.public white r300 r100 r0 end
initial s1
observe s1 za zn white
observe s2 za zn white
observe r300 za zn r300
observe r100 za zn r100
observe r0 za zn r0
observe end za zn end
enabled s1 a b
enabled s2 a b
enabled r300 go
enabled r100 go
enabled r0 go
enabled end go
variable p 1/10 4/10
variable q 1/10 4/10
transition s1 a r300 p
transition s1 a r0 1 - p
transition s1 b r0 q
transition s1 b r100 1/2 - q
transition s1 b s2 1/2
transition s2 a r0 p
transition s2 a r100 1 - p
transition s2 b r100 q
transition s2 b r0 1 - q
reward r300 go 300
reward r100 go 100
transition r300 go end 1
transition r100 go end 1
transition r0 go end 1
transition end go end 1
stickiness full
play agent-first
)";

// Published optimal policy pairs.

const char* kFig2FullAgent = R"(
policy agent
kind stochastic
za|white go za|light go za|dashed go za|dotted => a:1/3 b:2/3
za|white go za|dark go za|dashed go za|dotted => a:7/10 b:3/10
)";

const char* kFig2FullNature = R"(
policy nature
kind deterministic
zn|white @ go => {p=1/3,q=1/3}
)";

const char* kFig2ZeroAgent = R"(
policy agent
kind stochastic
za|white go za|light go za|dashed go za|dotted => a:1/3 b:2/3
za|white go za|dark go za|dashed go za|dotted => a:2/3 b:1/3
)";

const char* kFig2ZeroNature = R"(
policy nature
kind deterministic
zn|white go * zn|light go * zn|dashed @ go => {p=83/270,q=1/10}
zn|white go * zn|dark go * zn|dashed @ go => {p=1/10,q=1/3}
)";

const char* kFig3AgentFirstAgent = R"(
policy agent
kind deterministic
za|start => a
)";

const char* kFig3AgentFirstNature = R"(
policy nature
kind deterministic
zn|start @ a => {p=1/10}
zn|start @ b => {p=9/10}
)";

const char* kFig3NatureFirstAgent = R"(
policy agent
kind stochastic
za|start => a:1/2 b:1/2
)";

const char* kFig3NatureFirstNature = R"(
policy nature
kind deterministic
zn|start => {p=1/2}
)";

const char* kAppD4AgentFirstAgent = R"(
policy agent
kind deterministic
za|white => b
za|white b za|white => a
)";

const char* kAppD4AgentFirstNature = R"(
policy nature
kind deterministic
zn|white @ a => {p=1/10,q=1/10}
zn|white @ b => {p=4/10,q=4/10}
)";

const char* kAppD4NatureFirstAgent = R"(
policy agent
kind stochastic
za|white => a:1/7 b:6/7
za|white b za|white => a:1
)";

const char* kAppD4NatureFirstNature = R"(
policy nature
kind deterministic
zn|white => {p=6/35,q=4/10}
)";

const char* kAppCFullAgent = R"(
policy agent
kind stochastic
za|white go za|light go za|dashed go za|dotted => a:17/117 b:100/117
za|white go za|dark go za|dashed go za|dotted => a:643/1170 b:527/1170
)";

const char* kAppCFullNature = R"(
policy nature
kind stochastic
zn|white => {p=1/10,q=1/10}:17/24 {p=9/10,q=1/10}:3/104 {p=9/10,q=9/10}:41/156
)";

const char* kAppCObsAgent = R"(
policy agent
kind stochastic
za|white go za|light go za|dashed go za|dotted => a:10/31 b:21/31
za|white go za|dark go za|dashed go za|dotted => a:20/31 b:11/31
)";

const char* kAppCObsNature = R"(
policy nature
kind stochastic
zn|white go * zn|light go * zn|dashed => {p=1/10,q=1/10}:1663/2232 {p=9/10,q=1/10}:569/2232
zn|white go * zn|dark go * zn|dashed => {p=1/10,q=1/10}:187/248 {p=1/10,q=9/10}:61/248
)";

const char* kAppCZeroAgent = R"(
policy agent
kind stochastic
za|white go za|light go za|dashed go za|dotted => a:1/3 b:2/3
za|white go za|dark go za|dashed go za|dotted => a:18/29 b:11/29
)";

const char* kAppCZeroNature = R"(
policy nature
kind stochastic
zn|white go * zn|light go * zn|dashed => {p=1/10,q=1/10}:1591/2160 {p=9/10,q=1/10}:569/2160
zn|white go * zn|dark go * zn|dashed => {p=1/10,q=1/10}:171/232 {p=1/10,q=9/10}:61/232
)";

const std::map<BenchmarkId, std::pair<const char*, const char*>>& table() {
  static const std::map<BenchmarkId, std::pair<const char*, const char*>> t{
      {BenchmarkId::Fig1RmdpU1, {"fig1_rmdp_u1", kFig1U1}},
      {BenchmarkId::Fig1RmdpU2, {"fig1_rmdp_u2", kFig1U2}},
      {BenchmarkId::Fig2Sticky, {"fig2_sticky", kFig2}},
      {BenchmarkId::Fig3OrderSmall, {"fig3_order_small", kFig3}},
      {BenchmarkId::Fig5ObsStickyLeft, {"fig5_obs_sticky_left", kFig5Left}},
      {BenchmarkId::Fig5ObsStickyRight, {"fig5_obs_sticky_right", kFig5Right}},
      {BenchmarkId::AppCObsSticky, {"appC_obs_sticky", kAppC}},
      {BenchmarkId::AppD4Arect, {"appD4_arect", kAppD4}},
  };
  return t;
}

}  // namespace

std::vector<BenchmarkId> all_benchmarks() {
  std::vector<BenchmarkId> out;
  for (const auto& [id, entry] : table()) out.push_back(id);
  return out;
}

std::string benchmark_name(BenchmarkId id) { return table().at(id).first; }

std::optional<BenchmarkId> parse_benchmark_id(const std::string& name) {
  for (const auto& [id, entry] : table())
    if (name == entry.first) return id;
  return std::nullopt;
}

Rpomdp build_benchmark(BenchmarkId id, const BenchmarkVariant& variant) {
  Rpomdp m = parse_model(table().at(id).second);
  if (variant.stickiness) {
    m.stickiness.kind = *variant.stickiness;
    if (*variant.stickiness == StickinessKind::ObservationBased) {
      if (m.stickiness.influence.empty()) m.stickiness.influence = derive_influence(m);
    } else {
      m.stickiness.influence.clear();
    }
  }
  if (variant.play_order) m.play_order = *variant.play_order;
  return m;
}

std::size_t benchmark_horizon(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::Fig2Sticky: return 4;
    case BenchmarkId::Fig3OrderSmall: return 2;
    case BenchmarkId::AppCObsSticky: return 5;
    case BenchmarkId::AppD4Arect: return 3;
    default: return 3;
  }
}

std::vector<ReferenceCase> reference_cases() {
  using S = StickinessKind;
  using P = PlayOrder;
  return {
      {"fig2_full", BenchmarkId::Fig2Sticky, {S::Full, P::AgentFirst}, 4, Rational(200, 3), true, kFig2FullAgent,
       kFig2FullNature},
      {"fig2_zero", BenchmarkId::Fig2Sticky, {S::Zero, P::AgentFirst}, 4, Rational(131, 2), true, kFig2ZeroAgent,
       kFig2ZeroNature},
      {"fig3_agent_first", BenchmarkId::Fig3OrderSmall, {std::nullopt, P::AgentFirst}, 2, Rational(30), true,
       kFig3AgentFirstAgent, kFig3AgentFirstNature},
      {"fig3_nature_first", BenchmarkId::Fig3OrderSmall, {std::nullopt, P::NatureFirst}, 2, Rational(150), true,
       kFig3NatureFirstAgent, kFig3NatureFirstNature},
      {"appD4_agent_first", BenchmarkId::AppD4Arect, {S::Full, P::AgentFirst}, 3, Rational(40), true,
       kAppD4AgentFirstAgent, kAppD4AgentFirstNature},
      {"appD4_nature_first", BenchmarkId::AppD4Arect, {S::Full, P::NatureFirst}, 3, Rational(360, 7), false,
       kAppD4NatureFirstAgent, kAppD4NatureFirstNature},
      {"appC_full", BenchmarkId::AppCObsSticky, {S::Full, P::NatureFirst}, 5, Rational(28871, 390), false,
       kAppCFullAgent, kAppCFullNature},
      {"appC_observation", BenchmarkId::AppCObsSticky, {S::ObservationBased, P::NatureFirst}, 5, Rational(719, 10),
       false, kAppCObsAgent, kAppCObsNature},
      {"appC_zero", BenchmarkId::AppCObsSticky, {S::Zero, P::NatureFirst}, 5, Rational(70) + Rational(295, 348),
       false, kAppCZeroAgent, kAppCZeroNature},
  };
}

}  // namespace rpomdp
