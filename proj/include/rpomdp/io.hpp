#pragma once

#include "rpomdp/model.hpp"
#include "rpomdp/policies.hpp"
#include "rpomdp/posg.hpp"
#include "rpomdp/trajectories.hpp"

#include <cstddef>
#include <string>
#include <string_view>

/**
 * Line-oriented text formats for models and policies.
 *
 * Model documents hold one directive per line; `#` starts a comment:
 *
 *     states s0 s1
 *     actions go
 *     initial s0
 *     observations.agent za
 *     observations.nature zn
 *     observations.public start end
 *     observe s0 za zn start
 *     observe s1 za zn end
 *     enabled s0 go
 *     reward s0 go 5
 *     variable p 1/10 9/10
 *     coupling p + q <= 1
 *     transition s0 go s1 1 - p
 *     transition s0 go s0 p
 *     stickiness zero            (zero | full | observation | custom)
 *     influence p s0 go          (observation stickiness; derived if omitted)
 *     stick p zn start go        (custom stickiness)
 *     play agent-first           (agent-first | nature-first)
 *
 * Unlisted rewards and transitions are 0 and unlisted `enabled` rows enable
 * every action. Numbers are exact rational literals (`3`, `2/7`, `0.125`).
 *
 * Policy documents start with `policy agent` or `policy nature`, then
 * `kind stochastic|deterministic|mixed`. Each entry maps a history to a
 * distribution:
 *
 *     za|start go za|end => go:1/2 stay:1/2
 *     zn|start go {p=1/10} zn|end @ go => {p=9/10}
 *
 * Agent histories alternate `private|public` observations and actions.
 * Nature histories alternate observations and `action assignment` pairs; an
 * assignment written `*` matches anything. `@ action` names the action nature
 * responds to in agent-first models. Mixed policies list `component <weight>`
 * lines, each followed by the entries of a deterministic component.
 * Histories without an entry use the fallback (first enabled action, first
 * vertex of the admissible set).
 */
namespace rpomdp {

/**
 * Parses a model document. Throws ParseError on syntax errors, unknown names
 * and missing observation entries, and also on any validate_model violation
 * when `validate` is true.
 */
Rpomdp parse_model(std::string_view text, bool validate = true);
std::string serialize_model(const Rpomdp& model);

AgentPolicy parse_agent_policy(const Rpomdp& model, std::string_view text);
NaturePolicy parse_nature_policy(const Rpomdp& model, std::string_view text);
std::string serialize_policy(const Rpomdp& model, const AgentPolicy& pi);
std::string serialize_policy(const Rpomdp& model, const NaturePolicy& theta);

/// Text forms used by the policy format.
std::string format_assignment(const Rpomdp& model, const Assignment& u);
std::string format_history(const Rpomdp& model, const AgentHistory& h);
std::string format_history(const Rpomdp& model, const NatureKey& key);
std::string format_expression(const Rpomdp& model, const AffineExpr& e);

/**
 * Textual dump of the game fragment reachable within `horizon` rounds when
 * nature is restricted to the vertices of its admissible moves.
 */
std::string dump_posg_fragment(const Posg& posg, std::size_t horizon);

/// Reads a whole file; throws ParseError (line 0) if it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace rpomdp
