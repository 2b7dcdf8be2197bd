#include "rpomdp/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace rpomdp {

namespace {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

/// Whitespace-separated tokens of a line with `#` comments removed.
std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '#') ++i;
    out.push_back({std::string(line.substr(start, i - start)), start + 1});
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  return out;
}

/// Index of `name` in `names`, or a ParseError at `tok`.
std::size_t lookup(const std::vector<std::string>& names, const Token& tok, const char* what, std::size_t line,
                   std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw ParseError(line, tok.column, std::string("unknown ") + what + " '" + std::string(name) + "'");
}

std::size_t lookup(const std::vector<std::string>& names, const Token& tok, const char* what, std::size_t line) {
  return lookup(names, tok, what, line, tok.text);
}

Rational number(const Token& tok, std::size_t line) {
  auto r = parse_rational(tok.text);
  if (!r) throw ParseError(line, tok.column, "expected a rational literal, got '" + tok.text + "'");
  return *r;
}

/// Character-level parser for `[-] term {(+|-) term}` with term = number [* var] | var.
class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, std::size_t line, std::size_t column, const UncertaintySet& vars)
      : text_(text), line_(line), column_(column), vars_(vars) {}

  AffineExpr parse() {
    AffineExpr out;
    skip();
    bool first = true;
    while (true) {
      Rational sign = 1;
      skip();
      if (at_end()) {
        if (first) fail("expected an expression");
        break;
      }
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        skip();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      term(out, sign);
      first = false;
      skip();
      if (at_end()) break;
    }
    return out;
  }

 private:
  bool at_end() const { return pos_ >= text_.size() || text_[pos_] == '#'; }
  char peek() const { return text_[pos_]; }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& why) const { throw ParseError(line_, column_ + pos_, why); }

  void term(AffineExpr& out, const Rational& sign) {
    if (at_end()) fail("expected a term");
    if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' || text_[pos_] == '/'))
        ++pos_;
      auto value = parse_rational(text_.substr(start, pos_ - start));
      if (!value) {
        pos_ = start;
        fail("malformed number");
      }
      skip();
      if (!at_end() && peek() == '*') {
        ++pos_;
        skip();
        VarId v = variable();
        out += AffineExpr::variable(v, sign * *value);
      } else {
        out += AffineExpr(sign * *value);
      }
      return;
    }
    out += AffineExpr::variable(variable(), sign);
  }

  VarId variable() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected a variable name");
    std::string name(text_.substr(start, pos_ - start));
    auto v = vars_.find(name);
    if (!v) {
      pos_ = start;
      fail("unknown variable '" + name + "'");
    }
    return *v;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t column_;
  std::size_t pos_ = 0;
  const UncertaintySet& vars_;
};

/// Remainder of `line` starting at token `k`, with the column of its first character.
std::pair<std::string_view, std::size_t> rest_of(std::string_view line, const std::vector<Token>& toks, std::size_t k) {
  std::size_t col = toks[k].column;
  return {line.substr(col - 1), col};
}

void expect_count(const std::vector<Token>& toks, std::size_t n, std::size_t line, const char* usage) {
  if (toks.size() != n) {
    std::size_t col = toks.size() > n ? toks[n].column : toks.back().column + toks.back().text.size();
    throw ParseError(line, col, std::string("expected: ") + usage);
  }
}

std::vector<std::string> names_from(const std::vector<Token>& toks, std::size_t line) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < toks.size(); ++i) {
    for (const auto& prev : out)
      if (prev == toks[i].text) throw ParseError(line, toks[i].column, "duplicate name '" + toks[i].text + "'");
    out.push_back(toks[i].text);
  }
  return out;
}

const char* relation_text(Relation r) {
  switch (r) {
    case Relation::Equal: return "=";
    case Relation::LessEqual: return "<=";
    case Relation::GreaterEqual: return ">=";
  }
  return "=";
}

const char* stickiness_text(StickinessKind k) {
  switch (k) {
    case StickinessKind::Zero: return "zero";
    case StickinessKind::Full: return "full";
    case StickinessKind::ObservationBased: return "observation";
    case StickinessKind::Custom: return "custom";
  }
  return "zero";
}

std::string join_names(const char* keyword, const std::vector<std::string>& names) {
  std::string out = keyword;
  for (const auto& n : names) out += " " + n;
  return out + "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// Models

Rpomdp parse_model(std::string_view text, bool validate) {
  std::vector<std::string> states, actions, agent_obs, nature_obs, public_obs;
  bool have_states = false, have_actions = false, have_obs_agent = false, have_obs_nature = false,
       have_obs_public = false;
  std::optional<Rpomdp> model;
  std::vector<bool> observed;
  bool influence_given = false;
  std::optional<std::size_t> initial_line;

  auto lines = split_lines(text);
  auto require_model = [&](std::size_t line, const Token& tok) -> Rpomdp& {
    if (!model) {
      if (!(have_states && have_actions && have_obs_agent && have_obs_nature && have_obs_public))
        throw ParseError(line, tok.column,
                         "'" + tok.text + "' needs states, actions and all three observation alphabets first");
      model = make_model(states, actions, agent_obs, nature_obs, public_obs);
      observed.assign(states.size(), false);
    }
    return *model;
  };

  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t line = ln + 1;
    auto toks = tokenize(lines[ln]);
    if (toks.empty()) continue;
    const std::string& kw = toks[0].text;
    auto header = [&](bool& flag, std::vector<std::string>& into) {
      if (model) throw ParseError(line, toks[0].column, "'" + kw + "' must precede the model body");
      if (flag) throw ParseError(line, toks[0].column, "duplicate '" + kw + "'");
      if (toks.size() < 2) throw ParseError(line, toks[0].column, "'" + kw + "' needs at least one name");
      into = names_from(toks, line);
      flag = true;
    };
    if (kw == "states") {
      header(have_states, states);
    } else if (kw == "actions") {
      header(have_actions, actions);
    } else if (kw == "observations.agent") {
      header(have_obs_agent, agent_obs);
    } else if (kw == "observations.nature") {
      header(have_obs_nature, nature_obs);
    } else if (kw == "observations.public") {
      header(have_obs_public, public_obs);
    } else if (kw == "initial") {
      Rpomdp& m = require_model(line, toks[0]);
      expect_count(toks, 2, line, "initial <state>");
      m.initial_state = lookup(m.states, toks[1], "state", line);
      initial_line = line;
    } else if (kw == "observe") {
      Rpomdp& m = require_model(line, toks[0]);
      expect_count(toks, 5, line, "observe <state> <agent-obs> <nature-obs> <public-obs>");
      StateId s = lookup(m.states, toks[1], "state", line);
      m.obs_agent[s] = lookup(m.agent_observations, toks[2], "agent observation", line);
      m.obs_nature[s] = lookup(m.nature_observations, toks[3], "nature observation", line);
      m.obs_public[s] = lookup(m.public_observations, toks[4], "public observation", line);
      observed[s] = true;
    } else if (kw == "enabled") {
      Rpomdp& m = require_model(line, toks[0]);
      if (toks.size() < 3) throw ParseError(line, toks[0].column, "expected: enabled <state> <action>...");
      StateId s = lookup(m.states, toks[1], "state", line);
      std::vector<ActionId> acts;
      for (std::size_t i = 2; i < toks.size(); ++i) acts.push_back(lookup(m.actions, toks[i], "action", line));
      std::sort(acts.begin(), acts.end());
      acts.erase(std::unique(acts.begin(), acts.end()), acts.end());
      m.enabled[s] = acts;
    } else if (kw == "reward") {
      Rpomdp& m = require_model(line, toks[0]);
      expect_count(toks, 4, line, "reward <state> <action> <value>");
      m.rewards[lookup(m.states, toks[1], "state", line)][lookup(m.actions, toks[2], "action", line)] =
          number(toks[3], line);
    } else if (kw == "variable") {
      Rpomdp& m = require_model(line, toks[0]);
      expect_count(toks, 4, line, "variable <name> <lo> <hi>");
      if (m.uncertainty.find(toks[1].text)) throw ParseError(line, toks[1].column, "duplicate variable");
      const std::string& name = toks[1].text;
      if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_') ||
          !std::all_of(name.begin(), name.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }))
        throw ParseError(line, toks[1].column, "variable names are identifiers");
      m.uncertainty.variables.push_back(name);
      m.uncertainty.boxes.push_back({number(toks[2], line), number(toks[3], line)});
    } else if (kw == "coupling") {
      Rpomdp& m = require_model(line, toks[0]);
      std::size_t rel = 0;
      for (std::size_t i = 1; i < toks.size(); ++i)
        if (toks[i].text == "=" || toks[i].text == "<=" || toks[i].text == ">=") rel = i;
      if (rel < 2 || rel + 2 != toks.size())
        throw ParseError(line, toks[0].column, "expected: coupling <expression> (=|<=|>=) <value>");
      auto [rest, col] = rest_of(lines[ln], toks, 1);
      std::string_view lhs = rest.substr(0, toks[rel].column - col);
      AffineExpr e = ExpressionParser(lhs, line, col, m.uncertainty).parse();
      LinearConstraint c;
      c.coefficients = e.coefficients;
      c.relation = toks[rel].text == "=" ? Relation::Equal
                                         : (toks[rel].text == "<=" ? Relation::LessEqual : Relation::GreaterEqual);
      c.rhs = number(toks[rel + 1], line) - e.constant;
      m.uncertainty.couplings.push_back(std::move(c));
    } else if (kw == "transition") {
      Rpomdp& m = require_model(line, toks[0]);
      if (toks.size() < 5) throw ParseError(line, toks[0].column, "expected: transition <s> <a> <s'> <expression>");
      StateId s = lookup(m.states, toks[1], "state", line);
      ActionId a = lookup(m.actions, toks[2], "action", line);
      StateId s2 = lookup(m.states, toks[3], "state", line);
      auto [rest, col] = rest_of(lines[ln], toks, 4);
      m.transitions[s][a][s2] = ExpressionParser(rest, line, col, m.uncertainty).parse();
    } else if (kw == "stickiness") {
      Rpomdp& m = require_model(line, toks[0]);
      expect_count(toks, 2, line, "stickiness zero|full|observation|custom");
      const std::string& k = toks[1].text;
      if (k == "zero") {
        m.stickiness.kind = StickinessKind::Zero;
      } else if (k == "full") {
        m.stickiness.kind = StickinessKind::Full;
      } else if (k == "observation") {
        m.stickiness.kind = StickinessKind::ObservationBased;
      } else if (k == "custom") {
        m.stickiness.kind = StickinessKind::Custom;
      } else {
        throw ParseError(line, toks[1].column, "unknown stickiness '" + k + "'");
      }
    } else if (kw == "influence") {
      Rpomdp& m = require_model(line, toks[0]);
      expect_count(toks, 4, line, "influence <variable> <state> <action>");
      VarId v = lookup(m.uncertainty.variables, toks[1], "variable", line);
      if (m.stickiness.influence.size() < m.num_variables()) m.stickiness.influence.resize(m.num_variables());
      m.stickiness.influence[v].insert(
          {lookup(m.states, toks[2], "state", line), lookup(m.actions, toks[3], "action", line)});
      influence_given = true;
    } else if (kw == "stick") {
      Rpomdp& m = require_model(line, toks[0]);
      expect_count(toks, 5, line, "stick <variable> <nature-obs> <public-obs> <action>");
      m.stickiness.custom_table.insert({lookup(m.uncertainty.variables, toks[1], "variable", line),
                                        lookup(m.nature_observations, toks[2], "nature observation", line),
                                        lookup(m.public_observations, toks[3], "public observation", line),
                                        lookup(m.actions, toks[4], "action", line)});
    } else if (kw == "play") {
      Rpomdp& m = require_model(line, toks[0]);
      expect_count(toks, 2, line, "play agent-first|nature-first");
      if (toks[1].text == "agent-first") {
        m.play_order = PlayOrder::AgentFirst;
      } else if (toks[1].text == "nature-first") {
        m.play_order = PlayOrder::NatureFirst;
      } else {
        throw ParseError(line, toks[1].column, "unknown play order '" + toks[1].text + "'");
      }
    } else {
      throw ParseError(line, toks[0].column, "unknown directive '" + kw + "'");
    }
  }

  const std::size_t end_line = lines.size();
  if (!model) throw ParseError(end_line, 1, "document lacks states, actions or observation alphabets");
  Rpomdp& m = *model;
  for (StateId s = 0; s < m.num_states(); ++s)
    if (!observed[s]) throw ParseError(end_line, 1, "state '" + m.states[s] + "' has no observe entry");
  if (!initial_line) throw ParseError(end_line, 1, "document lacks an initial state");
  if (influence_given || m.stickiness.kind == StickinessKind::ObservationBased) {
    if (!influence_given) m.stickiness.influence = derive_influence(m);
    m.stickiness.influence.resize(m.num_variables());
  }
  if (validate) {
    ValidationReport report = validate_model(m);
    if (!report.ok()) {
      std::string why = "invalid model:";
      for (const auto& v : report.violations) why += "\n  " + v;
      throw ParseError(end_line, 1, why);
    }
  }
  return std::move(m);
}

std::string format_expression(const Rpomdp& m, const AffineExpr& e) {
  std::string out;
  if (e.constant != 0 || e.coefficients.empty()) out = to_string(e.constant);
  for (const auto& [v, c] : e.coefficients) {
    Rational mag = abs(c);
    std::string term = mag == 1 ? m.uncertainty.variables[v] : to_string(mag) + "*" + m.uncertainty.variables[v];
    if (out.empty()) {
      out = c < 0 ? "-" + term : term;
    } else {
      out += (c < 0 ? " - " : " + ") + term;
    }
  }
  return out;
}

std::string serialize_model(const Rpomdp& m) {
  std::ostringstream os;
  os << join_names("states", m.states) << join_names("actions", m.actions)
     << join_names("observations.agent", m.agent_observations)
     << join_names("observations.nature", m.nature_observations)
     << join_names("observations.public", m.public_observations);
  os << "initial " << m.states[m.initial_state] << "\n";
  os << "play " << (m.play_order == PlayOrder::AgentFirst ? "agent-first" : "nature-first") << "\n";
  for (StateId s = 0; s < m.num_states(); ++s)
    os << "observe " << m.states[s] << " " << m.agent_observations[m.obs_agent[s]] << " "
       << m.nature_observations[m.obs_nature[s]] << " " << m.public_observations[m.obs_public[s]] << "\n";
  for (StateId s = 0; s < m.num_states(); ++s) {
    os << "enabled " << m.states[s];
    for (ActionId a : m.enabled[s]) os << " " << m.actions[a];
    os << "\n";
  }
  for (VarId v = 0; v < m.num_variables(); ++v)
    os << "variable " << m.uncertainty.variables[v] << " " << to_string(m.uncertainty.boxes[v].lo) << " "
       << to_string(m.uncertainty.boxes[v].hi) << "\n";
  for (const auto& c : m.uncertainty.couplings) {
    AffineExpr lhs;
    lhs.coefficients = c.coefficients;
    os << "coupling " << format_expression(m, lhs) << " " << relation_text(c.relation) << " " << to_string(c.rhs)
       << "\n";
  }
  for (StateId s = 0; s < m.num_states(); ++s)
    for (ActionId a = 0; a < m.num_actions(); ++a)
      if (m.rewards[s][a] != 0) os << "reward " << m.states[s] << " " << m.actions[a] << " " << to_string(m.rewards[s][a]) << "\n";
  for (StateId s = 0; s < m.num_states(); ++s)
    for (ActionId a = 0; a < m.num_actions(); ++a)
      for (StateId s2 = 0; s2 < m.num_states(); ++s2)
        if (!m.transitions[s][a][s2].is_zero())
          os << "transition " << m.states[s] << " " << m.actions[a] << " " << m.states[s2] << " "
             << format_expression(m, m.transitions[s][a][s2]) << "\n";
  os << "stickiness " << stickiness_text(m.stickiness.kind) << "\n";
  for (VarId v = 0; v < m.stickiness.influence.size(); ++v)
    for (const auto& [s, a] : m.stickiness.influence[v])
      os << "influence " << m.uncertainty.variables[v] << " " << m.states[s] << " " << m.actions[a] << "\n";
  for (const auto& [v, zn, zp, a] : m.stickiness.custom_table)
    os << "stick " << m.uncertainty.variables[v] << " " << m.nature_observations[zn] << " "
       << m.public_observations[zp] << " " << m.actions[a] << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Policies

namespace {

ObsPair parse_obs(const std::vector<std::string>& priv_names, const std::vector<std::string>& pub_names,
                  const Token& tok, std::size_t line, const char* what) {
  auto bar = tok.text.find('|');
  if (bar == std::string::npos || tok.text.find('|', bar + 1) != std::string::npos)
    throw ParseError(line, tok.column, std::string("expected ") + what + " observation 'private|public'");
  return {lookup(priv_names, tok, what, line, std::string_view(tok.text).substr(0, bar)),
          lookup(pub_names, tok, "public observation", line, std::string_view(tok.text).substr(bar + 1))};
}

Assignment parse_assignment(const Rpomdp& m, const Token& tok, std::size_t line) {
  const std::string& t = tok.text;
  if (t.size() < 2 || t.front() != '{' || t.back() != '}')
    throw ParseError(line, tok.column, "expected an assignment '{var=value,...}'");
  std::vector<std::optional<Rational>> values(m.num_variables());
  std::string body = t.substr(1, t.size() - 2);
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t comma = body.find(',', pos);
    if (comma == std::string::npos) comma = body.size();
    std::string item = body.substr(pos, comma - pos);
    auto eq = item.find('=');
    std::size_t col = tok.column + 1 + pos;
    if (eq == std::string::npos) throw ParseError(line, col, "expected 'var=value'");
    auto v = m.uncertainty.find(item.substr(0, eq));
    if (!v) throw ParseError(line, col, "unknown variable '" + item.substr(0, eq) + "'");
    auto r = parse_rational(std::string_view(item).substr(eq + 1));
    if (!r) throw ParseError(line, col + eq + 1, "expected a rational literal");
    if (values[*v]) throw ParseError(line, col, "variable assigned twice");
    values[*v] = *r;
    pos = comma + 1;
  }
  Assignment u;
  for (VarId v = 0; v < m.num_variables(); ++v) {
    if (!values[v]) throw ParseError(line, tok.column, "assignment misses variable '" + m.uncertainty.variables[v] + "'");
    u.push_back(*values[v]);
  }
  return u;
}

std::pair<std::string, Rational> split_weight(const Token& tok, std::size_t line) {
  auto colon = tok.text.rfind(':');
  if (colon == std::string::npos) return {tok.text, Rational(1)};
  auto r = parse_rational(std::string_view(tok.text).substr(colon + 1));
  if (!r) throw ParseError(line, tok.column + colon + 1, "expected a probability");
  return {tok.text.substr(0, colon), *r};
}

/// Drives the shared layout of policy documents; `entry` handles history lines.
template <class OnEntry, class OnComponent>
PolicyKind read_policy(std::string_view text, const char* who, OnEntry&& entry, OnComponent&& component) {
  auto lines = split_lines(text);
  bool saw_policy = false;
  std::optional<PolicyKind> kind;
  bool in_component = false;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t line = ln + 1;
    auto toks = tokenize(lines[ln]);
    if (toks.empty()) continue;
    if (!saw_policy) {
      if (toks[0].text != "policy" || toks.size() != 2 || toks[1].text != who)
        throw ParseError(line, toks[0].column, std::string("expected 'policy ") + who + "'");
      saw_policy = true;
      continue;
    }
    if (!kind) {
      if (toks[0].text != "kind" || toks.size() != 2)
        throw ParseError(line, toks[0].column, "expected 'kind stochastic|deterministic|mixed'");
      if (toks[1].text == "stochastic") {
        kind = PolicyKind::Stochastic;
      } else if (toks[1].text == "deterministic") {
        kind = PolicyKind::Deterministic;
      } else if (toks[1].text == "mixed") {
        kind = PolicyKind::Mixed;
      } else {
        throw ParseError(line, toks[1].column, "unknown policy kind '" + toks[1].text + "'");
      }
      continue;
    }
    if (toks[0].text == "component") {
      if (*kind != PolicyKind::Mixed) throw ParseError(line, toks[0].column, "components need kind mixed");
      expect_count(toks, 2, line, "component <weight>");
      component(number(toks[1], line));
      in_component = true;
      continue;
    }
    if (*kind == PolicyKind::Mixed && !in_component)
      throw ParseError(line, toks[0].column, "mixed policy entries must follow a component line");
    std::size_t arrow = 0;
    for (std::size_t i = 0; i < toks.size(); ++i)
      if (toks[i].text == "=>") arrow = i;
    if (arrow == 0 || arrow + 1 == toks.size())
      throw ParseError(line, toks[0].column, "expected '<history> => <distribution>'");
    entry(line, toks, arrow, *kind);
  }
  if (!kind) throw ParseError(lines.size(), 1, "policy document lacks its header");
  return *kind;
}

template <class Dist>
void check_entry(const Dist& d, PolicyKind kind, std::size_t line, std::size_t column) {
  Rational total = 0;
  for (const auto& [x, p] : d) {
    if (p < 0) throw ParseError(line, column, "negative probability");
    total += p;
  }
  if (total != 1) throw ParseError(line, column, "distribution does not sum to 1");
  if (kind != PolicyKind::Stochastic && d.size() != 1)
    throw ParseError(line, column, "deterministic entries have exactly one choice");
}

}  // namespace

AgentPolicy parse_agent_policy(const Rpomdp& m, std::string_view text) {
  std::map<AgentHistory, ActionDistribution> table;
  std::vector<std::pair<Rational, std::map<AgentHistory, ActionDistribution>>> components;
  PolicyKind kind = read_policy(
      text, "agent",
      [&](std::size_t line, const std::vector<Token>& toks, std::size_t arrow, PolicyKind k) {
        if (arrow % 2 == 0) throw ParseError(line, toks[arrow].column, "agent history must end with an observation");
        AgentHistory h{parse_obs(m.agent_observations, m.public_observations, toks[0], line, "agent"), {}};
        for (std::size_t i = 1; i + 1 < arrow; i += 2)
          h.steps.push_back({lookup(m.actions, toks[i], "action", line),
                             parse_obs(m.agent_observations, m.public_observations, toks[i + 1], line, "agent")});
        ActionDistribution d;
        for (std::size_t i = arrow + 1; i < toks.size(); ++i) {
          auto [name, p] = split_weight(toks[i], line);
          d[lookup(m.actions, toks[i], "action", line, name)] += p;
        }
        check_entry(d, k, line, toks[arrow].column);
        auto& into = k == PolicyKind::Mixed ? components.back().second : table;
        if (!into.emplace(h, d).second) throw ParseError(line, toks[0].column, "duplicate history");
      },
      [&](const Rational& w) { components.push_back({w, {}}); });
  try {
    if (kind == PolicyKind::Mixed) {
      std::vector<AgentComponent> parts;
      for (auto& [w, t] : components) {
        std::map<AgentHistory, ActionId> choices;
        for (const auto& [h, d] : t) choices[h] = d.begin()->first;
        parts.push_back({w, agent_deterministic(choices)});
      }
      return agent_mixed(std::move(parts));
    }
    AgentPolicy pi = agent_stochastic(std::move(table));
    pi.kind = kind;
    return pi;
  } catch (const ContractError& e) {
    throw ParseError(0, 0, e.what());
  }
}

NaturePolicy parse_nature_policy(const Rpomdp& m, std::string_view text) {
  std::vector<std::pair<Rational, NaturePolicy>> components;
  NaturePolicy top;
  PolicyKind kind = read_policy(
      text, "nature",
      [&](std::size_t line, const std::vector<Token>& toks, std::size_t arrow, PolicyKind k) {
        std::size_t end = arrow;
        std::optional<ActionId> action;
        if (arrow >= 2 && toks[arrow - 2].text == "@") {
          action = lookup(m.actions, toks[arrow - 1], "action", line);
          end = arrow - 2;
        }
        if ((end - 1) % 3 != 0) throw ParseError(line, toks[0].column, "malformed nature history");
        NaturePattern pattern{parse_obs(m.nature_observations, m.public_observations, toks[0], line, "nature"), {},
                              action};
        bool wildcard = false;
        for (std::size_t i = 1; i < end; i += 3) {
          NaturePatternStep step;
          step.action = lookup(m.actions, toks[i], "action", line);
          if (toks[i + 1].text == "*") {
            wildcard = true;
          } else {
            step.assignment = parse_assignment(m, toks[i + 1], line);
          }
          step.obs = parse_obs(m.nature_observations, m.public_observations, toks[i + 2], line, "nature");
          pattern.steps.push_back(std::move(step));
        }
        AssignmentDistribution d;
        for (std::size_t i = arrow + 1; i < toks.size(); ++i) {
          Token t = toks[i];
          auto [body, p] = split_weight(t, line);
          t.text = body;
          d[parse_assignment(m, t, line)] += p;
        }
        check_entry(d, k, line, toks[arrow].column);
        NaturePolicy& into = k == PolicyKind::Mixed ? components.back().second : top;
        if (wildcard) {
          into.patterns.push_back({std::move(pattern), std::move(d)});
          return;
        }
        NatureKey key{NatureHistory{pattern.initial, {}}, action};
        for (const auto& s : pattern.steps) key.history.steps.push_back({s.action, *s.assignment, s.obs});
        if ((m.play_order == PlayOrder::AgentFirst) != key.action.has_value())
          throw ParseError(line, toks[0].column,
                           m.play_order == PlayOrder::AgentFirst ? "agent-first entries need '@ action'"
                                                                 : "nature-first entries take no '@ action'");
        if (!into.table.emplace(std::move(key), std::move(d)).second)
          throw ParseError(line, toks[0].column, "duplicate history");
      },
      [&](const Rational& w) {
        components.push_back({w, NaturePolicy{}});
        components.back().second.kind = PolicyKind::Deterministic;
      });
  if (kind != PolicyKind::Mixed) {
    top.kind = kind;
    return top;
  }
  std::vector<NatureComponent> parts;
  for (auto& [w, p] : components) parts.push_back({w, std::move(p)});
  try {
    return nature_mixed(std::move(parts));
  } catch (const ContractError& e) {
    throw ParseError(0, 0, e.what());
  }
}

std::string format_assignment(const Rpomdp& m, const Assignment& u) {
  std::string out = "{";
  for (VarId v = 0; v < u.size(); ++v) {
    if (v) out += ",";
    out += m.uncertainty.variables[v] + "=" + to_string(u[v]);
  }
  return out + "}";
}

std::string format_history(const Rpomdp& m, const AgentHistory& h) {
  auto obs = [&](const ObsPair& z) { return m.agent_observations[z.priv] + "|" + m.public_observations[z.pub]; };
  std::string out = obs(h.initial);
  for (const auto& s : h.steps) out += " " + m.actions[s.action] + " " + obs(s.obs);
  return out;
}

namespace {

std::string nature_obs_text(const Rpomdp& m, const ObsPair& z) {
  return m.nature_observations[z.priv] + "|" + m.public_observations[z.pub];
}

std::string format_pattern(const Rpomdp& m, const NaturePattern& p) {
  std::string out = nature_obs_text(m, p.initial);
  for (const auto& s : p.steps)
    out += " " + m.actions[s.action] + " " + (s.assignment ? format_assignment(m, *s.assignment) : "*") + " " +
           nature_obs_text(m, s.obs);
  if (p.action) out += " @ " + m.actions[*p.action];
  return out;
}

std::string format_nature_dist(const Rpomdp& m, const AssignmentDistribution& d) {
  std::string out;
  for (const auto& [u, p] : d) out += " " + format_assignment(m, u) + ":" + to_string(p);
  return out;
}

const char* kind_text(PolicyKind k) {
  switch (k) {
    case PolicyKind::Stochastic: return "stochastic";
    case PolicyKind::Deterministic: return "deterministic";
    case PolicyKind::Mixed: return "mixed";
  }
  return "stochastic";
}

void write_agent_table(std::ostringstream& os, const Rpomdp& m, const AgentPolicy& pi) {
  for (const auto& [h, d] : pi.table) {
    os << format_history(m, h) << " =>";
    for (const auto& [a, p] : d) os << " " << m.actions[a] << ":" << to_string(p);
    os << "\n";
  }
}

void write_nature_table(std::ostringstream& os, const Rpomdp& m, const NaturePolicy& theta) {
  for (const auto& [k, d] : theta.table) os << format_history(m, k) << " =>" << format_nature_dist(m, d) << "\n";
  for (const auto& [p, d] : theta.patterns) os << format_pattern(m, p) << " =>" << format_nature_dist(m, d) << "\n";
}

}  // namespace

std::string format_history(const Rpomdp& m, const NatureKey& key) {
  std::string out = nature_obs_text(m, key.history.initial);
  for (const auto& s : key.history.steps)
    out += " " + m.actions[s.action] + " " + format_assignment(m, s.assignment) + " " + nature_obs_text(m, s.obs);
  if (key.action) out += " @ " + m.actions[*key.action];
  return out;
}

std::string serialize_policy(const Rpomdp& m, const AgentPolicy& pi) {
  std::ostringstream os;
  os << "policy agent\nkind " << kind_text(pi.kind) << "\n";
  if (pi.kind == PolicyKind::Mixed) {
    for (const auto& c : pi.mixture) {
      os << "component " << to_string(c.weight) << "\n";
      write_agent_table(os, m, c.policy);
    }
  } else {
    write_agent_table(os, m, pi);
  }
  return os.str();
}

std::string serialize_policy(const Rpomdp& m, const NaturePolicy& theta) {
  std::ostringstream os;
  os << "policy nature\nkind " << kind_text(theta.kind) << "\n";
  if (theta.kind == PolicyKind::Mixed) {
    for (const auto& c : theta.mixture) {
      os << "component " << to_string(c.weight) << "\n";
      write_nature_table(os, m, c.policy);
    }
  } else {
    write_nature_table(os, m, theta);
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Game dump

std::string dump_posg_fragment(const Posg& g, std::size_t horizon) {
  const Rpomdp& m = g.model();
  std::map<PosgState, std::size_t> ids;
  std::vector<PosgState> order;
  auto id_of = [&](const PosgState& s) {
    auto [it, inserted] = ids.try_emplace(s, order.size());
    if (inserted) order.push_back(s);
    return it->second;
  };
  auto fixed_text = [&](const PartialAssignment& f) {
    std::string out = "{";
    bool first = true;
    for (VarId v = 0; v < f.size(); ++v) {
      if (!f[v]) continue;
      if (!first) out += ",";
      out += m.uncertainty.variables[v] + "=" + to_string(*f[v]);
      first = false;
    }
    return out + "}";
  };
  std::ostringstream edges;
  std::vector<PosgState> frontier{g.initial_state()};
  id_of(frontier.front());
  for (std::size_t move = 0; move < 2 * horizon; ++move) {
    std::vector<PosgState> next;
    for (const auto& s : frontier) {
      std::size_t from = ids.at(s);
      std::vector<std::pair<std::string, std::vector<std::pair<PosgState, Rational>>>> succ;
      if (const auto* a_state = std::get_if<PosgAgentState>(&s)) {
        for (ActionId a : g.agent_actions(*a_state)) succ.push_back({m.actions[a], g.agent_step(*a_state, a)});
      } else {
        const auto& n_state = std::get<PosgNatureState>(s);
        for (const auto& u : g.nature_move_vertices(n_state))
          succ.push_back({format_assignment(m, u), g.nature_step(n_state, u)});
      }
      for (auto& [label, dist] : succ) {
        for (auto& [t, p] : dist) {
          bool fresh = !ids.count(t);
          std::size_t to = id_of(t);
          edges << "edge " << from << " " << label << " " << to << " " << to_string(p) << "\n";
          if (fresh) next.push_back(t);
        }
      }
    }
    frontier = std::move(next);
  }
  std::ostringstream os;
  os << "game " << (g.mode() == PlayOrder::AgentFirst ? "agent-first" : "nature-first") << " states "
     << order.size() << "\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          os << "state " << i << (std::is_same_v<T, PosgAgentState> ? " agent " : " nature ") << m.states[st.base]
             << " fixed=" << fixed_text(st.fixed);
          if constexpr (std::is_same_v<T, PosgAgentState>) {
            if (st.pending) os << " pending=" << format_assignment(m, *st.pending);
          } else {
            if (st.last_action) os << " last=" << m.actions[*st.last_action];
          }
          os << "\n";
        },
        order[i]);
  }
  os << edges.str();
  return os.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, 0, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace rpomdp
