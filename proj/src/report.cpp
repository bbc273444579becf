#include "mpst/report.hpp"

#include <functional>
#include <sstream>

#include "mpst/frontend.hpp"

namespace mpst {

namespace {

// DOT string literal.
std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string global_name(const GlobalGraph& g, const std::map<StateId, std::string>& names) {
  if (g.is_end()) return "end";
  auto it = names.find(g.root());
  return it != names.end() ? it->second : print_global(g, PrintStyle::Compact);
}

Json node_json(const DerivationNode& d, const std::map<StateId, std::string>& names) {
  Json j;
  j["rule"] = std::string(to_string(d.rule));
  j["global"] = global_name(d.judgment.global, names);
  j["ignored"] = to_json(d.judgment.ignored);
  j["session"] = print_session(d.judgment.session);
  if (d.rule == Rule::Weak) j["split"] = to_json(d.split);
  Json premises = Json::array();
  for (const auto& p : d.premises) premises.push_back(node_json(*p, names));
  j["premises"] = std::move(premises);
  return j;
}

}  // namespace

Json to_json(const ParticipantSet& ps) {
  Json a = Json::array();
  for (const auto& p : ps) a.push_back(p);
  return a;
}

Json to_json(const Judgment& j) {
  Json out;
  out["global"] = print_global(j.global);
  out["ignored"] = to_json(j.ignored);
  out["session"] = print_session(j.session);
  return out;
}

Json to_json(const DerivationNode& d) {
  Json out;
  out["global"] = print_global(d.judgment.global);
  out["tree"] = node_json(d, global_node_names(d.judgment.global));
  const auto c = count_rules(d);
  out["rules"] = {{"End", c.end}, {"Comm", c.comm}, {"Cycle", c.cycle}, {"Weak", c.weak}};
  return out;
}

Json to_json(const Rejection& r) {
  Json out;
  out["kind"] = std::string(to_string(r.kind));
  out["message"] = r.message;
  out["depth"] = r.depth;
  out["judgment"] = to_json(r.judgment);
  return out;
}

Json to_json(const TypecheckResult& r) {
  Json out;
  out["accepted"] = r.accepted();
  if (r.accepted()) out["derivation"] = to_json(*r.derivation);
  if (r.rejection) out["rejection"] = to_json(*r.rejection);
  return out;
}

Json to_json(const LivenessVerdict& v) {
  Json out;
  out["property"] = v.property;
  out["ignored"] = to_json(v.ignored);
  out["holds"] = v.holds;
  if (!v.holds) out["witness"] = {{"state", v.state_text}, {"participant", v.participant}};
  if (v.note) out["note"] = *v.note;
  return out;
}

Json to_json(const Boundedness& b, const GlobalGraph& g) {
  Json out;
  out["property"] = "boundedness";
  out["holds"] = b.bounded;
  if (!b.bounded) {
    std::string node = print_global(g.at(b.node), PrintStyle::Compact);
    while (!node.empty() && node.back() == '\n') node.pop_back();
    out["witness"] = {{"node", node}, {"participant", b.participant}};
  }
  return out;
}

Json to_json(const StateGraph& g) {
  Json states = Json::array();
  for (std::size_t i = 0; i < g.states.size(); ++i)
    states.push_back({{"id", i}, {"session", print_session(g.states[i])}});
  Json edges = Json::array();
  for (const auto& e : g.edges)
    edges.push_back({{"from", e.from}, {"label", to_string(e.label)}, {"to", e.to}});
  Json out;
  out["initial"] = g.initial;
  out["states"] = std::move(states);
  out["edges"] = std::move(edges);
  return out;
}

Json to_json(const EquationSystems& s) {
  Json types = Json::array(), psets = Json::array(), conds = Json::array();
  for (const auto& e : s.types) types.push_back(type_var_name(e.var) + " = " + print_pattern(e.rhs));
  for (const auto& e : s.psets)
    psets.push_back(pset_var_name(e.var) + " = " + print_pset_pattern(e.rhs));
  for (const auto& c : s.conditions) conds.push_back(print_condition(c));
  Json out;
  out["types"] = std::move(types);
  out["psets"] = std::move(psets);
  out["conditions"] = std::move(conds);
  return out;
}

Json to_json(const InferredSolution& s, bool with_equations) {
  Json out;
  out["global"] = print_global(s.global);
  out["ignored"] = to_json(s.ignored);
  out["size"] = s.outcome.size;
  out["weak"] = s.outcome.weak_count;
  if (with_equations) out["equations"] = to_json(s.outcome.systems);
  return out;
}

Json to_json(const InferResult& r, bool with_equations) {
  Json sols = Json::array();
  for (const auto& s : r.solutions) sols.push_back(to_json(s, with_equations));
  Json failures = Json::object();
  for (const auto& [f, n] : r.failures) failures[std::string(to_string(f))] = n;
  Json out;
  out["solutions"] = std::move(sols);
  out["outcomes"] = r.outcomes;
  out["max_size"] = r.max_size;
  out["failures"] = std::move(failures);
  out["budget_exhausted"] = r.budget_exhausted;
  return out;
}

Json to_json(const MetaReport& r) {
  const auto& c = r.counts;
  Json out;
  out["ok"] = r.ok();
  out["truncated"] = r.truncated;
  out["counts"] = {{"triples", c.triples},
                   {"subject_reduction", c.subject_reduction},
                   {"session_fidelity", c.session_fidelity},
                   {"lock_freedom", c.lock_freedom},
                   {"participants_lemma", c.participants_lemma},
                   {"top_partner", c.top_partner},
                   {"replacement", c.replacement}};
  Json vs = Json::array();
  for (const auto& v : r.violations) vs.push_back({{"property", v.property}, {"detail", v.detail}});
  out["violations"] = std::move(vs);
  return out;
}

Json to_json(const FileMetaReport& r) {
  Json triples = Json::array();
  for (const auto& t : r.triples) {
    Json j;
    j["global"] = t.global;
    j["session"] = t.session;
    j["ignored"] = t.ignored;
    j["accepted"] = t.accepted;
    if (t.accepted) j["report"] = to_json(t.report);
    if (t.rejection) j["rejection"] = to_json(*t.rejection);
    triples.push_back(std::move(j));
  }
  Json out;
  out["ok"] = r.ok();
  out["triples"] = std::move(triples);
  return out;
}

std::string to_dot(const StateGraph& g) {
  std::ostringstream out;
  out << "digraph states {\n  node [shape=box];\n";
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    out << "  s" << i << " [label=" << quote(print_session(g.states[i]));
    if (i == g.initial) out << ", penwidth=2";
    out << "];\n";
  }
  for (const auto& e : g.edges)
    out << "  s" << e.from << " -> s" << e.to << " [label=" << quote(to_string(e.label)) << "];\n";
  out << "}\n";
  return out.str();
}

std::string to_dot(const DerivationNode& d) {
  auto names = global_node_names(d.judgment.global);
  std::ostringstream out;
  out << "digraph derivation {\n  rankdir=BT;\n  node [shape=box];\n";
  std::size_t next = 0;
  std::function<std::size_t(const DerivationNode&)> go = [&](const DerivationNode& n) {
    const std::size_t id = next++;
    const auto& j = n.judgment;
    std::string text = "[" + std::string(to_string(n.rule)) + "] " + global_name(j.global, names) +
                       " ⊢" + print_participants(j.ignored) + " " + print_session(j.session);
    out << "  d" << id << " [label=" << quote(text) << "];\n";
    for (const auto& p : n.premises) {
      std::size_t child = go(*p);
      out << "  d" << child << " -> d" << id << ";\n";
    }
    return id;
  };
  go(d);
  out << "}\n";
  return out.str();
}

}  // namespace mpst
