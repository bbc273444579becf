// mpst: check, infer, analyze and meta over .mpst files.
//
// Exit codes: 0 holds / found, 1 fails / none found, 2 usage or parse error.

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mpst/analysis.hpp"
#include "mpst/error.hpp"
#include "mpst/frontend.hpp"
#include "mpst/inference.hpp"
#include "mpst/metatheory.hpp"
#include "mpst/report.hpp"
#include "mpst/typing.hpp"

using namespace mpst;

namespace {

struct Budget {
  std::size_t max_size = 0;  // 0 = 4 × reachable sessions
  std::size_t max_outcomes = 64;
  std::size_t state_cap = 1'000'000;
  std::size_t max_steps = 5'000'000;
};

struct Config {
  std::string file;
  std::string format = "text";
  std::string global, session;
  std::optional<std::string> ignored;
  Budget budget;
  std::uint64_t seed = 1;

  bool minimal = false, show_equations = false;
  bool bounded = false, lockfree = false, deadlockfree = false, stategraph = false;
  std::vector<std::string> depth;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// MPST_BUDGET="max_size=20,max_outcomes=8,state_cap=5000,max_steps=100000";
// a bare number sets max_size.
Budget budget_from_env() {
  Budget b;
  const char* env = std::getenv("MPST_BUDGET");
  if (!env || !*env) return b;
  std::stringstream ss(env);
  std::string item;
  auto num = [](const std::string& v) {
    try {
      std::size_t pos = 0;
      auto n = std::stoull(v, &pos);
      if (pos != v.size() || n == 0) throw std::invalid_argument(v);
      return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
      throw UsageError("MPST_BUDGET: bad value '" + v + "'");
    }
  };
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      b.max_size = num(item);
      continue;
    }
    std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "max_size") b.max_size = num(value);
    else if (key == "max_outcomes") b.max_outcomes = num(value);
    else if (key == "state_cap") b.state_cap = num(value);
    else if (key == "max_steps") b.max_steps = num(value);
    else throw UsageError("MPST_BUDGET: unknown key '" + key + "'");
  }
  return b;
}

SpecFile load(const Config& c) { return c.file.empty() ? parse("") : parse_file(c.file); }

// A defined ignored-set name, otherwise a comma/space separated list.
ParticipantSet resolve_ignored(const SpecFile& spec, const std::optional<std::string>& value) {
  if (!value) return {};
  if (spec.ignored.count(*value)) return spec.ignored.at(*value);
  ParticipantSet out;
  std::string cur;
  for (char ch : *value + ",") {
    if (ch == ',' || ch == ' ' || ch == '{' || ch == '}') {
      if (!cur.empty()) out.insert(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  return out;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_check(const Config& c) {
  require(c.global, "--global");
  require(c.session, "--session");
  auto spec = load(c);
  const auto& g = spec.global(c.global);
  const auto& m = spec.session(c.session);
  auto ignored = resolve_ignored(spec, c.ignored);
  TypecheckOptions opts;
  opts.max_steps = c.budget.max_steps;
  auto res = typecheck(g, m, ignored, opts);

  if (c.format == "json") {
    Json j;
    j["command"] = "check";
    j["global"] = c.global;
    j["session"] = c.session;
    j["ignored"] = to_json(ignored);
    j.update(to_json(res));
    emit(j);
  } else if (c.format == "dot" && res.accepted()) {
    std::cout << to_dot(*res.derivation);
  } else if (res.accepted()) {
    std::cout << print_derivation(*res.derivation, c.global);
    std::cout << "accepted\n";
  } else {
    const auto& r = *res.rejection;
    std::cout << "rejected: " << to_string(r.kind) << ": " << r.message << "\n";
    std::cout << "  at " << print_participants(r.judgment.ignored) << " "
              << print_session(r.judgment.session) << "\n";
  }
  return res.accepted() ? 0 : 1;
}

int cmd_infer(const Config& c) {
  require(c.session, "--session");
  auto spec = load(c);
  const auto& m = spec.session(c.session);
  InferOptions opts;
  opts.max_size = c.budget.max_size;
  opts.max_outcomes = c.budget.max_outcomes;

  std::vector<InferredSolution> sols;
  std::optional<InferResult> full;
  if (c.minimal) {
    if (auto best = infer_minimal(m, opts)) sols.push_back(std::move(*best));
  } else {
    full = infer(m, opts);
    sols = full->solutions;
  }

  if (c.format == "json") {
    Json j;
    j["command"] = "infer";
    j["session"] = c.session;
    j["minimal"] = c.minimal;
    if (full) {
      j.update(to_json(*full, c.show_equations));
    } else {
      Json a = Json::array();
      for (const auto& s : sols) a.push_back(to_json(s, c.show_equations));
      j["solutions"] = std::move(a);
    }
    emit(j);
  } else {
    for (std::size_t i = 0; i < sols.size(); ++i) {
      const auto& s = sols[i];
      if (!c.minimal)
        std::cout << "solution " << i + 1 << " (size " << s.outcome.size << ", weak "
                  << s.outcome.weak_count << ")\n";
      std::cout << print_global(s.global) << "\n";
      std::cout << "ignored = " << print_participants(s.ignored) << "\n";
      if (c.show_equations) std::cout << print_systems(s.outcome.systems);
      if (i + 1 < sols.size()) std::cout << "\n";
    }
    if (sols.empty()) std::cout << "no solution\n";
    if (full && full->budget_exhausted) std::cout << "(expansion budget exhausted)\n";
  }
  return sols.empty() ? 1 : 0;
}

int cmd_analyze(const Config& c) {
  auto spec = load(c);
  bool all_hold = true;
  Json results = Json::array();
  std::string text, dot;

  const bool want_global = c.bounded || !c.depth.empty();
  const bool want_session = c.lockfree || c.deadlockfree || c.stategraph;
  if (!want_global && !want_session)
    throw UsageError("nothing to analyze: pass --bounded, --depth, --lockfree, --deadlockfree or "
                     "--stategraph");

  if (want_global) {
    require(c.global, "--global");
    const auto& g = spec.global(c.global);
    if (c.bounded) {
      auto b = bounded(g);
      all_hold = all_hold && b.bounded;
      results.push_back(to_json(b, g));
      text += "bounded: " + std::string(b.bounded ? "true" : "false");
      if (!b.bounded)
      {
        std::string node = print_global(g.at(b.node), PrintStyle::Compact);
        while (!node.empty() && node.back() == '\n') node.pop_back();
        text += " (" + b.participant + " at " + node + ")";
      }
      text += "\n";
    }
    for (const auto& p : c.depth) {
      auto d = depth(g, p);
      Json j{{"property", "depth"}, {"participant", p}};
      if (d.finite()) j["depth"] = *d.value;
      else j["depth"] = "inf";
      results.push_back(j);
      text += "depth " + p + ": " + d.str() + "\n";
    }
  }

  if (want_session) {
    require(c.session, "--session");
    const auto& m = spec.session(c.session);
    auto ignored = resolve_ignored(spec, c.ignored);
    ExploreOptions eo;
    eo.state_cap = c.budget.state_cap;
    auto graph = explore(m, eo);
    auto verdict = [&](const LivenessVerdict& v) {
      all_hold = all_hold && v.holds;
      results.push_back(to_json(v));
      text += v.property + " " + print_participants(v.ignored) + ": " +
              (v.holds ? "holds" : "fails");
      if (!v.holds) text += " (" + v.participant + " in " + v.state_text + ")";
      text += "\n";
      if (v.note) text += "  note: " + *v.note + "\n";
    };
    if (c.lockfree) verdict(excluded_lock_free(graph, ignored));
    if (c.deadlockfree) verdict(excluded_deadlock_free(graph, ignored));
    if (c.stategraph) {
      Json j{{"property", "stategraph"}};
      j.update(to_json(graph));
      results.push_back(j);
      dot = to_dot(graph);
      text += std::to_string(graph.states.size()) + " states, " +
              std::to_string(graph.edges.size()) + " edges\n";
      for (std::size_t i = 0; i < graph.states.size(); ++i)
        text += "  s" + std::to_string(i) + ": " + print_session(graph.states[i]) + "\n";
      for (const auto& e : graph.edges)
        text += "  s" + std::to_string(e.from) + " --" + to_string(e.label) + "--> s" +
                std::to_string(e.to) + "\n";
    }
  }

  if (c.format == "json") {
    Json j;
    j["command"] = "analyze";
    j["results"] = std::move(results);
    j["holds"] = all_hold;
    emit(j);
  } else if (c.format == "dot") {
    if (dot.empty()) throw UsageError("--format dot needs --stategraph");
    std::cout << dot;
  } else {
    std::cout << text;
  }
  return all_hold ? 0 : 1;
}

int cmd_meta(const Config& c) {
  auto spec = load(c);
  MetaOptions opts;
  opts.seed = c.seed;
  auto rep = check_file(spec, opts);
  if (c.format == "json") {
    Json j;
    j["command"] = "meta";
    j["seed"] = c.seed;
    j.update(to_json(rep));
    emit(j);
  } else {
    for (const auto& t : rep.triples) {
      std::cout << t.global << " " << t.session << " " << t.ignored << ": ";
      if (!t.accepted) {
        std::cout << "not typable (" << to_string(t.rejection->kind) << ")\n";
        continue;
      }
      const auto& n = t.report.counts;
      std::cout << (t.report.ok() ? "ok" : "VIOLATED") << ", " << n.triples << " configurations, "
                << n.subject_reduction << " SR, " << n.session_fidelity << " SF, "
                << n.replacement << " replacements" << (t.report.truncated ? " (truncated)" : "")
                << "\n";
      for (const auto& v : t.report.violations)
        std::cout << "  " << v.property << ": " << v.detail << "\n";
    }
    std::cout << (rep.ok() ? "all checks pass" : "violations found") << "\n";
  }
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  try {
    c.budget = budget_from_env();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"Partially typed multiparty sessions: check, infer, analyze"};
  app.require_subcommand(1);
  app.add_option("--format", c.format, "text, json or dot")
      ->check(CLI::IsMember({"text", "json", "dot"}))
      ->capture_default_str();
  app.add_option("--max-size", c.budget.max_size, "derivation size bound for inference");
  app.add_option("--max-outcomes", c.budget.max_outcomes, "solutions kept by inference")
      ->check(CLI::PositiveNumber);
  app.add_option("--state-cap", c.budget.state_cap, "reachable states explored")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-steps", c.budget.max_steps, "typechecker step budget")
      ->check(CLI::PositiveNumber);
  app.fallthrough();

  auto add_file = [&](CLI::App* sub) { sub->add_option("file", c.file, ".mpst input"); };

  auto* check = app.add_subcommand("check", "derive G ⊢_P M");
  check->add_option("--global", c.global);
  check->add_option("--session", c.session);
  check->add_option("--ignored", c.ignored, "set name or participants, comma separated");
  add_file(check);

  auto* inf = app.add_subcommand("infer", "infer global types and ignored sets");
  inf->add_option("--session", c.session);
  inf->add_flag("--minimal", c.minimal);
  inf->add_flag("--show-equations", c.show_equations);
  add_file(inf);

  auto* an = app.add_subcommand("analyze", "boundedness, depth, liveness, state graph");
  an->add_option("--global", c.global);
  an->add_option("--session", c.session);
  an->add_option("--ignored", c.ignored);
  an->add_flag("--bounded", c.bounded);
  an->add_option("--depth", c.depth, "participant, repeatable")->allow_extra_args(false);
  an->add_flag("--lockfree", c.lockfree);
  an->add_flag("--deadlockfree", c.deadlockfree);
  an->add_flag("--stategraph", c.stategraph);
  add_file(an);

  auto* meta = app.add_subcommand("meta", "subject reduction, fidelity, lock-freedom checks");
  meta->add_option("--seed", c.seed)->capture_default_str();
  add_file(meta);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*check) return cmd_check(c);
    if (*inf) return cmd_infer(c);
    if (*an) return cmd_analyze(c);
    return cmd_meta(c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
