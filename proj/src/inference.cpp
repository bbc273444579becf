#include "mpst/inference.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

#include "mpst/analysis.hpp"
#include "mpst/error.hpp"
#include "mpst/frontend.hpp"
#include "mpst/semantics.hpp"

namespace mpst {

std::string type_var_name(VarId v) { return v == 0 ? "X" : "Y" + std::to_string(v); }
std::string pset_var_name(VarId v) { return v == 0 ? "x" : "y" + std::to_string(v); }

std::string_view to_string(SolveFailure f) {
  switch (f) {
    case SolveFailure::None: return "none";
    case SolveFailure::Unguarded: return "unguarded";
    case SolveFailure::Unbounded: return "unbounded";
    case SolveFailure::PSetEquality: return "pset-equality";
    case SolveFailure::Disagreement: return "disagreement";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Solvers

std::map<VarId, GlobalGraph> solve_type_equations(const std::vector<TypeEquation>& system) {
  std::map<VarId, const GlobalPattern*> eqs;
  for (const auto& e : system) {
    if (!eqs.emplace(e.var, &e.rhs).second)
      throw Error(ErrorKind::DuplicateDefinition,
                  "two equations for " + type_var_name(e.var));
  }
  auto defined = [&](VarId v) -> const GlobalPattern& {
    auto it = eqs.find(v);
    if (it == eqs.end()) throw Error(ErrorKind::InvalidTerm, type_var_name(v) + " is not defined");
    return *it->second;
  };
  // Follow variable links to an End or Comm equation.
  auto resolve = [&](VarId v) {
    std::set<VarId> seen;
    while (defined(v).kind == GlobalPattern::Kind::Var) {
      if (!seen.insert(v).second)
        throw Error(ErrorKind::UnguardedRecursion,
                    "variables " + type_var_name(v) + " and others only name each other");
      v = defined(v).var;
    }
    return v;
  };

  std::map<VarId, StateId> node_of;
  for (const auto& [v, rhs] : eqs)
    if (rhs->kind != GlobalPattern::Kind::Var) node_of.emplace(v, static_cast<StateId>(node_of.size()));
  std::vector<GlobalNode> nodes(node_of.size());
  for (const auto& [v, id] : node_of) {
    const auto& rhs = *eqs.at(v);
    if (rhs.kind == GlobalPattern::Kind::End) continue;
    auto& n = nodes[id];
    n.kind = GlobalKind::Comm;
    n.from = rhs.from;
    n.to = rhs.to;
    for (const auto& [label, target] : rhs.branches)
      n.branches.push_back({label, node_of.at(resolve(target))});
  }
  std::map<VarId, GlobalGraph> out;
  if (nodes.empty()) {
    if (!eqs.empty()) resolve(eqs.begin()->first);  // throws
    return out;
  }
  GlobalGraph all(std::move(nodes), 0);
  std::map<StateId, GlobalGraph> solved;
  for (const auto& [v, rhs] : eqs) {
    StateId n = node_of.at(resolve(v));
    auto it = solved.find(n);
    if (it == solved.end()) it = solved.emplace(n, minimize(all.at(n))).first;
    out.emplace(v, it->second);
  }
  return out;
}

namespace {

ParticipantSet eval(const PSetPattern& p, const std::map<VarId, ParticipantSet>& values) {
  ParticipantSet out = p.literal;
  for (VarId v : p.vars)
    if (auto it = values.find(v); it != values.end()) out.insert(it->second.begin(), it->second.end());
  return out;
}

}  // namespace

std::map<VarId, ParticipantSet> solve_pset_equations(
    const std::vector<PSetEquation>& system, const std::map<VarId, ParticipantSet>& lower_bounds) {
  std::map<VarId, ParticipantSet> values = lower_bounds;
  for (const auto& e : system) values[e.var];
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& e : system) {
      auto& mine = values[e.var];
      for (const auto& p : eval(e.rhs, values)) changed |= mine.insert(p).second;
    }
  }
  return values;
}

Agreement check_agreement(const Substitution& theta, const std::vector<PCondition>& conditions) {
  for (const auto& c : conditions) {
    auto g = theta.types.find(c.type_var);
    auto x = theta.psets.find(c.pset_var);
    if (g == theta.types.end() || x == theta.psets.end()) return {false, c};
    ParticipantSet lhs = plays(g->second);
    lhs.insert(x->second.begin(), x->second.end());
    lhs.erase(c.p);
    lhs.erase(c.q);
    if (lhs != c.target) return {false, c};
  }
  return {};
}

SolveAttempt solve(const EquationSystems& systems) {
  SolveAttempt out;
  Substitution theta;
  try {
    theta.types = solve_type_equations(systems.types);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnguardedRecursion) throw;
    out.failure = SolveFailure::Unguarded;
    out.detail = e.message();
    return out;
  }
  std::set<std::string> checked;
  for (const auto& [v, g] : theta.types) {
    if (!checked.insert(canonical_key(g)).second) continue;
    auto b = bounded(g);
    if (!b.bounded) {
      out.failure = SolveFailure::Unbounded;
      out.detail = type_var_name(v) + " = " + print_global(g, PrintStyle::Compact) +
                   " is not bounded: " + b.participant + " can be avoided forever";
      return out;
    }
  }

  std::map<VarId, ParticipantSet> lower;
  for (const auto& c : systems.conditions) {
    ParticipantSet pl = plays(theta.types.at(c.type_var));
    for (const auto& t : c.target)
      if (!pl.count(t)) lower[c.pset_var].insert(t);
  }
  theta.psets = solve_pset_equations(systems.psets, lower);
  for (const auto& e : systems.psets) {
    if (theta.psets.at(e.var) != eval(e.rhs, theta.psets)) {
      out.failure = SolveFailure::PSetEquality;
      out.detail = pset_var_name(e.var) + " = " + print_pset_pattern(e.rhs) +
                   " fails once " + pset_var_name(e.var) + " = " +
                   print_participants(theta.psets.at(e.var));
      return out;
    }
  }
  auto agree = check_agreement(theta, systems.conditions);
  if (!agree.holds) {
    out.failure = SolveFailure::Disagreement;
    out.detail = print_condition(*agree.failing);
    return out;
  }
  out.solution = std::move(theta);
  return out;
}

std::vector<Substitution> solutions(const EquationSystems& systems) {
  auto attempt = solve(systems);
  if (!attempt.solution) return {};
  return {std::move(*attempt.solution)};
}

// ---------------------------------------------------------------------------
// Goal resolution

namespace {

struct Tree;
using TreePtr = std::shared_ptr<const Tree>;

struct Tree {
  Rule rule = Rule::End;
  Session session;
  Participant p, q;         // Comm
  std::vector<Label> labels;
  ParticipantSet split;     // Weak
  std::size_t target = 0;   // Cycle: index into the goal sequence
  std::vector<TreePtr> premises;
  std::size_t weaks = 0;
};

struct BudgetOut {};

// (sender, receiver) pairs that can fire, in participant order.
std::vector<std::pair<Participant, Participant>> matching_pairs(const Session& m) {
  std::vector<std::pair<Participant, Participant>> out;
  const auto& store = m.store();
  for (const auto& b : m.bindings()) {
    const auto& out_node = store.node(b.state);
    if (out_node.kind != ProcessKind::Send) continue;
    auto q_state = m.state_of(out_node.peer);
    if (!q_state) continue;
    const auto& in_node = store.node(*q_state);
    if (in_node.kind != ProcessKind::Receive || in_node.peer != b.participant) continue;
    bool widening = std::all_of(out_node.branches.begin(), out_node.branches.end(),
                                [&](const Branch& br) { return in_node.find(br.label); });
    if (widening) out.emplace_back(b.participant, out_node.peer);
  }
  return out;
}

std::vector<ParticipantSet> nonempty_subsets(const ParticipantSet& pool) {
  std::vector<Participant> items(pool.begin(), pool.end());
  std::vector<ParticipantSet> out;
  const std::size_t n = items.size();
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + k, true);
    do {
      ParticipantSet s;
      for (std::size_t i = 0; i < n; ++i)
        if (pick[i]) s.insert(items[i]);
      out.push_back(std::move(s));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

class Resolver {
 public:
  Resolver(const InferOptions& options) : options_(options) {}

  std::size_t expansions() const { return expansions_; }

  // Every derivation of exactly n rule applications.
  const std::vector<TreePtr>& gen(const Session& m, const std::vector<Session>& goals,
                                  std::size_t n, bool weak_ok) {
    MemoKey key{m.bindings(), {}, n, weak_ok};
    for (const auto& g : goals) key.goals.push_back(g.bindings());
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    tick();

    std::vector<TreePtr> out;
    std::optional<std::size_t> seen;
    for (std::size_t i = 0; i < goals.size() && !seen; ++i)
      if (goals[i] == m) seen = i;

    if (m.empty()) {
      if (n == 1) out.push_back(leaf(Rule::End, m));
    } else if (seen && options_.eager_cycle) {
      if (n == 1) {
        auto t = leaf(Rule::Cycle, m);
        t->target = *seen;
        out.push_back(t);
      }
    } else {
      if (seen && n == 1) {
        auto t = leaf(Rule::Cycle, m);
        t->target = *seen;
        out.push_back(t);
      }
      if (n >= 2) {
        for (const auto& [p, q] : matching_pairs(m)) comm(m, goals, n, p, q, out);
        if (weak_ok) weak(m, goals, n, out);
      }
    }
    return memo_.emplace(std::move(key), std::move(out)).first->second;
  }

 private:
  struct MemoKey {
    std::vector<Binding> session;
    std::vector<std::vector<Binding>> goals;
    std::size_t n;
    bool weak_ok;
    friend auto operator<=>(const MemoKey&, const MemoKey&) = default;
  };

  void tick() {
    if (++expansions_ > options_.max_expansions) throw BudgetOut{};
  }

  static std::shared_ptr<Tree> leaf(Rule r, const Session& m) {
    auto t = std::make_shared<Tree>();
    t->rule = r;
    t->session = m;
    return t;
  }

  void comm(const Session& m, const std::vector<Session>& goals, std::size_t n,
            const Participant& p, const Participant& q, std::vector<TreePtr>& out) {
    const auto& store = m.store();
    const auto& send = store.node(*m.state_of(p));
    const auto& recv = store.node(*m.state_of(q));
    std::vector<Session> branches;
    std::vector<Label> labels;
    for (const auto& b : send.branches) {
      labels.push_back(b.label);
      branches.push_back(m.with(p, b.target).with(q, recv.find(b.label)->target));
    }
    const std::size_t k = branches.size();
    if (n - 1 < k) return;
    std::vector<Session> inner = goals;
    inner.push_back(m);

    std::vector<TreePtr> chosen(k);
    std::size_t weaks = 0;
    // Sizes are split over the branches; each branch list comes from the memo.
    std::function<void(std::size_t, std::size_t)> fill = [&](std::size_t i, std::size_t left) {
      if (i == k) {
        if (left != 0) return;
        tick();
        auto t = std::make_shared<Tree>();
        t->rule = Rule::Comm;
        t->session = m;
        t->p = p;
        t->q = q;
        t->labels = labels;
        t->premises = chosen;
        t->weaks = weaks;
        out.push_back(std::move(t));
        return;
      }
      const std::size_t rest = k - i - 1;
      for (std::size_t s = 1; s + rest <= left; ++s) {
        const auto& options = gen(branches[i], inner, s, true);
        for (const auto& sub : options) {
          chosen[i] = sub;
          weaks += sub->weaks;
          fill(i + 1, left - s);
          weaks -= sub->weaks;
        }
      }
    };
    fill(0, n - 1);
  }

  void weak(const Session& m, const std::vector<Session>& goals, std::size_t n,
            std::vector<TreePtr>& out) {
    ParticipantSet pool = participants(m);
    if (options_.ignored_within) {
      ParticipantSet keep;
      for (const auto& p : pool)
        if (options_.ignored_within->count(p)) keep.insert(p);
      pool = std::move(keep);
    }
    for (const auto& split : nonempty_subsets(pool)) {
      Session rest = m.without(split);
      // The premise is not Weak again and cannot close a cycle (goals only
      // lose participants), so it must be End or Comm.
      if (!rest.empty() && matching_pairs(rest).empty()) continue;
      for (const auto& sub : gen(rest, goals, n - 1, false)) {
        tick();
        auto t = std::make_shared<Tree>();
        t->rule = Rule::Weak;
        t->session = m;
        t->split = split;
        t->premises = {sub};
        t->weaks = sub->weaks + 1;
        out.push_back(std::move(t));
      }
    }
  }

  const InferOptions& options_;
  std::size_t expansions_ = 0;
  std::map<MemoKey, std::vector<TreePtr>> memo_;
};

std::size_t tree_size(const Tree& t) {
  std::size_t n = 1;
  for (const auto& p : t.premises) n += tree_size(*p);
  return n;
}

// Variables are numbered breadth-first, premises left to right.
InferenceOutcome build_outcome(const TreePtr& root) {
  InferenceOutcome o;
  o.size = tree_size(*root);
  o.weak_count = root->weaks;
  struct Item {
    TreePtr tree;
    VarId var;
    std::shared_ptr<const std::vector<VarId>> comm_vars;  // aligned with goal sequence
  };
  std::deque<Item> queue{{root, 0, std::make_shared<std::vector<VarId>>()}};
  VarId next = 1;
  o.goals.push_back(root->session);
  o.rules.push_back(root->rule);
  auto fresh = [&](const Tree& t) {
    o.goals.push_back(t.session);
    o.rules.push_back(t.rule);
    return next++;
  };

  auto& sys = o.systems;
  while (!queue.empty()) {
    Item it = std::move(queue.front());
    queue.pop_front();
    const Tree& t = *it.tree;
    TypeEquation te{it.var, {}};
    PSetEquation pe{it.var, {}};
    switch (t.rule) {
      case Rule::End:
        te.rhs.kind = GlobalPattern::Kind::End;
        break;
      case Rule::Cycle:
        te.rhs.kind = GlobalPattern::Kind::Var;
        te.rhs.var = (*it.comm_vars)[t.target];
        pe.rhs.vars = {te.rhs.var};
        break;
      case Rule::Weak: {
        VarId y = fresh(*t.premises[0]);
        te.rhs.kind = GlobalPattern::Kind::Var;
        te.rhs.var = y;
        pe.rhs.vars = {y};
        pe.rhs.literal = t.split;
        queue.push_back({t.premises[0], y, it.comm_vars});
        break;
      }
      case Rule::Comm: {
        te.rhs.kind = GlobalPattern::Kind::Comm;
        te.rhs.from = t.p;
        te.rhs.to = t.q;
        auto inner = std::make_shared<std::vector<VarId>>(*it.comm_vars);
        inner->push_back(it.var);
        ParticipantSet residual = participants(t.session);
        residual.erase(t.p);
        residual.erase(t.q);
        for (std::size_t i = 0; i < t.premises.size(); ++i) {
          VarId y = fresh(*t.premises[i]);
          te.rhs.branches.emplace_back(t.labels[i], y);
          pe.rhs.vars.push_back(y);
          sys.conditions.push_back({y, y, t.p, t.q, residual});
          queue.push_back({t.premises[i], y, inner});
        }
        break;
      }
    }
    sys.types.push_back(std::move(te));
    sys.psets.push_back(std::move(pe));
  }
  std::sort(sys.types.begin(), sys.types.end(),
            [](const auto& a, const auto& b) { return a.var < b.var; });
  std::sort(sys.psets.begin(), sys.psets.end(),
            [](const auto& a, const auto& b) { return a.var < b.var; });
  return o;
}

}  // namespace

std::size_t default_max_size(const Session& s) { return 4 * explore(s).states.size(); }

InferResult infer(const Session& s, const InferOptions& options) {
  InferResult result;
  result.max_size = options.max_size ? options.max_size : default_max_size(s);
  Session m = normalize_session(s);
  Resolver resolver(options);
  std::set<std::pair<std::string, ParticipantSet>> seen;
  try {
    for (std::size_t n = 1; n <= result.max_size; ++n) {
      for (const auto& tree : resolver.gen(m, {}, n, true)) {
        ++result.outcomes;
        InferenceOutcome outcome = build_outcome(tree);
        SolveAttempt attempt = solve(outcome.systems);
        if (!attempt.solution) {
          ++result.failures[attempt.failure];
          continue;
        }
        InferredSolution sol;
        sol.global = attempt.solution->types.at(0);
        sol.ignored = attempt.solution->psets.at(0);
        if (!seen.emplace(canonical_key(sol.global), sol.ignored).second && options.deduplicate)
          continue;
        sol.outcome = std::move(outcome);
        sol.theta = std::move(*attempt.solution);
        result.solutions.push_back(std::move(sol));
        if (result.solutions.size() >= options.max_outcomes) return result;
      }
      if (options.first_level_only && !result.solutions.empty()) return result;
    }
  } catch (const BudgetOut&) {
    result.budget_exhausted = true;
  }
  return result;
}

std::optional<InferredSolution> infer_minimal(const Session& s, const InferOptions& options) {
  Session m = normalize_session(s);
  ParticipantSet everyone = participants(m);
  std::vector<ParticipantSet> candidates{ParticipantSet{}};
  for (auto& c : nonempty_subsets(everyone)) candidates.push_back(std::move(c));

  std::optional<InferredSolution> best;
  std::size_t best_size = 0;
  for (const auto& p : candidates) {
    if (best && p.size() > best_size) break;
    InferOptions narrowed = options;
    narrowed.ignored_within = p;
    narrowed.first_level_only = true;
    for (auto& sol : infer(m, narrowed).solutions) {
      if (sol.ignored != p) continue;
      if (!typecheck(sol.global, m, sol.ignored).accepted()) continue;
      // candidates are already in (size, lexicographic) order
      if (!best || sol.outcome.weak_count < best->outcome.weak_count) {
        best = std::move(sol);
        best_size = p.size();
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Printing

std::string print_pattern(const GlobalPattern& g) {
  switch (g.kind) {
    case GlobalPattern::Kind::End: return "End";
    case GlobalPattern::Kind::Var: return type_var_name(g.var);
    case GlobalPattern::Kind::Comm: break;
  }
  std::string out = g.from + "->" + g.to + ":";
  if (g.branches.size() == 1)
    return out + g.branches[0].first + " . " + type_var_name(g.branches[0].second);
  out += "{";
  for (std::size_t i = 0; i < g.branches.size(); ++i) {
    if (i) out += ", ";
    out += g.branches[i].first + " . " + type_var_name(g.branches[i].second);
  }
  return out + "}";
}

std::string print_pset_pattern(const PSetPattern& p) {
  std::string out;
  for (VarId v : p.vars) {
    if (!out.empty()) out += " ∪ ";
    out += pset_var_name(v);
  }
  if (!p.literal.empty()) {
    if (!out.empty()) out += " ∪ ";
    out += print_participants(p.literal);
  }
  return out.empty() ? "∅" : out;
}

std::string print_condition(const PCondition& c) {
  return "cond (plays " + type_var_name(c.type_var) + " ∪ " + pset_var_name(c.pset_var) +
         ") \\ {" + c.p + ", " + c.q + "} = " + print_participants(c.target);
}

std::string print_systems(const EquationSystems& systems) {
  std::string out;
  for (const auto& e : systems.types)
    out += type_var_name(e.var) + " = " + print_pattern(e.rhs) + "\n";
  for (const auto& e : systems.psets)
    out += pset_var_name(e.var) + " = " + print_pset_pattern(e.rhs) + "\n";
  for (const auto& c : systems.conditions) out += print_condition(c) + "\n";
  return out;
}

}  // namespace mpst
