#include "mpst/typing.hpp"

#include <algorithm>
#include <functional>
#include <cstdint>
#include <set>
#include <unordered_map>

#include "mpst/analysis.hpp"
#include "mpst/frontend.hpp"

namespace mpst {

std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::End: return "End";
    case Rule::Comm: return "Comm";
    case Rule::Cycle: return "Cycle";
    case Rule::Weak: return "Weak";
  }
  return "?";
}

std::string_view to_string(RejectionKind k) {
  switch (k) {
    case RejectionKind::RootMismatch: return "RootMismatch";
    case RejectionKind::LabelSetMismatch: return "LabelSetMismatch";
    case RejectionKind::ParticipantEquationFailed: return "ParticipantEquationFailed";
    case RejectionKind::Unbounded: return "Unbounded";
    case RejectionKind::IgnoredMismatch: return "IgnoredMismatch";
  }
  return "?";
}

RuleCounts count_rules(const DerivationNode& d) {
  RuleCounts c;
  std::function<void(const DerivationNode&)> go = [&](const DerivationNode& n) {
    switch (n.rule) {
      case Rule::End: ++c.end; break;
      case Rule::Comm: ++c.comm; break;
      case Rule::Cycle: ++c.cycle; break;
      case Rule::Weak: ++c.weak; break;
    }
    for (const auto& p : n.premises) go(*p);
  };
  go(d);
  return c;
}

bool check_participant_equation(const GlobalGraph& gi, const ParticipantSet& pi,
                                const Participant& p, const Participant& q,
                                const Session& residual) {
  ParticipantSet lhs = plays(gi);
  lhs.insert(pi.begin(), pi.end());
  lhs.erase(p);
  lhs.erase(q);
  return lhs == participants(residual);
}

namespace {

std::string set_text(const ParticipantSet& s) { return print_participants(s); }

// All subsets of `pool`, smallest first, then lexicographically.
std::vector<ParticipantSet> subsets_by_size(const ParticipantSet& pool) {
  std::vector<Participant> items(pool.begin(), pool.end());
  std::vector<ParticipantSet> out;
  const std::size_t n = items.size();
  for (std::size_t k = 0; k <= n; ++k) {
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

bool subset_of(const ParticipantSet& a, const ParticipantSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

struct Key {
  StateId global;
  std::vector<Binding> bindings;
  ParticipantSet ignored;

  friend auto operator<=>(const Key&, const Key&) = default;
};

// Sets of judgment ids.
class Bits {
 public:
  bool test(std::size_t i) const { return i / 64 < w_.size() && (w_[i / 64] >> (i % 64)) & 1; }
  void set(std::size_t i) {
    if (i / 64 >= w_.size()) w_.resize(i / 64 + 1, 0);
    w_[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  void reset(std::size_t i) {
    if (i / 64 < w_.size()) w_[i / 64] &= ~(std::uint64_t{1} << (i % 64));
  }
  void merge(const Bits& o) {
    if (o.w_.size() > w_.size()) w_.resize(o.w_.size(), 0);
    for (std::size_t i = 0; i < o.w_.size(); ++i) w_[i] |= o.w_[i];
  }
  bool subset_of(const Bits& o) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i] & ~(i < o.w_.size() ? o.w_[i] : 0)) return false;
    return true;
  }

 private:
  std::vector<std::uint64_t> w_;
};

// A judgment together with every rule instance that could conclude it.
struct Node {
  StateId global = 0;
  Session session;
  ParticipantSet ignored;
  bool axiom = false;
  std::vector<Rejection> local;  // violated side conditions, Comm/End before Weak
  bool comm = false;             // Comm side conditions hold
  std::vector<Label> labels;
  std::vector<std::vector<std::size_t>> candidates;  // per branch, premise ids
  std::vector<std::pair<ParticipantSet, std::size_t>> splits;  // Weak
};

// Judgments reachable from the root through rule premises form a finite
// space. Derivability is the greatest fixpoint over it: every step of Weak
// drops participants, so no path applies Weak forever. A derivation is then
// read off the surviving judgments, closing cycles at ancestors.
class Checker {
 public:
  Checker(const GlobalGraph& g, const TypecheckOptions& options)
      : root_(minimize(g)),
        plays_(plays_table(root_)),
        bounded_(bounded_table(root_)),
        options_(options) {}

  const GlobalGraph& root() const { return root_; }
  std::size_t steps() const { return steps_; }

  TypecheckResult run(const Session& m, const ParticipantSet& ignored) {
    std::size_t start = intern(root_.root(), m, ignored);
    for (std::size_t i = 0; i < nodes_.size(); ++i) expand(i);
    fixpoint();
    TypecheckResult result;
    if (live_[start]) {
      result.derivation = build(start).first;
    } else {
      std::vector<char> seen(nodes_.size(), 0);
      result.rejection = diagnose(start, 0, seen);
    }
    result.steps = steps_;
    return result;
  }

 private:
  void tick() {
    if (++steps_ > options_.max_steps)
      throw Error(ErrorKind::BudgetExhausted,
                  "typecheck exceeded " + std::to_string(options_.max_steps) + " steps");
  }

  std::size_t intern(StateId g, const Session& m, const ParticipantSet& ignored) {
    auto [it, fresh] = ids_.emplace(Key{g, m.bindings(), ignored}, nodes_.size());
    if (fresh) {
      tick();
      Node n;
      n.global = g;
      n.session = m;
      n.ignored = ignored;
      nodes_.push_back(std::move(n));
    }
    return it->second;
  }

  Judgment judgment(std::size_t id) const {
    const Node& n = nodes_[id];
    return Judgment{root_.at(n.global), n.session, n.ignored};
  }

  Rejection reject(std::size_t id, RejectionKind kind, std::string message) const {
    return Rejection{kind, std::move(message), judgment(id), 0};
  }

  void expand(std::size_t id) {
    const StateId g = nodes_[id].global;
    const Session m = nodes_[id].session;
    const ParticipantSet ignored = nodes_[id].ignored;
    if (root_.node(g).kind == GlobalKind::End) {
      if (m.bindings().empty()) {
        if (ignored.empty())
          nodes_[id].axiom = true;
        else
          nodes_[id].local.push_back(
              reject(id, RejectionKind::IgnoredMismatch,
                     "null session typed by end needs an empty ignored set, got " +
                         set_text(ignored)));
      }
    } else {
      expand_comm(id);
    }
    expand_weak(id);
  }

  void expand_comm(std::size_t id) {
    const StateId g = nodes_[id].global;
    const Session m = nodes_[id].session;
    const ParticipantSet ignored = nodes_[id].ignored;
    const GlobalNode& node = root_.node(g);
    const Participant& p = node.from;
    const Participant& q = node.to;
    auto fail = [&](RejectionKind k, std::string msg) {
      nodes_[id].local.push_back(reject(id, k, std::move(msg)));
    };

    auto ps = m.state_of(p);
    auto qs = m.state_of(q);
    const ProcessStore& store = m.store();
    if (!ps || !qs)
      return fail(RejectionKind::RootMismatch,
                  "global type starts with " + p + "->" + q + " but " + (!ps ? p : q) +
                      " is not active");
    const ProcessNode& pn = store.node(*ps);
    const ProcessNode& qn = store.node(*qs);
    if (pn.kind != ProcessKind::Send || pn.peer != q)
      return fail(RejectionKind::RootMismatch, p + " does not start by sending to " + q);
    if (qn.kind != ProcessKind::Receive || qn.peer != p)
      return fail(RejectionKind::RootMismatch, q + " does not start by receiving from " + p);

    std::vector<Label> labels_g, labels_p;
    for (const auto& b : node.branches) labels_g.push_back(b.label);
    for (const auto& b : pn.branches) labels_p.push_back(b.label);
    if (labels_g != labels_p)
      return fail(RejectionKind::LabelSetMismatch,
                  p + " sends a different label set than the global type offers");
    for (const auto& l : labels_g)
      if (!qn.find(l))
        return fail(RejectionKind::LabelSetMismatch, q + " cannot receive label " + l);

    if (!bounded_[g]) return fail(RejectionKind::Unbounded, "global type is not bounded");

    ParticipantSet residual_plays = participants(m.without({p, q}));
    std::vector<std::vector<std::size_t>> candidates;
    for (const auto& b : node.branches) {
      Session next = m.with(p, pn.find(b.label)->target).with(q, qn.find(b.label)->target);
      ParticipantSet pool;
      for (const auto& x : participants(next))
        if (ignored.count(x)) pool.insert(x);
      std::vector<std::size_t> ids;
      for (auto& cand : subsets_by_size(pool)) {
        ParticipantSet lhs = plays_[b.target];
        lhs.insert(cand.begin(), cand.end());
        lhs.erase(p);
        lhs.erase(q);
        if (lhs == residual_plays) ids.push_back(intern(b.target, next, cand));
      }
      if (ids.empty())
        return fail(RejectionKind::ParticipantEquationFailed,
                    "branch " + b.label + ": no ignored set P_i within " + set_text(ignored) +
                        " satisfies (plays(G_i) ∪ P_i) \\ {" + p + ", " + q + "} = " +
                        set_text(residual_plays));
      candidates.push_back(std::move(ids));
    }
    nodes_[id].comm = true;
    nodes_[id].labels = std::move(labels_g);
    nodes_[id].candidates = std::move(candidates);
  }

  void expand_weak(std::size_t id) {
    const StateId g = nodes_[id].global;
    const Session m = nodes_[id].session;
    const ParticipantSet ignored = nodes_[id].ignored;
    // Split-off participants must be ignored and absent from the global type.
    ParticipantSet pool, extra;
    for (const auto& x : participants(m)) {
      if (plays_[g].count(x)) continue;
      extra.insert(x);
      if (ignored.count(x)) pool.insert(x);
    }
    std::vector<std::pair<ParticipantSet, std::size_t>> splits;
    for (const auto& split : subsets_by_size(pool)) {
      if (split.empty()) continue;
      ParticipantSet rest;
      std::set_difference(ignored.begin(), ignored.end(), split.begin(), split.end(),
                          std::inserter(rest, rest.end()));
      splits.emplace_back(split, intern(g, m.without(split), rest));
    }
    if (splits.empty())
      nodes_[id].local.push_back(
          reject(id, RejectionKind::IgnoredMismatch,
                 "no participant outside the global type can be split off; participants "
                 "outside it: " + set_text(extra) + ", ignored: " + set_text(ignored)));
    nodes_[id].splits = std::move(splits);
  }

  // Some choice of one live candidate per branch has union `ignored`.
  bool comm_possible(const Node& n) const {
    std::set<ParticipantSet> unions{{}};
    for (const auto& branch : n.candidates) {
      std::set<ParticipantSet> next;
      for (const auto& u : unions)
        for (std::size_t c : branch) {
          if (!live_[c]) continue;
          ParticipantSet v = u;
          v.insert(nodes_[c].ignored.begin(), nodes_[c].ignored.end());
          next.insert(std::move(v));
        }
      unions = std::move(next);
      if (unions.empty()) return false;
    }
    return unions.count(n.ignored) > 0;
  }

  bool weak_possible(const Node& n) const {
    for (const auto& [split, premise] : n.splits)
      if (direct_[premise]) return true;
    return false;
  }

  // direct_: derivable by End or Comm; live_: derivable at all. A Weak
  // premise is never Weak itself since two splits compose into one.
  void fixpoint() {
    const std::size_t n = nodes_.size();
    direct_.assign(n, 0);
    live_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) direct_[i] = nodes_[i].axiom || nodes_[i].comm;
    for (std::size_t i = 0; i < n; ++i) live_[i] = direct_[i] || !nodes_[i].splits.empty();
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (direct_[i] && !nodes_[i].axiom && !comm_possible(nodes_[i])) {
          direct_[i] = 0;
          changed = true;
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (live_[i] && !direct_[i] && !weak_possible(nodes_[i])) {
          live_[i] = 0;
          changed = true;
        }
      }
    }
  }

  // Cycle eagerly; otherwise End, then Comm, then Weak.
  std::pair<Derivation, Bits> build(std::size_t id) {
    const Node& n = nodes_[id];
    auto d = std::make_shared<DerivationNode>();
    d->judgment = judgment(id);
    Bits deps;
    if (path_.test(id)) {
      d->rule = Rule::Cycle;
      deps.set(id);
      return {d, deps};
    }
    if (auto it = built_.find(id); it != built_.end())
      for (const auto& [used, done] : it->second)
        if (used.subset_of(path_)) return {done, used};

    path_.set(id);
    if (n.axiom) {
      d->rule = Rule::End;
    } else if (direct_[id]) {
      d->rule = Rule::Comm;
      std::vector<std::size_t> chosen;
      std::function<bool(std::size_t, const ParticipantSet&)> pick =
          [&](std::size_t i, const ParticipantSet& acc) -> bool {
        if (i == n.candidates.size()) return acc == n.ignored;
        for (std::size_t c : n.candidates[i]) {
          if (!live_[c]) continue;
          ParticipantSet next = acc;
          next.insert(nodes_[c].ignored.begin(), nodes_[c].ignored.end());
          if (!subset_of(next, n.ignored)) continue;
          chosen.push_back(c);
          if (pick(i + 1, next)) return true;
          chosen.pop_back();
        }
        return false;
      };
      pick(0, {});
      for (std::size_t c : chosen) {
        auto [sub, used] = build(c);
        d->premises.push_back(sub);
        deps.merge(used);
      }
    } else {
      d->rule = Rule::Weak;
      for (const auto& [split, premise] : n.splits) {
        if (!direct_[premise]) continue;
        auto [sub, used] = build(premise);
        d->premises.push_back(sub);
        d->split = split;
        deps.merge(used);
        break;
      }
    }
    path_.reset(id);
    deps.reset(id);
    built_[id].emplace_back(deps, d);
    return {d, deps};
  }

  static void keep_deepest(std::optional<Rejection>& best, std::optional<Rejection> r) {
    if (r && (!best || r->depth > best->depth)) best = std::move(r);
  }

  // Deepest violated side condition below a judgment that is not derivable.
  std::optional<Rejection> diagnose(std::size_t id, std::size_t depth, std::vector<char>& seen) {
    if (seen[id]) return std::nullopt;
    seen[id] = 1;
    const Node& n = nodes_[id];
    std::optional<Rejection> best;
    auto here = [&](RejectionKind k, std::string msg) {
      Rejection r = reject(id, k, std::move(msg));
      r.depth = depth;
      return r;
    };
    for (const auto& r : n.local) {
      Rejection copy = r;
      copy.depth = depth;
      keep_deepest(best, copy);
    }
    if (n.comm && !direct_[id]) {
      std::optional<Rejection> below;
      for (const auto& branch : n.candidates)
        for (std::size_t c : branch)
          if (!live_[c]) keep_deepest(below, diagnose(c, depth + 1, seen));
      if (!below)
        below = here(RejectionKind::IgnoredMismatch,
                     "no derivable choice of P_i has union " + set_text(n.ignored));
      keep_deepest(best, below);
    }
    if (!n.splits.empty()) {
      std::optional<Rejection> below;
      for (const auto& [split, premise] : n.splits)
        if (!direct_[premise]) keep_deepest(below, diagnose(premise, depth + 1, seen));
      if (!below) {
        ParticipantSet pool;
        for (const auto& [split, premise] : n.splits) pool.insert(split.begin(), split.end());
        below = here(RejectionKind::IgnoredMismatch,
                     "no split of " + set_text(pool) + " is derivable");
      }
      keep_deepest(best, below);
    }
    return best;
  }

  GlobalGraph root_;
  std::vector<ParticipantSet> plays_;
  std::vector<char> bounded_;
  TypecheckOptions options_;
  std::size_t steps_ = 0;
  std::map<Key, std::size_t> ids_;
  std::vector<Node> nodes_;
  std::vector<char> direct_, live_;
  Bits path_;
  std::unordered_map<std::size_t, std::vector<std::pair<Bits, Derivation>>> built_;
};

}  // namespace

TypecheckResult typecheck(const GlobalGraph& g, const Session& m, const ParticipantSet& ignored,
                          const TypecheckOptions& options) {
  Checker checker(g, options);
  return checker.run(normalize_session(m), ignored);
}

std::map<StateId, std::string> global_node_names(const GlobalGraph& g, const std::string& base) {
  std::map<StateId, std::string> names;
  int k = 0;
  for (StateId n : g.reachable()) {
    if (g.node(n).kind == GlobalKind::End) continue;
    names[n] = n == g.root() ? base : base + std::to_string(++k);
  }
  return names;
}

std::string print_derivation(const DerivationNode& d, const std::string& base) {
  auto names = global_node_names(d.judgment.global, base);
  std::string out;
  std::function<void(const DerivationNode&, int)> go = [&](const DerivationNode& n, int indent) {
    const auto& j = n.judgment;
    std::string gname = j.global.is_end() ? "end" : names.at(j.global.root());
    out += std::string(indent * 2, ' ') + "[" + std::string(to_string(n.rule)) + "] " + gname +
           " ⊢" + print_participants(j.ignored) + " " + print_session(j.session);
    if (n.rule == Rule::Weak) out += "   split off " + print_participants(n.split);
    out += "\n";
    for (const auto& p : n.premises) go(*p, indent + 1);
  };
  go(d, 0);
  return out;
}

}  // namespace mpst
