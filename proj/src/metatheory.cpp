#include "mpst/metatheory.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <tuple>

#include "mpst/analysis.hpp"
#include "mpst/random.hpp"
#include "mpst/semantics.hpp"

namespace mpst {

namespace {

// Subsets of s ordered by size, then lexicographically.
std::vector<ParticipantSet> subsets(const ParticipantSet& s) {
  std::vector<Participant> v(s.begin(), s.end());
  std::vector<ParticipantSet> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << v.size()); ++mask) {
    ParticipantSet sub;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (mask & (std::size_t{1} << i)) sub.insert(v[i]);
    out.push_back(std::move(sub));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

using ConfigKey = std::tuple<std::string, std::vector<Binding>, ParticipantSet>;

struct Config {
  GlobalGraph g;
  Session m;
  ParticipantSet ignored;
};

class Suite {
 public:
  Suite(const MetaOptions& options) : options_(options), rng_(options.seed) {}

  MetaReport run(const GlobalGraph& g0, const Session& m0, const ParticipantSet& p0) {
    Session m = normalize_session(m0);
    GlobalGraph g = minimize(g0);
    if (!typecheck(g, m, p0).accepted()) {
      fail("precondition", "root triple is not accepted");
      return std::move(report_);
    }
    ++report_.counts.lock_freedom;
    auto lf = excluded_lock_free(m, p0);
    if (!lf.holds)
      fail("lock-freedom", "participant " + lf.participant + " is locked in " + lf.state_text);

    push({g, m, p0});
    while (!queue_.empty() && report_.counts.triples < options_.max_triples) {
      Config c = std::move(queue_.front());
      queue_.pop_front();
      ++report_.counts.triples;
      visit(c);
    }
    report_.truncated = !queue_.empty();
    return std::move(report_);
  }

 private:
  void fail(std::string property, std::string detail) {
    report_.violations.push_back({std::move(property), std::move(detail)});
  }

  void push(Config c) {
    ConfigKey key{canonical_key(c.g), c.m.bindings(), c.ignored};
    if (seen_.insert(std::move(key)).second) queue_.push_back(std::move(c));
  }

  std::string where(const Config& c) const {
    return "at " + print_session(c.m) + " with ignored " + print_participants(c.ignored);
  }

  void visit(const Config& c) {
    const ParticipantSet g_plays = plays(c.g);
    const ParticipantSet m_plays = participants(c.m);

    ++report_.counts.participants_lemma;
    ParticipantSet joined = g_plays;
    joined.insert(c.ignored.begin(), c.ignored.end());
    if (joined != m_plays)
      fail("participants-lemma", "plays G ∪ P = " + print_participants(joined) + " but plays M = " +
                                     print_participants(m_plays) + " " + where(c));

    for (const auto& p : g_plays) {
      ++report_.counts.top_partner;
      auto tp = top_partner(c.m, p);
      if (!tp || !g_plays.count(*tp))
        fail("top-partner", "top partner of " + p + " is " + (tp ? *tp : std::string("none")) +
                                ", outside plays G " + where(c));
    }

    for (const auto& p : m_plays) {
      if (g_plays.count(p) || !c.ignored.count(p)) continue;
      replacement(c, p, m_plays);
    }

    // Subject reduction over every session step.
    for (const auto& t : session_transitions(c.m)) {
      ++report_.counts.subject_reduction;
      const auto& l = t.label;
      const bool ps = g_plays.count(l.sender) > 0, qs = g_plays.count(l.receiver) > 0;
      if (ps != qs) {
        fail("subject-reduction", "step " + to_string(l) + " mixes typed and ignored participants " +
                                      where(c));
        continue;
      }
      GlobalGraph next = c.g;
      if (ps) {
        auto r = global_reduce(c.g, l);
        if (!r) {
          fail("subject-reduction", "global type cannot follow " + to_string(l) + " " + where(c));
          continue;
        }
        next = *r;
      }
      auto p2 = typable_within(next, t.target, c.ignored);
      if (!p2) {
        fail("subject-reduction", "no ignored subset types the reduct of " + to_string(l) + " " +
                                      where(c));
        continue;
      }
      push({next, t.target, *p2});
    }

    // Session fidelity over every global step.
    for (const auto& gt : global_transitions(c.g)) {
      ++report_.counts.session_fidelity;
      auto m2 = reduce(c.m, gt.label);
      if (!m2) {
        fail("session-fidelity", "session cannot take " + to_string(gt.label) + " " + where(c));
        continue;
      }
      auto p2 = typable_within(gt.target, *m2, c.ignored);
      if (!p2) {
        fail("session-fidelity", "no ignored subset types the reduct of " +
                                     to_string(gt.label) + " " + where(c));
        continue;
      }
      push({gt.target, *m2, *p2});
    }
  }

  void replacement(const Config& c, const Participant& p, const ParticipantSet& m_plays) {
    std::vector<Participant> peers;
    for (const auto& x : m_plays)
      if (x != p) peers.push_back(x);
    if (peers.empty()) return;
    ++report_.counts.replacement;
    ProcessGraph fresh = random_process(rng_, peers);
    Session m2 = rebind(c.m, p, fresh);
    if (!typable_within(c.g, m2, c.ignored))
      fail("replacement", "replacing " + p + " by a random process breaks typing " + where(c));
  }

  MetaOptions options_;
  Rng rng_;
  MetaReport report_;
  std::deque<Config> queue_;
  std::set<ConfigKey> seen_;
};

}  // namespace

std::optional<ParticipantSet> typable_within(const GlobalGraph& g, const Session& m,
                                             const ParticipantSet& ignored) {
  const ParticipantSet present = participants(m);
  for (const auto& sub : subsets(ignored)) {
    if (!std::includes(present.begin(), present.end(), sub.begin(), sub.end())) continue;
    if (typecheck(g, m, sub).accepted()) return sub;
  }
  return std::nullopt;
}

MetaReport check_metatheory(const GlobalGraph& g, const Session& m, const ParticipantSet& ignored,
                            const MetaOptions& options) {
  return Suite(options).run(g, m, ignored);
}

bool FileMetaReport::ok() const {
  return std::all_of(triples.begin(), triples.end(),
                     [](const FileTriple& t) { return t.report.ok(); });
}

FileMetaReport check_file(const SpecFile& spec, const MetaOptions& options) {
  FileMetaReport out;
  std::map<std::string, ParticipantSet> sets = spec.ignored;
  bool has_empty = std::any_of(sets.begin(), sets.end(), [](const auto& kv) { return kv.second.empty(); });
  if (!has_empty) sets.emplace("{}", ParticipantSet{});

  for (const auto& [gname, g] : spec.globals)
    for (const auto& [sname, m] : spec.sessions)
      for (const auto& [iname, ignored] : sets) {
        FileTriple t{gname, sname, iname, false, std::nullopt, {}};
        auto res = typecheck(g, m, ignored);
        if (res.accepted()) {
          t.accepted = true;
          t.report = check_metatheory(g, m, ignored, options);
        } else {
          t.rejection = res.rejection;
        }
        out.triples.push_back(std::move(t));
      }
  return out;
}

}  // namespace mpst
