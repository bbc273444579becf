#include "mpst/analysis.hpp"

#include <algorithm>
#include <functional>

#include "mpst/frontend.hpp"

namespace mpst {

std::vector<ParticipantSet> plays_table(const GlobalGraph& g) {
  const auto& nodes = g.nodes();
  std::vector<ParticipantSet> table(nodes.size());
  for (StateId n = 0; n < nodes.size(); ++n)
    if (nodes[n].kind == GlobalKind::Comm) table[n] = {nodes[n].from, nodes[n].to};
  bool changed = true;
  while (changed) {
    changed = false;
    for (StateId n = 0; n < nodes.size(); ++n)
      for (const auto& b : nodes[n].branches)
        for (const auto& p : table[b.target])
          changed |= table[n].insert(p).second;
  }
  return table;
}

ParticipantSet plays(const GlobalGraph& g) {
  ParticipantSet out;
  for (StateId n : g.reachable()) {
    const auto& node = g.node(n);
    if (node.kind == GlobalKind::Comm) out.insert({node.from, node.to});
  }
  return out;
}

Depth depth(const GlobalGraph& g, const Participant& p) {
  if (!plays(g).count(p)) return Depth{0};
  // Longest p-free prefix over the p-avoiding subgraph; End or a cycle there
  // means some path never meets p.
  std::vector<int> color(g.size(), 0);
  std::vector<std::size_t> memo(g.size(), 0);
  bool infinite = false;
  std::function<std::size_t(StateId)> go = [&](StateId n) -> std::size_t {
    const auto& node = g.node(n);
    if (node.kind == GlobalKind::End) {
      infinite = true;
      return 0;
    }
    if (node.from == p || node.to == p) return 1;
    if (color[n] == 2) return memo[n];
    if (color[n] == 1) {
      infinite = true;
      return 0;
    }
    color[n] = 1;
    std::size_t best = 0;
    for (const auto& b : node.branches) {
      best = std::max(best, go(b.target));
      if (infinite) return 0;
    }
    color[n] = 2;
    return memo[n] = best + 1;
  };
  std::size_t d = go(g.root());
  if (infinite) return Depth::infinite();
  return Depth{d};
}

namespace {

// (participant with infinite depth at n) or empty when n is fine locally.
std::optional<Participant> locally_unbounded(const GlobalGraph& g, StateId n,
                                             const ParticipantSet& players) {
  GlobalGraph view = g.at(n);
  for (const auto& p : players)
    if (!depth(view, p).finite()) return p;
  return std::nullopt;
}

}  // namespace

Boundedness bounded(const GlobalGraph& g) {
  auto table = plays_table(g);
  for (StateId n : g.reachable()) {
    if (auto p = locally_unbounded(g, n, table[n])) return {false, n, *p};
  }
  return {};
}

std::vector<char> bounded_table(const GlobalGraph& g) {
  auto table = plays_table(g);
  const std::size_t n = g.size();
  std::vector<char> ok(n, 1);
  for (StateId i = 0; i < n; ++i) ok[i] = !locally_unbounded(g, i, table[i]).has_value();
  // bounded(n) = every node reachable from n is locally fine.
  std::vector<char> result = ok;
  bool changed = true;
  while (changed) {
    changed = false;
    for (StateId i = 0; i < n; ++i) {
      if (!result[i]) continue;
      for (const auto& b : g.node(i).branches)
        if (!result[b.target]) {
          result[i] = 0;
          changed = true;
          break;
        }
    }
  }
  return result;
}

std::optional<Participant> top_partner(const Session& s, const Participant& p) {
  auto state = s.state_of(p);
  if (!state || *state == ProcessStore::kEnd) return std::nullopt;
  return s.store().node(*state).peer;
}

// ---------------------------------------------------------------------------
// Liveness

namespace {

std::vector<std::vector<std::size_t>> predecessors(const StateGraph& g) {
  std::vector<std::vector<std::size_t>> in(g.states.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) in[g.edges[e].to].push_back(e);
  return in;
}

// Backward closure of the sources of p-involving edges.
std::vector<char> progress_for(const StateGraph& g,
                               const std::vector<std::vector<std::size_t>>& in,
                               const Participant& p) {
  std::vector<char> can(g.states.size(), 0);
  std::vector<std::size_t> stack;
  for (const auto& e : g.edges)
    if (involves(e.label, p) && !can[e.from]) {
      can[e.from] = 1;
      stack.push_back(e.from);
    }
  while (!stack.empty()) {
    std::size_t s = stack.back();
    stack.pop_back();
    for (std::size_t e : in[s]) {
      std::size_t from = g.edges[e].from;
      if (!can[from]) {
        can[from] = 1;
        stack.push_back(from);
      }
    }
  }
  return can;
}

std::vector<Participant> all_participants(const StateGraph& g) {
  ParticipantSet ps;
  for (const auto& s : g.states)
    for (const auto& b : s.bindings()) ps.insert(b.participant);
  return {ps.begin(), ps.end()};
}

// States from which a path avoiding p can go on forever.
std::vector<char> can_avoid_forever(const StateGraph& g, const Participant& p) {
  const std::size_t n = g.states.size();
  std::vector<std::size_t> live_out(n, 0);
  std::vector<std::vector<std::size_t>> in(n);
  for (const auto& e : g.edges)
    if (!involves(e.label, p)) {
      ++live_out[e.from];
      in[e.to].push_back(e.from);
    }
  std::vector<char> alive(n, 1);
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s)
    if (live_out[s] == 0) {
      alive[s] = 0;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    std::size_t s = stack.back();
    stack.pop_back();
    for (std::size_t from : in[s])
      if (alive[from] && --live_out[from] == 0) {
        alive[from] = 0;
        stack.push_back(from);
      }
  }
  return alive;
}

LivenessVerdict failing(std::string property, const ParticipantSet& ignored,
                        const StateGraph& g, std::size_t state, Participant p) {
  LivenessVerdict v;
  v.property = std::move(property);
  v.ignored = ignored;
  v.holds = false;
  v.state = state;
  v.state_text = print_session(g.states[state]);
  v.participant = std::move(p);
  return v;
}

}  // namespace

std::vector<std::vector<char>> progress_table(const StateGraph& g,
                                              const std::vector<Participant>& participants,
                                              Execution execution) {
  auto in = predecessors(g);
  std::vector<std::vector<char>> table(participants.size());
  const long count = static_cast<long>(participants.size());
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) table[i] = progress_for(g, in, participants[i]);
  } else {
    for (long i = 0; i < count; ++i) table[i] = progress_for(g, in, participants[i]);
  }
  return table;
}

LivenessVerdict excluded_lock_free(const StateGraph& g, const ParticipantSet& ignored) {
  std::vector<Participant> ps;
  for (const auto& p : all_participants(g))
    if (!ignored.count(p)) ps.push_back(p);
  auto table = progress_table(g, ps);
  // Terminal states first, then exploration order, then participant name.
  for (bool terminal : {true, false})
    for (std::size_t s = 0; s < g.states.size(); ++s) {
      if (terminal && !g.out[s].empty()) continue;
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (g.states[s].state_of(ps[i]) && !table[i][s])
          return failing("lock-freedom", ignored, g, s, ps[i]);
    }

  LivenessVerdict v;
  v.property = "lock-freedom";
  v.ignored = ignored;
  for (const auto& p : ps) {
    auto avoid = can_avoid_forever(g, p);
    for (std::size_t s = 0; s < g.states.size(); ++s) {
      if (!avoid[s] || !g.states[s].state_of(p)) continue;
      v.note = "holds because every reachable state has some continuation involving each "
               "active participant; under fair scheduling this would not suffice: from state " +
               std::to_string(s) + " (" + print_session(g.states[s]) + ") the session can run "
               "forever without involving " + p;
      return v;
    }
  }
  return v;
}

LivenessVerdict excluded_lock_free(const Session& s, const ParticipantSet& ignored,
                                   const ExploreOptions& options) {
  return excluded_lock_free(explore(s, options), ignored);
}

LivenessVerdict excluded_deadlock_free(const StateGraph& g, const ParticipantSet& ignored) {
  for (std::size_t s = 0; s < g.states.size(); ++s) {
    if (!g.out[s].empty()) continue;
    for (const auto& b : g.states[s].bindings())
      if (!ignored.count(b.participant))
        return failing("deadlock-freedom", ignored, g, s, b.participant);
  }
  LivenessVerdict v;
  v.property = "deadlock-freedom";
  v.ignored = ignored;
  return v;
}

LivenessVerdict excluded_deadlock_free(const Session& s, const ParticipantSet& ignored,
                                       const ExploreOptions& options) {
  return excluded_deadlock_free(explore(s, options), ignored);
}

}  // namespace mpst
