#include "mpst/semantics.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace mpst {

std::string to_string(const CommLabel& l) {
  return l.sender + " " + l.message + " " + l.receiver;
}

ParticipantSet plays(const CommLabel& l) { return {l.sender, l.receiver}; }

bool involves(const CommLabel& l, const Participant& p) {
  return l.sender == p || l.receiver == p;
}

// ---------------------------------------------------------------------------
// Sessions

std::vector<Transition> session_transitions(const Session& session) {
  Session s = normalize_session(session);
  const ProcessStore& store = s.store();
  std::vector<Transition> out;
  for (const auto& sender : s.bindings()) {
    const ProcessNode& out_node = store.node(sender.state);
    if (out_node.kind != ProcessKind::Send) continue;
    auto peer_state = s.state_of(out_node.peer);
    if (!peer_state) continue;
    const ProcessNode& in_node = store.node(*peer_state);
    if (in_node.kind != ProcessKind::Receive || in_node.peer != sender.participant) continue;
    bool included = std::all_of(out_node.branches.begin(), out_node.branches.end(),
                                [&](const Branch& b) { return in_node.find(b.label) != nullptr; });
    if (!included) continue;
    for (const auto& b : out_node.branches) {
      Session next = s.with(sender.participant, b.target)
                         .with(out_node.peer, in_node.find(b.label)->target);
      out.push_back({{sender.participant, b.label, out_node.peer}, std::move(next)});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Transition& a, const Transition& b) { return a.label < b.label; });
  return out;
}

std::optional<Session> reduce(const Session& session, const CommLabel& l) {
  Session s = normalize_session(session);
  auto ps = s.state_of(l.sender);
  auto qs = s.state_of(l.receiver);
  if (!ps || !qs) return std::nullopt;
  const ProcessNode& p = s.store().node(*ps);
  const ProcessNode& q = s.store().node(*qs);
  if (p.kind != ProcessKind::Send || p.peer != l.receiver) return std::nullopt;
  if (q.kind != ProcessKind::Receive || q.peer != l.sender) return std::nullopt;
  for (const auto& b : p.branches)
    if (!q.find(b.label)) return std::nullopt;
  const Branch* pb = p.find(l.message);
  if (!pb) return std::nullopt;
  return s.with(l.sender, pb->target).with(l.receiver, q.find(l.message)->target);
}

// ---------------------------------------------------------------------------
// Global types

namespace {

// Least solution of  E(n) = {root label of n} ∪ {l ∈ ∩ E(children) | l disjoint from n}.
// Every label in E(n) then has a finite derivation, so successor construction
// terminates.
std::map<StateId, std::set<CommLabel>> enabled_labels(const GlobalGraph& g) {
  std::vector<StateId> nodes = g.reachable();
  std::map<StateId, std::set<CommLabel>> enabled;
  for (StateId n : nodes) enabled[n];
  bool changed = true;
  while (changed) {
    changed = false;
    for (StateId n : nodes) {
      const GlobalNode& node = g.node(n);
      if (node.kind == GlobalKind::End) continue;
      std::set<CommLabel> next;
      for (const auto& b : node.branches) next.insert({node.from, b.label, node.to});
      const auto& first = enabled[node.branches.front().target];
      for (const auto& l : first) {
        if (involves(l, node.from) || involves(l, node.to)) continue;
        bool everywhere = std::all_of(node.branches.begin(), node.branches.end(),
                                      [&](const Branch& b) { return enabled[b.target].count(l); });
        if (everywhere) next.insert(l);
      }
      if (next != enabled[n]) {
        enabled[n] = std::move(next);
        changed = true;
      }
    }
  }
  return enabled;
}

class Successors {
 public:
  explicit Successors(const GlobalGraph& g)
      : g_(g), enabled_(enabled_labels(g)), nodes_(g.nodes()) {}

  const std::set<CommLabel>& enabled_at_root() { return enabled_[g_.root()]; }

  // Node id (in the extended storage) of the l-successor of n.
  StateId build(StateId n, const CommLabel& l) {
    auto key = std::make_pair(n, l);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const GlobalNode node = nodes_[n];
    StateId result;
    if (node.from == l.sender && node.to == l.receiver && node.find(l.message)) {
      result = node.find(l.message)->target;
    } else {
      GlobalNode copy = node;
      for (auto& b : copy.branches) b.target = build(b.target, l);
      nodes_.push_back(std::move(copy));
      result = static_cast<StateId>(nodes_.size() - 1);
    }
    memo_[key] = result;
    return result;
  }

  GlobalGraph target(StateId id) const { return minimize(GlobalGraph(nodes_, id)); }

 private:
  const GlobalGraph& g_;
  std::map<StateId, std::set<CommLabel>> enabled_;
  std::vector<GlobalNode> nodes_;
  std::map<std::pair<StateId, CommLabel>, StateId> memo_;
};

}  // namespace

std::vector<GlobalTransition> global_transitions(const GlobalGraph& g) {
  if (g.is_end()) return {};
  Successors succ(g);
  std::vector<CommLabel> labels(succ.enabled_at_root().begin(), succ.enabled_at_root().end());
  std::vector<StateId> ids;
  for (const auto& l : labels) ids.push_back(succ.build(g.root(), l));
  std::vector<GlobalTransition> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({labels[i], succ.target(ids[i])});
  return out;
}

std::optional<GlobalGraph> global_reduce(const GlobalGraph& g, const CommLabel& l) {
  if (g.is_end()) return std::nullopt;
  Successors succ(g);
  if (!succ.enabled_at_root().count(l)) return std::nullopt;
  return succ.target(succ.build(g.root(), l));
}

// ---------------------------------------------------------------------------
// State graphs

std::optional<std::size_t> StateGraph::find(const Session& s) const {
  Session n = normalize_session(s);
  if (auto it = index.find(n); it != index.end()) return it->second;
  for (std::size_t i = 0; i < states.size(); ++i)
    if (sessions_equivalent(states[i], n)) return i;
  return std::nullopt;
}

StateGraph explore(const Session& start, const ExploreOptions& options) {
  StateGraph g;
  auto add = [&](const Session& s) -> std::pair<std::size_t, bool> {
    auto [it, fresh] = g.index.emplace(s, g.states.size());
    if (fresh) {
      if (g.states.size() >= options.state_cap)
        throw Error(ErrorKind::StateLimitExceeded,
                    "more than " + std::to_string(options.state_cap) + " reachable states");
      g.states.push_back(s);
      g.out.emplace_back();
    }
    return {it->second, fresh};
  };
  std::deque<std::size_t> work{add(normalize_session(start)).first};
  std::vector<char> expanded(1, 0);
  while (!work.empty()) {
    std::size_t cur;
    if (options.order == ExploreOptions::Order::BreadthFirst) {
      cur = work.front();
      work.pop_front();
    } else {
      cur = work.back();
      work.pop_back();
    }
    if (expanded.size() < g.states.size()) expanded.resize(g.states.size(), 0);
    if (expanded[cur]) continue;
    expanded[cur] = 1;
    for (auto& t : session_transitions(g.states[cur])) {
      auto [to, fresh] = add(t.target);
      g.out[cur].push_back(g.edges.size());
      g.edges.push_back({cur, std::move(t.label), to});
      if (fresh) work.push_back(to);
    }
  }
  return g;
}

}  // namespace mpst
