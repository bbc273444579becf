#include "mpst/random.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace mpst {

namespace {

const std::vector<Participant> kNames{"p", "q", "r", "s"};

// libstdc++ distributions are not portable across standard libraries; plain
// modulo keeps seeded runs byte-identical everywhere.
std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

std::vector<Label> label_subset(Rng& rng, const std::vector<Label>& labels) {
  std::vector<Label> out;
  while (out.empty())
    for (const auto& l : labels)
      if (rng() % 2) out.push_back(l);
  return out;
}

// Keeps the part reachable from node 0 and renumbers.
template <class Node>
std::vector<Node> compact(std::vector<Node> nodes) {
  std::vector<StateId> remap(nodes.size(), kNoState);
  std::vector<StateId> order{0};
  remap[0] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (const auto& b : nodes[order[i]].branches)
      if (remap[b.target] == kNoState) {
        remap[b.target] = static_cast<StateId>(order.size());
        order.push_back(b.target);
      }
  std::vector<Node> out;
  for (StateId old : order) {
    Node n = nodes[old];
    for (auto& b : n.branches) b.target = remap[b.target];
    out.push_back(std::move(n));
  }
  return out;
}

}  // namespace

ProcessGraph random_process(Rng& rng, const std::vector<Participant>& peers,
                            const RandomOptions& options) {
  std::size_t n = 1 + pick(rng, options.max_nodes);
  std::vector<ProcessNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    // The root is never End unless there is nobody to talk to.
    if (peers.empty() || (i > 0 && pick(rng, 4) == 0)) continue;
    auto& node = nodes[i];
    node.kind = pick(rng, 2) ? ProcessKind::Send : ProcessKind::Receive;
    node.peer = peers[pick(rng, peers.size())];
    for (const auto& l : label_subset(rng, options.labels))
      node.branches.push_back({l, static_cast<StateId>(pick(rng, n))});
  }
  return ProcessGraph(compact(std::move(nodes)), 0);
}

Session random_session(Rng& rng, const RandomOptions& options) {
  std::size_t k = 2 + pick(rng, std::max(1, options.max_participants - 1));
  k = std::min(k, kNames.size());
  std::vector<Participant> names(kNames.begin(), kNames.begin() + k);
  std::vector<std::pair<Participant, ProcessGraph>> bindings;
  for (const auto& self : names) {
    std::vector<Participant> peers;
    for (const auto& p : names)
      if (p != self) peers.push_back(p);
    bindings.emplace_back(self, random_process(rng, peers, options));
  }
  return make_session(bindings);
}

GlobalGraph random_global(Rng& rng, const RandomOptions& options) {
  std::size_t k = 2 + pick(rng, std::max(1, options.max_participants - 1));
  k = std::min(k, kNames.size());
  std::size_t n = 1 + pick(rng, options.max_nodes);
  std::vector<GlobalNode> nodes(n + 1);  // last node is End
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = nodes[i];
    node.kind = GlobalKind::Comm;
    std::size_t a = pick(rng, k), b = pick(rng, k - 1);
    if (b >= a) ++b;
    node.from = kNames[a];
    node.to = kNames[b];
    for (const auto& l : label_subset(rng, options.labels)) {
      // Lean forward so that most types terminate somewhere.
      StateId target = pick(rng, 3) == 0 ? static_cast<StateId>(pick(rng, n + 1))
                                         : static_cast<StateId>(i + 1 + pick(rng, n - i));
      node.branches.push_back({l, target});
    }
  }
  return minimize(GlobalGraph(compact(std::move(nodes)), 0));
}

Session project_sloppy(const GlobalGraph& graph) {
  GlobalGraph g = minimize(graph);
  ParticipantSet everyone;
  for (const auto& node : g.nodes())
    if (node.kind == GlobalKind::Comm) everyone.insert({node.from, node.to});

  std::vector<std::pair<Participant, ProcessGraph>> bindings;
  for (const auto& r : everyone) {
    // First node involving r along first branches, or End.
    auto skip = [&](StateId n) -> StateId {
      std::set<StateId> seen;
      for (;;) {
        const auto& node = g.node(n);
        if (node.kind == GlobalKind::End || node.from == r || node.to == r) return n;
        if (!seen.insert(n).second) return kNoState;
        n = node.branches.front().target;
      }
    };
    std::vector<ProcessNode> nodes(1);
    std::map<StateId, StateId> made;
    std::function<StateId(StateId)> proj = [&](StateId start) -> StateId {
      StateId n = skip(start);
      if (n == kNoState || g.node(n).kind == GlobalKind::End) return 0;
      if (auto it = made.find(n); it != made.end()) return it->second;
      StateId id = static_cast<StateId>(nodes.size());
      made[n] = id;
      nodes.emplace_back();
      const auto& gn = g.node(n);
      ProcessNode pn;
      pn.kind = gn.from == r ? ProcessKind::Send : ProcessKind::Receive;
      pn.peer = gn.from == r ? gn.to : gn.from;
      for (const auto& b : gn.branches) pn.branches.push_back({b.label, proj(b.target)});
      nodes[id] = std::move(pn);
      return id;
    };
    StateId root = proj(g.root());
    if (root == 0) continue;
    // Move the root to position 0 for `compact`, leaving End somewhere else.
    std::swap(nodes[0], nodes[root]);
    for (auto& node : nodes)
      for (auto& b : node.branches) {
        if (b.target == 0) b.target = root;
        else if (b.target == root) b.target = 0;
      }
    bindings.emplace_back(r, ProcessGraph(compact(std::move(nodes)), 0));
  }
  return make_session(bindings);
}

Session random_structured_session(Rng& rng, const RandomOptions& options) {
  Session s = project_sloppy(random_global(rng, options));
  if (!s.bindings().empty() && pick(rng, 4) == 0) {
    auto ps = participants(s);
    std::vector<Participant> names(ps.begin(), ps.end());
    Participant victim = names[pick(rng, names.size())];
    std::vector<Participant> peers;
    for (const auto& p : names)
      if (p != victim) peers.push_back(p);
    s = rebind(s, victim, random_process(rng, peers, options));
  }
  return s;
}

}  // namespace mpst
