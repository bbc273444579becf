#pragma once

// Partition refinement shared by process and global graphs. Nodes must expose
// `branches` (sorted by label); `shape` maps a node to everything except its
// successors (kind, participants, label list).

#include <deque>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpst/terms.hpp"

namespace mpst::detail {

template <class Node>
struct Minimized {
  std::vector<Node> nodes;
  std::vector<StateId> remap;  // old id -> new id, kNoState if unreachable
};

template <class Node>
std::vector<char> reachable_from(const std::vector<Node>& nodes,
                                 std::span<const StateId> roots) {
  std::vector<char> seen(nodes.size(), 0);
  std::vector<StateId> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    StateId n = stack.back();
    stack.pop_back();
    if (seen[n]) continue;
    seen[n] = 1;
    for (const auto& b : nodes[n].branches) stack.push_back(b.target);
  }
  return seen;
}

template <class Node, class ShapeFn>
Minimized<Node> minimize_nodes(const std::vector<Node>& nodes,
                               std::span<const StateId> roots, ShapeFn shape) {
  const std::size_t n = nodes.size();
  std::vector<char> live = reachable_from(nodes, roots);

  std::vector<int> cls(n, -1);
  int count = 0;
  {
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < n; ++i) {
      if (!live[i]) continue;
      auto [it, fresh] = ids.emplace(shape(nodes[i]), count);
      if (fresh) ++count;
      cls[i] = it->second;
    }
  }

  for (;;) {
    std::map<std::vector<int>, int> ids;
    std::vector<int> next(n, -1);
    int next_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!live[i]) continue;
      std::vector<int> sig;
      sig.reserve(nodes[i].branches.size() + 1);
      sig.push_back(cls[i]);
      for (const auto& b : nodes[i].branches) sig.push_back(cls[b.target]);
      auto [it, fresh] = ids.emplace(std::move(sig), next_count);
      if (fresh) ++next_count;
      next[i] = it->second;
    }
    cls = std::move(next);
    if (next_count == count) break;
    count = next_count;
  }

  // Canonical numbering: breadth-first from the roots, branches in label order.
  std::vector<StateId> class_id(count, kNoState);
  std::vector<StateId> representative;
  std::deque<StateId> queue;
  StateId fresh = 0;
  auto visit = [&](StateId old) {
    int c = cls[old];
    if (class_id[c] == kNoState) {
      class_id[c] = fresh++;
      representative.push_back(old);
      queue.push_back(old);
    }
  };
  for (StateId r : roots) visit(r);
  while (!queue.empty()) {
    StateId old = queue.front();
    queue.pop_front();
    for (const auto& b : nodes[old].branches) visit(b.target);
  }

  Minimized<Node> out;
  out.nodes.reserve(representative.size());
  for (StateId old : representative) {
    Node copy = nodes[old];
    for (auto& b : copy.branches) b.target = class_id[cls[b.target]];
    out.nodes.push_back(std::move(copy));
  }
  out.remap.assign(n, kNoState);
  for (std::size_t i = 0; i < n; ++i)
    if (live[i]) out.remap[i] = class_id[cls[i]];
  return out;
}

}  // namespace mpst::detail
