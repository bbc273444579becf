#pragma once

// Independent reference computations used as test oracles. Nothing here
// calls into the code under test beyond plain graph accessors.

#include <string>

#include "mpst/terms.hpp"

namespace oracle {

// Depth-limited tree unfolding as text. Two regular terms are equal iff all
// their finite unfoldings agree; for graphs with n and m nodes depth n+m is
// enough.
inline std::string unfold(const mpst::ProcessGraph& g, mpst::StateId n, int depth) {
  const auto& node = g.node(n);
  if (node.kind == mpst::ProcessKind::End) return "0";
  if (depth == 0) return "_";
  std::string out = node.peer + (node.kind == mpst::ProcessKind::Send ? "!" : "?") + "{";
  for (const auto& b : node.branches) out += b.label + "." + unfold(g, b.target, depth - 1) + ",";
  return out + "}";
}

inline std::string unfold(const mpst::ProcessGraph& g, int depth) {
  return unfold(g, g.root(), depth);
}

inline std::string unfold(const mpst::GlobalGraph& g, mpst::StateId n, int depth) {
  const auto& node = g.node(n);
  if (node.kind == mpst::GlobalKind::End) return "end";
  if (depth == 0) return "_";
  std::string out = node.from + "->" + node.to + ":{";
  for (const auto& b : node.branches) out += b.label + "." + unfold(g, b.target, depth - 1) + ",";
  return out + "}";
}

inline std::string unfold(const mpst::GlobalGraph& g, int depth) {
  return unfold(g, g.root(), depth);
}

}  // namespace oracle

#include <algorithm>
#include <functional>
#include <optional>

#include "mpst/semantics.hpp"

namespace oracle {

// Forward search: does some path from `s` contain a step involving p?
inline bool can_progress(const mpst::StateGraph& g, std::size_t s, const mpst::Participant& p) {
  std::vector<char> seen(g.states.size(), 0);
  std::vector<std::size_t> stack{s};
  seen[s] = 1;
  while (!stack.empty()) {
    std::size_t cur = stack.back();
    stack.pop_back();
    for (std::size_t e : g.out[cur]) {
      const auto& edge = g.edges[e];
      if (edge.label.sender == p || edge.label.receiver == p) return true;
      if (!seen[edge.to]) {
        seen[edge.to] = 1;
        stack.push_back(edge.to);
      }
    }
  }
  return false;
}

inline bool lock_free(const mpst::StateGraph& g, const mpst::ParticipantSet& ignored) {
  for (std::size_t s = 0; s < g.states.size(); ++s)
    for (const auto& b : g.states[s].bindings())
      if (!ignored.count(b.participant) && !can_progress(g, s, b.participant)) return false;
  return true;
}

inline bool deadlock_free(const mpst::StateGraph& g, const mpst::ParticipantSet& ignored) {
  for (std::size_t s = 0; s < g.states.size(); ++s) {
    if (!g.out[s].empty()) continue;
    for (const auto& b : g.states[s].bindings())
      if (!ignored.count(b.participant)) return false;
  }
  return true;
}

// Depth by enumerating all paths of at most |nodes| + 1 steps; nullopt is
// infinity.
inline std::optional<std::size_t> depth(const mpst::GlobalGraph& g, const mpst::Participant& p) {
  const std::size_t limit = g.size() + 1;
  bool present = false, infinite = false;
  std::size_t best = 0;
  // First scan: is p anywhere reachable?
  for (auto n : g.reachable()) {
    const auto& node = g.node(n);
    if (node.kind == mpst::GlobalKind::Comm && (node.from == p || node.to == p)) present = true;
  }
  if (!present) return 0;
  std::function<void(mpst::StateId, std::size_t)> walk = [&](mpst::StateId n, std::size_t len) {
    const auto& node = g.node(n);
    if (node.kind == mpst::GlobalKind::End || len > limit) {
      infinite = true;
      return;
    }
    if (node.from == p || node.to == p) {
      best = std::max(best, len + 1);
      return;
    }
    for (const auto& b : node.branches) walk(b.target, len + 1);
  };
  walk(g.root(), 0);
  if (infinite) return std::nullopt;
  return best;
}

}  // namespace oracle
