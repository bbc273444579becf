#pragma once

// Synchronous transition systems for sessions and global types.

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpst/terms.hpp"

namespace mpst {

struct CommLabel {
  Participant sender;
  Label message;
  Participant receiver;

  friend auto operator<=>(const CommLabel&, const CommLabel&) = default;
};

/// `p l q`
std::string to_string(const CommLabel& l);
ParticipantSet plays(const CommLabel& l);
bool involves(const CommLabel& l, const Participant& p);

using Trace = std::vector<CommLabel>;

struct Transition {
  CommLabel label;
  Session target;
};

/// All one-step reductions, sorted by label. A sender with label set I
/// synchronizes with a receiver offering J only if I ⊆ J.
std::vector<Transition> session_transitions(const Session& s);
std::optional<Session> reduce(const Session& s, const CommLabel& l);

struct GlobalTransition {
  CommLabel label;
  GlobalGraph target;  // minimized
};

/// Transitions at the root, either the root communication itself or a
/// communication enabled in every branch by participants disjoint from the
/// root's. Sorted by label.
std::vector<GlobalTransition> global_transitions(const GlobalGraph& g);
std::optional<GlobalGraph> global_reduce(const GlobalGraph& g, const CommLabel& l);

struct ExploreOptions {
  enum class Order { BreadthFirst, DepthFirst };
  Order order = Order::BreadthFirst;
  std::size_t state_cap = 1'000'000;
};

/// Reachable states of a session. All states share one process store, so
/// state identity is session equality.
struct StateGraph {
  struct Edge {
    std::size_t from;
    CommLabel label;
    std::size_t to;
  };

  std::vector<Session> states;
  std::vector<Edge> edges;                    // in discovery order
  std::vector<std::vector<std::size_t>> out;  // per state, indices into edges, labels sorted
  std::size_t initial = 0;
  std::unordered_map<Session, std::size_t, SessionHash> index;

  std::optional<std::size_t> find(const Session& s) const;
};

/// Throws StateLimitExceeded past `state_cap` states.
StateGraph explore(const Session& s, const ExploreOptions& options = {});

}  // namespace mpst
