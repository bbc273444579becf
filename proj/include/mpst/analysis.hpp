#pragma once

// Participants, depth and boundedness of global types; P-excluded lock- and
// deadlock-freedom of sessions.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mpst/semantics.hpp"
#include "mpst/terms.hpp"

namespace mpst {

/// Participants of all communications reachable from the root.
ParticipantSet plays(const GlobalGraph& g);
/// plays() of every node of the storage, indexed by node id.
std::vector<ParticipantSet> plays_table(const GlobalGraph& g);

struct Depth {
  std::optional<std::size_t> value;  // empty = infinity

  static Depth infinite() { return {}; }
  bool finite() const { return value.has_value(); }
  std::string str() const { return value ? std::to_string(*value) : "inf"; }
  friend bool operator==(const Depth&, const Depth&) = default;
};

/// 0 if p does not occur; infinite if a path ends or loops without meeting
/// p; otherwise one more than the longest p-free prefix.
Depth depth(const GlobalGraph& g, const Participant& p);

struct Boundedness {
  bool bounded = true;
  StateId node = kNoState;  // witness: a reachable node ...
  Participant participant;  // ... where this participant has infinite depth
};

Boundedness bounded(const GlobalGraph& g);
/// For every node of the storage, whether the type rooted there is bounded.
std::vector<char> bounded_table(const GlobalGraph& g);

/// Participant at the root of p's process; empty if p is inactive.
std::optional<Participant> top_partner(const Session& s, const Participant& p);

// ---------------------------------------------------------------------------
// Liveness

enum class Execution { Serial, Parallel };

/// table[i][s] is true iff some path from state s contains a label involving
/// participants[i]. Parallel runs one participant per thread.
std::vector<std::vector<char>> progress_table(const StateGraph& g,
                                              const std::vector<Participant>& participants,
                                              Execution execution = Execution::Parallel);

struct LivenessVerdict {
  std::string property;  // "lock-freedom" or "deadlock-freedom"
  ParticipantSet ignored;
  bool holds = true;
  std::size_t state = 0;  // witness, when !holds
  std::string state_text;
  Participant participant;
  /// Set when the verdict holds but a non-ignored active participant can be
  /// postponed forever by a cycle of steps that never involve it.
  std::optional<std::string> note;
};

LivenessVerdict excluded_lock_free(const StateGraph& g, const ParticipantSet& ignored);
LivenessVerdict excluded_lock_free(const Session& s, const ParticipantSet& ignored,
                                   const ExploreOptions& options = {});
LivenessVerdict excluded_deadlock_free(const StateGraph& g, const ParticipantSet& ignored);
LivenessVerdict excluded_deadlock_free(const Session& s, const ParticipantSet& ignored,
                                       const ExploreOptions& options = {});

}  // namespace mpst
