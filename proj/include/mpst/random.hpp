#pragma once

// Seeded generators for property tests and the metatheory suite.

#include <cstdint>
#include <random>
#include <vector>

#include "mpst/terms.hpp"

namespace mpst {

using Rng = std::mt19937_64;

struct RandomOptions {
  int max_participants = 4;  // at least 2
  int max_nodes = 5;         // per process or global type
  std::vector<Label> labels{"a", "b"};
};

/// A process of `self` with at most `max_nodes` nodes talking to `peers`.
ProcessGraph random_process(Rng& rng, const std::vector<Participant>& peers,
                            const RandomOptions& options = {});

/// Unstructured random session over participants p, q, r, s.
Session random_session(Rng& rng, const RandomOptions& options = {});

/// Random global type over participants p, q, r, s; may be unbounded.
GlobalGraph random_global(Rng& rng, const RandomOptions& options = {});

/// Projection that follows the first branch wherever a participant is not
/// involved in a choice. Participants with no reachable communication get
/// `0`. The result tends to be typable but need not be.
Session project_sloppy(const GlobalGraph& g);

/// Sessions produced by `project_sloppy(random_global(...))`, occasionally
/// with one process replaced by a random one.
Session random_structured_session(Rng& rng, const RandomOptions& options = {});

}  // namespace mpst
