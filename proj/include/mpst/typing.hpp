#pragma once

// Checking G ⊢_P M with the inductive rules End, Comm, Weak and Cycle.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mpst/terms.hpp"

namespace mpst {

struct Judgment {
  GlobalGraph global;
  Session session;
  ParticipantSet ignored;
};

enum class Rule { End, Comm, Cycle, Weak };
std::string_view to_string(Rule r);

struct DerivationNode {
  Rule rule = Rule::End;
  Judgment judgment;
  std::vector<std::shared_ptr<const DerivationNode>> premises;
  ParticipantSet split;  // Weak: participants split off
};

using Derivation = std::shared_ptr<const DerivationNode>;

struct RuleCounts {
  std::size_t end = 0, comm = 0, cycle = 0, weak = 0;
  friend bool operator==(const RuleCounts&, const RuleCounts&) = default;
};
RuleCounts count_rules(const DerivationNode& d);

enum class RejectionKind {
  RootMismatch,
  LabelSetMismatch,
  ParticipantEquationFailed,
  Unbounded,
  IgnoredMismatch,
};
std::string_view to_string(RejectionKind k);

struct Rejection {
  RejectionKind kind = RejectionKind::IgnoredMismatch;
  std::string message;
  Judgment judgment;      // where the failing side condition was checked
  std::size_t depth = 0;  // distance from the root judgment
};

struct TypecheckOptions {
  std::size_t max_steps = 5'000'000;  // rule attempts; BudgetExhausted beyond
};

struct TypecheckResult {
  Derivation derivation;  // null when rejected
  std::optional<Rejection> rejection;
  std::size_t steps = 0;

  bool accepted() const { return derivation != nullptr; }
};

/// Cycle is applied eagerly; Weak splits are tried smallest first and only
/// over participants absent from the global type. On rejection the deepest
/// failure is reported, the first one on ties.
TypecheckResult typecheck(const GlobalGraph& g, const Session& m, const ParticipantSet& ignored,
                          const TypecheckOptions& options = {});
inline TypecheckResult typecheck(const Judgment& j, const TypecheckOptions& options = {}) {
  return typecheck(j.global, j.session, j.ignored, options);
}

/// (plays(gi) ∪ pi) \ {p, q} = plays(residual)
bool check_participant_equation(const GlobalGraph& gi, const ParticipantSet& pi,
                                const Participant& p, const Participant& q,
                                const Session& residual);

/// Names for the nodes of a global type as printed by print_global:
/// the root is `base`, other communications `base1`, `base2`, ...
std::map<StateId, std::string> global_node_names(const GlobalGraph& g,
                                                 const std::string& base = "G");

/// Indented proof tree, premises below their conclusion.
std::string print_derivation(const DerivationNode& d, const std::string& base = "G");

}  // namespace mpst
