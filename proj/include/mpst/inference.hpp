#pragma once

// Inference of global types and ignored sets: goal resolution producing
// equation systems and p-conditions, and the solvers for them.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpst/terms.hpp"
#include "mpst/typing.hpp"

namespace mpst {

/// Variables come in pairs: id 0 is X / x, id i > 0 is Yi / yi.
using VarId = std::size_t;

std::string type_var_name(VarId v);
std::string pset_var_name(VarId v);

struct GlobalPattern {
  enum class Kind { End, Comm, Var };
  Kind kind = Kind::End;
  Participant from, to;                          // Comm
  std::vector<std::pair<Label, VarId>> branches;  // Comm, sorted by label
  VarId var = 0;                                 // Var
};

struct PSetPattern {
  std::vector<VarId> vars;
  ParticipantSet literal;
};

struct TypeEquation {
  VarId var = 0;
  GlobalPattern rhs;
};

struct PSetEquation {
  VarId var = 0;
  PSetPattern rhs;
};

/// (plays(Y) ∪ y) \ {p, q} = target
struct PCondition {
  VarId type_var = 0;
  VarId pset_var = 0;
  Participant p, q;
  ParticipantSet target;
};

struct EquationSystems {
  std::vector<TypeEquation> types;  // ordered by variable
  std::vector<PSetEquation> psets;
  std::vector<PCondition> conditions;
  VarId root = 0;
};

/// One successful run of the goal resolution.
struct InferenceOutcome {
  EquationSystems systems;
  std::vector<Session> goals;  // goals[v] is the session of goal (Yv, yv)
  std::vector<Rule> rules;     // rules[v] is the rule applied to that goal
  std::size_t size = 0;        // rule applications
  std::size_t weak_count = 0;
};

struct Substitution {
  std::map<VarId, GlobalGraph> types;
  std::map<VarId, ParticipantSet> psets;
};

/// Unique regular solution; throws UnguardedRecursion on a cycle of
/// variable-to-variable equations and InvalidTerm on an undefined variable.
std::map<VarId, GlobalGraph> solve_type_equations(const std::vector<TypeEquation>& system);

/// Least solution above the given lower bounds (Kleene iteration). The result
/// is a pre-fixpoint; callers check the equalities themselves.
std::map<VarId, ParticipantSet> solve_pset_equations(
    const std::vector<PSetEquation>& system,
    const std::map<VarId, ParticipantSet>& lower_bounds = {});

struct Agreement {
  bool holds = true;
  std::optional<PCondition> failing;
};
Agreement check_agreement(const Substitution& theta, const std::vector<PCondition>& conditions);

enum class SolveFailure { None, Unguarded, Unbounded, PSetEquality, Disagreement };
std::string_view to_string(SolveFailure f);

struct SolveAttempt {
  std::optional<Substitution> solution;
  SolveFailure failure = SolveFailure::None;
  std::string detail;
};

/// Solves E uniquely, rejects unbounded solutions, solves E_P least above the
/// lower bounds the conditions force, then checks everything exactly.
SolveAttempt solve(const EquationSystems& systems);
/// Zero or one substitution.
std::vector<Substitution> solutions(const EquationSystems& systems);

struct InferOptions {
  std::size_t max_size = 0;  // derivation size; 0 picks default_max_size
  std::size_t max_outcomes = 64;
  std::size_t max_expansions = 2'000'000;
  /// Only close cycles, never unroll a goal already seen. Faster, may miss
  /// solutions that need distinct types for the same session.
  bool eager_cycle = false;
  /// Restrict Weak splits to these participants; every ignored set of the
  /// run is then a subset.
  std::optional<ParticipantSet> ignored_within;
  /// Stop deepening after the first size that yields a solution.
  bool first_level_only = false;
  /// Keep one outcome per solution (global type up to bisimilarity, ignored set).
  bool deduplicate = true;
};

/// 4 × number of sessions reachable from s.
std::size_t default_max_size(const Session& s);

struct InferredSolution {
  InferenceOutcome outcome;
  Substitution theta;
  GlobalGraph global;      // theta(X), minimized
  ParticipantSet ignored;  // theta(x)
};

struct InferResult {
  std::vector<InferredSolution> solutions;  // in search order
  std::size_t outcomes = 0;                 // derivations examined
  std::size_t max_size = 0;
  std::map<SolveFailure, std::size_t> failures;
  bool budget_exhausted = false;  // expansions ran out before max_size
};

/// Iterative deepening on derivation size. Choices are tried in the order
/// End, Cycle, Comm (by sender, then receiver), Weak (smaller splits first).
InferResult infer(const Session& s, const InferOptions& options = {});

/// Smallest ignored set, then fewest Weak steps, then lexicographic.
std::optional<InferredSolution> infer_minimal(const Session& s, const InferOptions& options = {});

std::string print_pattern(const GlobalPattern& g);
std::string print_pset_pattern(const PSetPattern& p);
std::string print_condition(const PCondition& c);
std::string print_systems(const EquationSystems& systems);

}  // namespace mpst
