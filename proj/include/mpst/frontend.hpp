#pragma once

// The `.mpst` text format.
//
//   # comment
//   process P = q?hello . u!req . u?{ dnd . P, grtd . q!hello }
//   global  G = q->p:hello . p->u:req . G1
//   session M = p: P | q: Q | u: U
//   ignored I = {u}
//
// A missing continuation means `0` (processes) or `end` (global types).

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpst/terms.hpp"

namespace mpst {

struct SessionBindingDef {
  Participant participant;
  ProcessTerm process;
  SourcePos pos;
};

struct SessionDef {
  std::string name;
  std::vector<SessionBindingDef> bindings;  // empty for the null session `0`
  SourcePos pos;
};

struct IgnoredDef {
  std::string name;
  ParticipantSet participants;
  SourcePos pos;
};

/// A parsed and compiled file. The surface definitions are kept in source
/// order for printing; the compiled views are keyed by name.
struct SpecFile {
  std::vector<ProcessEquation> process_defs;
  std::vector<GlobalEquation> global_defs;
  std::vector<SessionDef> session_defs;
  std::vector<IgnoredDef> ignored_defs;

  std::shared_ptr<const ProcessStore> store;
  std::map<std::string, StateId> processes;
  std::map<std::string, Session> sessions;
  std::map<std::string, GlobalGraph> globals;  // minimized
  std::map<std::string, ParticipantSet> ignored;

  /// Lookups throw UndefinedName. `End`/`end` and `Empty` resolve to the
  /// terminated global type and the null session unless defined.
  const Session& session(const std::string& name) const;
  const GlobalGraph& global(const std::string& name) const;
  const ParticipantSet& ignored_set(const std::string& name) const;
};

SpecFile parse(std::string_view text);
SpecFile parse_file(const std::string& path);

/// A bare global type or a list of `NAME = gtype` lines (the leading
/// `global` keyword is optional); rooted at the first equation.
GlobalGraph parse_global(std::string_view text);
/// A single process term or a list of `NAME = proc` lines.
ProcessGraph parse_process(std::string_view text);

enum class PrintStyle {
  /// One equation per communication when the type is recursive.
  Expanded,
  /// Names only nodes with several predecessors.
  Compact,
};

/// Prints a bare term for acyclic types, otherwise `G = ...` lines with the
/// root named `base` and the rest `base1`, `base2`, ... in breadth-first order.
std::string print_global(const GlobalGraph& g, PrintStyle style = PrintStyle::Expanded,
                         const std::string& base = "G");
std::string print_process(const ProcessGraph& g, const std::string& base = "P");

/// Single-line rendering of a store state; named states print as their
/// first name, unnamed cycles as `@n`.
std::string print_state(const ProcessStore& store, StateId id);
/// `p: ... | q: ...`, or `0` for the null session.
std::string print_session(const Session& s);
std::string print_participants(const ParticipantSet& ps);  // `{a, b}`

/// Prints the surface definitions; reparsing gives bisimilar terms.
std::string print_spec(const SpecFile& spec);

}  // namespace mpst
