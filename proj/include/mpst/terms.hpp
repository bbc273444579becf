#pragma once

// Regular process terms, sessions and global types, stored as finite graphs.
//
// Processes and global types are possibly infinite but regular terms. They
// are represented by finite rooted graphs; two graphs denote the same term
// iff they are bisimilar, and after `minimize` bisimilar graphs are
// structurally identical (canonical breadth-first numbering from the root).

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpst/error.hpp"

namespace mpst {

using Participant = std::string;
using Label = std::string;
using ParticipantSet = std::set<Participant>;
using StateId = std::uint32_t;

inline constexpr StateId kNoState = std::numeric_limits<StateId>::max();

/// `[A-Za-z_][A-Za-z0-9_]*`
bool is_identifier(std::string_view text);

struct Branch {
  Label label;
  StateId target = kNoState;

  friend auto operator<=>(const Branch&, const Branch&) = default;
};

// ---------------------------------------------------------------------------
// Processes

enum class ProcessKind : std::uint8_t { End, Send, Receive };

struct ProcessNode {
  ProcessKind kind = ProcessKind::End;
  Participant peer;              // empty for End
  std::vector<Branch> branches;  // sorted by label, labels pairwise distinct

  const Branch* find(const Label& label) const;
  friend bool operator==(const ProcessNode&, const ProcessNode&) = default;
};

class ProcessGraph {
 public:
  /// The terminated process `0`.
  ProcessGraph();
  /// Validates: root and targets in range, nonempty choices, distinct
  /// labels, every node reachable from the root. Branches are sorted.
  ProcessGraph(std::vector<ProcessNode> nodes, StateId root);

  StateId root() const { return root_; }
  const ProcessNode& node(StateId id) const { return nodes_.at(id); }
  const std::vector<ProcessNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool is_end() const { return nodes_[root_].kind == ProcessKind::End; }

  friend bool operator==(const ProcessGraph&, const ProcessGraph&) = default;

 private:
  std::vector<ProcessNode> nodes_;
  StateId root_ = 0;
};

/// Bisimulation-minimal graph with canonical numbering; root becomes 0.
ProcessGraph minimize(const ProcessGraph& graph);
bool bisimilar(const ProcessGraph& a, const ProcessGraph& b);

// ---------------------------------------------------------------------------
// Global types

enum class GlobalKind : std::uint8_t { End, Comm };

struct GlobalNode {
  GlobalKind kind = GlobalKind::End;
  Participant from;
  Participant to;
  std::vector<Branch> branches;  // sorted by label, labels pairwise distinct

  const Branch* find(const Label& label) const;
  friend bool operator==(const GlobalNode&, const GlobalNode&) = default;
};

/// A rooted view over shared, immutable node storage. `at(n)` re-roots the
/// view at another node without copying; nodes unreachable from the current
/// root may therefore be present. `minimize` produces a compact copy.
class GlobalGraph {
 public:
  /// The terminated protocol `End`.
  GlobalGraph();
  GlobalGraph(std::vector<GlobalNode> nodes, StateId root);

  StateId root() const { return root_; }
  const GlobalNode& node(StateId id) const { return (*nodes_).at(id); }
  const GlobalNode& root_node() const { return (*nodes_)[root_]; }
  const std::vector<GlobalNode>& nodes() const { return *nodes_; }
  std::size_t size() const { return nodes_->size(); }
  bool is_end() const { return root_node().kind == GlobalKind::End; }

  GlobalGraph at(StateId id) const;
  bool shares_storage_with(const GlobalGraph& other) const {
    return nodes_ == other.nodes_;
  }
  /// Nodes reachable from the root, in breadth-first order (root first).
  std::vector<StateId> reachable() const;

  /// Structural identity of views (same storage and root, or equal
  /// contents). Use `bisimilar` for term equality.
  friend bool operator==(const GlobalGraph& a, const GlobalGraph& b);

 private:
  std::shared_ptr<const std::vector<GlobalNode>> nodes_;
  StateId root_ = 0;
};

GlobalGraph minimize(const GlobalGraph& graph);
bool bisimilar(const GlobalGraph& a, const GlobalGraph& b);
/// Byte string identifying the term up to bisimilarity.
std::string canonical_key(const GlobalGraph& graph);

// ---------------------------------------------------------------------------
// Equation systems (surface terms) and their compilation to graphs.

struct ProcessChoice;

struct ProcessTerm {
  enum class Kind { Nil, Ref, Send, Receive };
  Kind kind = Kind::Nil;
  std::string name;  // referenced equation (Ref) or peer (Send/Receive)
  std::vector<ProcessChoice> branches;
  SourcePos pos;
};

struct ProcessChoice {
  Label label;
  ProcessTerm continuation;
  SourcePos pos;
};

struct ProcessEquation {
  std::string name;
  ProcessTerm body;
  SourcePos pos;
};

struct GlobalChoice;

struct GlobalTerm {
  enum class Kind { End, Ref, Comm };
  Kind kind = Kind::End;
  std::string name;  // Ref only
  Participant from;
  Participant to;
  std::vector<GlobalChoice> branches;
  SourcePos pos;
};

struct GlobalChoice {
  Label label;
  GlobalTerm continuation;
  SourcePos pos;
};

struct GlobalEquation {
  std::string name;
  GlobalTerm body;
  SourcePos pos;
};

/// Compiles the equations into one graph rooted at the first equation.
/// Throws UndefinedName, UnguardedRecursion, DuplicateBranchLabel,
/// EmptyChoice, DuplicateDefinition.
ProcessGraph build_process_graph(std::span<const ProcessEquation> equations);
GlobalGraph build_global_graph(std::span<const GlobalEquation> equations);

/// Compiles a family of global equations into shared storage; every name is
/// mapped to its node. The graph is not minimized.
struct GlobalSystem {
  std::vector<GlobalNode> nodes;
  std::map<std::string, StateId> roots;
};
GlobalSystem compile_global_equations(std::span<const GlobalEquation> equations);

// ---------------------------------------------------------------------------
// Process stores and sessions

/// Minimized process states shared by a family of sessions. State 0 is
/// always the terminated process; equal states are bisimilar terms.
class ProcessStore {
 public:
  static constexpr StateId kEnd = 0;

  ProcessStore();

  const ProcessNode& node(StateId id) const { return nodes_.at(id); }
  const std::vector<ProcessNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  /// Equation names denoting this state, in definition order.
  const std::vector<std::string>& names(StateId id) const { return names_.at(id); }
  std::optional<StateId> find_name(const std::string& name) const;
  /// The rooted graph reachable from `id`.
  ProcessGraph graph_of(StateId id) const;

 private:
  friend class ProcessStoreBuilder;
  std::vector<ProcessNode> nodes_;
  std::vector<std::vector<std::string>> names_;
};

/// Accumulates raw process nodes (possibly with duplicates), then minimizes
/// them into a ProcessStore. Ids returned before `finish` are provisional.
class ProcessStoreBuilder {
 public:
  ProcessStoreBuilder();

  StateId add_node(ProcessNode node);
  void set_node(StateId id, ProcessNode node);
  StateId add_graph(const ProcessGraph& graph);
  /// Copies every state of an existing store; returns the offset to apply.
  StateId add_store(const ProcessStore& store);
  void add_name(StateId id, std::string name);
  std::size_t size() const { return nodes_.size(); }

  /// Compiles equations, reserving a state per name; later `compile` calls
  /// may reference these names.
  void add_equations(std::span<const ProcessEquation> equations);
  StateId compile(const ProcessTerm& term);
  std::optional<StateId> lookup(const std::string& name) const;

  struct Result {
    std::shared_ptr<const ProcessStore> store;
    std::vector<StateId> remap;  // provisional id -> final id
  };
  Result finish() const;

 private:
  std::vector<ProcessNode> nodes_;
  std::vector<std::pair<StateId, std::string>> names_;
  std::map<std::string, StateId> symbols_;
};

struct Binding {
  Participant participant;
  StateId state = ProcessStore::kEnd;

  friend auto operator<=>(const Binding&, const Binding&) = default;
};

/// A multiparty session: participants bound to states of a shared store.
/// Canonical form (see `normalize_session`): no End bindings, sorted by
/// participant name.
class Session {
 public:
  /// The null session.
  Session();
  /// Throws DuplicateDefinition if a participant is bound twice.
  Session(std::shared_ptr<const ProcessStore> store, std::vector<Binding> bindings);

  const std::vector<Binding>& bindings() const { return bindings_; }
  const ProcessStore& store() const { return *store_; }
  const std::shared_ptr<const ProcessStore>& store_ptr() const { return store_; }

  bool empty() const;
  bool is_normalized() const;
  std::optional<StateId> state_of(const Participant& p) const;
  /// Returns a copy with `p` bound to `state`; End removes the binding.
  Session with(const Participant& p, StateId state) const;
  Session restricted_to(const ParticipantSet& keep) const;
  Session without(const ParticipantSet& drop) const;

  std::size_t hash() const;
  /// Binding-wise equality; meaningful for sessions over the same store.
  friend bool operator==(const Session& a, const Session& b);

 private:
  std::shared_ptr<const ProcessStore> store_;
  std::vector<Binding> bindings_;
};

struct SessionHash {
  std::size_t operator()(const Session& s) const { return s.hash(); }
};

/// Builds a canonical session over a fresh minimized store.
Session make_session(const std::vector<std::pair<Participant, ProcessGraph>>& bindings);
/// Rebinds `p` to a process from an arbitrary graph (store is merged).
Session rebind(const Session& session, const Participant& p, const ProcessGraph& process);

Session normalize_session(const Session& session);
ParticipantSet participants(const Session& session);
/// Same participants with bisimilar processes.
bool sessions_equivalent(const Session& a, const Session& b);

}  // namespace mpst
