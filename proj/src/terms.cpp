#include "mpst/terms.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "graph_minimize.hpp"

namespace mpst {

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(text[0])) return false;
  return std::all_of(text.begin() + 1, text.end(),
                     [&](char c) { return alpha(c) || digit(c); });
}

namespace {

const Branch* find_branch(const std::vector<Branch>& branches, const Label& label) {
  auto it = std::lower_bound(
      branches.begin(), branches.end(), label,
      [](const Branch& b, const Label& l) { return b.label < l; });
  if (it == branches.end() || it->label != label) return nullptr;
  return &*it;
}

// Sorts branches and checks the choice invariants shared by both node kinds.
void check_choice(std::vector<Branch>& branches, bool terminal, std::size_t size,
                  std::string_view what) {
  if (terminal) {
    if (!branches.empty())
      throw Error(ErrorKind::InvalidTerm, std::string(what) + ": terminal node with branches");
    return;
  }
  if (branches.empty())
    throw Error(ErrorKind::EmptyChoice, std::string(what) + ": empty choice");
  std::sort(branches.begin(), branches.end());
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (!is_identifier(branches[i].label))
      throw Error(ErrorKind::InvalidTerm, "invalid message label '" + branches[i].label + "'");
    if (i > 0 && branches[i].label == branches[i - 1].label)
      throw Error(ErrorKind::DuplicateBranchLabel,
                  "label '" + branches[i].label + "' repeated in one choice");
    if (branches[i].target >= size)
      throw Error(ErrorKind::InvalidTerm, std::string(what) + ": branch target out of range");
  }
}

std::string process_shape(const ProcessNode& n) {
  std::string key(1, static_cast<char>('0' + static_cast<int>(n.kind)));
  key += n.peer;
  for (const auto& b : n.branches) {
    key += '\x1f';
    key += b.label;
  }
  return key;
}

std::string global_shape(const GlobalNode& n) {
  std::string key(1, static_cast<char>('0' + static_cast<int>(n.kind)));
  key += n.from;
  key += '\x1e';
  key += n.to;
  for (const auto& b : n.branches) {
    key += '\x1f';
    key += b.label;
  }
  return key;
}

std::shared_ptr<const ProcessStore> empty_store() {
  static const auto store = std::make_shared<const ProcessStore>();
  return store;
}

}  // namespace

const Branch* ProcessNode::find(const Label& label) const {
  return find_branch(branches, label);
}

const Branch* GlobalNode::find(const Label& label) const {
  return find_branch(branches, label);
}

// ---------------------------------------------------------------------------
// ProcessGraph

ProcessGraph::ProcessGraph() : nodes_(1), root_(0) {}

ProcessGraph::ProcessGraph(std::vector<ProcessNode> nodes, StateId root)
    : nodes_(std::move(nodes)), root_(root) {
  if (root_ >= nodes_.size())
    throw Error(ErrorKind::InvalidTerm, "process graph: root out of range");
  for (auto& n : nodes_) {
    bool terminal = n.kind == ProcessKind::End;
    if (terminal && !n.peer.empty())
      throw Error(ErrorKind::InvalidTerm, "process graph: terminated node with a peer");
    if (!terminal && !is_identifier(n.peer))
      throw Error(ErrorKind::InvalidTerm, "invalid participant name '" + n.peer + "'");
    check_choice(n.branches, terminal, nodes_.size(), "process graph");
  }
  StateId roots[] = {root_};
  auto seen = detail::reachable_from(nodes_, roots);
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw Error(ErrorKind::InvalidTerm, "process graph: node unreachable from root");
}

ProcessGraph minimize(const ProcessGraph& graph) {
  StateId roots[] = {graph.root()};
  auto m = detail::minimize_nodes(graph.nodes(), roots, process_shape);
  return ProcessGraph(std::move(m.nodes), 0);
}

bool bisimilar(const ProcessGraph& a, const ProcessGraph& b) {
  return minimize(a) == minimize(b);
}

// ---------------------------------------------------------------------------
// GlobalGraph

GlobalGraph::GlobalGraph()
    : nodes_(std::make_shared<const std::vector<GlobalNode>>(1)), root_(0) {}

GlobalGraph::GlobalGraph(std::vector<GlobalNode> nodes, StateId root) : root_(root) {
  if (root >= nodes.size())
    throw Error(ErrorKind::InvalidTerm, "global graph: root out of range");
  for (auto& n : nodes) {
    bool terminal = n.kind == GlobalKind::End;
    if (terminal) {
      if (!n.from.empty() || !n.to.empty())
        throw Error(ErrorKind::InvalidTerm, "global graph: End node with participants");
    } else {
      if (!is_identifier(n.from) || !is_identifier(n.to))
        throw Error(ErrorKind::InvalidTerm, "global graph: invalid participant name");
      if (n.from == n.to)
        throw Error(ErrorKind::InvalidTerm,
                    "global graph: participant '" + n.from + "' communicates with itself");
    }
    check_choice(n.branches, terminal, nodes.size(), "global graph");
  }
  nodes_ = std::make_shared<const std::vector<GlobalNode>>(std::move(nodes));
}

GlobalGraph GlobalGraph::at(StateId id) const {
  if (id >= nodes_->size())
    throw Error(ErrorKind::InvalidTerm, "global graph: node out of range");
  GlobalGraph view = *this;
  view.root_ = id;
  return view;
}

std::vector<StateId> GlobalGraph::reachable() const {
  std::vector<char> seen(size(), 0);
  std::vector<StateId> order{root_};
  seen[root_] = 1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto& b : node(order[i]).branches) {
      if (!seen[b.target]) {
        seen[b.target] = 1;
        order.push_back(b.target);
      }
    }
  }
  return order;
}

bool operator==(const GlobalGraph& a, const GlobalGraph& b) {
  if (a.root_ != b.root_) return false;
  return a.nodes_ == b.nodes_ || *a.nodes_ == *b.nodes_;
}

GlobalGraph minimize(const GlobalGraph& graph) {
  StateId roots[] = {graph.root()};
  auto m = detail::minimize_nodes(graph.nodes(), roots, global_shape);
  return GlobalGraph(std::move(m.nodes), 0);
}

bool bisimilar(const GlobalGraph& a, const GlobalGraph& b) {
  return minimize(a) == minimize(b);
}

std::string canonical_key(const GlobalGraph& graph) {
  GlobalGraph m = minimize(graph);
  std::string key;
  for (const auto& n : m.nodes()) {
    key += global_shape(n);
    for (const auto& b : n.branches) {
      key += '\x1d';
      key += std::to_string(b.target);
    }
    key += '\n';
  }
  return key;
}

// ---------------------------------------------------------------------------
// Equation compilation

namespace {

// Follows `name = other` aliases to the first equation with a guarded body.
template <class Equation, class IsAlias>
std::map<std::string, const Equation*> index_equations(std::span<const Equation> equations,
                                                       IsAlias is_alias) {
  std::map<std::string, const Equation*> index;
  for (const auto& eq : equations) {
    if (!is_identifier(eq.name))
      throw Error(ErrorKind::InvalidTerm, "invalid equation name '" + eq.name + "'", eq.pos);
    if (!index.emplace(eq.name, &eq).second)
      throw Error(ErrorKind::DuplicateDefinition, "'" + eq.name + "' defined twice", eq.pos);
  }
  (void)is_alias;
  return index;
}

template <class Equation, class IsAlias>
const Equation* resolve_alias(const std::map<std::string, const Equation*>& index,
                              const Equation& eq, IsAlias is_alias,
                              const std::function<bool(const std::string&)>& external) {
  std::set<std::string> seen{eq.name};
  const Equation* cur = &eq;
  while (is_alias(cur->body)) {
    const std::string& next = cur->body.name;
    auto it = index.find(next);
    if (it == index.end()) {
      if (external && external(next)) return nullptr;
      throw Error(ErrorKind::UndefinedName, "'" + next + "' is not defined", cur->body.pos);
    }
    if (!seen.insert(next).second)
      throw Error(ErrorKind::UnguardedRecursion,
                  "'" + eq.name + "' is defined only through itself", eq.pos);
    cur = it->second;
  }
  return cur;
}

}  // namespace

GlobalSystem compile_global_equations(std::span<const GlobalEquation> equations) {
  auto is_alias = [](const GlobalTerm& t) { return t.kind == GlobalTerm::Kind::Ref; };
  auto index = index_equations(equations, is_alias);

  GlobalSystem sys;
  sys.nodes.emplace_back();  // shared End
  std::map<const GlobalEquation*, StateId> reserved;
  for (const auto& eq : equations) {
    if (eq.body.kind == GlobalTerm::Kind::Comm) {
      reserved[&eq] = static_cast<StateId>(sys.nodes.size());
      sys.nodes.emplace_back();
    }
  }
  auto node_of = [&](const GlobalEquation& eq) -> StateId {
    const GlobalEquation* target = resolve_alias(index, eq, is_alias, nullptr);
    if (target->body.kind == GlobalTerm::Kind::End) return 0;
    return reserved.at(target);
  };

  std::function<StateId(const GlobalTerm&)> compile = [&](const GlobalTerm& t) -> StateId {
    switch (t.kind) {
      case GlobalTerm::Kind::End:
        return 0;
      case GlobalTerm::Kind::Ref: {
        auto it = index.find(t.name);
        if (it == index.end())
          throw Error(ErrorKind::UndefinedName, "'" + t.name + "' is not defined", t.pos);
        return node_of(*it->second);
      }
      case GlobalTerm::Kind::Comm:
        break;
    }
    GlobalNode node;
    node.kind = GlobalKind::Comm;
    node.from = t.from;
    node.to = t.to;
    if (!is_identifier(t.from) || !is_identifier(t.to))
      throw Error(ErrorKind::InvalidTerm, "invalid participant name", t.pos);
    if (t.from == t.to)
      throw Error(ErrorKind::InvalidTerm, "'" + t.from + "' communicates with itself", t.pos);
    if (t.branches.empty()) throw Error(ErrorKind::EmptyChoice, "empty choice", t.pos);
    std::set<Label> labels;
    for (const auto& c : t.branches) {
      if (!labels.insert(c.label).second)
        throw Error(ErrorKind::DuplicateBranchLabel,
                    "label '" + c.label + "' repeated in one choice", c.pos);
      node.branches.push_back({c.label, compile(c.continuation)});
    }
    std::sort(node.branches.begin(), node.branches.end());
    sys.nodes.push_back(std::move(node));
    return static_cast<StateId>(sys.nodes.size() - 1);
  };

  for (const auto& eq : equations) {
    if (eq.body.kind != GlobalTerm::Kind::Comm) continue;
    // Compile the body as a fresh node, then move it into the reserved slot.
    StateId built = compile(eq.body);
    sys.nodes[reserved.at(&eq)] = sys.nodes[built];
    sys.nodes.pop_back();
  }
  for (const auto& eq : equations) sys.roots[eq.name] = node_of(eq);
  return sys;
}

GlobalGraph build_global_graph(std::span<const GlobalEquation> equations) {
  if (equations.empty()) throw Error(ErrorKind::InvalidTerm, "no equations");
  GlobalSystem sys = compile_global_equations(equations);
  StateId root = sys.roots.at(equations.front().name);
  return minimize(GlobalGraph(std::move(sys.nodes), root));
}

ProcessGraph build_process_graph(std::span<const ProcessEquation> equations) {
  if (equations.empty()) throw Error(ErrorKind::InvalidTerm, "no equations");
  ProcessStoreBuilder builder;
  builder.add_equations(equations);
  StateId root = *builder.lookup(equations.front().name);
  auto result = builder.finish();
  return result.store->graph_of(result.remap[root]);
}

// ---------------------------------------------------------------------------
// ProcessStore

ProcessStore::ProcessStore() : nodes_(1), names_(1) {}

std::optional<StateId> ProcessStore::find_name(const std::string& name) const {
  for (StateId i = 0; i < names_.size(); ++i)
    for (const auto& n : names_[i])
      if (n == name) return i;
  return std::nullopt;
}

ProcessGraph ProcessStore::graph_of(StateId id) const {
  StateId roots[] = {id};
  auto m = detail::minimize_nodes(nodes_, roots, process_shape);
  return ProcessGraph(std::move(m.nodes), 0);
}

ProcessStoreBuilder::ProcessStoreBuilder() : nodes_(1) {}

StateId ProcessStoreBuilder::add_node(ProcessNode node) {
  nodes_.push_back(std::move(node));
  return static_cast<StateId>(nodes_.size() - 1);
}

void ProcessStoreBuilder::set_node(StateId id, ProcessNode node) {
  nodes_.at(id) = std::move(node);
}

StateId ProcessStoreBuilder::add_graph(const ProcessGraph& graph) {
  auto offset = static_cast<StateId>(nodes_.size());
  for (const auto& n : graph.nodes()) {
    ProcessNode copy = n;
    for (auto& b : copy.branches) b.target += offset;
    nodes_.push_back(std::move(copy));
  }
  return offset + graph.root();
}

StateId ProcessStoreBuilder::add_store(const ProcessStore& store) {
  auto offset = static_cast<StateId>(nodes_.size());
  for (StateId i = 0; i < store.size(); ++i) {
    ProcessNode copy = store.node(i);
    for (auto& b : copy.branches) b.target += offset;
    nodes_.push_back(std::move(copy));
    for (const auto& name : store.names(i)) names_.emplace_back(offset + i, name);
  }
  return offset;
}

void ProcessStoreBuilder::add_name(StateId id, std::string name) {
  names_.emplace_back(id, std::move(name));
}

std::optional<StateId> ProcessStoreBuilder::lookup(const std::string& name) const {
  auto it = symbols_.find(name);
  if (it == symbols_.end()) return std::nullopt;
  return it->second;
}

void ProcessStoreBuilder::add_equations(std::span<const ProcessEquation> equations) {
  auto is_alias = [](const ProcessTerm& t) { return t.kind == ProcessTerm::Kind::Ref; };
  auto index = index_equations(equations, is_alias);
  for (const auto& eq : equations)
    if (symbols_.count(eq.name))
      throw Error(ErrorKind::DuplicateDefinition, "'" + eq.name + "' defined twice", eq.pos);

  std::map<const ProcessEquation*, StateId> reserved;
  for (const auto& eq : equations) {
    switch (eq.body.kind) {
      case ProcessTerm::Kind::Send:
      case ProcessTerm::Kind::Receive:
        reserved[&eq] = add_node(ProcessNode{});
        symbols_[eq.name] = reserved[&eq];
        break;
      case ProcessTerm::Kind::Nil:
        symbols_[eq.name] = ProcessStore::kEnd;
        break;
      case ProcessTerm::Kind::Ref:
        break;
    }
  }
  auto known_elsewhere = [&](const std::string& n) {
    return index.count(n) == 0 && symbols_.count(n) != 0;
  };
  for (const auto& eq : equations) {
    if (eq.body.kind != ProcessTerm::Kind::Ref) continue;
    const ProcessEquation* target = resolve_alias(index, eq, is_alias,
                                                  std::function<bool(const std::string&)>(known_elsewhere));
    if (target == nullptr) {
      // The chain leaves this batch; find its last link.
      const ProcessEquation* cur = &eq;
      while (index.count(cur->body.name)) cur = index.at(cur->body.name);
      symbols_[eq.name] = symbols_.at(cur->body.name);
    } else {
      symbols_[eq.name] = symbols_.at(target->name);
    }
  }
  for (const auto& eq : equations) {
    if (!reserved.count(&eq)) continue;
    StateId built = compile(eq.body);
    nodes_[reserved.at(&eq)] = nodes_[built];
    if (built == nodes_.size() - 1) nodes_.pop_back();
  }
  for (const auto& eq : equations) add_name(symbols_.at(eq.name), eq.name);
}

StateId ProcessStoreBuilder::compile(const ProcessTerm& t) {
  switch (t.kind) {
    case ProcessTerm::Kind::Nil:
      return ProcessStore::kEnd;
    case ProcessTerm::Kind::Ref: {
      auto id = lookup(t.name);
      if (!id) throw Error(ErrorKind::UndefinedName, "'" + t.name + "' is not defined", t.pos);
      return *id;
    }
    case ProcessTerm::Kind::Send:
    case ProcessTerm::Kind::Receive:
      break;
  }
  if (!is_identifier(t.name))
    throw Error(ErrorKind::InvalidTerm, "invalid participant name '" + t.name + "'", t.pos);
  if (t.branches.empty()) throw Error(ErrorKind::EmptyChoice, "empty choice", t.pos);
  ProcessNode node;
  node.kind = t.kind == ProcessTerm::Kind::Send ? ProcessKind::Send : ProcessKind::Receive;
  node.peer = t.name;
  std::set<Label> labels;
  for (const auto& c : t.branches) {
    if (!labels.insert(c.label).second)
      throw Error(ErrorKind::DuplicateBranchLabel,
                  "label '" + c.label + "' repeated in one choice", c.pos);
    if (!is_identifier(c.label))
      throw Error(ErrorKind::InvalidTerm, "invalid message label '" + c.label + "'", c.pos);
    node.branches.push_back({c.label, compile(c.continuation)});
  }
  std::sort(node.branches.begin(), node.branches.end());
  return add_node(std::move(node));
}

ProcessStoreBuilder::Result ProcessStoreBuilder::finish() const {
  std::vector<StateId> roots(nodes_.size());
  for (StateId i = 0; i < roots.size(); ++i) roots[i] = i;
  auto m = detail::minimize_nodes(nodes_, roots, process_shape);

  auto store = std::make_shared<ProcessStore>();
  store->nodes_ = std::move(m.nodes);
  store->names_.assign(store->nodes_.size(), {});
  for (const auto& [id, name] : names_) {
    auto& slot = store->names_[m.remap[id]];
    if (std::find(slot.begin(), slot.end(), name) == slot.end()) slot.push_back(name);
  }
  return {std::move(store), std::move(m.remap)};
}

// ---------------------------------------------------------------------------
// Session

Session::Session() : store_(empty_store()) {}

Session::Session(std::shared_ptr<const ProcessStore> store, std::vector<Binding> bindings)
    : store_(store ? std::move(store) : empty_store()), bindings_(std::move(bindings)) {
  std::set<Participant> seen;
  for (const auto& b : bindings_) {
    if (!is_identifier(b.participant))
      throw Error(ErrorKind::InvalidTerm, "invalid participant name '" + b.participant + "'");
    if (!seen.insert(b.participant).second)
      throw Error(ErrorKind::DuplicateDefinition,
                  "participant '" + b.participant + "' bound twice in one session");
    if (b.state >= store_->size())
      throw Error(ErrorKind::InvalidTerm, "session binding refers to an unknown state");
  }
}

bool Session::empty() const {
  return std::all_of(bindings_.begin(), bindings_.end(),
                     [](const Binding& b) { return b.state == ProcessStore::kEnd; });
}

bool Session::is_normalized() const {
  for (std::size_t i = 0; i < bindings_.size(); ++i) {
    if (bindings_[i].state == ProcessStore::kEnd) return false;
    if (i > 0 && !(bindings_[i - 1].participant < bindings_[i].participant)) return false;
  }
  return true;
}

std::optional<StateId> Session::state_of(const Participant& p) const {
  for (const auto& b : bindings_)
    if (b.participant == p) return b.state;
  return std::nullopt;
}

Session Session::with(const Participant& p, StateId state) const {
  Session out = normalize_session(*this);
  auto& bs = out.bindings_;
  auto it = std::lower_bound(bs.begin(), bs.end(), p,
                             [](const Binding& b, const Participant& q) { return b.participant < q; });
  bool present = it != bs.end() && it->participant == p;
  if (state == ProcessStore::kEnd) {
    if (present) bs.erase(it);
  } else if (present) {
    it->state = state;
  } else {
    bs.insert(it, Binding{p, state});
  }
  return out;
}

Session Session::restricted_to(const ParticipantSet& keep) const {
  std::vector<Binding> bs;
  for (const auto& b : normalize_session(*this).bindings_)
    if (keep.count(b.participant)) bs.push_back(b);
  return Session(store_, std::move(bs));
}

Session Session::without(const ParticipantSet& drop) const {
  std::vector<Binding> bs;
  for (const auto& b : normalize_session(*this).bindings_)
    if (!drop.count(b.participant)) bs.push_back(b);
  return Session(store_, std::move(bs));
}

std::size_t Session::hash() const {
  std::size_t h = 0x9e3779b97f4a7c15ull;
  for (const auto& b : bindings_) {
    if (b.state == ProcessStore::kEnd) continue;
    h ^= std::hash<std::string>{}(b.participant) + 0x9e3779b9 + (h << 6) + (h >> 2);
    h ^= std::hash<StateId>{}(b.state) + 0x9e3779b9 + (h << 6) + (h >> 2);
  }
  return h;
}

bool operator==(const Session& a, const Session& b) {
  if (a.bindings_ != b.bindings_) return false;
  return a.bindings_.empty() || a.store_ == b.store_;
}

Session normalize_session(const Session& session) {
  if (session.is_normalized()) return session;
  std::vector<Binding> bs;
  for (const auto& b : session.bindings())
    if (b.state != ProcessStore::kEnd) bs.push_back(b);
  std::sort(bs.begin(), bs.end());
  return Session(session.store_ptr(), std::move(bs));
}

ParticipantSet participants(const Session& session) {
  ParticipantSet out;
  for (const auto& b : session.bindings())
    if (b.state != ProcessStore::kEnd) out.insert(b.participant);
  return out;
}

Session make_session(const std::vector<std::pair<Participant, ProcessGraph>>& bindings) {
  ProcessStoreBuilder builder;
  std::vector<Binding> raw;
  for (const auto& [p, g] : bindings) raw.push_back({p, builder.add_graph(g)});
  auto result = builder.finish();
  for (auto& b : raw) b.state = result.remap[b.state];
  return normalize_session(Session(result.store, std::move(raw)));
}

Session rebind(const Session& session, const Participant& p, const ProcessGraph& process) {
  ProcessStoreBuilder builder;
  StateId offset = builder.add_store(session.store());
  StateId root = builder.add_graph(process);
  auto result = builder.finish();
  std::vector<Binding> raw;
  for (const auto& b : session.bindings())
    if (b.participant != p) raw.push_back({b.participant, result.remap[offset + b.state]});
  raw.push_back({p, result.remap[root]});
  return normalize_session(Session(result.store, std::move(raw)));
}

bool sessions_equivalent(const Session& a, const Session& b) {
  Session na = normalize_session(a);
  Session nb = normalize_session(b);
  if (na.bindings().size() != nb.bindings().size()) return false;
  for (std::size_t i = 0; i < na.bindings().size(); ++i)
    if (na.bindings()[i].participant != nb.bindings()[i].participant) return false;
  if (na.bindings().empty()) return true;
  if (na.store_ptr() == nb.store_ptr()) return na.bindings() == nb.bindings();

  ProcessStoreBuilder builder;
  StateId off_a = builder.add_store(na.store());
  StateId off_b = builder.add_store(nb.store());
  auto result = builder.finish();
  for (std::size_t i = 0; i < na.bindings().size(); ++i) {
    if (result.remap[off_a + na.bindings()[i].state] !=
        result.remap[off_b + nb.bindings()[i].state])
      return false;
  }
  return true;
}

}  // namespace mpst
