#include "mpst/frontend.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <type_traits>

namespace mpst {

namespace {

enum class Tok { Ident, Zero, Arrow, Bang, Query, Colon, Dot, Comma, LBrace, RBrace, Equals, Bar, Eof };

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Zero: return "'0'";
    case Tok::Arrow: return "'->'";
    case Tok::Bang: return "'!'";
    case Tok::Query: return "'?'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Comma: return "','";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Equals: return "'='";
    case Tok::Bar: return "'|'";
    case Tok::Eof: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;
      }
    }
  };
  auto ident_char = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  };
  while (i < src.size()) {
    char c = src[i];
    SourcePos pos{line, col};
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (ident_char(c) && !(c >= '0' && c <= '9')) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    if (c == '0' && !(i + 1 < src.size() && ident_char(src[i + 1]))) {
      out.push_back({Tok::Zero, "0", pos});
      advance(1);
      continue;
    }
    if (src.substr(i, 2) == "->") {
      out.push_back({Tok::Arrow, "->", pos});
      advance(2);
      continue;
    }
    if (src.substr(i, 3) == "\xE2\x86\x92") {  // U+2192
      out.push_back({Tok::Arrow, "->", pos});
      advance(3);
      continue;
    }
    Tok kind;
    switch (c) {
      case '!': kind = Tok::Bang; break;
      case '?': kind = Tok::Query; break;
      case ':': kind = Tok::Colon; break;
      case '.': kind = Tok::Dot; break;
      case ',': kind = Tok::Comma; break;
      case '{': kind = Tok::LBrace; break;
      case '}': kind = Tok::RBrace; break;
      case '=': kind = Tok::Equals; break;
      case '|': kind = Tok::Bar; break;
      default: {
        std::string shown(1, c);
        if (static_cast<unsigned char>(c) >= 0x80) shown = "non-ASCII character";
        throw Error(ErrorKind::SyntaxError, "unexpected " + shown, pos);
      }
    }
    out.push_back({kind, std::string(1, c), pos});
    advance(1);
  }
  out.push_back({Tok::Eof, "", {line, col}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_keyword(std::string_view kw) const { return at(Tok::Ident) && peek().text == kw; }

  Token expect(Tok k, const char* what = nullptr) {
    if (!at(k)) {
      std::string found = at(Tok::Ident) ? "'" + peek().text + "'" : tok_name(peek().kind);
      throw Error(ErrorKind::SyntaxError,
                  std::string("expected ") + (what ? what : tok_name(k)) + ", found " + found,
                  peek().pos);
    }
    return toks_[pos_++];
  }

  Token ident(const char* what) { return expect(Tok::Ident, what); }

  // proc ::= 0 | IDENT | IDENT ! branches | IDENT ? branches
  ProcessTerm process() {
    ProcessTerm t;
    t.pos = peek().pos;
    if (at(Tok::Zero)) {
      ++pos_;
      return t;
    }
    Token name = ident("process");
    t.name = name.text;
    if (at(Tok::Bang) || at(Tok::Query)) {
      t.kind = at(Tok::Bang) ? ProcessTerm::Kind::Send : ProcessTerm::Kind::Receive;
      ++pos_;
      branches([&](ProcessChoice c) { t.branches.push_back(std::move(c)); },
               [&] { return process(); });
    } else {
      t.kind = ProcessTerm::Kind::Ref;
    }
    return t;
  }

  // gtype ::= end | IDENT | IDENT -> IDENT : branches
  GlobalTerm global() {
    GlobalTerm t;
    t.pos = peek().pos;
    Token name = ident("global type");
    if (at(Tok::Arrow)) {
      ++pos_;
      t.kind = GlobalTerm::Kind::Comm;
      t.from = name.text;
      t.to = ident("participant").text;
      expect(Tok::Colon);
      branches([&](GlobalChoice c) { t.branches.push_back(std::move(c)); },
               [&] { return global(); });
    } else if (name.text == "end") {
      t.kind = GlobalTerm::Kind::End;
    } else {
      t.kind = GlobalTerm::Kind::Ref;
      t.name = name.text;
    }
    return t;
  }

  // branches ::= choice | { choice (, choice)* } ;  choice ::= label [. cont]
  template <class Push, class Cont>
  void branches(Push push, Cont cont) {
    auto one = [&] {
      Token label = ident("message label");
      decltype(cont()) c{};
      c.pos = label.pos;
      if (at(Tok::Dot)) {
        ++pos_;
        c = cont();
      }
      return std::make_pair(label, std::move(c));
    };
    auto emit = [&](std::pair<Token, decltype(cont())> lc) {
      using T = decltype(cont());
      if constexpr (std::is_same_v<T, ProcessTerm>)
        push(ProcessChoice{lc.first.text, std::move(lc.second), lc.first.pos});
      else
        push(GlobalChoice{lc.first.text, std::move(lc.second), lc.first.pos});
    };
    if (at(Tok::LBrace)) {
      ++pos_;
      emit(one());
      while (at(Tok::Comma)) {
        ++pos_;
        emit(one());
      }
      expect(Tok::RBrace, "',' or '}'");
    } else {
      emit(one());
    }
  }

  SessionDef session_body(std::string name, SourcePos pos) {
    SessionDef def{std::move(name), {}, pos};
    if (at(Tok::Zero)) {
      ++pos_;
      return def;
    }
    ParticipantSet seen;
    for (;;) {
      Token p = ident("participant");
      expect(Tok::Colon);
      if (!seen.insert(p.text).second)
        throw Error(ErrorKind::DuplicateDefinition,
                    "participant '" + p.text + "' bound twice in session '" + def.name + "'",
                    p.pos);
      def.bindings.push_back({p.text, process(), p.pos});
      if (!at(Tok::Bar)) break;
      ++pos_;
    }
    return def;
  }

  ParticipantSet participant_set() {
    ParticipantSet out;
    expect(Tok::LBrace);
    if (at(Tok::RBrace)) {
      ++pos_;
      return out;
    }
    for (;;) {
      out.insert(ident("participant").text);
      if (!at(Tok::Comma)) break;
      ++pos_;
    }
    expect(Tok::RBrace, "',' or '}'");
    return out;
  }

  void file(SpecFile& spec) {
    std::set<std::string> session_names, ignored_names;
    while (!at(Tok::Eof)) {
      if (!at(Tok::Ident))
        throw Error(ErrorKind::SyntaxError,
                    "expected 'process', 'global', 'session' or 'ignored'", peek().pos);
      Token kw = toks_[pos_++];
      Token name = ident("name");
      expect(Tok::Equals);
      if (kw.text == "process") {
        spec.process_defs.push_back({name.text, process(), name.pos});
      } else if (kw.text == "global") {
        spec.global_defs.push_back({name.text, global(), name.pos});
      } else if (kw.text == "session") {
        if (!session_names.insert(name.text).second)
          throw Error(ErrorKind::DuplicateDefinition,
                      "session '" + name.text + "' defined twice", name.pos);
        spec.session_defs.push_back(session_body(name.text, name.pos));
      } else if (kw.text == "ignored") {
        if (!ignored_names.insert(name.text).second)
          throw Error(ErrorKind::DuplicateDefinition,
                      "ignored set '" + name.text + "' defined twice", name.pos);
        spec.ignored_defs.push_back({name.text, participant_set(), name.pos});
      } else {
        throw Error(ErrorKind::SyntaxError, "unknown item '" + kw.text + "'", kw.pos);
      }
    }
  }

  // `[global] NAME = gtype` lines, or one bare term.
  std::vector<GlobalEquation> global_equations() {
    std::vector<GlobalEquation> eqs;
    auto starts_equation = [&] {
      std::size_t k = at_keyword("global") ? 1 : 0;
      return peek(k).kind == Tok::Ident && peek(k + 1).kind == Tok::Equals;
    };
    if (!starts_equation()) {
      eqs.push_back({"_root", global(), peek().pos});
    } else {
      while (!at(Tok::Eof)) {
        if (at_keyword("global") && peek(1).kind == Tok::Ident) ++pos_;
        Token name = ident("name");
        expect(Tok::Equals);
        eqs.push_back({name.text, global(), name.pos});
      }
    }
    expect(Tok::Eof);
    return eqs;
  }

  std::vector<ProcessEquation> process_equations() {
    std::vector<ProcessEquation> eqs;
    auto starts_equation = [&] {
      std::size_t k = at_keyword("process") ? 1 : 0;
      return peek(k).kind == Tok::Ident && peek(k + 1).kind == Tok::Equals;
    };
    if (!starts_equation()) {
      eqs.push_back({"_root", process(), peek().pos});
    } else {
      while (!at(Tok::Eof)) {
        if (at_keyword("process") && peek(1).kind == Tok::Ident) ++pos_;
        Token name = ident("name");
        expect(Tok::Equals);
        eqs.push_back({name.text, process(), name.pos});
      }
    }
    expect(Tok::Eof);
    return eqs;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// `End` is a builtin unless the file defines it.
void resolve_builtin_end(GlobalTerm& t, const std::set<std::string>& defined) {
  if (t.kind == GlobalTerm::Kind::Ref && t.name == "End" && !defined.count("End")) {
    t.kind = GlobalTerm::Kind::End;
    t.name.clear();
  }
  for (auto& c : t.branches) resolve_builtin_end(c.continuation, defined);
}

void resolve_builtin_end(std::vector<GlobalEquation>& eqs) {
  std::set<std::string> defined;
  for (const auto& eq : eqs) defined.insert(eq.name);
  for (auto& eq : eqs) resolve_builtin_end(eq.body, defined);
}

void compile(SpecFile& spec) {
  ProcessStoreBuilder builder;
  builder.add_equations(spec.process_defs);
  std::vector<std::vector<Binding>> raw;
  for (const auto& def : spec.session_defs) {
    auto& bs = raw.emplace_back();
    for (const auto& b : def.bindings) {
      if (!is_identifier(b.participant))
        throw Error(ErrorKind::InvalidTerm, "invalid participant name", b.pos);
      bs.push_back({b.participant, builder.compile(b.process)});
    }
  }
  std::map<std::string, StateId> provisional;
  for (const auto& eq : spec.process_defs) provisional[eq.name] = *builder.lookup(eq.name);

  auto result = builder.finish();
  spec.store = result.store;
  for (const auto& [name, id] : provisional) spec.processes[name] = result.remap[id];
  for (std::size_t i = 0; i < spec.session_defs.size(); ++i) {
    for (auto& b : raw[i]) b.state = result.remap[b.state];
    spec.sessions[spec.session_defs[i].name] =
        normalize_session(Session(spec.store, std::move(raw[i])));
  }

  resolve_builtin_end(spec.global_defs);
  GlobalSystem sys = compile_global_equations(spec.global_defs);
  GlobalGraph all(std::move(sys.nodes), 0);
  for (const auto& [name, root] : sys.roots) spec.globals[name] = minimize(all.at(root));

  for (const auto& def : spec.ignored_defs) spec.ignored[def.name] = def.participants;
}

}  // namespace

// ---------------------------------------------------------------------------

const Session& SpecFile::session(const std::string& name) const {
  auto it = sessions.find(name);
  if (it != sessions.end()) return it->second;
  static const Session empty;
  if (name == "Empty") return empty;
  throw Error(ErrorKind::UndefinedName, "no session named '" + name + "'");
}

const GlobalGraph& SpecFile::global(const std::string& name) const {
  auto it = globals.find(name);
  if (it != globals.end()) return it->second;
  static const GlobalGraph end;
  if (name == "End" || name == "end") return end;
  throw Error(ErrorKind::UndefinedName, "no global type named '" + name + "'");
}

const ParticipantSet& SpecFile::ignored_set(const std::string& name) const {
  auto it = ignored.find(name);
  if (it != ignored.end()) return it->second;
  throw Error(ErrorKind::UndefinedName, "no ignored set named '" + name + "'");
}

SpecFile parse(std::string_view text) {
  SpecFile spec;
  Parser(text).file(spec);
  compile(spec);
  return spec;
}

SpecFile parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::SyntaxError, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

GlobalGraph parse_global(std::string_view text) {
  auto eqs = Parser(text).global_equations();
  resolve_builtin_end(eqs);
  return build_global_graph(eqs);
}

ProcessGraph parse_process(std::string_view text) {
  return build_process_graph(Parser(text).process_equations());
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string join_choices(const std::vector<std::string>& parts) {
  if (parts.size() == 1) return parts.front();
  std::string out = "{";
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out + "}";
}

// Generic equation printer over a node vector; `head` renders the prefix of
// a non-terminal node (`q!`, `p->q:`), `end_text` the terminal node, and
// `show_end` whether a terminal continuation is written out.
template <class Node>
struct GraphPrinter {
  const std::vector<Node>& nodes;
  std::function<bool(const Node&)> terminal;
  std::function<std::string(const Node&)> head;
  std::string end_text;
  bool show_end;

  std::vector<std::vector<StateId>> preds() const {
    std::vector<std::vector<StateId>> out(nodes.size());
    for (StateId i = 0; i < nodes.size(); ++i)
      for (const auto& b : nodes[i].branches) out[b.target].push_back(i);
    return out;
  }

  std::vector<StateId> bfs(StateId root) const {
    std::vector<char> seen(nodes.size(), 0);
    std::vector<StateId> order{root};
    seen[root] = 1;
    for (std::size_t i = 0; i < order.size(); ++i)
      for (const auto& b : nodes[order[i]].branches)
        if (!seen[b.target]) {
          seen[b.target] = 1;
          order.push_back(b.target);
        }
    return order;
  }

  bool cyclic(StateId root) const {
    std::vector<int> color(nodes.size(), 0);
    std::function<bool(StateId)> dfs = [&](StateId n) {
      color[n] = 1;
      for (const auto& b : nodes[n].branches) {
        if (color[b.target] == 1) return true;
        if (color[b.target] == 0 && dfs(b.target)) return true;
      }
      color[n] = 2;
      return false;
    };
    return dfs(root);
  }

  std::string term(StateId n, const std::map<StateId, std::string>& names, bool top) const {
    const Node& node = nodes[n];
    if (terminal(node)) return end_text;
    if (!top) {
      auto it = names.find(n);
      if (it != names.end()) return it->second;
    }
    std::vector<std::string> parts;
    for (const auto& b : node.branches) {
      std::string part = b.label;
      if (show_end || !terminal(nodes[b.target]))
        part += " . " + term(b.target, names, false);
      parts.push_back(std::move(part));
    }
    return head(node) + join_choices(parts);
  }

  std::string print(StateId root, bool expanded, const std::string& base) const {
    if (terminal(nodes[root])) return end_text;
    std::vector<StateId> order = bfs(root);
    std::vector<StateId> named;
    if (expanded) {
      if (!cyclic(root)) return term(root, {}, true);
      for (StateId n : order)
        if (!terminal(nodes[n])) named.push_back(n);
    } else {
      auto ps = preds();
      std::vector<char> live(nodes.size(), 0);
      for (StateId n : order) live[n] = 1;
      for (StateId n : order) {
        if (terminal(nodes[n])) continue;
        std::size_t in = 0;
        for (StateId p : ps[n]) in += live[p];
        if (n == root ? in > 0 : in > 1) named.push_back(n);
      }
      if (named.empty()) return term(root, {}, true);
      if (named.front() != root) named.insert(named.begin(), root);
    }
    std::map<StateId, std::string> names;
    int k = 0;
    for (StateId n : named) names[n] = n == root ? base : base + std::to_string(++k);
    std::string out;
    for (StateId n : named) out += names[n] + " = " + term(n, names, true) + "\n";
    return out;
  }
};

}  // namespace

std::string print_global(const GlobalGraph& g, PrintStyle style, const std::string& base) {
  GlobalGraph m = minimize(g);
  GraphPrinter<GlobalNode> printer{
      m.nodes(), [](const GlobalNode& n) { return n.kind == GlobalKind::End; },
      [](const GlobalNode& n) { return n.from + "->" + n.to + ":"; }, "end", true};
  return printer.print(m.root(), style == PrintStyle::Expanded, base);
}

namespace {
std::string process_head(const ProcessNode& n) {
  return n.peer + (n.kind == ProcessKind::Send ? "!" : "?");
}
}  // namespace

std::string print_process(const ProcessGraph& g, const std::string& base) {
  ProcessGraph m = minimize(g);
  GraphPrinter<ProcessNode> printer{
      m.nodes(), [](const ProcessNode& n) { return n.kind == ProcessKind::End; },
      process_head, "0", false};
  return printer.print(m.root(), false, base);
}

std::string print_state(const ProcessStore& store, StateId id) {
  std::vector<char> on_path(store.size(), 0);
  std::function<std::string(StateId)> go = [&](StateId n) -> std::string {
    const ProcessNode& node = store.node(n);
    if (node.kind == ProcessKind::End) return "0";
    if (!store.names(n).empty()) return store.names(n).front();
    if (on_path[n]) return "@" + std::to_string(n);
    on_path[n] = 1;
    std::vector<std::string> parts;
    for (const auto& b : node.branches) {
      std::string part = b.label;
      if (store.node(b.target).kind != ProcessKind::End) part += " . " + go(b.target);
      parts.push_back(std::move(part));
    }
    on_path[n] = 0;
    return process_head(node) + join_choices(parts);
  };
  return go(id);
}

std::string print_session(const Session& s) {
  Session n = normalize_session(s);
  if (n.bindings().empty()) return "0";
  std::string out;
  for (const auto& b : n.bindings()) {
    if (!out.empty()) out += " | ";
    out += b.participant + ": " + print_state(n.store(), b.state);
  }
  return out;
}

std::string print_participants(const ParticipantSet& ps) {
  std::string out = "{";
  bool first = true;
  for (const auto& p : ps) {
    out += (first ? "" : ", ") + p;
    first = false;
  }
  return out + "}";
}

namespace {

std::string print_term(const ProcessTerm& t) {
  switch (t.kind) {
    case ProcessTerm::Kind::Nil: return "0";
    case ProcessTerm::Kind::Ref: return t.name;
    default: break;
  }
  std::vector<std::string> parts;
  for (const auto& c : t.branches) {
    std::string part = c.label;
    if (c.continuation.kind != ProcessTerm::Kind::Nil) part += " . " + print_term(c.continuation);
    parts.push_back(std::move(part));
  }
  return t.name + (t.kind == ProcessTerm::Kind::Send ? "!" : "?") + join_choices(parts);
}

std::string print_term(const GlobalTerm& t) {
  switch (t.kind) {
    case GlobalTerm::Kind::End: return "end";
    case GlobalTerm::Kind::Ref: return t.name;
    default: break;
  }
  std::vector<std::string> parts;
  for (const auto& c : t.branches) parts.push_back(c.label + " . " + print_term(c.continuation));
  return t.from + "->" + t.to + ":" + join_choices(parts);
}

}  // namespace

std::string print_spec(const SpecFile& spec) {
  std::string out;
  for (const auto& eq : spec.process_defs)
    out += "process " + eq.name + " = " + print_term(eq.body) + "\n";
  for (const auto& eq : spec.global_defs)
    out += "global " + eq.name + " = " + print_term(eq.body) + "\n";
  for (const auto& def : spec.session_defs) {
    out += "session " + def.name + " = ";
    if (def.bindings.empty()) out += "0";
    for (std::size_t i = 0; i < def.bindings.size(); ++i)
      out += (i ? " | " : "") + def.bindings[i].participant + ": " +
             print_term(def.bindings[i].process);
    out += "\n";
  }
  for (const auto& def : spec.ignored_defs)
    out += "ignored " + def.name + " = " + print_participants(def.participants) + "\n";
  return out;
}

}  // namespace mpst
