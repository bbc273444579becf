#include <random>

#include "doctest.h"
#include "mpst/terms.hpp"
#include "oracles.hpp"

using namespace mpst;

namespace {

ProcessTerm nil() { return {}; }
ProcessTerm ref(std::string n) { return {ProcessTerm::Kind::Ref, std::move(n), {}, {}}; }
ProcessTerm act(ProcessTerm::Kind k, std::string peer,
                std::vector<std::pair<std::string, ProcessTerm>> bs) {
  ProcessTerm t{k, std::move(peer), {}, {}};
  for (auto& [l, c] : bs) t.branches.push_back({l, std::move(c), {}});
  return t;
}
ProcessTerm out(std::string peer, std::vector<std::pair<std::string, ProcessTerm>> bs) {
  return act(ProcessTerm::Kind::Send, std::move(peer), std::move(bs));
}
ProcessTerm in(std::string peer, std::vector<std::pair<std::string, ProcessTerm>> bs) {
  return act(ProcessTerm::Kind::Receive, std::move(peer), std::move(bs));
}

ProcessGraph graph(std::vector<ProcessEquation> eqs) { return build_process_graph(eqs); }

ErrorKind error_of(std::vector<ProcessEquation> eqs) {
  try {
    build_process_graph(eqs);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error");
  return ErrorKind::InvalidTerm;
}

// Random graph with `n` nodes, every node reachable from 0.
ProcessGraph random_graph(std::mt19937_64& rng, int n) {
  std::vector<ProcessNode> nodes(n);
  const char* peers[] = {"p", "q"};
  const char* labels[] = {"a", "b"};
  for (int i = 0; i < n; ++i) {
    if (i > 0 && rng() % 4 == 0) continue;  // End
    auto& node = nodes[i];
    node.kind = rng() % 2 ? ProcessKind::Send : ProcessKind::Receive;
    node.peer = peers[rng() % 2];
    int k = 1 + rng() % 2;
    for (int j = 0; j < k; ++j) node.branches.push_back({labels[j], StateId(rng() % n)});
    if (i + 1 < n) node.branches[0].target = i + 1;
  }
  // Reachability: chain 0 -> 1 -> ... through first branches where possible.
  for (int i = 0; i + 1 < n; ++i)
    if (nodes[i].kind == ProcessKind::End) {
      nodes[i].kind = ProcessKind::Send;
      nodes[i].peer = "p";
      nodes[i].branches = {{"a", StateId(i + 1)}};
    }
  return ProcessGraph(std::move(nodes), 0);
}

}  // namespace

TEST_CASE("build_process_graph: buyer loop") {
  auto g = graph({{"P", out("q", {{"add", ref("P")}, {"pay", nil()}}), {}}});
  CHECK(g.size() == 2);
  const auto& root = g.node(g.root());
  CHECK(root.kind == ProcessKind::Send);
  CHECK(root.find("add")->target == g.root());
  CHECK(g.node(root.find("pay")->target).kind == ProcessKind::End);
}

TEST_CASE("build_process_graph: errors") {
  CHECK(graph({{"P", nil(), {}}}).is_end());
  CHECK(error_of({{"P", ref("P"), {}}}) == ErrorKind::UnguardedRecursion);
  CHECK(error_of({{"P", ref("Q"), {}}, {"Q", ref("P"), {}}}) == ErrorKind::UnguardedRecursion);
  CHECK(error_of({{"P", out("q", {{"a", ref("R")}}), {}}}) == ErrorKind::UndefinedName);
  CHECK(error_of({{"P", out("q", {{"a", nil()}, {"a", nil()}}), {}}}) ==
        ErrorKind::DuplicateBranchLabel);
  CHECK(error_of({{"P", out("q", {}), {}}}) == ErrorKind::EmptyChoice);
  CHECK(error_of({{"P", nil(), {}}, {"P", nil(), {}}}) == ErrorKind::DuplicateDefinition);
}

TEST_CASE("aliases resolve to their target") {
  auto g = graph({{"P", ref("Q"), {}}, {"Q", out("q", {{"a", ref("P")}}), {}}});
  CHECK(g.size() == 1);
  CHECK(g.node(0).find("a")->target == 0);
}

TEST_CASE("minimize: equal loops become identical") {
  auto a = graph({{"P", out("q", {{"a", ref("P")}}), {}}});
  auto b = graph({{"P2", out("q", {{"a", out("q", {{"a", ref("P2")}})}}), {}}});
  int d = int(a.size() + b.size()) * 2;
  CHECK(oracle::unfold(a, d) == oracle::unfold(b, d));
  CHECK(minimize(a) == minimize(b));
  CHECK(bisimilar(a, b));
  CHECK(minimize(minimize(a)) == minimize(a));
  CHECK(minimize(ProcessGraph()) == ProcessGraph());
}

TEST_CASE("minimize agrees with the unfolding oracle on random graphs") {
  std::mt19937_64 rng(7);
  std::vector<ProcessGraph> gs;
  for (int i = 0; i < 60; ++i) gs.push_back(random_graph(rng, 1 + int(rng() % 5)));
  for (const auto& g : gs) {
    auto m = minimize(g);
    CHECK(m.size() <= g.size());
    int d = 2 * int(g.size());
    CHECK(oracle::unfold(g, d) == oracle::unfold(m, d));
    CHECK(minimize(m) == m);
  }
  for (std::size_t i = 0; i < gs.size(); ++i)
    for (std::size_t j = 0; j < gs.size(); ++j) {
      int d = int(gs[i].size() + gs[j].size());
      bool same = oracle::unfold(gs[i], d) == oracle::unfold(gs[j], d);
      CHECK(bisimilar(gs[i], gs[j]) == same);
    }
}

TEST_CASE("sessions: normalization and participants") {
  auto P = graph({{"P", out("q", {{"a", nil()}}), {}}});
  auto Q = graph({{"Q", in("p", {{"a", nil()}}), {}}});
  auto s = make_session({{"q", Q}, {"p", P}, {"r", ProcessGraph()}});
  CHECK(s.is_normalized());
  CHECK(participants(s) == ParticipantSet{"p", "q"});
  CHECK(s.bindings().front().participant == "p");
  CHECK(normalize_session(normalize_session(s)) == s);
  CHECK(participants(make_session({{"p", ProcessGraph()}})).empty());
  CHECK(sessions_equivalent(Session(), make_session({{"p", ProcessGraph()}})));

  auto t = make_session({{"p", P}, {"q", Q}});
  CHECK(sessions_equivalent(s, t));
  CHECK_FALSE(sessions_equivalent(s, make_session({{"p", P}})));
  CHECK_FALSE(sessions_equivalent(s, make_session({{"p", P}, {"q", P}})));

  auto raw = Session(s.store_ptr(), {{"q", s.bindings()[1].state}, {"p", s.bindings()[0].state},
                                    {"z", ProcessStore::kEnd}});
  CHECK_FALSE(raw.is_normalized());
  CHECK(normalize_session(raw) == s);
  CHECK(participants(raw) == participants(s));
  CHECK_THROWS_AS(Session(s.store_ptr(), {{"p", 0}, {"p", 0}}), Error);
}

TEST_CASE("sessions: with, rebind") {
  auto P = graph({{"P", out("q", {{"a", ref("P")}}), {}}});
  auto s = make_session({{"p", P}});
  auto s2 = s.with("p", ProcessStore::kEnd);
  CHECK(s2.bindings().empty());
  auto s3 = rebind(s, "q", P);
  CHECK(participants(s3) == ParticipantSet{"p", "q"});
  CHECK(s3.state_of("p") == s3.state_of("q"));
  CHECK(sessions_equivalent(rebind(s3, "q", ProcessGraph()), s));
}

TEST_CASE("global graphs") {
  std::vector<GlobalNode> nodes(2);
  nodes[0].kind = GlobalKind::Comm;
  nodes[0].from = "b";
  nodes[0].to = "s";
  nodes[0].branches = {{"pay", 1}, {"add", 0}};
  GlobalGraph g(nodes, 0);
  CHECK(g.node(0).branches[0].label == "add");
  CHECK(g.reachable().size() == 2);
  CHECK(g.at(1).is_end());
  CHECK(GlobalGraph().is_end());

  // Unrolled once: same term.
  std::vector<GlobalNode> two(3);
  two[0] = nodes[0];
  two[0].branches = {{"add", 1}, {"pay", 2}};
  two[1] = nodes[0];
  two[1].branches = {{"add", 0}, {"pay", 2}};
  GlobalGraph h(two, 0);
  CHECK(bisimilar(g, h));
  CHECK(canonical_key(g) == canonical_key(h));
  CHECK(oracle::unfold(g, 5) == oracle::unfold(h, 5));

  nodes[0].to = "b";
  CHECK_THROWS_AS(GlobalGraph(nodes, 0), Error);
}
