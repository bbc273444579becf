#include <set>
#include <tuple>

#include "doctest.h"
#include "mpst/frontend.hpp"
#include "mpst/random.hpp"
#include "mpst/semantics.hpp"

using namespace mpst;

namespace {

std::string golden(const std::string& name) { return std::string(MPST_GOLDEN_DIR) + "/" + name; }

Session session_of(const std::string& text, const std::string& name = "M") {
  return parse(text).session(name);
}

// Edge set keyed by printed sessions, independent of state numbering.
std::set<std::tuple<std::string, std::string, std::string>> edge_set(const StateGraph& g) {
  std::set<std::tuple<std::string, std::string, std::string>> out;
  for (const auto& e : g.edges)
    out.insert({print_session(g.states[e.from]), to_string(e.label), print_session(g.states[e.to])});
  return out;
}

}  // namespace

TEST_CASE("session_transitions: social media first step") {
  auto spec = parse_file(golden("social_media.mpst"));
  auto ts = session_transitions(spec.session("M"));
  REQUIRE(ts.size() == 1);
  CHECK(to_string(ts[0].label) == "q hello p");
  CHECK(print_session(ts[0].target) ==
        "p: u!req . u?{dnd . P, grtd . q!hello} | q: u?{dnd . Q, grtd . p?hello} | u: U");
  CHECK(reduce(spec.session("M"), {"q", "hello", "p"}).value() == ts[0].target);
  CHECK_FALSE(reduce(spec.session("M"), {"p", "req", "u"}));
  CHECK_FALSE(reduce(Session(), {"p", "a", "q"}));
}

TEST_CASE("session_transitions: label inclusion") {
  auto spec = parse_file(golden("basic.mpst"));
  CHECK(session_transitions(spec.session("Mismatch")).empty());
  auto ts = session_transitions(spec.session("Widen"));
  REQUIRE(ts.size() == 1);
  CHECK(to_string(ts[0].label) == "p a q");
  CHECK(ts[0].target.bindings().empty());
  CHECK(session_transitions(spec.session("BothSend")).empty());
}

TEST_CASE("global_transitions") {
  auto g = parse_global("p->q:{a . r->s:x, b . end}");
  auto ts = global_transitions(g);
  REQUIRE(ts.size() == 2);
  CHECK(to_string(ts[0].label) == "p a q");
  CHECK(bisimilar(ts[0].target, parse_global("r->s:x")));
  CHECK(ts[1].target.is_end());
  CHECK(global_transitions(GlobalGraph()).empty());

  auto gp = parse_file(golden("unbounded.mpst")).global("Gp");
  auto l1 = global_reduce(gp, {"p", "l1", "q"});
  REQUIRE(l1);
  CHECK(bisimilar(*l1, parse_global("r->s:l . end")));
  auto l2 = global_reduce(gp, {"p", "l2", "q"});
  REQUIRE(l2);
  CHECK(bisimilar(*l2, parse_global("X = r->s:l . Gp\nGp = r->s:l . p->q:{l1, l2 . Gp}")));
  CHECK(global_reduce(gp, {"r", "l", "s"}));

  // An inner label blocked in one branch is not enabled at the root.
  CHECK_FALSE(global_reduce(parse_global("p->q:{a . r->s:x, b . end}"), {"r", "x", "s"}));
  // A loop that never reaches the label does not enable it.
  CHECK_FALSE(global_reduce(parse_global("G = p->q:{a . G, b . r->s:x}"), {"r", "x", "s"}));
}

TEST_CASE("explore") {
  auto social = parse_file(golden("social_media.mpst")).session("M");
  auto g = explore(social);
  auto stuck = g.find(session_of("session M = u: p?req . p!{dnd . q!dnd . 0, grtd . q!grtd . 0}\n"));
  CHECK_FALSE(stuck);  // different term; the real one loops back to U
  bool found = false;
  for (std::size_t i = 0; i < g.states.size(); ++i)
    if (print_session(g.states[i]) == "u: U") {
      found = true;
      CHECK(g.out[i].empty());
    }
  CHECK(found);
  CHECK(g.states.size() == 7);

  CHECK(explore(session_of("session M = p: 0")).states.size() == 1);
  CHECK(explore(session_of("session M = p: 0")).edges.empty());

  auto buyer = explore(parse_file(golden("buyer_seller.mpst")).session("M"));
  CHECK(buyer.states.size() == 3);
  std::set<std::string> printed;
  for (const auto& s : buyer.states) printed.insert(print_session(s));
  CHECK(printed == std::set<std::string>{"b: B | c: C | s: S", "c: C | s: c!ship", "0"});

  ExploreOptions tiny;
  tiny.state_cap = 2;
  CHECK_THROWS_AS(explore(social, tiny), Error);
}

TEST_CASE("properties on random sessions") {
  Rng rng(11);
  for (int round = 0; round < 200; ++round) {
    Session s = round % 2 ? random_session(rng) : random_structured_session(rng);
    auto ts = session_transitions(s);
    for (const auto& t : ts) {
      // Determinism.
      CHECK(reduce(s, t.label).value() == t.target);
      // Locality: bystanders keep their state, and swapping a bystander's
      // process does not change the step of the others.
      for (const auto& b : s.bindings()) {
        if (involves(t.label, b.participant)) continue;
        CHECK(t.target.state_of(b.participant) == b.state);
        auto other = rebind(s, b.participant, random_process(rng, {"p", "q"}));
        auto step = reduce(other, t.label);
        REQUIRE(step);
        CHECK(sessions_equivalent(step->without({b.participant}), t.target.without({b.participant})));
      }
    }
    // Order independence of exploration.
    ExploreOptions dfs;
    dfs.order = ExploreOptions::Order::DepthFirst;
    auto a = explore(s), b = explore(s, dfs);
    CHECK(a.states.size() == b.states.size());
    CHECK(edge_set(a) == edge_set(b));
  }
}

TEST_CASE("interleaved global labels are enabled in every branch") {
  Rng rng(5);
  for (int round = 0; round < 300; ++round) {
    GlobalGraph g = random_global(rng);
    const auto& root = g.root_node();
    for (const auto& t : global_transitions(g)) {
      if (t.label.sender == root.from && t.label.receiver == root.to) continue;
      CHECK_FALSE(involves(t.label, root.from));
      CHECK_FALSE(involves(t.label, root.to));
      for (const auto& b : root.branches) CHECK(global_reduce(g.at(b.target), t.label));
    }
  }
}
