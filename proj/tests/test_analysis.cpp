#include "doctest.h"
#include "mpst/analysis.hpp"
#include "mpst/frontend.hpp"
#include "mpst/random.hpp"
#include "oracles.hpp"

using namespace mpst;

namespace {

std::string golden(const std::string& name) { return std::string(MPST_GOLDEN_DIR) + "/" + name; }

}  // namespace

TEST_CASE("plays and depth") {
  auto social = parse_file(golden("social_media.mpst"));
  auto buyer = parse_file(golden("buyer_seller.mpst"));
  auto unb = parse_file(golden("unbounded.mpst"));
  CHECK(plays(social.global("G")) == ParticipantSet{"p", "q", "u"});
  CHECK(plays(GlobalGraph()).empty());
  CHECK(plays(buyer.global("G")) == ParticipantSet{"b", "s"});

  CHECK(depth(GlobalGraph(), "p") == Depth{0});
  CHECK(depth(social.global("G"), "u") == Depth{2});
  CHECK(depth(social.global("G"), "q") == Depth{1});
  CHECK(depth(social.global("G"), "z") == Depth{0});
  CHECK_FALSE(depth(unb.global("G"), "r").finite());
  CHECK(depth(unb.global("Gp"), "p") == Depth{2});
}

TEST_CASE("bounded") {
  auto social = parse_file(golden("social_media.mpst"));
  auto unb = parse_file(golden("unbounded.mpst"));
  CHECK(bounded(social.global("G")).bounded);
  auto b = bounded(unb.global("G"));
  CHECK_FALSE(b.bounded);
  CHECK(b.node == unb.global("G").root());
  CHECK(b.participant == "r");
  CHECK_FALSE(bounded(unb.global("Gp")).bounded);
  CHECK(bounded(unb.global("Gfix")).bounded);
  CHECK(bounded(GlobalGraph()).bounded);
  // Finite but unbounded: q is absent on the first path.
  CHECK_FALSE(bounded(parse_global("p->r:{a . q->r:x, b . end}")).bounded);
}

TEST_CASE("depth and boundedness agree with path enumeration") {
  Rng rng(3);
  for (int round = 0; round < 400; ++round) {
    GlobalGraph g = random_global(rng);
    auto table = bounded_table(g);
    bool all_finite = true;
    for (StateId n = 0; n < g.size(); ++n) {
      for (const auto& p : {"p", "q", "r", "s"}) {
        auto expect = oracle::depth(g.at(n), p);
        auto got = depth(g.at(n), p);
        CHECK(got.value == expect);
        if (plays(g.at(n)).count(p) && !expect) all_finite = false;
      }
      // bounded_table agrees with the definition at every node.
      bool here = true;
      for (StateId m : g.at(n).reachable())
        for (const auto& p : plays(g.at(m)))
          if (!oracle::depth(g.at(m), p)) here = false;
      CHECK(bool(table[n]) == here);
    }
    CHECK(bounded(g).bounded == all_finite);
    if (!bounded(g).bounded) CHECK_FALSE(depth(g.at(bounded(g).node), bounded(g).participant).finite());
  }
}

TEST_CASE("top partner") {
  auto social = parse_file(golden("social_media.mpst")).session("M");
  CHECK(top_partner(social, "p") == "q");
  CHECK(top_partner(social, "u") == "p");
  CHECK_FALSE(top_partner(social, "z"));
}

TEST_CASE("lock and deadlock freedom on the examples") {
  auto social = parse_file(golden("social_media.mpst")).session("M");
  CHECK(excluded_lock_free(social, {"u"}).holds);
  CHECK_FALSE(excluded_lock_free(social, {"u"}).note);
  auto v = excluded_lock_free(social, {});
  CHECK_FALSE(v.holds);
  CHECK(v.state_text == "u: U");
  CHECK(v.participant == "u");
  CHECK_FALSE(excluded_deadlock_free(social, {}).holds);

  auto lock = parse_file(golden("lock_vs_deadlock.mpst")).session("M");
  v = excluded_lock_free(lock, {});
  CHECK_FALSE(v.holds);
  CHECK(v.participant == "r");
  CHECK(excluded_lock_free(lock, {"r"}).holds);
  CHECK(excluded_deadlock_free(lock, {}).holds);
  CHECK(excluded_deadlock_free(Session(), {}).holds);

  auto buyer = parse_file(golden("buyer_seller.mpst")).session("M");
  v = excluded_lock_free(buyer, {});
  CHECK(v.holds);
  CHECK(v.note);
}

TEST_CASE("liveness agrees with the forward-search oracle") {
  Rng rng(17);
  for (int round = 0; round < 300; ++round) {
    Session s = round % 2 ? random_session(rng) : random_structured_session(rng);
    auto g = explore(s);
    auto ps = participants(s);
    std::vector<ParticipantSet> sets{{}};
    for (const auto& p : ps) sets.push_back({p});
    sets.push_back(ps);
    for (const auto& ignored : sets) {
      auto lf = excluded_lock_free(g, ignored);
      auto df = excluded_deadlock_free(g, ignored);
      CHECK(lf.holds == oracle::lock_free(g, ignored));
      CHECK(df.holds == oracle::deadlock_free(g, ignored));
      if (!df.holds) CHECK_FALSE(lf.holds);
      if (!lf.holds) {
        CHECK_FALSE(ignored.count(lf.participant));
        CHECK(g.states[lf.state].state_of(lf.participant));
        CHECK_FALSE(oracle::can_progress(g, lf.state, lf.participant));
      }
      // Monotone in the ignored set.
      if (lf.holds) CHECK(excluded_lock_free(g, ps).holds);
    }
    std::vector<Participant> names(ps.begin(), ps.end());
    CHECK(progress_table(g, names, Execution::Serial) ==
          progress_table(g, names, Execution::Parallel));
  }
}
