#include "doctest.h"
#include "mpst/frontend.hpp"
#include "mpst/inference.hpp"
#include "mpst/metatheory.hpp"
#include "mpst/random.hpp"

using namespace mpst;

namespace {

std::string golden(const std::string& name) { return std::string(MPST_GOLDEN_DIR) + "/" + name; }

std::string violations(const MetaReport& r) {
  std::string out;
  for (const auto& v : r.violations) out += v.property + ": " + v.detail + "\n";
  return out;
}

}  // namespace

TEST_CASE("social media triple passes every check") {
  auto spec = parse_file(golden("social_media.mpst"));
  auto r = check_metatheory(spec.global("G"), spec.session("M"), {"u"});
  INFO(violations(r));
  CHECK(r.ok());
  CHECK(r.counts.triples > 1);
  CHECK(r.counts.subject_reduction > 0);
  CHECK(r.counts.session_fidelity > 0);
  CHECK(r.counts.replacement > 0);
  CHECK(r.counts.lock_freedom == 1);
}

TEST_CASE("typable_within picks the smallest subset") {
  auto spec = parse_file(golden("buyer_seller.mpst"));
  const auto& g = spec.global("G");
  const auto& m = spec.session("M");
  auto p = typable_within(g, m, {"c", "s"});
  REQUIRE(p);
  CHECK(*p == ParticipantSet{"c", "s"});
  CHECK_FALSE(typable_within(g, m, {"c"}));
}

TEST_CASE("a rejected root is reported, not checked") {
  auto spec = parse_file(golden("social_media.mpst"));
  auto r = check_metatheory(spec.global("G"), spec.session("M"), {});
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].property == "precondition");
}

TEST_CASE("every accepted golden triple passes") {
  for (const char* file : {"basic.mpst", "buyer_seller.mpst", "social_media.mpst", "unbounded.mpst",
                           "lock_vs_deadlock.mpst"}) {
    auto spec = parse_file(golden(file));
    auto rep = check_file(spec);
    for (const auto& t : rep.triples) {
      INFO(file << " " << t.global << " " << t.session << " " << t.ignored << "\n"
                << violations(t.report));
      CHECK(t.report.ok());
      CHECK(t.accepted != t.rejection.has_value());
    }
  }
}

TEST_CASE("unbounded type never yields an obligation") {
  auto spec = parse_file(golden("unbounded.mpst"));
  auto rep = check_file(spec);
  bool saw = false;
  for (const auto& t : rep.triples)
    if (t.global == "Gp") {
      saw = true;
      CHECK_FALSE(t.accepted);
      REQUIRE(t.rejection);
      CHECK(t.rejection->kind == RejectionKind::Unbounded);
    }
  CHECK(saw);
}

TEST_CASE("random inferred triples pass") {
  Rng rng(11);
  InferOptions opts;
  opts.max_size = 10;
  opts.max_outcomes = 4;
  opts.max_expansions = 100'000;
  int checked = 0;
  for (int i = 0; i < 200 && checked < 40; ++i) {
    Session m = i % 2 ? random_session(rng) : random_structured_session(rng);
    auto r = infer(m, opts);
    for (const auto& sol : r.solutions) {
      MetaOptions mo;
      mo.seed = static_cast<std::uint64_t>(i);
      auto rep = check_metatheory(sol.global, m, sol.ignored, mo);
      INFO(violations(rep));
      CHECK(rep.ok());
      ++checked;
    }
  }
  CHECK(checked >= 40);
}

TEST_CASE("growing global types stop at the configuration cap") {
  // r->q can overtake the pending s->p:a, so every step adds one more prefix.
  auto g = parse_global("G = s->p:a . r->q:{ b . G, c . G }");
  auto spec = parse("process P = s?a . P\nprocess Q = r?{ b . Q, c . Q }\n"
                    "process R = q!{ b . R, c . R }\nprocess S = p!a . S\n"
                    "session M = p: P | q: Q | r: R | s: S\n");
  MetaOptions opts;
  opts.max_triples = 40;
  auto r = check_metatheory(g, spec.session("M"), {}, opts);
  INFO(violations(r));
  CHECK(r.ok());
  CHECK(r.truncated);
  CHECK(r.counts.triples == 40);
}

TEST_CASE("projections of random global types pass") {
  Rng rng(5);
  RandomOptions ro;
  ro.max_nodes = 7;
  ro.labels = {"a", "b", "c"};
  int accepted = 0;
  for (int i = 0; i < 200; ++i) {
    auto g = random_global(rng, ro);
    auto m = project_sloppy(g);
    auto all = participants(m);
    for (const auto& within : {ParticipantSet{}, all}) {
      auto p = typable_within(g, m, within);
      if (!p) continue;
      ++accepted;
      MetaOptions mo;
      mo.seed = static_cast<std::uint64_t>(i);
      mo.max_triples = 64;
      auto r = check_metatheory(g, m, *p, mo);
      INFO(print_global(g) << print_session(m) << "\n" << violations(r));
      CHECK(r.ok());
    }
  }
  CHECK(accepted > 100);
}
