#include <cmath>

#include "doctest.h"
#include "mdplearn/mdp.hpp"
#include "mdplearn/rng.hpp"
#include "mdplearn/sul.hpp"
#include "oracles.hpp"

using namespace mdplearn;

namespace {

// Three states a/b/c where i0 from the a-state splits between b and c and
// everything else returns to a.
Mdp make_split(double to_b) {
  Mdp m;
  m.inputs.add("i0");
  m.inputs.add("i1");
  int oa = m.outputs.add("a");
  int ob = m.outputs.add("b");
  int oc = m.outputs.add("c");
  int qa = m.add_state("q0", oa);
  int qb = m.add_state("q1", ob);
  int qc = m.add_state("q2", oc);
  m.trans[qa][0] = {{qb, to_b}, {qc, 1.0 - to_b}};
  m.trans[qa][1] = {{qa, 1.0}};
  m.trans[qb][0] = {{qa, 1.0}};
  m.trans[qb][1] = {{qb, 1.0}};
  m.trans[qc][0] = {{qa, 1.0}};
  m.trans[qc][1] = {{qc, 1.0}};
  return m;
}

}  // namespace

TEST_CASE("successor resolves by observed output") {
  Mdp m = make_split(0.3);
  CHECK(successor(m, 0, 0, m.outputs.require("b")) == 1);
  CHECK(successor(m, 0, 0, m.outputs.require("c")) == 2);
  CHECK_FALSE(successor(m, 0, 0, m.outputs.require("a")).has_value());
}

TEST_CASE("run_trace follows observable traces only") {
  Mdp m = make_split(0.3);
  Trace ok(std::vector<int>{0, 0, 1, 0, 0});  // a i0 b i0 a
  CHECK(run_trace(m, ok) == 0);
  Trace bad(std::vector<int>{0, 1, 1});  // i1 keeps the label at a
  CHECK_FALSE(run_trace(m, bad).has_value());
  Trace wrong_start(std::vector<int>{1});
  CHECK_FALSE(run_trace(m, wrong_start).has_value());
  CHECK_THROWS_AS(run_trace(m, Trace(std::vector<int>{0, 9, 0})), std::invalid_argument);
}

TEST_CASE("semantics gives the output distribution after a test sequence") {
  Mdp m = make_split(0.3);
  auto d = semantics(m, TestSequence(std::vector<int>{0, 0}));
  REQUIRE(d.has_value());
  CHECK((*d).at(m.outputs.require("b")) == doctest::Approx(0.3));
  CHECK((*d).at(m.outputs.require("c")) == doctest::Approx(0.7));
  auto initial = semantics(m, TestSequence());
  REQUIRE(initial.has_value());
  CHECK((*initial).at(m.outputs.require("a")) == doctest::Approx(1.0));

  // unobservable prefix
  auto u = semantics(m, TestSequence(std::vector<int>{0, 1, 1, 0}));
  CHECK_FALSE(u.has_value());
}

TEST_CASE("path probability multiplies scheduler, transition and length mass") {
  Mdp m = make_split(0.25);
  MemorylessScheduler pick_i0{0, 0, 0};
  LengthDistribution len = [](std::size_t n) { return n == 2 ? 0.5 : 0.0; };
  Path path;
  path.states = {0, 1, 0};
  path.inputs = {0, 0};
  double p = path_probability(m, pick_i0, len, path);
  CHECK(p == doctest::Approx(0.5 * 0.25 * 1.0));

  // scheduler that never plays i0 gives probability zero
  MemorylessScheduler pick_i1{1, 1, 1};
  CHECK(path_probability(m, pick_i1, len, path) == 0.0);

  Path bad;
  bad.states = {1};
  CHECK_THROWS_AS(path_probability(m, pick_i0, len, bad), std::invalid_argument);
}

TEST_CASE("randomized schedulers weight the chosen inputs") {
  Mdp m = make_split(0.5);
  RandomizedScheduler sched = [](const Path&) {
    return std::map<int, double>{{0, 0.5}, {1, 0.5}};
  };
  LengthDistribution len = [](std::size_t) { return 1.0; };
  Path path;
  path.states = {0, 1};
  path.inputs = {0};
  CHECK(path_probability(m, sched, len, path) == doctest::Approx(0.25));
}

TEST_CASE("minimize collapses equivalent states and drops unreachable ones") {
  Mdp m;
  m.inputs.add("i");
  int oa = m.outputs.add("a");
  int ob = m.outputs.add("b");
  int q0 = m.add_state("q0", oa);
  int q1 = m.add_state("q1", ob);
  int q2 = m.add_state("q2", ob);   // same behaviour as q1
  int q3 = m.add_state("q3", oa);   // unreachable
  m.trans[q0][0] = {{q1, 0.5}, {q0, 0.5}};
  m.trans[q1][0] = {{q0, 1.0}};
  m.trans[q2][0] = {{q0, 1.0}};
  m.trans[q3][0] = {{q2, 1.0}};
  Mdp small = minimize(m);
  CHECK(small.num_states() == 2);
  CHECK_FALSE(equivalence_check(m, small).has_value());
  CHECK(minimize(small).num_states() == 2);
}

TEST_CASE("minimize keeps random models equivalent") {
  Rng rng(20260814);
  for (int k = 0; k < 25; ++k) {
    Mdp m = testing::random_det_mdp(rng, 6, 2, 3);
    Mdp small = minimize(m);
    CHECK(small.num_states() <= m.num_states());
    CHECK_FALSE(equivalence_check(m, small).has_value());
    CHECK(minimize(small).num_states() == small.num_states());
    CHECK(validate(small).empty());
  }
}

TEST_CASE("equivalence check finds shortest distinguishing sequences") {
  Mdp a = make_split(0.3);
  Mdp b = make_split(0.3);
  CHECK_FALSE(equivalence_check(a, b).has_value());

  Mdp c = make_split(0.4);
  auto cex = equivalence_check(a, c);
  REQUIRE(cex.has_value());
  CHECK(cex->symbols() == std::vector<int>{0, 0});  // a . i0
  auto da = semantics(a, *cex);
  auto dc = semantics(c, *cex);
  REQUIRE(da.has_value());
  REQUIRE(dc.has_value());
  CHECK_FALSE(distributions_equal(*da, *dc, kProbTolerance));
}

TEST_CASE("initial label mismatch is distinguished by the empty sequence") {
  Mdp a = make_split(0.3);
  Mdp b = make_split(0.3);
  b.labels[0] = b.outputs.require("b");
  b.labels[1] = b.outputs.require("a");
  auto cex = equivalence_check(a, b);
  REQUIRE(cex.has_value());
  CHECK(cex->empty());
}

TEST_CASE("equivalence check requires matching input alphabets") {
  Mdp a = make_split(0.3);
  Mdp b = make_split(0.3);
  b.inputs = Alphabet({"x", "y"});
  CHECK_THROWS_AS(equivalence_check(a, b), std::invalid_argument);
}

TEST_CASE("validate reports broken invariants") {
  Mdp good = build_coffee_machine();
  CHECK(validate(good).empty());

  Mdp bad = good;
  bad.trans[0][0] = {{0, 0.5}};  // mass does not sum to one
  CHECK_FALSE(validate(bad).empty());

  Mdp dup = good;
  // two successors with the same label under one input
  dup.trans[1][0] = {{0, 0.5}, {0, 0.5}};
  CHECK_FALSE(validate(dup).empty());
}

TEST_CASE("format helpers render symbol names") {
  Mdp m = build_coffee_machine();
  Trace t(m.labels[m.initial]);
  t = t.extended(m.inputs.require("coin"), m.outputs.require("beep"));
  CHECK(format_trace(m, t) == "init.coin.beep");
  CHECK(format_test_sequence(m, t.with_input(m.inputs.require("but"))) == "init.coin.beep.but");
}
