#include <cmath>

#include "doctest.h"
#include "mdplearn/mdp.hpp"
#include "mdplearn/rng.hpp"
#include "mdplearn/sampling_learning.hpp"
#include "mdplearn/sul.hpp"
#include "oracles.hpp"

using namespace mdplearn;

TEST_CASE("hoeffding bound against the closed form") {
  double expected = 0.2 * std::sqrt(0.5 * std::log(2.0 / 0.05));
  CHECK(std::abs(hoeffding_bound(100, 100, 0.05) - expected) < 1e-15);
  CHECK(std::abs(hoeffding_bound(100, 100, 0.05) - 0.2716) < 1e-4);
  // more data tightens the bound
  CHECK(hoeffding_bound(1000, 1000, 0.05) < hoeffding_bound(100, 100, 0.05));
  // more confidence demanded widens it
  CHECK(hoeffding_bound(100, 100, 0.01) > hoeffding_bound(100, 100, 0.05));
  CHECK_THROWS_AS(hoeffding_bound(0, 100, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(hoeffding_bound(100, 100, 0.0), std::invalid_argument);
}

TEST_CASE("the documented frequency gaps at n=100") {
  CountMap even{{0, 50}, {1, 50}};
  CountMap skewed{{0, 80}, {1, 20}};
  CountMap close{{0, 60}, {1, 40}};
  CHECK(counts_differ(even, skewed, 0.05));       // gap 0.3 > 0.2716
  CHECK_FALSE(counts_differ(even, close, 0.05));  // gap 0.1 < 0.2716
}

TEST_CASE("difference testing is symmetric") {
  Rng rng(55);
  for (int k = 0; k < 1000; ++k) {
    CountMap a, b;
    int na = rng.uniform_int(4);
    int nb = rng.uniform_int(4);
    for (int o = 0; o < na; ++o) a[rng.uniform_int(5)] += 1 + rng.uniform_int(200);
    for (int o = 0; o < nb; ++o) b[rng.uniform_int(5)] += 1 + rng.uniform_int(200);
    CHECK(counts_differ(a, b, 0.05) == counts_differ(b, a, 0.05));
    CHECK(counts_differ_bound_only(a, b, 0.05) == counts_differ_bound_only(b, a, 0.05));
  }
}

TEST_CASE("zero totals never differ; one-sided support does") {
  CountMap empty;
  CountMap some{{0, 100}};
  CHECK_FALSE(counts_differ(empty, some, 0.05));
  CHECK_FALSE(counts_differ(empty, empty, 0.05));
  CHECK_FALSE(counts_differ(some, some, 0.05));

  // an output seen on exactly one side separates immediately...
  CountMap leaky{{0, 99}, {1, 1}};
  CHECK(counts_differ(some, leaky, 0.05));
  // ...but the bound-only variant tolerates it below the bound
  CHECK_FALSE(counts_differ_bound_only(some, leaky, 0.05));
  CountMap heavy{{0, 50}, {1, 50}};
  CHECK(counts_differ_bound_only(some, heavy, 0.05));
}

TEST_CASE("alpha schedule replaces a fixed alpha when configured") {
  LearnerConfig cfg;
  cfg.alpha = 0.05;
  CHECK(cfg.effective_alpha(10) == 0.05);
  CHECK(cfg.effective_alpha(1000000) == 0.05);
  cfg.alpha_exponent = 3.0;
  CHECK(cfg.effective_alpha(10) == doctest::Approx(1e-3));
  CHECK(cfg.effective_alpha(1) == doctest::Approx(1.0));
  CHECK(cfg.effective_alpha(0) == doctest::Approx(1.0));  // capped
}

TEST_CASE("a sampled table over exact frequencies reproduces the coffee machine") {
  Mdp truth = build_coffee_machine();
  testing::ExactFrequencySource source(truth, 1000000);
  SampledObservationTable table(source, truth.inputs, truth.outputs,
                                truth.labels[truth.initial]);
  table.set_alpha(0.05);
  table.make_closed_and_consistent();
  Hypothesis h = table.build_hypothesis();
  CHECK(h.model.num_states() == 4);  // three regular states plus the sink
  CHECK(h.chaos_state == 3);
  CHECK(h.model.outputs.name(h.model.labels[h.chaos_state]) == "chaos");
  CHECK_FALSE(h.chaos_reachable());
  Mdp stripped = h.stripped();
  CHECK(stripped.num_states() == 3);
  CHECK_FALSE(equivalence_check(truth, stripped).has_value());
  CHECK(table.unambiguity_ratio() == doctest::Approx(1.0));
  CHECK(table.incomplete_sequences().empty());
}

TEST_CASE("trimming keeps the derived hypothesis intact") {
  Mdp truth = build_coffee_machine();
  testing::ExactFrequencySource source(truth, 1000000);
  SampledObservationTable table(source, truth.inputs, truth.outputs,
                                truth.labels[truth.initial]);
  // grow the table with redundant rows first
  int coin = truth.inputs.require("coin");
  int but = truth.inputs.require("but");
  int init = truth.outputs.require("init");
  int beep = truth.outputs.require("beep");
  table.add_counterexample(TestSequence(std::vector<int>{init, but, init, but, init, coin}));
  table.add_counterexample(TestSequence(std::vector<int>{init, coin, beep, coin, beep, coin}));
  table.make_closed_and_consistent();
  Hypothesis before = table.build_hypothesis();
  int removed = table.trim(before);
  CHECK(removed > 0);
  table.make_closed_and_consistent();
  Hypothesis after = table.build_hypothesis();
  CHECK_FALSE(equivalence_check(before.model, after.model).has_value());
}

TEST_CASE("unestimable transitions lead to the sink") {
  // a store that only ever saw the initial state makes every extension
  // unknown: the hypothesis routes them to the sink
  Mdp truth = build_coffee_machine();
  SampleStore store(truth.labels[truth.initial], truth.inputs.size());
  store.add_trace(Trace(truth.labels[truth.initial]), 50);
  StoreFrequencySource source(store, 20);
  SampledObservationTable table(source, truth.inputs, truth.outputs,
                                truth.labels[truth.initial]);
  table.make_closed_and_consistent();
  Hypothesis h = table.build_hypothesis();
  CHECK(h.chaos_reachable());
  CHECK_THROWS_AS(h.stripped(), std::logic_error);
  // the sink self-loops with probability one
  const auto& row = h.model.trans[h.chaos_state][0];
  REQUIRE(row.size() == 1);
  CHECK(row[0].first == h.chaos_state);
  CHECK(row[0].second == 1.0);
}

TEST_CASE("learning at the degenerate point recovers the target exactly") {
  Mdp truth = build_coffee_machine();
  testing::DegenerateTeacher teacher(truth);
  LearnerConfig cfg;
  cfg.min_rounds = 8;
  cfg.max_rounds = 50;
  cfg.check_trim = true;
  SamplingLearnResult res = learn_sampling(teacher, cfg);
  CHECK_FALSE(res.hypothesis.chaos_reachable());
  CHECK(testing::isomorphic_to_minimized(truth, res.hypothesis.stripped()));
  CHECK(res.trim_violations == 0);
  CHECK(static_cast<int>(res.rounds.size()) >= cfg.min_rounds);
  CHECK(static_cast<int>(res.rounds.size()) <= cfg.max_rounds);
}

TEST_CASE("degenerate learning handles targets that need counterexamples") {
  // two same-labelled states that differ only two steps ahead
  Mdp m;
  m.inputs.add("i");
  int oa = m.outputs.add("a");
  int ob = m.outputs.add("b");
  int oc = m.outputs.add("c");
  int q0 = m.add_state("q0", oa);
  int q1 = m.add_state("q1", ob);
  int q2 = m.add_state("q2", ob);
  int q3 = m.add_state("q3", oc);
  m.trans[q0][0] = {{q1, 0.5}, {q3, 0.5}};
  m.trans[q1][0] = {{q2, 1.0}};
  m.trans[q2][0] = {{q3, 1.0}};
  m.trans[q3][0] = {{q0, 1.0}};
  REQUIRE(validate(m).empty());
  REQUIRE(minimize(m).num_states() == 4);

  testing::DegenerateTeacher teacher(m);
  LearnerConfig cfg;
  cfg.min_rounds = 10;
  cfg.max_rounds = 60;
  SamplingLearnResult res = learn_sampling(teacher, cfg);
  CHECK(testing::isomorphic_to_minimized(m, res.hypothesis.stripped()));
}

TEST_CASE("without trimming the degenerate run still converges") {
  Mdp truth = build_coffee_machine();
  testing::DegenerateTeacher teacher(truth);
  LearnerConfig cfg;
  cfg.min_rounds = 8;
  cfg.max_rounds = 50;
  cfg.trim = false;
  SamplingLearnResult res = learn_sampling(teacher, cfg);
  CHECK(testing::isomorphic_to_minimized(truth, res.hypothesis.stripped()));
}
