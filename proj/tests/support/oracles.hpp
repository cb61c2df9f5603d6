#pragma once

// Reference implementations for cross-checking the library. Everything here
// is deliberately naive: brute-force enumeration instead of the algorithms
// under test, so agreement is meaningful.

#include <cstdint>
#include <utility>
#include <vector>

#include "mdplearn/alergia.hpp"
#include "mdplearn/mdp.hpp"
#include "mdplearn/metrics.hpp"
#include "mdplearn/rng.hpp"
#include "mdplearn/sampling_learning.hpp"

namespace mdplearn {
namespace testing {

// Maximal bounded reachability by enumerating every sequence of per-step
// input maps (schedulers that may pick a different input per state and step).
// Exponential in states * bound; small models only. Requires prop.bound.
double pmax_bruteforce(const Mdp& m, const PropertySpec& prop);

// Optimal transport cost by inspecting every spanning-tree basis of the
// bipartite support graph; the LP optimum is attained at one of them.
// Supports must stay small (at most ~20 edges).
double kantorovich_bruteforce(const std::vector<std::vector<double>>& distance,
                              const std::vector<std::pair<int, double>>& mu1,
                              const std::vector<std::pair<int, double>>& mu2);

// Discounted bisimilarity distance as a plain fixpoint over the full pooled
// pair matrix, with every transport solved by kantorovich_bruteforce.
double bisim_bruteforce(const Mdp& m1, const Mdp& m2, double discount, double tol);

// Random deterministic labelled MDP: 2..max_states states with uniform
// labels, and per (state, input) a distribution over distinctly-labelled
// targets with small integer weights. Always valid, may contain unreachable
// states.
Mdp random_det_mdp(Rng& rng, int max_states, int num_inputs, int num_outputs);

// Number of partition-refinement rounds until the state partition stabilises;
// bounds how many steps are needed to tell any two inequivalent states apart.
int distinguishing_depth(const Mdp& m);

// Per-pair refinement round at which two states separate: 0 when the labels
// already differ, k when round k splits them, -1 for equivalent states.
std::vector<std::vector<int>> pair_split_rounds(const Mdp& m);

// Frequency source answering with the true output probabilities scaled to
// `scale` observations per cell; every sequence counts as complete.
class ExactFrequencySource final : public FrequencySource {
 public:
  ExactFrequencySource(const Mdp& truth, std::int64_t scale)
      : truth_(truth), scale_(scale) {}
  CountMap counts(const TestSequence& s) const override;
  bool complete(const TestSequence&) const override { return true; }

 private:
  const Mdp& truth_;
  std::int64_t scale_;
};

// Teacher at the degenerate point: exact frequencies, no resampling, and an
// exact equivalence oracle instead of testing.
class DegenerateTeacher final : public SamplingTeacher {
 public:
  explicit DegenerateTeacher(const Mdp& truth, std::int64_t scale = 1000000)
      : truth_(truth), scale_(scale), source_(truth_, scale) {}

  const Alphabet& input_alphabet() const override { return truth_.inputs; }
  const Alphabet& output_alphabet() const override { return truth_.outputs; }
  int initial_output() const override {
    return truth_.labels[static_cast<std::size_t>(truth_.initial)];
  }
  const FrequencySource& frequencies() const override { return source_; }
  void refine(const std::vector<TestSequence>&) override {}
  std::optional<TestSequence> find_counterexample(const Hypothesis& h, double alpha) override;
  std::int64_t sample_count() const override { return scale_; }
  std::int64_t total_outputs() const override { return scale_; }

 private:
  const Mdp& truth_;
  std::int64_t scale_;
  ExactFrequencySource source_;
};

// Frequency prefix tree carrying true conditional counts: the canonical
// access trace of every reachable state is materialized, and each child of
// such a node roots an exact subtree of the given depth. Deeper knowledge
// truncates to zero-count leaves. A non-positive depth selects per-state
// depths from pair_split_rounds: just enough to separate every same-label
// state pair, which keeps the tree small on larger models.
Fpta degenerate_fpta(const Mdp& truth, int subtree_depth, std::int64_t scale = 1000000);

// True iff `learned` has exactly as many states as the minimal form of the
// truth and is output-distribution equivalent to it; for minimal
// deterministic models this is isomorphism up to state renaming.
bool isomorphic_to_minimized(const Mdp& truth, const Mdp& learned);

}  // namespace testing
}  // namespace mdplearn
