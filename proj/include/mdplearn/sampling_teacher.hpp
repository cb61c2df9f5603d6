#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "mdplearn/mdp.hpp"
#include "mdplearn/rng.hpp"
#include "mdplearn/sample_store.hpp"
#include "mdplearn/sampling_learning.hpp"
#include "mdplearn/sul.hpp"

namespace mdplearn {

struct TeacherConfig {
  std::int64_t n_c = 20;  // samples required before a cell counts as complete
  int n_resample = 300;   // directed walks per refine call
  int n_test = 50;        // testing episodes per equivalence query
  int n_retest = 300;     // replays of a freshly found counterexample
  double p_stop = 0.25;   // episode stop probability after each step
  double p_rand = 0.25;   // chance of a uniformly random input while targeting
};

// One memoryless scheduler per target state, maximising the probability of
// reaching that target.
std::map<int, MemorylessScheduler> compute_schedulers(const Mdp& m);

// Teacher that answers frequency and equivalence queries by executing traces
// on a system under learning and aggregating them in a sample store.
class SulTeacher final : public SamplingTeacher {
 public:
  SulTeacher(Sul& sul, TeacherConfig cfg, std::uint64_t seed);

  const Alphabet& input_alphabet() const override { return sul_.input_alphabet(); }
  const Alphabet& output_alphabet() const override { return sul_.output_alphabet(); }
  int initial_output() const override { return initial_output_; }
  const FrequencySource& frequencies() const override { return source_; }
  void refine(const std::vector<TestSequence>& incomplete) override;
  std::optional<TestSequence> find_counterexample(const Hypothesis& h, double alpha) override;
  std::int64_t sample_count() const override { return store_.size(); }
  std::int64_t total_outputs() const override { return sul_.total_outputs(); }

  const SampleStore& store() const { return store_; }
  const TeacherConfig& config() const { return cfg_; }

 private:
  // Replay the inputs of s on the system while the observed outputs follow s;
  // returns the executed trace (which diverges where the system did).
  Trace execute_sequence(const TestSequence& s);

  Sul& sul_;
  TeacherConfig cfg_;
  int initial_output_;
  SampleStore store_;
  StoreFrequencySource source_;
  Rng rng_;
};

}  // namespace mdplearn
