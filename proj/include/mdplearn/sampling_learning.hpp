#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mdplearn/mdp.hpp"
#include "mdplearn/sample_store.hpp"
#include "mdplearn/sequences.hpp"

namespace mdplearn {

using CountMap = std::map<int, std::int64_t>;

// Two-sample Hoeffding threshold for empirical probability gaps.
double hoeffding_bound(std::int64_t n1, std::int64_t n2, double alpha);

// Statistical difference between two count maps: some output observed on
// exactly one side, or a per-output frequency gap above the Hoeffding bound.
// Never true when either total is zero; completeness gating is the caller's
// job.
bool counts_differ(const CountMap& c1, const CountMap& c2, double alpha);

// The bound-only test without the support clause (used by the passive
// baseline, where sparse nodes must stay mergeable).
bool counts_differ_bound_only(const CountMap& c1, const CountMap& c2, double alpha);

// Where the learner reads empirical output counts from. The standard source
// is a SampleStore with a count threshold; tests substitute exact values.
class FrequencySource {
 public:
  virtual ~FrequencySource() = default;
  virtual CountMap counts(const TestSequence& s) const = 0;
  virtual bool complete(const TestSequence& s) const = 0;
};

class StoreFrequencySource final : public FrequencySource {
 public:
  StoreFrequencySource(const SampleStore& store, std::int64_t threshold)
      : store_(store), threshold_(threshold) {}
  CountMap counts(const TestSequence& s) const override { return store_.output_counts(s); }
  bool complete(const TestSequence& s) const override { return store_.is_complete(s, threshold_); }

 private:
  const SampleStore& store_;
  std::int64_t threshold_;
};

// Learned model with the auxiliary sink for not-yet-estimable transitions.
// The model's output alphabet carries a trailing "chaos" symbol and the sink
// is the last state.
struct Hypothesis {
  Mdp model;
  int chaos_state = -1;
  std::vector<Trace> state_access;  // representative trace per regular state

  bool chaos_reachable() const;
  // Copy without the sink and its output symbol; requires the sink to be
  // unreachable (throws otherwise).
  Mdp stripped() const;
};

struct LearnerConfig {
  double alpha = 0.05;
  double unambiguity_threshold = 0.99;
  int min_rounds = 500;
  int max_rounds = 4000;
  // When set, alpha is replaced by 1/n^exponent with n = samples so far.
  std::optional<double> alpha_exponent;
  bool trim = true;
  // Re-derive the hypothesis after trimming and verify it is unchanged.
  bool check_trim = false;

  double effective_alpha(std::int64_t samples) const;
};

// What the learner needs from the environment: empirical frequencies plus
// the refine and equivalence queries.
class SamplingTeacher {
 public:
  virtual ~SamplingTeacher() = default;
  virtual const Alphabet& input_alphabet() const = 0;
  virtual const Alphabet& output_alphabet() const = 0;
  virtual int initial_output() const = 0;
  virtual const FrequencySource& frequencies() const = 0;
  // Resample the given incomplete sequences (directed testing).
  virtual void refine(const std::vector<TestSequence>& incomplete) = 0;
  virtual std::optional<TestSequence> find_counterexample(const Hypothesis& h, double alpha) = 0;
  // Number of sampled traces so far (drives the optional alpha schedule).
  virtual std::int64_t sample_count() const = 0;
  virtual std::int64_t total_outputs() const = 0;
};

// Observation table over sampled frequencies. Cells are count maps read
// through the frequency source and memoized until refresh().
class SampledObservationTable {
 public:
  SampledObservationTable(const FrequencySource& source, Alphabet inputs, Alphabet outputs,
                          int initial_output);

  void set_alpha(double alpha);
  double alpha() const { return alpha_; }
  // Drop memoized cells so subsequent reads see fresh source data.
  void refresh();

  void make_closed_and_consistent();
  Hypothesis build_hypothesis() const;
  // Remove rows whose information is already carried by a representative;
  // returns the number of removed short rows.
  int trim(const Hypothesis& h);
  double unambiguity_ratio() const;
  void add_counterexample(const TestSequence& cex);
  std::vector<TestSequence> incomplete_sequences() const;

  const std::vector<Trace>& short_rows() const { return short_rows_; }
  std::vector<Trace> long_rows() const;
  std::size_t column_count() const { return columns_.size(); }
  std::size_t representative_count() const;

  const CountMap& cell(const Trace& row, const ContinuationSequence& col) const;
  bool rows_compatible(const Trace& a, const Trace& b) const;

 private:
  struct Classes {
    std::vector<Trace> reps;      // rank-descending creation order
    std::vector<int> rep_of;      // per short row, index into reps
  };

  const CountMap& counts(const TestSequence& s) const;
  std::int64_t total(const TestSequence& s) const;
  bool diff_seq(const TestSequence& a, const TestSequence& b) const;
  std::int64_t rank(const Trace& s) const;
  Classes compute_classes() const;
  int resolve_representative(const Trace& row, const Classes& classes) const;
  bool repair_once(const Classes& classes);
  void add_short_row(const Trace& t);
  void add_column(const ContinuationSequence& c);

  const FrequencySource& source_;
  Alphabet inputs_;
  Alphabet outputs_;
  double alpha_ = 0.05;
  std::vector<Trace> short_rows_;
  std::unordered_set<Trace> short_row_set_;
  std::vector<ContinuationSequence> columns_;
  std::unordered_set<ContinuationSequence> column_set_;
  mutable std::unordered_map<TestSequence, CountMap> cell_cache_;
  mutable std::map<std::pair<std::vector<int>, std::vector<int>>, bool> compat_cache_;
};

struct SamplingRound {
  int round = 0;
  std::size_t short_rows = 0;
  std::size_t long_rows = 0;
  std::size_t columns = 0;
  std::size_t representatives = 0;
  double unambiguity = 0.0;
  bool chaos_reachable = false;
  std::optional<std::string> counterexample;
  std::int64_t samples = 0;
  int trimmed_rows = 0;
};

struct SamplingLearnResult {
  Hypothesis hypothesis;  // from the final round
  std::vector<SamplingRound> rounds;
  std::int64_t samples = 0;
  std::int64_t total_outputs = 0;
  int trim_violations = 0;  // only counted when check_trim is on
};

SamplingLearnResult learn_sampling(SamplingTeacher& teacher, const LearnerConfig& cfg);

}  // namespace mdplearn
