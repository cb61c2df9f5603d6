#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mdplearn/mdp.hpp"
#include "mdplearn/sequences.hpp"

namespace mdplearn {

// Answers output-distribution and equivalence queries from a known model.
// Only useful for experiments; the sampling learner talks to a Sul instead.
class ExactTeacher {
 public:
  explicit ExactTeacher(Mdp truth);

  int initial_output() const;
  const Mdp& truth() const { return truth_; }

  // Exact distribution over outputs after the sequence, nullopt when the
  // sequence is not observable in the model.
  OutputDistribution output_distribution(const TestSequence& seq) const;

  // nullopt when the hypothesis is output-distribution equivalent to the
  // truth, otherwise a shortest distinguishing test sequence.
  std::optional<TestSequence> equivalence_query(const Mdp& hypothesis) const;

  std::int64_t output_queries() const { return output_queries_; }
  std::int64_t equivalence_queries() const { return equivalence_queries_; }

 private:
  Mdp truth_;
  mutable std::int64_t output_queries_ = 0;
  mutable std::int64_t equivalence_queries_ = 0;
};

// Observation table over traces. Rows are short traces plus their one-step
// extensions, columns are continuation sequences, and a cell holds the exact
// output distribution after row . column.
class ExactObservationTable {
 public:
  ExactObservationTable(const ExactTeacher& teacher);

  // Fixes at most one defect per call: the first closedness violation, or
  // failing that the first consistency violation. Returns false when the
  // table is already closed and consistent.
  bool repair_once();

  Mdp build_hypothesis() const;

  // Adds every trace prefix of the counterexample (those followed by a
  // further input) to the short rows.
  void add_counterexample(const TestSequence& cex);

  std::size_t short_row_count() const { return short_rows_.size(); }
  std::size_t long_row_count() const;
  std::size_t column_count() const { return columns_.size(); }

 private:
  const OutputDistribution& cell(const Trace& row, const ContinuationSequence& col) const;
  bool rows_equal(const Trace& a, const Trace& b) const;
  std::vector<Trace> long_rows() const;
  void add_short_row(const Trace& t);
  void add_column(const ContinuationSequence& c);

  const ExactTeacher& teacher_;
  std::vector<Trace> short_rows_;
  std::unordered_set<Trace> short_row_set_;
  std::vector<ContinuationSequence> columns_;
  std::unordered_set<ContinuationSequence> column_set_;
  mutable std::unordered_map<TestSequence, OutputDistribution> cache_;
};

struct ExactRound {
  int round = 0;
  std::size_t short_rows = 0;
  std::size_t long_rows = 0;
  std::size_t columns = 0;
  std::size_t hypothesis_states = 0;
  std::optional<std::string> counterexample;  // absent on the final round
};

struct ExactLearnResult {
  Mdp model;
  std::vector<ExactRound> rounds;
  std::int64_t output_queries = 0;
  std::int64_t equivalence_queries = 0;
};

ExactLearnResult learn_exact(const ExactTeacher& teacher);

}  // namespace mdplearn
