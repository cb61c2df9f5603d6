#include "mdplearn/exact_learning.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace mdplearn {

ExactTeacher::ExactTeacher(Mdp truth) : truth_(std::move(truth)) {
  auto problems = validate(truth_);
  if (!problems.empty())
    throw std::invalid_argument("invalid model: " + problems.front());
}

int ExactTeacher::initial_output() const { return truth_.labels[static_cast<std::size_t>(truth_.initial)]; }

OutputDistribution ExactTeacher::output_distribution(const TestSequence& seq) const {
  ++output_queries_;
  return semantics(truth_, seq);
}

std::optional<TestSequence> ExactTeacher::equivalence_query(const Mdp& hypothesis) const {
  ++equivalence_queries_;
  return equivalence_check(hypothesis, truth_);
}

ExactObservationTable::ExactObservationTable(const ExactTeacher& teacher) : teacher_(teacher) {
  add_short_row(Trace(teacher.initial_output()));
  for (int i = 0; i < teacher.truth().inputs.size(); ++i)
    add_column(ContinuationSequence(i));
}

const OutputDistribution& ExactObservationTable::cell(const Trace& row,
                                                      const ContinuationSequence& col) const {
  TestSequence seq = concat(row, col);
  auto it = cache_.find(seq);
  if (it == cache_.end()) {
    OutputDistribution d = teacher_.output_distribution(seq);
    it = cache_.emplace(std::move(seq), std::move(d)).first;
  }
  return it->second;
}

bool ExactObservationTable::rows_equal(const Trace& a, const Trace& b) const {
  if (a.last_output() != b.last_output()) return false;
  for (const auto& col : columns_) {
    const OutputDistribution& da = cell(a, col);
    const OutputDistribution& db = cell(b, col);
    if (da.has_value() != db.has_value()) return false;
    if (da && !distributions_equal(*da, *db, kProbTolerance)) return false;
  }
  return true;
}

std::vector<Trace> ExactObservationTable::long_rows() const {
  std::vector<Trace> out;
  for (const auto& s : short_rows_) {
    for (int i = 0; i < teacher_.truth().inputs.size(); ++i) {
      const OutputDistribution& dist = cell(s, ContinuationSequence(i));
      if (!dist) continue;
      for (const auto& [o, p] : *dist) {
        (void)p;
        Trace ext = s.extended(i, o);
        if (!short_row_set_.count(ext)) out.push_back(std::move(ext));
      }
    }
  }
  return out;
}

std::size_t ExactObservationTable::long_row_count() const { return long_rows().size(); }

void ExactObservationTable::add_short_row(const Trace& t) {
  if (short_row_set_.insert(t).second) short_rows_.push_back(t);
}

void ExactObservationTable::add_column(const ContinuationSequence& c) {
  if (column_set_.insert(c).second) columns_.push_back(c);
}

bool ExactObservationTable::repair_once() {
  // Closedness: every one-step extension must match some short row.
  for (const auto& l : long_rows()) {
    bool covered = false;
    for (const auto& s : short_rows_) {
      if (rows_equal(l, s)) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      add_short_row(l);
      return true;
    }
  }
  // Consistency: equal short rows must stay equal after any shared extension.
  for (std::size_t a = 0; a < short_rows_.size(); ++a) {
    for (std::size_t b = a + 1; b < short_rows_.size(); ++b) {
      if (!rows_equal(short_rows_[a], short_rows_[b])) continue;
      for (int i = 0; i < teacher_.truth().inputs.size(); ++i) {
        const OutputDistribution& dist = cell(short_rows_[a], ContinuationSequence(i));
        if (!dist) continue;
        for (const auto& [o, p] : *dist) {
          (void)p;
          Trace ea = short_rows_[a].extended(i, o);
          Trace eb = short_rows_[b].extended(i, o);
          if (rows_equal(ea, eb)) continue;
          for (const auto& col : columns_) {
            const OutputDistribution& da = cell(ea, col);
            const OutputDistribution& db = cell(eb, col);
            bool same = da.has_value() == db.has_value() &&
                        (!da || distributions_equal(*da, *db, kProbTolerance));
            if (!same) {
              add_column(col.prepended(i, o));
              return true;
            }
          }
          throw std::logic_error("inconsistent rows without witness column");
        }
      }
    }
  }
  return false;
}

Mdp ExactObservationTable::build_hypothesis() const {
  // One state per class of equal short rows; the class representative is the
  // first short row in insertion order, so the initial trace yields state 0.
  std::vector<int> class_of(short_rows_.size(), -1);
  std::vector<std::size_t> reps;
  for (std::size_t k = 0; k < short_rows_.size(); ++k) {
    for (std::size_t r : reps) {
      if (rows_equal(short_rows_[k], short_rows_[r])) {
        class_of[k] = class_of[r];
        break;
      }
    }
    if (class_of[k] < 0) {
      class_of[k] = static_cast<int>(reps.size());
      reps.push_back(k);
    }
  }

  auto class_of_trace = [&](const Trace& t) {
    for (std::size_t r : reps)
      if (rows_equal(t, short_rows_[r])) return class_of[r];
    throw std::logic_error("table is not closed");
  };

  Mdp h;
  h.inputs = teacher_.truth().inputs;
  h.outputs = teacher_.truth().outputs;
  for (std::size_t r : reps)
    h.add_state("q" + std::to_string(h.num_states()), short_rows_[r].last_output());
  h.initial = 0;
  for (std::size_t k = 0; k < reps.size(); ++k) {
    const Trace& rep = short_rows_[reps[k]];
    for (int i = 0; i < h.inputs.size(); ++i) {
      const OutputDistribution& dist = cell(rep, ContinuationSequence(i));
      if (!dist) throw std::logic_error("undefined one-step distribution");
      StateDistribution row;
      for (const auto& [o, p] : *dist)
        row.emplace_back(class_of_trace(rep.extended(i, o)), p);
      std::sort(row.begin(), row.end());
      h.trans[k][static_cast<std::size_t>(i)] = std::move(row);
    }
  }
  return h;
}

void ExactObservationTable::add_counterexample(const TestSequence& cex) {
  const auto& sym = cex.symbols();
  if (sym.empty()) return;
  for (std::size_t len = 1; len + 1 <= sym.size(); len += 2)
    add_short_row(Trace(std::vector<int>(sym.begin(), sym.begin() + static_cast<long>(len))));
}

ExactLearnResult learn_exact(const ExactTeacher& teacher) {
  ExactObservationTable table(teacher);
  ExactLearnResult res;
  for (int round = 1;; ++round) {
    while (table.repair_once()) {
    }
    Mdp hyp = table.build_hypothesis();
    ExactRound info;
    info.round = round;
    info.short_rows = table.short_row_count();
    info.long_rows = table.long_row_count();
    info.columns = table.column_count();
    info.hypothesis_states = static_cast<std::size_t>(hyp.num_states());
    auto cex = teacher.equivalence_query(hyp);
    if (!cex) {
      res.rounds.push_back(std::move(info));
      res.model = std::move(hyp);
      res.output_queries = teacher.output_queries();
      res.equivalence_queries = teacher.equivalence_queries();
      return res;
    }
    info.counterexample = format_test_sequence(hyp, *cex);
    res.rounds.push_back(std::move(info));
    table.add_counterexample(*cex);
  }
}

}  // namespace mdplearn
