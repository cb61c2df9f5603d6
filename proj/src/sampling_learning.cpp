#include "mdplearn/sampling_learning.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace mdplearn {

double hoeffding_bound(std::int64_t n1, std::int64_t n2, double alpha) {
  if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("hoeffding_bound needs positive totals");
  if (alpha <= 0.0 || alpha >= 2.0) throw std::invalid_argument("alpha out of range");
  return (std::sqrt(1.0 / static_cast<double>(n1)) + std::sqrt(1.0 / static_cast<double>(n2))) *
         std::sqrt(0.5 * std::log(2.0 / alpha));
}

namespace {

std::int64_t total_of(const CountMap& c) {
  std::int64_t sum = 0;
  for (const auto& [o, v] : c) {
    (void)o;
    sum += v;
  }
  return sum;
}

std::int64_t count_of(const CountMap& c, int o) {
  auto it = c.find(o);
  return it == c.end() ? 0 : it->second;
}

bool differ_impl(const CountMap& c1, const CountMap& c2, double alpha, bool support_clause) {
  std::int64_t n1 = total_of(c1), n2 = total_of(c2);
  if (n1 <= 0 || n2 <= 0) return false;
  if (support_clause) {
    for (const auto& [o, v] : c1)
      if ((v > 0) != (count_of(c2, o) > 0)) return true;
    for (const auto& [o, v] : c2)
      if ((v > 0) != (count_of(c1, o) > 0)) return true;
  }
  double bound = hoeffding_bound(n1, n2, alpha);
  for (const auto& [o, v] : c1) {
    double gap = std::abs(static_cast<double>(v) / static_cast<double>(n1) -
                          static_cast<double>(count_of(c2, o)) / static_cast<double>(n2));
    if (gap > bound) return true;
  }
  for (const auto& [o, v] : c2) {
    if (c1.count(o)) continue;  // already tested above
    double gap = static_cast<double>(v) / static_cast<double>(n2);
    if (gap > bound) return true;
  }
  return false;
}

}  // namespace

bool counts_differ(const CountMap& c1, const CountMap& c2, double alpha) {
  return differ_impl(c1, c2, alpha, true);
}

bool counts_differ_bound_only(const CountMap& c1, const CountMap& c2, double alpha) {
  return differ_impl(c1, c2, alpha, false);
}

// --- hypothesis -------------------------------------------------------------

namespace {

std::vector<char> reachable_states(const Mdp& m) {
  std::vector<char> seen(static_cast<std::size_t>(m.num_states()), 0);
  std::deque<int> queue{m.initial};
  seen[static_cast<std::size_t>(m.initial)] = 1;
  while (!queue.empty()) {
    int q = queue.front();
    queue.pop_front();
    for (const auto& row : m.trans[static_cast<std::size_t>(q)])
      for (const auto& [succ, p] : row) {
        (void)p;
        if (!seen[static_cast<std::size_t>(succ)]) {
          seen[static_cast<std::size_t>(succ)] = 1;
          queue.push_back(succ);
        }
      }
  }
  return seen;
}

}  // namespace

bool Hypothesis::chaos_reachable() const {
  if (chaos_state < 0) return false;
  return reachable_states(model)[static_cast<std::size_t>(chaos_state)] != 0;
}

Mdp Hypothesis::stripped() const {
  if (chaos_state < 0) return model;
  if (chaos_reachable()) throw std::logic_error("cannot strip a reachable chaos state");
  auto keep = reachable_states(model);
  keep[static_cast<std::size_t>(chaos_state)] = 0;

  Mdp out;
  out.inputs = model.inputs;
  int chaos_label = model.labels[static_cast<std::size_t>(chaos_state)];
  bool drop_symbol = chaos_label == model.outputs.size() - 1;
  for (int q = 0; q < model.num_states(); ++q)
    if (keep[static_cast<std::size_t>(q)] && model.labels[static_cast<std::size_t>(q)] == chaos_label)
      drop_symbol = false;
  for (int o = 0; o < model.outputs.size() - (drop_symbol ? 1 : 0); ++o)
    out.outputs.add(model.outputs.name(o));

  std::vector<int> renumber(static_cast<std::size_t>(model.num_states()), -1);
  for (int q = 0; q < model.num_states(); ++q) {
    if (!keep[static_cast<std::size_t>(q)]) continue;
    renumber[static_cast<std::size_t>(q)] =
        out.add_state(model.state_names[static_cast<std::size_t>(q)],
                      model.labels[static_cast<std::size_t>(q)]);
  }
  out.initial = renumber[static_cast<std::size_t>(model.initial)];
  for (int q = 0; q < model.num_states(); ++q) {
    if (!keep[static_cast<std::size_t>(q)]) continue;
    for (int i = 0; i < model.inputs.size(); ++i) {
      StateDistribution row;
      for (const auto& [succ, p] : model.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)])
        row.emplace_back(renumber[static_cast<std::size_t>(succ)], p);
      std::sort(row.begin(), row.end());
      out.trans[static_cast<std::size_t>(renumber[static_cast<std::size_t>(q)])]
               [static_cast<std::size_t>(i)] = std::move(row);
    }
  }
  out.metadata = model.metadata;
  return out;
}

double LearnerConfig::effective_alpha(std::int64_t samples) const {
  if (!alpha_exponent) return alpha;
  double n = static_cast<double>(samples < 1 ? 1 : samples);
  double a = std::pow(n, -*alpha_exponent);
  return a < 1.0 ? a : 1.0;
}

// --- observation table ------------------------------------------------------

SampledObservationTable::SampledObservationTable(const FrequencySource& source, Alphabet inputs,
                                                 Alphabet outputs, int initial_output)
    : source_(source), inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  add_short_row(Trace(initial_output));
  for (int i = 0; i < inputs_.size(); ++i) add_column(ContinuationSequence(i));
}

void SampledObservationTable::set_alpha(double alpha) {
  if (alpha == alpha_) return;
  alpha_ = alpha;
  compat_cache_.clear();
}

void SampledObservationTable::refresh() {
  cell_cache_.clear();
  compat_cache_.clear();
}

const CountMap& SampledObservationTable::counts(const TestSequence& s) const {
  auto it = cell_cache_.find(s);
  if (it == cell_cache_.end()) {
    CountMap c = source_.counts(s);
    it = cell_cache_.emplace(s, std::move(c)).first;
  }
  return it->second;
}

std::int64_t SampledObservationTable::total(const TestSequence& s) const {
  return total_of(counts(s));
}

const CountMap& SampledObservationTable::cell(const Trace& row, const ContinuationSequence& col) const {
  return counts(concat(row, col));
}

bool SampledObservationTable::diff_seq(const TestSequence& a, const TestSequence& b) const {
  if (a == b) return false;
  if (!source_.complete(a) || !source_.complete(b)) return false;
  return counts_differ(counts(a), counts(b), alpha_);
}

bool SampledObservationTable::rows_compatible(const Trace& a, const Trace& b) const {
  if (a.last_output() != b.last_output()) return false;
  if (a == b) return true;
  auto key = a.symbols() < b.symbols() ? std::make_pair(a.symbols(), b.symbols())
                                       : std::make_pair(b.symbols(), a.symbols());
  auto it = compat_cache_.find(key);
  if (it != compat_cache_.end()) return it->second;
  bool compatible = true;
  for (const auto& col : columns_) {
    if (diff_seq(concat(a, col), concat(b, col))) {
      compatible = false;
      break;
    }
  }
  compat_cache_.emplace(std::move(key), compatible);
  return compatible;
}

std::vector<Trace> SampledObservationTable::long_rows() const {
  std::vector<Trace> out;
  for (const auto& s : short_rows_) {
    for (int i = 0; i < inputs_.size(); ++i) {
      for (const auto& [o, c] : counts(s.with_input(i))) {
        if (c <= 0) continue;
        Trace ext = s.extended(i, o);
        if (!short_row_set_.count(ext)) out.push_back(std::move(ext));
      }
    }
  }
  return out;
}

std::int64_t SampledObservationTable::rank(const Trace& s) const {
  std::int64_t sum = 0;
  for (int i = 0; i < inputs_.size(); ++i) sum += total(s.with_input(i));
  return sum;
}

SampledObservationTable::Classes SampledObservationTable::compute_classes() const {
  std::vector<std::size_t> order(short_rows_.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::vector<std::int64_t> ranks(short_rows_.size());
  for (std::size_t k = 0; k < short_rows_.size(); ++k) ranks[k] = rank(short_rows_[k]);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (ranks[x] != ranks[y]) return ranks[x] > ranks[y];
    return short_rows_[x].symbols() < short_rows_[y].symbols();
  });

  Classes cls;
  cls.rep_of.assign(short_rows_.size(), -1);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    std::size_t r = order[pos];
    if (cls.rep_of[r] >= 0) continue;
    int rep_index = static_cast<int>(cls.reps.size());
    cls.reps.push_back(short_rows_[r]);
    cls.rep_of[r] = rep_index;
    for (std::size_t pos2 = pos + 1; pos2 < order.size(); ++pos2) {
      std::size_t s = order[pos2];
      if (cls.rep_of[s] >= 0) continue;
      if (rows_compatible(short_rows_[s], short_rows_[r])) cls.rep_of[s] = rep_index;
    }
  }
  return cls;
}

std::size_t SampledObservationTable::representative_count() const {
  return compute_classes().reps.size();
}

int SampledObservationTable::resolve_representative(const Trace& row, const Classes& classes) const {
  for (std::size_t k = 0; k < short_rows_.size(); ++k)
    if (short_rows_[k] == row) return classes.rep_of[k];
  // Long row: the highest-ranked compatible representative. Representatives
  // are kept in rank-descending creation order, so the first hit wins.
  for (std::size_t k = 0; k < classes.reps.size(); ++k)
    if (rows_compatible(row, classes.reps[k])) return static_cast<int>(k);
  return -1;
}

bool SampledObservationTable::repair_once(const Classes& classes) {
  for (const auto& l : long_rows()) {
    bool covered = false;
    for (const auto& r : classes.reps) {
      if (rows_compatible(l, r)) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      add_short_row(l);
      return true;
    }
  }
  for (std::size_t a = 0; a < short_rows_.size(); ++a) {
    for (std::size_t b = a + 1; b < short_rows_.size(); ++b) {
      if (!rows_compatible(short_rows_[a], short_rows_[b])) continue;
      for (int i = 0; i < inputs_.size(); ++i) {
        const CountMap& ca = counts(short_rows_[a].with_input(i));
        const CountMap& cb = counts(short_rows_[b].with_input(i));
        for (const auto& [o, va] : ca) {
          if (va <= 0 || count_of(cb, o) <= 0) continue;  // one side unobserved
          Trace ea = short_rows_[a].extended(i, o);
          Trace eb = short_rows_[b].extended(i, o);
          if (rows_compatible(ea, eb)) continue;
          for (const auto& col : columns_) {
            if (diff_seq(concat(ea, col), concat(eb, col))) {
              add_column(col.prepended(i, o));
              return true;
            }
          }
          throw std::logic_error("incompatible extensions without witness column");
        }
      }
    }
  }
  return false;
}

void SampledObservationTable::make_closed_and_consistent() {
  for (;;) {
    Classes classes = compute_classes();
    if (!repair_once(classes)) return;
  }
}

Hypothesis SampledObservationTable::build_hypothesis() const {
  Classes classes = compute_classes();

  for (const auto& l : long_rows())
    if (resolve_representative(l, classes) < 0)
      throw std::logic_error("observation table is not closed");
  for (std::size_t a = 0; a < short_rows_.size(); ++a)
    for (std::size_t b = a + 1; b < short_rows_.size(); ++b) {
      if (!rows_compatible(short_rows_[a], short_rows_[b])) continue;
      for (int i = 0; i < inputs_.size(); ++i) {
        const CountMap& ca = counts(short_rows_[a].with_input(i));
        const CountMap& cb = counts(short_rows_[b].with_input(i));
        for (const auto& [o, va] : ca)
          if (va > 0 && count_of(cb, o) > 0 &&
              !rows_compatible(short_rows_[a].extended(i, o), short_rows_[b].extended(i, o)))
            throw std::logic_error("observation table is not consistent");
      }
    }

  Hypothesis h;
  h.model.inputs = inputs_;
  h.model.outputs = outputs_;
  int chaos_label = h.model.outputs.add("chaos");
  int regular = static_cast<int>(classes.reps.size());
  for (int k = 0; k < regular; ++k)
    h.model.add_state("q" + std::to_string(k), classes.reps[static_cast<std::size_t>(k)].last_output());
  h.chaos_state = h.model.add_state("chaos", chaos_label);
  h.state_access = classes.reps;
  h.model.initial = classes.rep_of[0];  // class of the initial-output trace

  for (int k = 0; k < regular; ++k) {
    const Trace& rep = classes.reps[static_cast<std::size_t>(k)];
    for (int i = 0; i < inputs_.size(); ++i) {
      TestSequence seq = rep.with_input(i);
      StateDistribution row;
      std::int64_t n = source_.complete(seq) ? total(seq) : 0;
      if (n <= 0) {
        row.emplace_back(h.chaos_state, 1.0);
      } else {
        std::map<int, double> probs;
        for (const auto& [o, c] : counts(seq)) {
          if (c <= 0) continue;
          int target = resolve_representative(rep.extended(i, o), classes);
          if (target < 0) throw std::logic_error("observation table is not closed");
          probs[target] += static_cast<double>(c) / static_cast<double>(n);
        }
        for (const auto& [q, p] : probs) row.emplace_back(q, p);
      }
      h.model.trans[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = std::move(row);
    }
  }
  for (int i = 0; i < inputs_.size(); ++i)
    h.model.trans[static_cast<std::size_t>(h.chaos_state)][static_cast<std::size_t>(i)] = {
        {h.chaos_state, 1.0}};
  return h;
}

int SampledObservationTable::trim(const Hypothesis& h) {
  Classes classes = compute_classes();
  std::vector<char> removable(short_rows_.size(), 0);

  for (std::size_t k = 0; k < short_rows_.size(); ++k) {
    const Trace& s = short_rows_[k];
    int compatible_reps = 0;
    for (const auto& r : classes.reps)
      if (rows_compatible(s, r)) ++compatible_reps;
    if (compatible_reps != 1) continue;

    bool prefixes_rep = false;
    for (const auto& r : classes.reps)
      if (s.is_prefix_of(r)) {
        prefixes_rep = true;
        break;
      }
    if (prefixes_rep) continue;

    // No extension may disagree with the representative of the hypothesis
    // state it reaches; anything unresolvable counts as disagreement.
    bool safe = true;
    for (std::size_t k2 = 0; k2 < short_rows_.size() && safe; ++k2) {
      const Trace& ext = short_rows_[k2];
      if (!s.is_prefix_of(ext)) continue;
      auto q = run_trace(h.model, ext);
      if (!q || *q == h.chaos_state) {
        safe = false;
        break;
      }
      const Trace& rep = h.state_access[static_cast<std::size_t>(*q)];
      auto rep_state = run_trace(h.model, rep);
      if (!rep_state || *rep_state != *q) {
        safe = false;
        break;
      }
      for (int i = 0; i < inputs_.size() && safe; ++i)
        if (diff_seq(ext.with_input(i), rep.with_input(i))) safe = false;
    }
    if (safe) removable[k] = 1;
  }

  std::vector<char> drop(short_rows_.size(), 0);
  for (std::size_t k = 0; k < short_rows_.size(); ++k) {
    if (!removable[k]) continue;
    for (std::size_t k2 = 0; k2 < short_rows_.size(); ++k2)
      if (short_rows_[k].is_prefix_of(short_rows_[k2])) drop[k2] = 1;
  }

  int removed = 0;
  std::vector<Trace> kept;
  for (std::size_t k = 0; k < short_rows_.size(); ++k) {
    if (drop[k]) {
      short_row_set_.erase(short_rows_[k]);
      ++removed;
    } else {
      kept.push_back(std::move(short_rows_[k]));
    }
  }
  short_rows_ = std::move(kept);
  return removed;
}

double SampledObservationTable::unambiguity_ratio() const {
  Classes classes = compute_classes();
  std::size_t unambiguous = 0, rows = 0;
  auto tally = [&](const Trace& s) {
    int compatible_reps = 0;
    for (const auto& r : classes.reps)
      if (rows_compatible(s, r)) ++compatible_reps;
    ++rows;
    if (compatible_reps == 1) ++unambiguous;
  };
  for (const auto& s : short_rows_) tally(s);
  for (const auto& l : long_rows()) tally(l);
  return static_cast<double>(unambiguous) / static_cast<double>(rows);
}

void SampledObservationTable::add_counterexample(const TestSequence& cex) {
  const auto& sym = cex.symbols();
  for (std::size_t len = 1; len + 1 <= sym.size(); len += 2)
    add_short_row(Trace(std::vector<int>(sym.begin(), sym.begin() + static_cast<long>(len))));
}

std::vector<TestSequence> SampledObservationTable::incomplete_sequences() const {
  std::vector<TestSequence> out;
  std::unordered_set<TestSequence> seen;
  auto scan = [&](const Trace& row) {
    for (const auto& col : columns_) {
      TestSequence seq = concat(row, col);
      if (source_.complete(seq)) continue;
      if (seen.insert(seq).second) out.push_back(std::move(seq));
    }
  };
  for (const auto& s : short_rows_) scan(s);
  for (const auto& l : long_rows()) scan(l);
  return out;
}

void SampledObservationTable::add_short_row(const Trace& t) {
  if (short_row_set_.insert(t).second) short_rows_.push_back(t);
}

void SampledObservationTable::add_column(const ContinuationSequence& c) {
  if (column_set_.insert(c).second) {
    columns_.push_back(c);
    compat_cache_.clear();  // compatibility depends on the column set
  }
}

// --- main loop ---------------------------------------------------------------

SamplingLearnResult learn_sampling(SamplingTeacher& teacher, const LearnerConfig& cfg) {
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0) throw std::invalid_argument("alpha must be in (0,1)");
  if (cfg.min_rounds > cfg.max_rounds) throw std::invalid_argument("min_rounds > max_rounds");

  SampledObservationTable table(teacher.frequencies(), teacher.input_alphabet(),
                                teacher.output_alphabet(), teacher.initial_output());
  table.set_alpha(cfg.effective_alpha(teacher.sample_count()));
  teacher.refine(table.incomplete_sequences());
  table.refresh();

  SamplingLearnResult res;
  for (int round = 1;; ++round) {
    table.set_alpha(cfg.effective_alpha(teacher.sample_count()));
    table.make_closed_and_consistent();
    Hypothesis hyp = table.build_hypothesis();

    SamplingRound info;
    info.round = round;
    info.chaos_reachable = hyp.chaos_reachable();
    if (cfg.trim) {
      info.trimmed_rows = table.trim(hyp);
      if (cfg.check_trim && info.trimmed_rows > 0) {
        bool same;
        try {
          Hypothesis after = table.build_hypothesis();
          same = !equivalence_check(hyp.model, after.model).has_value();
        } catch (const std::logic_error&) {
          same = false;
        }
        if (!same) ++res.trim_violations;
      }
    }

    auto cex = teacher.find_counterexample(hyp, table.alpha());
    if (cex) {
      info.counterexample = format_test_sequence(hyp.model, *cex);
      table.add_counterexample(*cex);
    }
    teacher.refine(table.incomplete_sequences());
    table.refresh();

    info.short_rows = table.short_rows().size();
    info.long_rows = table.long_rows().size();
    info.columns = table.column_count();
    info.representatives = table.representative_count();
    info.unambiguity = table.unambiguity_ratio();
    info.samples = teacher.sample_count();
    res.rounds.push_back(std::move(info));

    bool stop = (round >= cfg.min_rounds && !hyp.chaos_reachable() &&
                 res.rounds.back().unambiguity >= cfg.unambiguity_threshold) ||
                round >= cfg.max_rounds;
    if (stop) {
      res.hypothesis = std::move(hyp);
      break;
    }
  }
  res.samples = teacher.sample_count();
  res.total_outputs = teacher.total_outputs();
  return res;
}

}  // namespace mdplearn
