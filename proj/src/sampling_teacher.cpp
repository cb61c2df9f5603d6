#include "mdplearn/sampling_teacher.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "mdplearn/metrics.hpp"

namespace mdplearn {

std::map<int, MemorylessScheduler> compute_schedulers(const Mdp& m) {
  std::map<int, MemorylessScheduler> out;
  for (int q = 0; q < m.num_states(); ++q) out.emplace(q, max_state_reachability(m, q).scheduler);
  return out;
}

namespace {

std::vector<char> reachable_from(const Mdp& m, int start) {
  std::vector<char> seen(static_cast<std::size_t>(m.num_states()), 0);
  std::deque<int> queue{start};
  seen[static_cast<std::size_t>(start)] = 1;
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

int successor_with_label(const Mdp& m, int q, int input, int output) {
  for (const auto& [succ, p] : m.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(input)]) {
    (void)p;
    if (m.labels[static_cast<std::size_t>(succ)] == output) return succ;
  }
  return -1;
}

}  // namespace

SulTeacher::SulTeacher(Sul& sul, TeacherConfig cfg, std::uint64_t seed)
    : sul_(sul),
      cfg_(cfg),
      initial_output_(sul.reset()),
      store_(initial_output_, sul.input_alphabet().size()),
      source_(store_, cfg.n_c),
      rng_(seed) {}

Trace SulTeacher::execute_sequence(const TestSequence& s) {
  Trace trace(sul_.reset());
  const auto& sym = s.symbols();
  for (std::size_t pos = 1; pos < sym.size(); pos += 2) {
    int obs = sul_.step(sym[pos]);
    trace = trace.extended(sym[pos], obs);
    if (pos + 1 < sym.size() && obs != sym[pos + 1]) break;  // system diverged
  }
  return trace;
}

void SulTeacher::refine(const std::vector<TestSequence>& incomplete) {
  if (incomplete.empty()) {
    for (int k = 0; k < cfg_.n_resample; ++k) store_.add_trace(sul_.sample_trace(cfg_.p_stop));
    return;
  }

  // Trie over the incomplete sequences, keyed by their trace prefixes. The
  // final input of each sequence dangles off the node of its trace part.
  struct Node {
    std::map<std::pair<int, int>, int> children;  // (input, output) -> node
    std::set<int> inputs;                         // edge inputs plus dangling finals
  };
  std::vector<Node> nodes(1);
  for (const auto& s : incomplete) {
    const auto& sym = s.symbols();
    int cur = 0;
    for (std::size_t pos = 1; pos + 1 < sym.size(); pos += 2) {
      auto key = std::make_pair(sym[pos], sym[pos + 1]);
      auto it = nodes[static_cast<std::size_t>(cur)].children.find(key);
      if (it == nodes[static_cast<std::size_t>(cur)].children.end()) {
        nodes[static_cast<std::size_t>(cur)].inputs.insert(sym[pos]);
        nodes.emplace_back();
        it = nodes[static_cast<std::size_t>(cur)]
                 .children.emplace(key, static_cast<int>(nodes.size()) - 1)
                 .first;
      } else {
        nodes[static_cast<std::size_t>(cur)].inputs.insert(sym[pos]);
      }
      cur = it->second;
    }
    nodes[static_cast<std::size_t>(cur)].inputs.insert(sym.back());
  }

  for (int k = 0; k < cfg_.n_resample; ++k) {
    Trace trace(sul_.reset());
    int cur = 0;
    while (cur >= 0) {
      const auto& avail = nodes[static_cast<std::size_t>(cur)].inputs;
      if (avail.empty()) break;  // cannot happen: every node carries an input
      int pick = rng_.uniform_int(static_cast<int>(avail.size()));
      int input = *std::next(avail.begin(), pick);
      int obs = sul_.step(input);
      trace = trace.extended(input, obs);
      auto it = nodes[static_cast<std::size_t>(cur)].children.find({input, obs});
      cur = it == nodes[static_cast<std::size_t>(cur)].children.end() ? -1 : it->second;
    }
    store_.add_trace(trace);
  }
}

std::optional<TestSequence> SulTeacher::find_counterexample(const Hypothesis& h, double alpha) {
  if (h.chaos_reachable()) return std::nullopt;
  const Mdp& m = h.model;
  auto schedulers = compute_schedulers(m);

  for (int episode = 0; episode < cfg_.n_test; ++episode) {
    Trace trace(sul_.reset());
    int q = m.initial;
    int target = -1;
    for (;;) {
      bool need_target = target < 0 || target == q;
      if (!need_target && !reachable_from(m, q)[static_cast<std::size_t>(target)])
        need_target = true;
      if (need_target) {
        auto seen = reachable_from(m, q);
        std::vector<int> candidates;
        for (int s = 0; s < m.num_states(); ++s)
          if (seen[static_cast<std::size_t>(s)] && s != q && s != h.chaos_state)
            candidates.push_back(s);
        target = candidates.empty()
                     ? -1
                     : candidates[static_cast<std::size_t>(
                           rng_.uniform_int(static_cast<int>(candidates.size())))];
      }

      int input = (target < 0 || rng_.bernoulli(cfg_.p_rand))
                      ? rng_.uniform_int(m.inputs.size())
                      : schedulers.at(target)[static_cast<std::size_t>(q)];
      int obs = sul_.step(input);
      int succ = successor_with_label(m, q, input, obs);
      if (succ < 0) {
        // The system produced an output the hypothesis assigns probability
        // zero: structural counterexample. Replay it until its cell is
        // complete enough to matter.
        TestSequence cex = trace.with_input(input);
        store_.add_trace(trace.extended(input, obs));
        for (int t = 0; t < cfg_.n_retest && !store_.is_complete(cex, cfg_.n_c); ++t)
          store_.add_trace(execute_sequence(cex));
        return cex;
      }
      trace = trace.extended(input, obs);
      q = succ;
      if (rng_.bernoulli(cfg_.p_stop)) break;
    }
    store_.add_trace(trace);
  }

  // Conformance pass: compare every sufficiently sampled cell against the
  // cell of the representative reaching the same hypothesis state.
  std::optional<TestSequence> found;
  store_.for_each_observed([&](const TestSequence& seq, const std::map<int, std::int64_t>& counts) {
    if (found) return;
    if (!store_.is_complete(seq, cfg_.n_c)) return;
    Trace t = seq.trace_part();
    int q = m.initial;
    for (int k = 0; k < t.input_count(); ++k) {
      int succ = successor_with_label(m, q, t.input_at(k), t.output_at(k + 1));
      if (succ < 0) {
        // Observed prefix that the hypothesis cannot follow.
        std::vector<int> prefix(t.symbols().begin(), t.symbols().begin() + 2 * k + 1);
        found = Trace(std::move(prefix)).with_input(t.input_at(k));
        return;
      }
      q = succ;
    }
    const Trace& rep = h.state_access[static_cast<std::size_t>(q)];
    if (rep == t) return;
    TestSequence rep_seq = rep.with_input(seq.last_input());
    if (!store_.is_complete(rep_seq, cfg_.n_c)) return;
    if (counts_differ(counts, store_.output_counts(rep_seq), alpha)) found = seq;
  });
  return found;
}

}  // namespace mdplearn
