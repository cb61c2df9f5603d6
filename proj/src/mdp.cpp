#include "mdplearn/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mdplearn {

namespace {

void check_state(const Mdp& m, int q) {
  if (q < 0 || q >= m.num_states()) throw std::invalid_argument("state id out of range");
}

void check_input(const Mdp& m, int i) {
  if (i < 0 || i >= m.inputs.size()) throw std::invalid_argument("input id out of range");
}

void check_output(const Mdp& m, int o) {
  if (o < 0 || o >= m.outputs.size()) throw std::invalid_argument("output id out of range");
}

}  // namespace

bool distributions_equal(const std::map<int, double>& a,
                         const std::map<int, double>& b, double tol) {
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    double w = it == b.end() ? 0.0 : it->second;
    if (std::abs(v - w) > tol) return false;
  }
  for (const auto& [k, v] : b) {
    if (a.find(k) == a.end() && std::abs(v) > tol) return false;
  }
  return true;
}

std::optional<int> successor(const Mdp& m, int state, int input, int output) {
  check_state(m, state);
  check_input(m, input);
  check_output(m, output);
  for (const auto& [q, p] : m.trans[static_cast<std::size_t>(state)][static_cast<std::size_t>(input)]) {
    if (p > 0.0 && m.labels[static_cast<std::size_t>(q)] == output) return q;
  }
  return std::nullopt;
}

std::optional<int> run_trace(const Mdp& m, const Trace& t) {
  check_output(m, t.initial_output());
  if (t.initial_output() != m.labels[static_cast<std::size_t>(m.initial)]) return std::nullopt;
  int q = m.initial;
  for (std::size_t k = 0; k < t.input_count(); ++k) {
    auto next = successor(m, q, t.input_at(k), t.output_at(k + 1));
    if (!next) return std::nullopt;
    q = *next;
  }
  return q;
}

OutputDistribution semantics(const Mdp& m, const TestSequence& s) {
  if (s.empty()) {
    return std::map<int, double>{{m.labels[static_cast<std::size_t>(m.initial)], 1.0}};
  }
  auto q = run_trace(m, s.trace_part());
  if (!q) return std::nullopt;
  check_input(m, s.last_input());
  std::map<int, double> dist;
  for (const auto& [succ, p] :
       m.trans[static_cast<std::size_t>(*q)][static_cast<std::size_t>(s.last_input())]) {
    if (p > 0.0) dist[m.labels[static_cast<std::size_t>(succ)]] += p;
  }
  return dist;
}

double path_probability(const Mdp& m, const Scheduler& sched,
                        const LengthDistribution& length_dist, const Path& path) {
  if (path.states.empty() || path.states.size() != path.inputs.size() + 1)
    throw std::invalid_argument("malformed path");
  if (path.states.front() != m.initial)
    throw std::invalid_argument("path must start in the initial state");
  for (int q : path.states) check_state(m, q);
  for (int i : path.inputs) check_input(m, i);

  double p = length_dist(path.inputs.size());
  Path prefix;
  prefix.states.push_back(path.states.front());
  for (std::size_t k = 0; k < path.inputs.size(); ++k) {
    int q = path.states[k];
    int i = path.inputs[k];
    int q_next = path.states[k + 1];

    double sched_p = 0.0;
    if (std::holds_alternative<MemorylessScheduler>(sched)) {
      const auto& ms = std::get<MemorylessScheduler>(sched);
      sched_p = ms.at(static_cast<std::size_t>(q)) == i ? 1.0 : 0.0;
    } else {
      auto dist = std::get<RandomizedScheduler>(sched)(prefix);
      auto it = dist.find(i);
      sched_p = it == dist.end() ? 0.0 : it->second;
    }

    double trans_p = 0.0;
    for (const auto& [succ, tp] : m.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)]) {
      if (succ == q_next) trans_p = tp;
    }

    p *= sched_p * trans_p;
    if (p == 0.0) return 0.0;
    prefix.inputs.push_back(i);
    prefix.states.push_back(q_next);
  }
  return p;
}

namespace {

std::vector<int> reachable_states(const Mdp& m) {
  std::vector<bool> seen(static_cast<std::size_t>(m.num_states()), false);
  std::deque<int> queue{m.initial};
  seen[static_cast<std::size_t>(m.initial)] = true;
  std::vector<int> order;
  while (!queue.empty()) {
    int q = queue.front();
    queue.pop_front();
    order.push_back(q);
    for (int i = 0; i < m.inputs.size(); ++i) {
      for (const auto& [succ, p] : m.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)]) {
        if (p > 0.0 && !seen[static_cast<std::size_t>(succ)]) {
          seen[static_cast<std::size_t>(succ)] = true;
          queue.push_back(succ);
        }
      }
    }
  }
  return order;
}

}  // namespace

Mdp minimize(const Mdp& m) {
  std::vector<int> reach = reachable_states(m);
  int n = m.num_states();
  std::vector<int> block(static_cast<std::size_t>(n), -1);

  // Initial partition by label, refined until block-probability signatures
  // stabilize. Signatures are compared within tolerance against the first
  // member of each candidate group, which keeps the grouping deterministic.
  {
    std::map<int, int> label_block;
    for (int q : reach) {
      int lbl = m.labels[static_cast<std::size_t>(q)];
      auto it = label_block.find(lbl);
      if (it == label_block.end())
        it = label_block.emplace(lbl, static_cast<int>(label_block.size())).first;
      block[static_cast<std::size_t>(q)] = it->second;
    }
  }

  auto signature = [&](int q) {
    // per input: block -> accumulated probability
    std::vector<std::map<int, double>> sig(static_cast<std::size_t>(m.inputs.size()));
    for (int i = 0; i < m.inputs.size(); ++i) {
      for (const auto& [succ, p] : m.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)]) {
        if (p > 0.0) sig[static_cast<std::size_t>(i)][block[static_cast<std::size_t>(succ)]] += p;
      }
    }
    return sig;
  };
  auto signatures_equal = [](const std::vector<std::map<int, double>>& a,
                             const std::vector<std::map<int, double>>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!distributions_equal(a[i], b[i], kProbTolerance)) return false;
    return true;
  };

  for (;;) {
    // Group states of each block by signature.
    std::map<int, std::vector<int>> members;
    for (int q : reach) members[block[static_cast<std::size_t>(q)]].push_back(q);

    std::vector<int> next_block(static_cast<std::size_t>(n), -1);
    int next_count = 0;
    bool changed = false;
    for (const auto& [b, qs] : members) {
      std::vector<std::vector<std::map<int, double>>> group_sigs;
      std::vector<int> group_ids;
      for (int q : qs) {
        auto sig = signature(q);
        int found = -1;
        for (std::size_t g = 0; g < group_sigs.size(); ++g) {
          if (signatures_equal(sig, group_sigs[g])) {
            found = group_ids[g];
            break;
          }
        }
        if (found < 0) {
          found = next_count++;
          group_sigs.push_back(std::move(sig));
          group_ids.push_back(found);
        }
        next_block[static_cast<std::size_t>(q)] = found;
      }
      if (group_ids.size() > 1) changed = true;
      (void)b;
    }
    block = std::move(next_block);
    if (!changed) break;
  }

  // Canonical numbering by breadth-first search over the quotient, expanding
  // inputs in declaration order and successors in output order, so block k's
  // access trace is the lexicographically least among shortest.
  std::map<int, int> renumber;
  std::map<int, int> block_rep;  // smallest original state id per block
  for (int q : reach) {
    int b = block[static_cast<std::size_t>(q)];
    auto it = block_rep.find(b);
    if (it == block_rep.end() || q < it->second) block_rep[b] = q;
  }

  std::deque<int> queue{block[static_cast<std::size_t>(m.initial)]};
  renumber[block[static_cast<std::size_t>(m.initial)]] = 0;
  std::vector<int> block_order{block[static_cast<std::size_t>(m.initial)]};
  while (!queue.empty()) {
    int b = queue.front();
    queue.pop_front();
    int rep = block_rep.at(b);
    for (int i = 0; i < m.inputs.size(); ++i) {
      // successors ordered by label (output declaration order)
      std::map<int, int> by_output;
      for (const auto& [succ, p] : m.trans[static_cast<std::size_t>(rep)][static_cast<std::size_t>(i)]) {
        if (p > 0.0) by_output[m.labels[static_cast<std::size_t>(succ)]] = block[static_cast<std::size_t>(succ)];
      }
      for (const auto& [o, sb] : by_output) {
        (void)o;
        if (renumber.find(sb) == renumber.end()) {
          renumber[sb] = static_cast<int>(renumber.size());
          block_order.push_back(sb);
          queue.push_back(sb);
        }
      }
    }
  }

  Mdp out;
  out.inputs = m.inputs;
  out.outputs = m.outputs;
  out.initial = 0;
  for (std::size_t k = 0; k < block_order.size(); ++k) {
    int rep = block_rep.at(block_order[k]);
    out.add_state("q" + std::to_string(k), m.labels[static_cast<std::size_t>(rep)]);
  }
  for (std::size_t k = 0; k < block_order.size(); ++k) {
    int rep = block_rep.at(block_order[k]);
    for (int i = 0; i < m.inputs.size(); ++i) {
      std::map<int, double> acc;  // new state id -> prob
      for (const auto& [succ, p] : m.trans[static_cast<std::size_t>(rep)][static_cast<std::size_t>(i)]) {
        if (p > 0.0) acc[renumber.at(block[static_cast<std::size_t>(succ)])] += p;
      }
      StateDistribution dist(acc.begin(), acc.end());
      out.trans[k][static_cast<std::size_t>(i)] = std::move(dist);
    }
  }
  return out;
}

std::optional<TestSequence> equivalence_check(const Mdp& m1, const Mdp& m2) {
  if (m1.inputs != m2.inputs) {
    // Allow identical sets in different order? No: declaration order is part
    // of the interface; require equal alphabets.
    throw std::invalid_argument("equivalence_check requires identical input alphabets");
  }

  auto label_name = [](const Mdp& m, int q) -> const std::string& {
    return m.outputs.name(m.labels[static_cast<std::size_t>(q)]);
  };

  if (label_name(m1, m1.initial) != label_name(m2, m2.initial))
    return TestSequence();  // distinguished by the empty sequence

  struct Pair {
    int q1;
    int q2;
    Trace access;
  };
  std::set<std::pair<int, int>> seen;
  std::deque<Pair> queue;
  queue.push_back({m1.initial, m2.initial, Trace(m1.labels[static_cast<std::size_t>(m1.initial)])});
  seen.insert({m1.initial, m2.initial});

  while (!queue.empty()) {
    Pair pr = queue.front();
    queue.pop_front();
    for (int i = 0; i < m1.inputs.size(); ++i) {
      // Output-name keyed distributions of both sides.
      std::map<std::string, std::pair<double, int>> d1;  // name -> (prob, succ)
      std::map<std::string, std::pair<double, int>> d2;
      for (const auto& [succ, p] : m1.trans[static_cast<std::size_t>(pr.q1)][static_cast<std::size_t>(i)])
        if (p > 0.0) d1[label_name(m1, succ)] = {d1[label_name(m1, succ)].first + p, succ};
      for (const auto& [succ, p] : m2.trans[static_cast<std::size_t>(pr.q2)][static_cast<std::size_t>(i)])
        if (p > 0.0) d2[label_name(m2, succ)] = {d2[label_name(m2, succ)].first + p, succ};

      bool differ = false;
      for (const auto& [name, pv] : d1) {
        auto it = d2.find(name);
        double other = it == d2.end() ? 0.0 : it->second.first;
        if (std::abs(pv.first - other) > kProbTolerance) differ = true;
      }
      for (const auto& [name, pv] : d2) {
        if (d1.find(name) == d1.end() && pv.first > kProbTolerance) differ = true;
      }
      if (differ) return pr.access.with_input(i);

      // Descend along outputs in m1's declaration order.
      std::map<int, std::pair<int, int>> joint;  // m1 output id -> succ pair
      for (const auto& [name, pv] : d1) {
        if (pv.first <= kProbTolerance) continue;
        auto oid = m1.outputs.index_of(name);
        auto it = d2.find(name);
        if (oid && it != d2.end()) joint[*oid] = {pv.second, it->second.second};
      }
      for (const auto& [oid, succs] : joint) {
        if (seen.insert({succs.first, succs.second}).second) {
          queue.push_back({succs.first, succs.second, pr.access.extended(i, oid)});
        }
      }
    }
  }
  return std::nullopt;
}

std::vector<std::string> validate(const Mdp& m) {
  std::vector<std::string> out;
  int n = m.num_states();
  if (n == 0) {
    out.push_back("model has no states");
    return out;
  }
  if (m.initial < 0 || m.initial >= n) out.push_back("initial state out of range");
  if (static_cast<int>(m.state_names.size()) != n) out.push_back("state name table size mismatch");
  if (static_cast<int>(m.trans.size()) != n) {
    out.push_back("transition table size mismatch");
    return out;
  }
  for (int q = 0; q < n; ++q) {
    const std::string qn = q < static_cast<int>(m.state_names.size())
                               ? m.state_names[static_cast<std::size_t>(q)]
                               : std::to_string(q);
    if (m.labels[static_cast<std::size_t>(q)] < 0 || m.labels[static_cast<std::size_t>(q)] >= m.outputs.size())
      out.push_back("state " + qn + ": label out of range");
    if (static_cast<int>(m.trans[static_cast<std::size_t>(q)].size()) != m.inputs.size()) {
      out.push_back("state " + qn + ": transition row count != input count");
      continue;
    }
    for (int i = 0; i < m.inputs.size(); ++i) {
      const auto& dist = m.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)];
      const std::string where = "state " + qn + ", input " + m.inputs.name(i);
      if (dist.empty()) {
        out.push_back(where + ": missing distribution (model must be input-enabled)");
        continue;
      }
      double sum = 0.0;
      std::set<int> succ_seen;
      std::set<int> labels_seen;
      for (const auto& [succ, p] : dist) {
        if (succ < 0 || succ >= n) {
          out.push_back(where + ": successor out of range");
          continue;
        }
        if (!succ_seen.insert(succ).second) out.push_back(where + ": duplicate successor entry");
        if (p < 0.0 || p > 1.0) out.push_back(where + ": probability outside [0,1]");
        sum += p;
        if (p > 0.0) {
          int lbl = m.labels[static_cast<std::size_t>(succ)];
          if (!labels_seen.insert(lbl).second)
            out.push_back(where + ": two positive successors share label " +
                          (lbl >= 0 && lbl < m.outputs.size() ? m.outputs.name(lbl) : "?"));
        }
      }
      if (std::abs(sum - 1.0) > kProbTolerance)
        out.push_back(where + ": probabilities sum to " + std::to_string(sum));
    }
  }
  return out;
}

std::string format_trace(const Mdp& m, const Trace& t) {
  std::ostringstream os;
  for (std::size_t k = 0; k < t.symbols().size(); ++k) {
    if (k > 0) os << ".";
    int s = t.symbols()[k];
    os << (k % 2 == 0 ? m.outputs.name(s) : m.inputs.name(s));
  }
  return os.str();
}

std::string format_test_sequence(const Mdp& m, const TestSequence& s) {
  std::ostringstream os;
  for (std::size_t k = 0; k < s.symbols().size(); ++k) {
    if (k > 0) os << ".";
    int sym = s.symbols()[k];
    os << (k % 2 == 0 ? m.outputs.name(sym) : m.inputs.name(sym));
  }
  return os.str();
}

}  // namespace mdplearn
