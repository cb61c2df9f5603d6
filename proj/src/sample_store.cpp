#include "mdplearn/sample_store.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace mdplearn {

SampleStore::SampleStore(int initial_output, int num_inputs) : num_inputs_(num_inputs) {
  if (num_inputs <= 0) throw std::invalid_argument("store needs at least one input symbol");
  Node root;
  root.in_output = initial_output;
  root.next.resize(static_cast<std::size_t>(num_inputs));
  nodes_.push_back(std::move(root));
}

int SampleStore::initial_output() const { return nodes_[0].in_output; }

std::int64_t SampleStore::total_inputs() const {
  std::int64_t steps = 0;
  for (std::size_t k = 1; k < nodes_.size(); ++k) steps += nodes_[k].count;
  return steps;
}

void SampleStore::add_trace(const Trace& t, std::int64_t count) {
  if (count <= 0) throw std::invalid_argument("trace count must be positive");
  if (t.initial_output() != initial_output())
    throw std::invalid_argument("trace starts with a different initial output");
  int cur = 0;
  nodes_[0].count += count;
  const auto& sym = t.symbols();
  for (std::size_t k = 1; k + 1 < sym.size(); k += 2) {
    int input = sym[k];
    int output = sym[k + 1];
    if (input < 0 || input >= num_inputs_) throw std::invalid_argument("input symbol out of range");
    auto& edge = nodes_[static_cast<std::size_t>(cur)].next[static_cast<std::size_t>(input)];
    auto it = edge.find(output);
    if (it == edge.end()) {
      Node n;
      n.parent = cur;
      n.in_input = input;
      n.in_output = output;
      n.next.resize(static_cast<std::size_t>(num_inputs_));
      nodes_.push_back(std::move(n));
      it = edge.emplace(output, static_cast<int>(nodes_.size()) - 1).first;
    }
    cur = it->second;
    nodes_[static_cast<std::size_t>(cur)].count += count;
  }
}

int SampleStore::child(int node, int input, int output) const {
  const auto& edge = nodes_[static_cast<std::size_t>(node)].next[static_cast<std::size_t>(input)];
  auto it = edge.find(output);
  return it == edge.end() ? -1 : it->second;
}

// Node reached by the first prefix_len symbols (an odd count, trace-shaped);
// -1 when that prefix was never sampled. Callers check the initial output.
int SampleStore::walk(const std::vector<int>& symbols, std::size_t prefix_len) const {
  int cur = 0;
  for (std::size_t k = 1; k + 1 < prefix_len; k += 2) {
    cur = child(cur, symbols[k], symbols[k + 1]);
    if (cur < 0) return -1;
  }
  return cur;
}

std::map<int, std::int64_t> SampleStore::output_counts(const TestSequence& s) const {
  std::map<int, std::int64_t> out;
  const auto& sym = s.symbols();
  if (sym.empty()) {
    if (nodes_[0].count > 0) out[initial_output()] = nodes_[0].count;
    return out;
  }
  if (sym[0] != initial_output()) return out;
  int cur = walk(sym, sym.size() - 1);
  if (cur < 0) return out;
  int input = sym.back();
  if (input < 0 || input >= num_inputs_) throw std::invalid_argument("input symbol out of range");
  for (const auto& [o, node] : nodes_[static_cast<std::size_t>(cur)].next[static_cast<std::size_t>(input)])
    out[o] = nodes_[static_cast<std::size_t>(node)].count;
  return out;
}

std::int64_t SampleStore::total(const TestSequence& s) const {
  std::int64_t sum = 0;
  for (const auto& [o, c] : output_counts(s)) {
    (void)o;
    sum += c;
  }
  return sum;
}

std::map<int, double> SampleStore::frequencies(const TestSequence& s) const {
  std::map<int, double> out;
  auto counts = output_counts(s);
  std::int64_t sum = 0;
  for (const auto& [o, c] : counts) {
    (void)o;
    sum += c;
  }
  if (sum == 0) return out;
  for (const auto& [o, c] : counts) out[o] = static_cast<double>(c) / static_cast<double>(sum);
  return out;
}

bool SampleStore::is_complete(const TestSequence& s, std::int64_t threshold) const {
  const auto& sym = s.symbols();
  if (sym.empty()) return nodes_[0].count >= threshold;
  if (sym[0] != initial_output()) return false;
  int cur = 0;
  for (std::size_t k = 1; k < sym.size(); k += 2) {
    int input = sym[k];
    if (input < 0 || input >= num_inputs_) throw std::invalid_argument("input symbol out of range");
    std::int64_t tried = 0;
    const auto& edge = nodes_[static_cast<std::size_t>(cur)].next[static_cast<std::size_t>(input)];
    for (const auto& [o, node] : edge) {
      (void)o;
      tried += nodes_[static_cast<std::size_t>(node)].count;
    }
    if (k + 1 == sym.size()) return tried >= threshold;  // the sequence itself
    auto it = edge.find(sym[k + 1]);
    // A well-tried prefix that never continues with the required output
    // settles the whole sequence as (vacuously) complete.
    if (it == edge.end()) return tried >= threshold;
    cur = it->second;
  }
  return false;
}

int SampleStore::node_of(const Trace& t) const {
  const auto& sym = t.symbols();
  if (sym[0] != initial_output()) return -1;
  return walk(sym, sym.size());
}

std::int64_t SampleStore::end_count(int node) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  std::int64_t through = 0;
  for (const auto& edge : n.next)
    for (const auto& [o, c] : edge) {
      (void)o;
      through += nodes_[static_cast<std::size_t>(c)].count;
    }
  return n.count - through;
}

const std::map<int, int>& SampleStore::successors(int node, int input) const {
  return nodes_[static_cast<std::size_t>(node)].next.at(static_cast<std::size_t>(input));
}

Trace SampleStore::trace_of(int node) const {
  std::vector<int> rev;
  int cur = node;
  while (cur > 0) {
    const Node& n = nodes_[static_cast<std::size_t>(cur)];
    rev.push_back(n.in_output);
    rev.push_back(n.in_input);
    cur = n.parent;
  }
  rev.push_back(initial_output());
  return Trace(std::vector<int>(rev.rbegin(), rev.rend()));
}

void SampleStore::for_each_observed(
    const std::function<void(const TestSequence&, const std::map<int, std::int64_t>&)>& fn) const {
  // Depth-first, children in (input, output) order, so shorter sequences of a
  // branch come first and the overall order is reproducible.
  std::vector<int> sym{initial_output()};
  std::function<void(int)> visit = [&](int node) {
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    for (int i = 0; i < num_inputs_; ++i) {
      const auto& edge = n.next[static_cast<std::size_t>(i)];
      if (edge.empty()) continue;
      std::map<int, std::int64_t> counts;
      for (const auto& [o, c] : edge) counts[o] = nodes_[static_cast<std::size_t>(c)].count;
      sym.push_back(i);
      fn(TestSequence(sym), counts);
      for (const auto& [o, c] : edge) {
        sym.push_back(o);
        visit(c);
        sym.pop_back();
      }
      sym.pop_back();
    }
  };
  visit(0);
}

void SampleStore::save_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::function<void(int)> visit = [&](int node) {
    std::int64_t ec = end_count(node);
    if (ec > 0) {
      nlohmann::ordered_json line;
      line["trace"] = trace_of(node).symbols();
      line["count"] = ec;
      out << line.dump() << "\n";
    }
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    for (const auto& edge : n.next)
      for (const auto& [o, c] : edge) {
        (void)o;
        visit(c);
      }
  };
  visit(0);
}

SampleStore SampleStore::load_jsonl(const std::string& path, int num_inputs) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::vector<std::pair<Trace, std::int64_t>> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    entries.emplace_back(Trace(j.at("trace").get<std::vector<int>>()),
                         j.at("count").get<std::int64_t>());
  }
  if (entries.empty()) throw std::runtime_error("empty sample file " + path);
  SampleStore store(entries.front().first.initial_output(), num_inputs);
  for (const auto& [t, c] : entries) store.add_trace(t, c);
  return store;
}

}  // namespace mdplearn
