#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mdplearn/sequences.hpp"

namespace mdplearn {

// Multiset of sampled traces, stored as a prefix-count trie. A node stands
// for a trace; its count is the number of samples passing through it
// (samples that end there included). All traces share the initial output.
class SampleStore {
 public:
  SampleStore(int initial_output, int num_inputs);

  void add_trace(const Trace& t, std::int64_t count = 1);

  // Number of traces in the multiset.
  std::int64_t size() const { return nodes_[0].count; }
  // Number of input steps summed over all samples.
  std::int64_t total_inputs() const;
  int initial_output() const;
  int num_inputs() const { return num_inputs_; }

  // Counts of each output observed right after the sequence.
  std::map<int, std::int64_t> output_counts(const TestSequence& s) const;
  std::int64_t total(const TestSequence& s) const;
  // Empirical output distribution; empty map when nothing was observed.
  std::map<int, double> frequencies(const TestSequence& s) const;

  // A sequence is complete when it was tried at least `threshold` times, or
  // some well-tried prefix shows the next output of the sequence never
  // occurs (so the remainder is unreachable).
  bool is_complete(const TestSequence& s, std::int64_t threshold) const;

  // --- read-only trie access ----------------------------------------------
  int root() const { return 0; }
  // Node for a trace, -1 when the trace was never observed.
  int node_of(const Trace& t) const;
  std::int64_t count_of(int node) const { return nodes_[static_cast<std::size_t>(node)].count; }
  // Samples ending exactly at this node.
  std::int64_t end_count(int node) const;
  // output -> child node under the given input.
  const std::map<int, int>& successors(int node, int input) const;
  Trace trace_of(int node) const;

  // Calls fn for every observed (trace, input) pair, i.e. every test
  // sequence with total > 0, in depth-first shortpath order.
  void for_each_observed(
      const std::function<void(const TestSequence&, const std::map<int, std::int64_t>&)>& fn) const;

  // One JSON object per line: {"trace": [...], "count": n} for every
  // distinct complete sample. Loading a saved store reproduces it exactly.
  void save_jsonl(const std::string& path) const;
  static SampleStore load_jsonl(const std::string& path, int num_inputs);

 private:
  struct Node {
    std::int64_t count = 0;
    int parent = -1;
    int in_input = -1;
    int in_output = -1;
    std::vector<std::map<int, int>> next;  // per input: output -> node
  };

  int walk(const std::vector<int>& symbols, std::size_t prefix_len) const;
  int child(int node, int input, int output) const;

  int num_inputs_;
  std::vector<Node> nodes_;
};

}  // namespace mdplearn
