#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "mdplearn/mdp.hpp"
#include "mdplearn/sample_store.hpp"

namespace mdplearn {

struct FptaNode {
  int label = 0;
  std::vector<std::map<int, int>> children;         // per input: output -> node
  std::vector<std::map<int, std::int64_t>> counts;  // per input: output -> observations
};

// Frequency prefix tree over input/output steps; node 0 is the root. Where a
// count is positive the corresponding child node must exist (leaves carry
// zero counts of their own).
struct Fpta {
  Alphabet inputs;
  Alphabet outputs;
  std::vector<FptaNode> nodes;

  int add_node(int label);
};

Fpta build_fpta(const SampleStore& store, const Alphabet& inputs, const Alphabet& outputs);

// Red-blue state merging over the tree: blue nodes are processed in shortlex
// order of their access sequences and merged into the first compatible red
// (creation order), where compatibility is the recursive two-sample frequency
// test with confidence eps. Rows never observed become self-loops, listed in
// metadata under "padded_transitions".
Mdp ioalergia_merge(Fpta fpta, double eps);

Mdp ioalergia_learn(const SampleStore& store, const Alphabet& inputs, const Alphabet& outputs,
                    double eps);

// Data-dependent confidence schedule 10000/N with N the total number of
// sampled input steps, capped at 1.
double alergia_epsilon(const SampleStore& store);

}  // namespace mdplearn
