#include "mdplearn/alergia.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>
#include <utility>

#include "mdplearn/sampling_learning.hpp"

namespace mdplearn {

int Fpta::add_node(int label) {
  FptaNode n;
  n.label = label;
  n.children.resize(static_cast<std::size_t>(inputs.size()));
  n.counts.resize(static_cast<std::size_t>(inputs.size()));
  nodes.push_back(std::move(n));
  return static_cast<int>(nodes.size()) - 1;
}

Fpta build_fpta(const SampleStore& store, const Alphabet& inputs, const Alphabet& outputs) {
  if (store.num_inputs() != inputs.size())
    throw std::invalid_argument("input alphabet does not match the sample store");
  Fpta f;
  f.inputs = inputs;
  f.outputs = outputs;
  f.add_node(store.initial_output());
  std::deque<std::pair<int, int>> queue{{store.root(), 0}};
  while (!queue.empty()) {
    auto [sn, fn] = queue.front();
    queue.pop_front();
    for (int i = 0; i < store.num_inputs(); ++i) {
      for (const auto& [o, child] : store.successors(sn, i)) {
        int c = f.add_node(o);
        f.nodes[static_cast<std::size_t>(fn)].children[static_cast<std::size_t>(i)][o] = c;
        f.nodes[static_cast<std::size_t>(fn)].counts[static_cast<std::size_t>(i)][o] =
            store.count_of(child);
        queue.emplace_back(child, c);
      }
    }
  }
  return f;
}

namespace {

bool nodes_compatible(const Fpta& f, int r, int b, double eps) {
  const FptaNode& nr = f.nodes[static_cast<std::size_t>(r)];
  const FptaNode& nb = f.nodes[static_cast<std::size_t>(b)];
  if (nr.label != nb.label) return false;
  for (std::size_t i = 0; i < nr.counts.size(); ++i) {
    if (counts_differ_bound_only(nr.counts[i], nb.counts[i], eps)) return false;
    for (const auto& [o, child_b] : nb.children[i]) {
      auto it = nr.children[i].find(o);
      if (it != nr.children[i].end() && !nodes_compatible(f, it->second, child_b, eps))
        return false;
    }
  }
  return true;
}

// Adds b's subtree counts into r, transplanting branches r does not have.
// b-side nodes descend strictly, so this terminates.
void fold(Fpta& f, int r, int b) {
  for (int i = 0; i < f.inputs.size(); ++i) {
    for (const auto& [o, child_b] : f.nodes[static_cast<std::size_t>(b)].children[static_cast<std::size_t>(i)]) {
      std::int64_t cb = f.nodes[static_cast<std::size_t>(b)].counts[static_cast<std::size_t>(i)].at(o);
      auto& row_children = f.nodes[static_cast<std::size_t>(r)].children[static_cast<std::size_t>(i)];
      f.nodes[static_cast<std::size_t>(r)].counts[static_cast<std::size_t>(i)][o] += cb;
      auto it = row_children.find(o);
      if (it == row_children.end()) {
        row_children.emplace(o, child_b);
      } else {
        fold(f, it->second, child_b);
      }
    }
  }
}

bool access_shortlex_less(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

Mdp ioalergia_merge(Fpta f, double eps) {
  if (eps <= 0.0 || eps >= 2.0) throw std::invalid_argument("eps out of range");
  if (f.nodes.empty()) throw std::invalid_argument("empty tree");

  std::vector<int> reds{0};
  std::vector<std::vector<int>> red_access{{}};
  std::vector<char> is_red(f.nodes.size(), 0);
  is_red[0] = 1;

  for (;;) {
    // Blue set: non-red children of red nodes, with their access sequences.
    int blue = -1, blue_parent = -1, blue_in = -1, blue_out = -1;
    std::vector<int> blue_access;
    for (std::size_t k = 0; k < reds.size(); ++k) {
      int r = reds[k];
      for (int i = 0; i < f.inputs.size(); ++i) {
        for (const auto& [o, child] : f.nodes[static_cast<std::size_t>(r)].children[static_cast<std::size_t>(i)]) {
          if (is_red[static_cast<std::size_t>(child)]) continue;
          std::vector<int> access = red_access[k];
          access.push_back(i);
          access.push_back(o);
          if (blue < 0 || access_shortlex_less(access, blue_access)) {
            blue = child;
            blue_parent = r;
            blue_in = i;
            blue_out = o;
            blue_access = std::move(access);
          }
        }
      }
    }
    if (blue < 0) break;

    int merged_into = -1;
    for (int r : reds) {
      if (nodes_compatible(f, r, blue, eps)) {
        merged_into = r;
        break;
      }
    }
    if (merged_into < 0) {
      is_red[static_cast<std::size_t>(blue)] = 1;
      reds.push_back(blue);
      red_access.push_back(std::move(blue_access));
    } else {
      f.nodes[static_cast<std::size_t>(blue_parent)].children[static_cast<std::size_t>(blue_in)][blue_out] =
          merged_into;
      fold(f, merged_into, blue);
    }
  }

  Mdp out;
  out.inputs = f.inputs;
  out.outputs = f.outputs;
  std::vector<int> state_of(f.nodes.size(), -1);
  for (std::size_t k = 0; k < reds.size(); ++k)
    state_of[static_cast<std::size_t>(reds[k])] =
        out.add_state("q" + std::to_string(k), f.nodes[static_cast<std::size_t>(reds[k])].label);
  out.initial = 0;

  std::string padded;
  for (std::size_t k = 0; k < reds.size(); ++k) {
    const FptaNode& node = f.nodes[static_cast<std::size_t>(reds[k])];
    for (int i = 0; i < f.inputs.size(); ++i) {
      std::int64_t total = 0;
      for (const auto& [o, c] : node.counts[static_cast<std::size_t>(i)]) {
        (void)o;
        total += c;
      }
      StateDistribution row;
      if (total <= 0) {
        row.emplace_back(static_cast<int>(k), 1.0);
        if (!padded.empty()) padded += ";";
        padded += out.state_names[k] + ":" + f.inputs.name(i);
      } else {
        for (const auto& [o, c] : node.counts[static_cast<std::size_t>(i)]) {
          if (c <= 0) continue;
          int child = node.children[static_cast<std::size_t>(i)].at(o);
          int target = state_of[static_cast<std::size_t>(child)];
          if (target < 0) throw std::logic_error("merged tree has a non-red child");
          row.emplace_back(target, static_cast<double>(c) / static_cast<double>(total));
        }
      }
      out.trans[k][static_cast<std::size_t>(i)] = std::move(row);
    }
  }
  if (!padded.empty()) out.metadata["padded_transitions"] = padded;
  return out;
}

Mdp ioalergia_learn(const SampleStore& store, const Alphabet& inputs, const Alphabet& outputs,
                    double eps) {
  return ioalergia_merge(build_fpta(store, inputs, outputs), eps);
}

double alergia_epsilon(const SampleStore& store) {
  std::int64_t steps = store.total_inputs();
  if (steps <= 0) return 1.0;
  double eps = 10000.0 / static_cast<double>(steps);
  return eps < 1.0 ? eps : 1.0;
}

}  // namespace mdplearn
