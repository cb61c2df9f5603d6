#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mdplearn/mdp.hpp"

namespace mdplearn {

// Reachability property: eventually observe `goal` (within `bound` inputs if
// set) while never observing a label from `avoid` before that.
struct PropertySpec {
  std::string goal;
  std::set<std::string> avoid;
  std::optional<int> bound;
  std::string text;  // original source form

  bool operator==(const PropertySpec& o) const {
    return goal == o.goal && avoid == o.avoid && bound == o.bound;
  }
};

// Grammar: "F goal", "F<=k goal", "!avoid U goal", "!avoid U<=k goal".
// Multiple avoid labels may be comma-separated. Throws std::invalid_argument
// on malformed input or when goal appears in the avoid set.
PropertySpec parse_property(const std::string& text);

// Maximal probability, over all schedulers, of reaching a goal-labelled state
// within the given property's bound (value iteration; unbounded properties
// iterate to a 1e-9 fixpoint). Goal states absorb, avoid states fail.
// Labels are resolved by name; unknown labels raise std::invalid_argument,
// except that "chaos" is always admissible and simply unreachable when the
// model carries no such output.
double pmax(const Mdp& m, const PropertySpec& prop);

// Unbounded maximal probability of reaching a concrete state, plus an
// optimizing memoryless scheduler (argmax ties broken by input declaration
// order). Value iteration with absolute tolerance 1e-6.
struct ReachabilityResult {
  std::vector<double> value;
  MemorylessScheduler scheduler;
};
ReachabilityResult max_state_reachability(const Mdp& m, int target_state);

// Exact optimal transport cost between two sparse distributions under the
// given ground distance (successive shortest augmenting paths; supports are
// tiny). mu1/mu2 are (index, mass) lists over the distance matrix's index
// space; masses must each sum to 1 within 1e-9.
double kantorovich(const std::vector<std::vector<double>>& distance,
                   const std::vector<std::pair<int, double>>& mu1,
                   const std::vector<std::pair<int, double>>& mu2);

struct DistanceConfig {
  double discount = 0.9;     // contraction factor
  double tolerance = 1e-6;   // fixpoint stopping threshold
  int max_iterations = 10000;
};

// Discounted bisimilarity distance between the initial states of two models
// over the disjoint union of their state spaces. Labels are matched by name;
// input alphabets must agree. Computed on the product-reachable pair set,
// which is exactly the part of the fixpoint the result depends on.
double bisim_distance(const Mdp& m1, const Mdp& m2, const DistanceConfig& cfg = {});

// Full pairwise distance matrix over the pooled state space (m1's states
// first). Exposed for the pseudometric property checks; quadratic, intended
// for small models.
std::vector<std::vector<double>> bisim_distance_matrix(const Mdp& m1, const Mdp& m2,
                                                       const DistanceConfig& cfg = {});

}  // namespace mdplearn
