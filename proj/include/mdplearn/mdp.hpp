#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mdplearn/alphabet.hpp"
#include "mdplearn/sequences.hpp"

namespace mdplearn {

// Absolute tolerance for probability comparisons on model data.
inline constexpr double kProbTolerance = 1e-9;

// One sparse probability distribution over successor states, kept sorted by
// state id. Only positive entries are meaningful.
using StateDistribution = std::vector<std::pair<int, double>>;

// Deterministic labelled MDP. Determinism here means: for a fixed state and
// input, no two positive-probability successors carry the same label, so an
// observed output identifies the successor.
struct Mdp {
  Alphabet inputs;
  Alphabet outputs;
  std::vector<std::string> state_names;  // file-facing names, "q0", "q1", ...
  std::vector<int> labels;               // state -> output id
  int initial = 0;
  // trans[state][input] -> distribution over successor states.
  std::vector<std::vector<StateDistribution>> trans;
  // Free-form annotations carried through (de)serialization, e.g. the passive
  // baseline marks input-enabledness padding here.
  std::map<std::string, std::string> metadata;

  int num_states() const { return static_cast<int>(labels.size()); }

  int add_state(const std::string& name, int label) {
    state_names.push_back(name);
    labels.push_back(label);
    trans.emplace_back(static_cast<std::size_t>(inputs.size()));
    return num_states() - 1;
  }
};

// Distribution over outputs, or "undefined" for unobservable sequences.
using OutputDistribution = std::optional<std::map<int, double>>;

// A finite path: alternating states and inputs, starting and ending in a
// state. states.size() == inputs.size() + 1.
struct Path {
  std::vector<int> states;
  std::vector<int> inputs;
};

// Memoryless scheduler: per-state input choice.
using MemorylessScheduler = std::vector<int>;
// Randomized history-dependent scheduler: distribution over inputs given the
// path so far.
using RandomizedScheduler = std::function<std::map<int, double>(const Path&)>;
using Scheduler = std::variant<MemorylessScheduler, RandomizedScheduler>;

// Distribution over path lengths (number of inputs).
using LengthDistribution = std::function<double(std::size_t)>;

// --- core operations ------------------------------------------------------

// Successor of q under input i with observed output o; nullopt if no
// positive-probability successor carries o.
std::optional<int> successor(const Mdp& m, int state, int input, int output);

// State reached by a trace, or nullopt if the trace is not observable.
// Throws std::invalid_argument on out-of-range symbols.
std::optional<int> run_trace(const Mdp& m, const Trace& t);

// Output distribution after a test sequence; nullopt when unobservable.
OutputDistribution semantics(const Mdp& m, const TestSequence& s);

// Probability of a concrete path under a scheduler and a length distribution.
// Throws std::invalid_argument if the path does not start in the initial
// state or is malformed.
double path_probability(const Mdp& m, const Scheduler& sched,
                        const LengthDistribution& length_dist, const Path& path);

// Canonical minimal form: one state per class of output-distribution
// equivalent reachable states; state 0 is the class of the initial state and
// the remaining classes are numbered by shortest (then lexicographically
// least) access trace.
Mdp minimize(const Mdp& m);

// nullopt when the two models are output-distribution equivalent; otherwise
// the shortest (lexicographically least among shortest) test sequence whose
// semantics differ beyond tolerance. The sequence is observable in both
// models up to its final input, and is expressed in m1's symbol ids.
// Requires equal input alphabets (by name); output alphabets are matched by
// name. An initial-label mismatch yields the empty sequence.
std::optional<TestSequence> equivalence_check(const Mdp& m1, const Mdp& m2);

// Invariant violations in human-readable form; empty means valid.
std::vector<std::string> validate(const Mdp& m);

// Pretty symbol rendering "o1.i1.o2..." for logs and error messages.
std::string format_trace(const Mdp& m, const Trace& t);
std::string format_test_sequence(const Mdp& m, const TestSequence& s);

bool distributions_equal(const std::map<int, double>& a,
                         const std::map<int, double>& b, double tol);

}  // namespace mdplearn
