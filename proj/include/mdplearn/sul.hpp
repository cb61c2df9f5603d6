#pragma once

#include <cstdint>

#include "mdplearn/mdp.hpp"
#include "mdplearn/rng.hpp"

namespace mdplearn {

// System under learning: executes a hidden model step by step. Learning code
// must only observe outputs through reset()/step(); the wrapped model is
// still reachable for white-box checks in tests and for building teachers
// around known-truth experiments.
class Sul {
 public:
  Sul(Mdp model, std::uint64_t seed);

  // Moves to the initial state and returns its output.
  int reset();
  // Applies one input, samples the successor, returns the observed output.
  int step(int input);

  // One full random run: reset, then uniform random inputs until a Bernoulli
  // stop with probability stop_probability fires after a step.
  Trace sample_trace(double stop_probability);

  const Alphabet& input_alphabet() const { return model_.inputs; }
  const Alphabet& output_alphabet() const { return model_.outputs; }

  // Budget accounting: every reset and every step produces one output.
  std::int64_t total_outputs() const { return total_outputs_; }
  std::int64_t total_resets() const { return total_resets_; }

  const Mdp& underlying_model() const { return model_; }

 private:
  Mdp model_;
  Rng rng_;
  int state_ = 0;
  bool started_ = false;
  std::int64_t total_outputs_ = 0;
  std::int64_t total_resets_ = 0;
};

// The three-state beverage machine example: states init/beep/coffee, inputs
// but/coin, with the 0.8/0.2 button behaviour in the beep state.
Mdp build_coffee_machine();

}  // namespace mdplearn
