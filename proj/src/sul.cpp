#include "mdplearn/sul.hpp"

#include <stdexcept>

namespace mdplearn {

Sul::Sul(Mdp model, std::uint64_t seed) : model_(std::move(model)), rng_(seed) {
  auto problems = validate(model_);
  if (!problems.empty())
    throw std::invalid_argument("invalid model for simulation: " + problems.front());
}

int Sul::reset() {
  state_ = model_.initial;
  started_ = true;
  ++total_resets_;
  ++total_outputs_;
  return model_.labels[static_cast<std::size_t>(state_)];
}

int Sul::step(int input) {
  if (!started_) throw std::logic_error("step before reset");
  if (input < 0 || input >= model_.inputs.size())
    throw std::invalid_argument("input id out of range");
  const auto& dist = model_.trans[static_cast<std::size_t>(state_)][static_cast<std::size_t>(input)];
  double u = rng_.next_double();
  double acc = 0.0;
  int chosen = dist.back().first;
  for (const auto& [succ, p] : dist) {
    acc += p;
    if (u < acc) {
      chosen = succ;
      break;
    }
  }
  state_ = chosen;
  ++total_outputs_;
  return model_.labels[static_cast<std::size_t>(state_)];
}

Trace Sul::sample_trace(double stop_probability) {
  Trace t(reset());
  for (;;) {
    int input = rng_.uniform_int(model_.inputs.size());
    int output = step(input);
    t = t.extended(input, output);
    if (rng_.bernoulli(stop_probability)) break;
  }
  return t;
}

Mdp build_coffee_machine() {
  Mdp m;
  m.inputs = Alphabet({"but", "coin"});
  m.outputs = Alphabet({"init", "beep", "coffee"});
  int q0 = m.add_state("q0", 0);
  int q1 = m.add_state("q1", 1);
  int q2 = m.add_state("q2", 2);
  m.initial = q0;
  int but = 0, coin = 1;
  m.trans[static_cast<std::size_t>(q0)][static_cast<std::size_t>(but)] = {{q0, 1.0}};
  m.trans[static_cast<std::size_t>(q0)][static_cast<std::size_t>(coin)] = {{q1, 1.0}};
  m.trans[static_cast<std::size_t>(q1)][static_cast<std::size_t>(but)] = {{q0, 0.2}, {q2, 0.8}};
  m.trans[static_cast<std::size_t>(q1)][static_cast<std::size_t>(coin)] = {{q1, 1.0}};
  m.trans[static_cast<std::size_t>(q2)][static_cast<std::size_t>(but)] = {{q0, 1.0}};
  m.trans[static_cast<std::size_t>(q2)][static_cast<std::size_t>(coin)] = {{q1, 1.0}};
  return m;
}

}  // namespace mdplearn
