#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdplearn/mdp.hpp"
#include "mdplearn/sampling_learning.hpp"
#include "mdplearn/sampling_teacher.hpp"

namespace mdplearn {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a run needs; flags and config-file keys map onto these fields
// one-to-one.
struct ExperimentConfig {
  std::string model;  // model file path or builtin name ("coffee")
  std::string map;    // gridworld map file (alternative to model)
  std::string learner = "sampling";  // exact | sampling | alergia
  std::uint64_t seed = 1;
  TeacherConfig teacher;
  LearnerConfig learning;
  double p_l = 0.25;    // stop probability of the baseline's uniform sampler
  double lambda = 0.9;  // distance discount
  std::vector<std::string> properties;
  std::string out;          // output directory; empty = write nothing
  std::string store;        // sample-store export consumed by the alergia learner
  std::int64_t budget = 0;  // traces for simulate, or for alergia without a store
};

// Applies "key = value" lines (# comments, blank lines allowed) onto cfg.
// Unknown keys raise ConfigError.
void apply_config_file(ExperimentConfig& cfg, const std::string& path);

// The model named by the config: JSON file, builtin, or gridworld map.
Mdp resolve_model(const ExperimentConfig& cfg);

struct LearnOutcome {
  Mdp model;  // as written to model.json
  std::string learner;
  int states = 0;
  std::int64_t outputs = 0;  // sampled outputs (exact learner: output queries)
  std::int64_t traces = 0;   // sampled traces (exact learner: equivalence queries)
  int rounds = 0;
  bool chaos_reachable = false;  // sampling only
  int trim_violations = 0;       // sampling with check_trim only
  double epsilon = 0.0;          // alergia only
};

// Runs the configured learner; when cfg.out is set writes model.json,
// model.dot, rounds.jsonl and summary.json there.
LearnOutcome run_learn(const ExperimentConfig& cfg);

struct PropertyRow {
  std::string property;
  double value_true = 0.0;
  double value_learned = 0.0;
  double diff = 0.0;
};

struct EvalOutcome {
  double distance = 0.0;  // discounted bisimilarity distance
  std::vector<PropertyRow> properties;
};

EvalOutcome run_eval(const Mdp& truth, const Mdp& learned,
                     const std::vector<std::string>& properties, double lambda);
void write_eval_files(const EvalOutcome& eval, const std::string& out_dir);

struct CompareRow {
  std::string name;
  std::int64_t outputs = 0;
  std::int64_t traces = 0;
  int states = 0;
  EvalOutcome eval;
};

struct CompareOutcome {
  CompareRow active;   // the sampling learner
  CompareRow passive;  // the baseline at the same output budget
};

// Active-vs-passive comparison against the same model; when cfg.out is set
// writes active_model.json, passive_model.json, compare.csv and compare.json.
CompareOutcome run_compare(const ExperimentConfig& cfg);
void write_compare_files(const CompareOutcome& cmp, const std::string& out_dir);

}  // namespace mdplearn
