#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mdplearn/experiment.hpp"
#include "mdplearn/mdp_io.hpp"
#include "mdplearn/sample_store.hpp"
#include "mdplearn/sul.hpp"

namespace {

using mdplearn::ExperimentConfig;

// One set of flag bindings per subcommand; config-file values are applied
// first and explicitly passed flags override them.
struct CommonOpts {
  ExperimentConfig vals;
  std::string config_file;
  double alpha_exponent = 0.0;
  CLI::Option* model = nullptr;
  CLI::Option* map = nullptr;
  CLI::Option* learner = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* alpha_exp = nullptr;
  CLI::Option* t_unamb = nullptr;
  CLI::Option* r_min = nullptr;
  CLI::Option* r_max = nullptr;
  CLI::Option* no_trim = nullptr;
  CLI::Option* check_trim = nullptr;
  CLI::Option* n_c = nullptr;
  CLI::Option* n_resample = nullptr;
  CLI::Option* n_retest = nullptr;
  CLI::Option* n_test = nullptr;
  CLI::Option* p_stop = nullptr;
  CLI::Option* p_rand = nullptr;
  CLI::Option* p_l = nullptr;
  CLI::Option* lambda = nullptr;
  CLI::Option* prop = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* store = nullptr;
  CLI::Option* budget = nullptr;
  bool no_trim_flag = false;
  bool check_trim_flag = false;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_file, "key = value config file");
  o.model = sub->add_option("--model", o.vals.model, "model file or builtin name");
  o.map = sub->add_option("--map", o.vals.map, "gridworld map file");
  o.learner = sub->add_option("--learner", o.vals.learner, "exact | sampling | alergia");
  o.seed = sub->add_option("--seed", o.vals.seed, "random seed");
  o.alpha = sub->add_option("--alpha", o.vals.learning.alpha, "compatibility significance");
  o.alpha_exp = sub->add_option("--alpha-exponent", o.alpha_exponent,
                                "use alpha = 1/n^exponent instead of a fixed alpha");
  o.t_unamb = sub->add_option("--t-unamb", o.vals.learning.unambiguity_threshold,
                              "unambiguity stopping threshold");
  o.r_min = sub->add_option("--r-min", o.vals.learning.min_rounds, "minimum rounds");
  o.r_max = sub->add_option("--r-max", o.vals.learning.max_rounds, "maximum rounds");
  o.no_trim = sub->add_flag("--no-trim", o.no_trim_flag, "disable observation-table trimming");
  o.check_trim = sub->add_flag("--check-trim", o.check_trim_flag,
                               "verify the hypothesis is unchanged by trimming");
  o.n_c = sub->add_option("--n-c", o.vals.teacher.n_c, "cell completeness threshold");
  o.n_resample = sub->add_option("--n-resample", o.vals.teacher.n_resample, "refine walks");
  o.n_retest = sub->add_option("--n-retest", o.vals.teacher.n_retest, "counterexample replays");
  o.n_test = sub->add_option("--n-test", o.vals.teacher.n_test, "testing episodes");
  o.p_stop = sub->add_option("--p-stop", o.vals.teacher.p_stop, "episode stop probability");
  o.p_rand = sub->add_option("--p-rand", o.vals.teacher.p_rand, "random-input probability");
  o.p_l = sub->add_option("--p-l", o.vals.p_l, "baseline sampler stop probability");
  o.lambda = sub->add_option("--lambda", o.vals.lambda, "distance discount");
  o.prop = sub->add_option("--prop", o.vals.properties, "property, e.g. \"F<=11 goal\"");
  o.out = sub->add_option("--out", o.vals.out, "output directory");
  o.store = sub->add_option("--store", o.vals.store, "sample-store file (jsonl)");
  o.budget = sub->add_option("--budget", o.vals.budget, "number of traces to sample");
}

ExperimentConfig finalize(const CommonOpts& o) {
  ExperimentConfig cfg;
  if (!o.config_file.empty()) mdplearn::apply_config_file(cfg, o.config_file);
  if (o.model->count()) cfg.model = o.vals.model;
  if (o.map->count()) cfg.map = o.vals.map;
  if (o.learner->count()) cfg.learner = o.vals.learner;
  if (o.seed->count()) cfg.seed = o.vals.seed;
  if (o.alpha->count()) cfg.learning.alpha = o.vals.learning.alpha;
  if (o.alpha_exp->count()) cfg.learning.alpha_exponent = o.alpha_exponent;
  if (o.t_unamb->count()) cfg.learning.unambiguity_threshold = o.vals.learning.unambiguity_threshold;
  if (o.r_min->count()) cfg.learning.min_rounds = o.vals.learning.min_rounds;
  if (o.r_max->count()) cfg.learning.max_rounds = o.vals.learning.max_rounds;
  if (o.no_trim->count()) cfg.learning.trim = false;
  if (o.check_trim->count()) cfg.learning.check_trim = true;
  if (o.n_c->count()) cfg.teacher.n_c = o.vals.teacher.n_c;
  if (o.n_resample->count()) cfg.teacher.n_resample = o.vals.teacher.n_resample;
  if (o.n_retest->count()) cfg.teacher.n_retest = o.vals.teacher.n_retest;
  if (o.n_test->count()) cfg.teacher.n_test = o.vals.teacher.n_test;
  if (o.p_stop->count()) cfg.teacher.p_stop = o.vals.teacher.p_stop;
  if (o.p_rand->count()) cfg.teacher.p_rand = o.vals.teacher.p_rand;
  if (o.p_l->count()) cfg.p_l = o.vals.p_l;
  if (o.lambda->count()) cfg.lambda = o.vals.lambda;
  if (o.prop->count()) cfg.properties = o.vals.properties;
  if (o.out->count()) cfg.out = o.vals.out;
  if (o.store->count()) cfg.store = o.vals.store;
  if (o.budget->count()) cfg.budget = o.vals.budget;
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void print_eval(const mdplearn::EvalOutcome& eval) {
  std::printf("bisim_distance %.6f\n", eval.distance);
  for (const auto& row : eval.properties)
    std::printf("pmax[%s] true=%.6f learned=%.6f diff=%.6f\n", row.property.c_str(),
                row.value_true, row.value_learned, row.diff);
}

int run(int argc, char** argv) {
  CLI::App app{"Active learning of deterministic labelled MDPs"};
  app.require_subcommand(1);

  CommonOpts learn_opts, eval_opts, compare_opts, simulate_opts, dot_opts, min_opts;
  std::string eval_learned;
  std::string check_a, check_b;

  CLI::App* learn = app.add_subcommand("learn", "run a learner against a model");
  add_common(learn, learn_opts);
  CLI::App* eval = app.add_subcommand("eval", "compare a learned model against the truth");
  add_common(eval, eval_opts);
  eval->add_option("--learned", eval_learned, "learned model file")->required();
  CLI::App* compare =
      app.add_subcommand("compare", "sampling learner vs passive baseline at equal budget");
  add_common(compare, compare_opts);
  CLI::App* simulate = app.add_subcommand("simulate", "sample traces into a store file");
  add_common(simulate, simulate_opts);
  CLI::App* exportdot = app.add_subcommand("export-dot", "render a model as graphviz");
  add_common(exportdot, dot_opts);
  CLI::App* minimize_cmd = app.add_subcommand("minimize", "canonical minimal form of a model");
  add_common(minimize_cmd, min_opts);
  CLI::App* check = app.add_subcommand("check", "exact equivalence of two model files");
  check->add_option("model_a", check_a, "first model file")->required();
  check->add_option("model_b", check_b, "second model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (learn->parsed()) {
    ExperimentConfig cfg = finalize(learn_opts);
    auto start = std::chrono::steady_clock::now();
    mdplearn::LearnOutcome o = mdplearn::run_learn(cfg);
    double secs = seconds_since(start);
    std::printf("learner=%s seed=%llu states=%d outputs=%lld traces=%lld rounds=%d",
                o.learner.c_str(), static_cast<unsigned long long>(cfg.seed), o.states,
                static_cast<long long>(o.outputs), static_cast<long long>(o.traces), o.rounds);
    if (o.learner == "sampling") std::printf(" chaos_reachable=%d", o.chaos_reachable ? 1 : 0);
    if (o.learner == "alergia") std::printf(" epsilon=%.6g", o.epsilon);
    std::printf(" time=%.3fs\n", secs);
    return 0;
  }
  if (eval->parsed()) {
    ExperimentConfig cfg = finalize(eval_opts);
    mdplearn::Mdp truth = mdplearn::resolve_model(cfg);
    mdplearn::Mdp learned = mdplearn::load_mdp(eval_learned);
    mdplearn::EvalOutcome out = mdplearn::run_eval(truth, learned, cfg.properties, cfg.lambda);
    print_eval(out);
    if (!cfg.out.empty()) mdplearn::write_eval_files(out, cfg.out);
    return 0;
  }
  if (compare->parsed()) {
    ExperimentConfig cfg = finalize(compare_opts);
    auto start = std::chrono::steady_clock::now();
    mdplearn::CompareOutcome cmp = mdplearn::run_compare(cfg);
    double secs = seconds_since(start);
    for (const mdplearn::CompareRow* row : {&cmp.active, &cmp.passive}) {
      std::printf("%s outputs=%lld traces=%lld states=%d bisim_distance=%.6f\n",
                  row->name.c_str(), static_cast<long long>(row->outputs),
                  static_cast<long long>(row->traces), row->states, row->eval.distance);
      for (const auto& p : row->eval.properties)
        std::printf("  pmax[%s] true=%.6f learned=%.6f diff=%.6f\n", p.property.c_str(),
                    p.value_true, p.value_learned, p.diff);
    }
    std::printf("time=%.3fs\n", secs);
    return 0;
  }
  if (simulate->parsed()) {
    ExperimentConfig cfg = finalize(simulate_opts);
    if (cfg.budget <= 0) throw mdplearn::ConfigError("simulate needs a positive budget");
    if (cfg.out.empty()) throw mdplearn::ConfigError("simulate needs an output directory");
    mdplearn::Mdp truth = mdplearn::resolve_model(cfg);
    mdplearn::Sul sul(truth, cfg.seed);
    mdplearn::SampleStore store(truth.labels[static_cast<std::size_t>(truth.initial)],
                                truth.inputs.size());
    for (std::int64_t k = 0; k < cfg.budget; ++k) store.add_trace(sul.sample_trace(cfg.p_l));
    std::filesystem::create_directories(cfg.out);
    std::string path = (std::filesystem::path(cfg.out) / "traces.jsonl").string();
    store.save_jsonl(path);
    std::printf("wrote %lld traces (%lld outputs) to %s\n",
                static_cast<long long>(store.size()),
                static_cast<long long>(sul.total_outputs()), path.c_str());
    return 0;
  }
  if (exportdot->parsed()) {
    ExperimentConfig cfg = finalize(dot_opts);
    mdplearn::Mdp m = mdplearn::resolve_model(cfg);
    if (cfg.out.empty()) {
      std::cout << mdplearn::export_dot(m);
    } else {
      std::filesystem::create_directories(cfg.out);
      std::string path = (std::filesystem::path(cfg.out) / "model.dot").string();
      std::ofstream file(path, std::ios::binary);
      file << mdplearn::export_dot(m);
      std::printf("wrote %s\n", path.c_str());
    }
    return 0;
  }
  if (minimize_cmd->parsed()) {
    ExperimentConfig cfg = finalize(min_opts);
    mdplearn::Mdp m = mdplearn::resolve_model(cfg);
    mdplearn::Mdp reduced = mdplearn::minimize(m);
    std::printf("states: %d -> %d\n", m.num_states(), reduced.num_states());
    if (!cfg.out.empty()) {
      std::filesystem::create_directories(cfg.out);
      std::string path = (std::filesystem::path(cfg.out) / "model.json").string();
      mdplearn::save_mdp(reduced, path);
      std::printf("wrote %s\n", path.c_str());
    }
    return 0;
  }
  if (check->parsed()) {
    mdplearn::Mdp a = mdplearn::load_mdp(check_a);
    mdplearn::Mdp b = mdplearn::load_mdp(check_b);
    auto witness = mdplearn::equivalence_check(a, b);
    if (!witness) {
      std::printf("equivalent\n");
      return 0;
    }
    std::printf("different: %s\n", mdplearn::format_test_sequence(a, *witness).c_str());
    return 1;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mdplearn::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const mdplearn::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
