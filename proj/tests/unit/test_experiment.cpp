#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mdplearn/experiment.hpp"
#include "mdplearn/mdp_io.hpp"
#include "mdplearn/sul.hpp"

using namespace mdplearn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "mdplearn_exp_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

ExperimentConfig quick_sampling_config() {
  ExperimentConfig cfg;
  cfg.model = "coffee";
  cfg.learner = "sampling";
  cfg.seed = 9;
  cfg.learning.min_rounds = 4;
  cfg.learning.max_rounds = 8;
  cfg.teacher.n_test = 20;
  cfg.teacher.n_resample = 50;
  cfg.teacher.n_retest = 50;
  return cfg;
}

}  // namespace

TEST_CASE("config files map keys onto the run configuration") {
  fs::path dir = fresh_dir("config");
  fs::path file = dir / "run.cfg";
  write_text(file,
             "# comment\n"
             "model = coffee\n"
             "learner = sampling\n"
             "\n"
             "seed = 42\n"
             "alpha = 0.01\n"
             "alpha_exponent = 3\n"
             "r_min = 7\n"
             "r_max = 9\n"
             "trim = false\n"
             "n_c = 25\n"
             "p_stop = 0.3\n"
             "p_l = 0.4\n"
             "lambda = 0.85\n"
             "prop = F<=4 coffee\n"
             "prop = F goal\n"
             "budget = 1234\n");
  ExperimentConfig cfg;
  apply_config_file(cfg, file.string());
  CHECK(cfg.model == "coffee");
  CHECK(cfg.learner == "sampling");
  CHECK(cfg.seed == 42);
  CHECK(cfg.learning.alpha == 0.01);
  REQUIRE(cfg.learning.alpha_exponent.has_value());
  CHECK(*cfg.learning.alpha_exponent == 3.0);
  CHECK(cfg.learning.min_rounds == 7);
  CHECK(cfg.learning.max_rounds == 9);
  CHECK_FALSE(cfg.learning.trim);
  CHECK(cfg.teacher.n_c == 25);
  CHECK(cfg.teacher.p_stop == 0.3);
  CHECK(cfg.p_l == 0.4);
  CHECK(cfg.lambda == 0.85);
  REQUIRE(cfg.properties.size() == 2);
  CHECK(cfg.properties[0] == "F<=4 coffee");
  CHECK(cfg.budget == 1234);
}

TEST_CASE("config errors carry the file and line") {
  fs::path dir = fresh_dir("config_bad");
  fs::path unknown = dir / "unknown.cfg";
  write_text(unknown, "model = coffee\nwibble = 3\n");
  ExperimentConfig cfg;
  try {
    apply_config_file(cfg, unknown.string());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    CHECK(std::string(e.what()).find("wibble") != std::string::npos);
  }

  fs::path bad = dir / "bad.cfg";
  write_text(bad, "r_min = abc\n");
  CHECK_THROWS_AS(apply_config_file(cfg, bad.string()), ConfigError);
  CHECK_THROWS_AS(apply_config_file(cfg, (dir / "missing.cfg").string()), ConfigError);
}

TEST_CASE("model resolution covers builtins, files and maps") {
  ExperimentConfig cfg;
  cfg.model = "coffee";
  Mdp coffee = resolve_model(cfg);
  CHECK(coffee.num_states() == 3);

  fs::path dir = fresh_dir("resolve");
  fs::path file = dir / "m.json";
  save_mdp(coffee, file.string());
  ExperimentConfig from_file;
  from_file.model = file.string();
  CHECK_FALSE(equivalence_check(coffee, resolve_model(from_file)).has_value());

  ExperimentConfig from_map;
  from_map.map = "models/gridworld_small.map";
  CHECK(resolve_model(from_map).num_states() == 16);

  ExperimentConfig both = from_map;
  both.model = "coffee";
  CHECK_THROWS_AS(resolve_model(both), ConfigError);
  ExperimentConfig neither;
  CHECK_THROWS_AS(resolve_model(neither), ConfigError);
  ExperimentConfig bogus;
  bogus.model = "espresso";
  CHECK_THROWS_AS(resolve_model(bogus), ConfigError);
}

TEST_CASE("an exact run writes a complete bundle") {
  fs::path dir = fresh_dir("exact_out");
  ExperimentConfig cfg;
  cfg.model = "coffee";
  cfg.learner = "exact";
  cfg.out = dir.string();
  LearnOutcome o = run_learn(cfg);
  CHECK(o.learner == "exact");
  CHECK(o.states == 3);
  CHECK(o.outputs > 0);
  CHECK(o.traces >= 1);

  for (const char* name : {"model.json", "model.dot", "rounds.jsonl", "summary.json"})
    CHECK(fs::exists(dir / name));
  Mdp reread = load_mdp((dir / "model.json").string());
  CHECK_FALSE(equivalence_check(build_coffee_machine(), reread).has_value());
  auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("learner") == "exact");
  CHECK(summary.at("states") == 3);
  CHECK(summary.at("output_queries").get<std::int64_t>() > 0);
  CHECK_FALSE(slurp(dir / "rounds.jsonl").empty());
}

TEST_CASE("an alergia run needs data and reports its confidence") {
  ExperimentConfig cfg;
  cfg.model = "coffee";
  cfg.learner = "alergia";
  CHECK_THROWS_AS(run_learn(cfg), ConfigError);
  cfg.budget = 500;
  LearnOutcome o = run_learn(cfg);
  CHECK(o.states >= 1);
  CHECK(o.epsilon > 0.0);
  CHECK(o.traces == 500);
  CHECK(validate(o.model).empty());
}

TEST_CASE("sampling runs are reproducible byte for byte") {
  ExperimentConfig cfg = quick_sampling_config();
  fs::path a = fresh_dir("sampling_a");
  fs::path b = fresh_dir("sampling_b");
  cfg.out = a.string();
  LearnOutcome first = run_learn(cfg);
  cfg.out = b.string();
  LearnOutcome second = run_learn(cfg);
  CHECK(first.states == second.states);
  for (const char* name : {"model.json", "model.dot", "rounds.jsonl", "summary.json"})
    CHECK(slurp(a / name) == slurp(b / name));
  CHECK(validate(first.model).empty());
}

TEST_CASE("evaluating a model against itself is free") {
  Mdp coffee = build_coffee_machine();
  EvalOutcome eval = run_eval(coffee, coffee, {"F<=2 coffee", "F<=4 coffee"}, 0.9);
  CHECK(eval.distance < 1e-6);
  REQUIRE(eval.properties.size() == 2);
  CHECK(eval.properties[0].value_true == doctest::Approx(0.8));
  CHECK(eval.properties[0].diff == 0.0);
  CHECK(eval.properties[1].value_true == doctest::Approx(0.96));

  fs::path dir = fresh_dir("eval_out");
  write_eval_files(eval, dir.string());
  std::string csv = slurp(dir / "eval.csv");
  CHECK(csv.rfind("metric,true,learned,diff\n", 0) == 0);
  CHECK(csv.find("pmax[F<=2 coffee]") != std::string::npos);
  auto j = nlohmann::json::parse(slurp(dir / "eval.json"));
  CHECK(j.at("properties").size() == 2);
}

TEST_CASE("comparison runs pit the active learner against the baseline") {
  ExperimentConfig cfg = quick_sampling_config();
  cfg.properties = {"F<=4 coffee"};
  fs::path dir = fresh_dir("compare_out");
  cfg.out = dir.string();
  CompareOutcome cmp = run_compare(cfg);
  CHECK(cmp.active.name == "lstar_mdp");
  CHECK(cmp.passive.name == "ioalergia");
  CHECK(cmp.passive.outputs >= cmp.active.outputs);  // same budget, rounded up
  CHECK(cmp.active.states >= 1);
  CHECK(cmp.passive.states >= 1);
  REQUIRE(cmp.active.eval.properties.size() == 1);

  for (const char* name : {"active_model.json", "passive_model.json", "compare.csv", "compare.json"})
    CHECK(fs::exists(dir / name));
  std::string csv = slurp(dir / "compare.csv");
  CHECK(csv.rfind("learner,outputs,traces,states,bisim_distance,property,pmax_true,pmax_learned,"
                  "abs_diff\n",
                  0) == 0);
  CHECK(csv.find("lstar_mdp") != std::string::npos);
  CHECK(csv.find("ioalergia") != std::string::npos);
  auto j = nlohmann::json::parse(slurp(dir / "compare.json"));
  CHECK(j.count("lstar_mdp") == 1);
  CHECK(j.count("ioalergia") == 1);
}
