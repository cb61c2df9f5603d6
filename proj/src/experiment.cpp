#include "mdplearn/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "mdplearn/alergia.hpp"
#include "mdplearn/exact_learning.hpp"
#include "mdplearn/gridworld.hpp"
#include "mdplearn/mdp_io.hpp"
#include "mdplearn/metrics.hpp"
#include "mdplearn/rng.hpp"
#include "mdplearn/sul.hpp"

namespace mdplearn {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("bad boolean for " + key + ": " + v);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string num(double v) { return nlohmann::json(v).dump(); }

}  // namespace

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = strip(s.substr(0, eq));
    std::string value = strip(s.substr(eq + 1));
    try {
      if (key == "model") cfg.model = value;
      else if (key == "map") cfg.map = value;
      else if (key == "learner") cfg.learner = value;
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "alpha") cfg.learning.alpha = std::stod(value);
      else if (key == "alpha_exponent") cfg.learning.alpha_exponent = std::stod(value);
      else if (key == "t_unamb") cfg.learning.unambiguity_threshold = std::stod(value);
      else if (key == "r_min") cfg.learning.min_rounds = std::stoi(value);
      else if (key == "r_max") cfg.learning.max_rounds = std::stoi(value);
      else if (key == "trim") cfg.learning.trim = parse_bool(value, key);
      else if (key == "check_trim") cfg.learning.check_trim = parse_bool(value, key);
      else if (key == "n_c") cfg.teacher.n_c = std::stoll(value);
      else if (key == "n_resample") cfg.teacher.n_resample = std::stoi(value);
      else if (key == "n_retest") cfg.teacher.n_retest = std::stoi(value);
      else if (key == "n_test") cfg.teacher.n_test = std::stoi(value);
      else if (key == "p_stop") cfg.teacher.p_stop = std::stod(value);
      else if (key == "p_rand") cfg.teacher.p_rand = std::stod(value);
      else if (key == "p_l") cfg.p_l = std::stod(value);
      else if (key == "lambda") cfg.lambda = std::stod(value);
      else if (key == "prop") cfg.properties.push_back(value);
      else if (key == "out") cfg.out = value;
      else if (key == "store") cfg.store = value;
      else if (key == "budget") cfg.budget = std::stoll(value);
      else throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key " + key);
    } catch (const std::invalid_argument&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for " + key);
    } catch (const std::out_of_range&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for " + key);
    }
  }
}

Mdp resolve_model(const ExperimentConfig& cfg) {
  if (!cfg.model.empty() && !cfg.map.empty())
    throw ConfigError("give either a model or a map, not both");
  Mdp m;
  if (!cfg.map.empty()) {
    if (!std::filesystem::exists(cfg.map)) throw ConfigError("map file not found: " + cfg.map);
    m = build_gridworld(load_gridworld_map(cfg.map)).model;
  } else if (!cfg.model.empty()) {
    if (std::filesystem::exists(cfg.model)) {
      try {
        m = load_mdp(cfg.model);
      } catch (const ParseError& e) {
        throw ConfigError(std::string("bad model file: ") + e.what());
      }
    } else if (cfg.model == "coffee") {
      m = build_coffee_machine();
    } else {
      throw ConfigError("model is neither a file nor a builtin: " + cfg.model);
    }
  } else {
    throw ConfigError("no model given (use model or map)");
  }
  auto problems = validate(m);
  if (!problems.empty()) throw ConfigError("invalid model: " + problems.front());
  return m;
}

namespace {

ordered_json summary_base(const ExperimentConfig& cfg, const LearnOutcome& o) {
  ordered_json j;
  j["learner"] = o.learner;
  j["seed"] = cfg.seed;
  j["states"] = o.states;
  j["outputs"] = o.outputs;
  j["traces"] = o.traces;
  j["rounds"] = o.rounds;
  return j;
}

void write_learn_bundle(const ExperimentConfig& cfg, const LearnOutcome& o,
                        const std::vector<ordered_json>& round_lines, ordered_json summary) {
  std::filesystem::create_directories(cfg.out);
  std::filesystem::path dir(cfg.out);
  write_file((dir / "model.json").string(), serialize_mdp(o.model));
  write_file((dir / "model.dot").string(), export_dot(o.model));
  std::string rounds_text;
  for (const auto& line : round_lines) rounds_text += line.dump() + "\n";
  write_file((dir / "rounds.jsonl").string(), rounds_text);
  write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
}

}  // namespace

LearnOutcome run_learn(const ExperimentConfig& cfg) {
  Mdp truth = resolve_model(cfg);
  LearnOutcome o;
  o.learner = cfg.learner;
  std::vector<ordered_json> round_lines;
  ordered_json summary;

  if (cfg.learner == "exact") {
    ExactTeacher teacher(truth);
    ExactLearnResult res = learn_exact(teacher);
    o.model = std::move(res.model);
    o.states = o.model.num_states();
    o.outputs = res.output_queries;
    o.traces = res.equivalence_queries;
    o.rounds = static_cast<int>(res.rounds.size());
    for (const auto& r : res.rounds) {
      ordered_json line;
      line["round"] = r.round;
      line["short_rows"] = r.short_rows;
      line["long_rows"] = r.long_rows;
      line["columns"] = r.columns;
      line["hypothesis_states"] = r.hypothesis_states;
      if (r.counterexample) line["counterexample"] = *r.counterexample;
      round_lines.push_back(std::move(line));
    }
    summary = summary_base(cfg, o);
    summary["output_queries"] = res.output_queries;
    summary["equivalence_queries"] = res.equivalence_queries;
  } else if (cfg.learner == "sampling") {
    Rng master(cfg.seed);
    std::uint64_t sul_seed = master.next_u64();
    std::uint64_t teacher_seed = master.next_u64();
    Sul sul(truth, sul_seed);
    SulTeacher teacher(sul, cfg.teacher, teacher_seed);
    SamplingLearnResult res = learn_sampling(teacher, cfg.learning);
    o.chaos_reachable = res.hypothesis.chaos_reachable();
    o.model = o.chaos_reachable ? res.hypothesis.model : res.hypothesis.stripped();
    o.states = o.model.num_states();
    o.outputs = res.total_outputs;
    o.traces = res.samples;
    o.rounds = static_cast<int>(res.rounds.size());
    o.trim_violations = res.trim_violations;
    for (const auto& r : res.rounds) {
      ordered_json line;
      line["round"] = r.round;
      line["short_rows"] = r.short_rows;
      line["long_rows"] = r.long_rows;
      line["columns"] = r.columns;
      line["representatives"] = r.representatives;
      line["unambiguity"] = r.unambiguity;
      line["chaos_reachable"] = r.chaos_reachable;
      line["samples"] = r.samples;
      line["trimmed_rows"] = r.trimmed_rows;
      if (r.counterexample) line["counterexample"] = *r.counterexample;
      round_lines.push_back(std::move(line));
    }
    summary = summary_base(cfg, o);
    summary["chaos_reachable"] = o.chaos_reachable;
    if (cfg.learning.check_trim) summary["trim_violations"] = o.trim_violations;
  } else if (cfg.learner == "alergia") {
    Mdp model;
    std::int64_t traces = 0, steps = 0;
    double eps = 1.0;
    if (!cfg.store.empty()) {
      SampleStore store = SampleStore::load_jsonl(cfg.store, truth.inputs.size());
      if (store.initial_output() != truth.labels[static_cast<std::size_t>(truth.initial)])
        throw ConfigError("store initial output does not match the model");
      eps = alergia_epsilon(store);
      model = ioalergia_learn(store, truth.inputs, truth.outputs, eps);
      traces = store.size();
      steps = store.total_inputs();
    } else if (cfg.budget > 0) {
      Rng master(cfg.seed);
      Sul sul(truth, master.next_u64());
      SampleStore store(truth.labels[static_cast<std::size_t>(truth.initial)], truth.inputs.size());
      for (std::int64_t k = 0; k < cfg.budget; ++k) store.add_trace(sul.sample_trace(cfg.p_l));
      eps = alergia_epsilon(store);
      model = ioalergia_learn(store, truth.inputs, truth.outputs, eps);
      traces = store.size();
      steps = store.total_inputs();
    } else {
      throw ConfigError("alergia needs a store file or a positive budget");
    }
    o.model = std::move(model);
    o.states = o.model.num_states();
    o.outputs = traces + steps;  // one output per reset plus one per step
    o.traces = traces;
    o.rounds = 0;
    o.epsilon = eps;
    summary = summary_base(cfg, o);
    summary["epsilon"] = eps;
  } else {
    throw ConfigError("unknown learner: " + cfg.learner);
  }

  if (!cfg.out.empty()) write_learn_bundle(cfg, o, round_lines, std::move(summary));
  return o;
}

EvalOutcome run_eval(const Mdp& truth, const Mdp& learned,
                     const std::vector<std::string>& properties, double lambda) {
  DistanceConfig dc;
  dc.discount = lambda;
  EvalOutcome out;
  out.distance = bisim_distance(truth, learned, dc);
  for (const auto& text : properties) {
    PropertySpec prop = parse_property(text);
    PropertyRow row;
    row.property = text;
    row.value_true = pmax(truth, prop);
    row.value_learned = pmax(learned, prop);
    row.diff = std::abs(row.value_true - row.value_learned);
    out.properties.push_back(std::move(row));
  }
  return out;
}

namespace {

ordered_json eval_to_json(const EvalOutcome& eval) {
  ordered_json j;
  j["distance"] = eval.distance;
  j["properties"] = ordered_json::array();
  for (const auto& row : eval.properties) {
    ordered_json r;
    r["property"] = row.property;
    r["true"] = row.value_true;
    r["learned"] = row.value_learned;
    r["diff"] = row.diff;
    j["properties"].push_back(std::move(r));
  }
  return j;
}

}  // namespace

void write_eval_files(const EvalOutcome& eval, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::filesystem::path dir(out_dir);
  std::string csv = "metric,true,learned,diff\n";
  csv += "bisim_distance,,," + num(eval.distance) + "\n";
  for (const auto& row : eval.properties)
    csv += "\"pmax[" + row.property + "]\"," + num(row.value_true) + "," +
           num(row.value_learned) + "," + num(row.diff) + "\n";
  write_file((dir / "eval.csv").string(), csv);
  write_file((dir / "eval.json").string(), eval_to_json(eval).dump(2) + "\n");
}

CompareOutcome run_compare(const ExperimentConfig& cfg) {
  Mdp truth = resolve_model(cfg);
  Rng master(cfg.seed);
  std::uint64_t sul_seed = master.next_u64();
  std::uint64_t teacher_seed = master.next_u64();
  std::uint64_t baseline_seed = master.next_u64();

  Sul sul(truth, sul_seed);
  SulTeacher teacher(sul, cfg.teacher, teacher_seed);
  SamplingLearnResult res = learn_sampling(teacher, cfg.learning);
  Mdp active_model =
      res.hypothesis.chaos_reachable() ? res.hypothesis.model : res.hypothesis.stripped();

  // Give the baseline the same output budget via plain uniform sampling.
  Sul baseline_sul(truth, baseline_seed);
  SampleStore baseline_store(truth.labels[static_cast<std::size_t>(truth.initial)],
                             truth.inputs.size());
  while (baseline_sul.total_outputs() < res.total_outputs)
    baseline_store.add_trace(baseline_sul.sample_trace(cfg.p_l));
  Mdp passive_model =
      ioalergia_learn(baseline_store, truth.inputs, truth.outputs, alergia_epsilon(baseline_store));

  CompareOutcome cmp;
  cmp.active.name = "lstar_mdp";
  cmp.active.outputs = res.total_outputs;
  cmp.active.traces = res.samples;
  cmp.active.states = active_model.num_states();
  cmp.active.eval = run_eval(truth, active_model, cfg.properties, cfg.lambda);
  cmp.passive.name = "ioalergia";
  cmp.passive.outputs = baseline_sul.total_outputs();
  cmp.passive.traces = baseline_store.size();
  cmp.passive.states = passive_model.num_states();
  cmp.passive.eval = run_eval(truth, passive_model, cfg.properties, cfg.lambda);

  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    std::filesystem::path dir(cfg.out);
    write_file((dir / "active_model.json").string(), serialize_mdp(active_model));
    write_file((dir / "passive_model.json").string(), serialize_mdp(passive_model));
    write_compare_files(cmp, cfg.out);
  }
  return cmp;
}

void write_compare_files(const CompareOutcome& cmp, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::filesystem::path dir(out_dir);

  std::string csv =
      "learner,outputs,traces,states,bisim_distance,property,pmax_true,pmax_learned,abs_diff\n";
  auto add_rows = [&csv](const CompareRow& row) {
    std::string head = row.name + "," + std::to_string(row.outputs) + "," +
                       std::to_string(row.traces) + "," + std::to_string(row.states) + "," +
                       num(row.eval.distance);
    if (row.eval.properties.empty()) {
      csv += head + ",,,,\n";
      return;
    }
    for (const auto& p : row.eval.properties)
      csv += head + ",\"" + p.property + "\"," + num(p.value_true) + "," + num(p.value_learned) +
             "," + num(p.diff) + "\n";
  };
  add_rows(cmp.active);
  add_rows(cmp.passive);
  write_file((dir / "compare.csv").string(), csv);

  ordered_json j;
  for (const CompareRow* row : {&cmp.active, &cmp.passive}) {
    ordered_json r;
    r["name"] = row->name;
    r["outputs"] = row->outputs;
    r["traces"] = row->traces;
    r["states"] = row->states;
    r["eval"] = eval_to_json(row->eval);
    j[row->name] = std::move(r);
  }
  write_file((dir / "compare.json").string(), j.dump(2) + "\n");
}

}  // namespace mdplearn
