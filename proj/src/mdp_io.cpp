#include "mdplearn/mdp_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace mdplearn {

namespace {

using ordered_json = nlohmann::ordered_json;

const ordered_json& require_field(const ordered_json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw ParseError(std::string("missing field \"") + key + "\" in " + where);
  return *it;
}

std::string double_to_json(double v) {
  ordered_json j = v;
  return j.dump();
}

}  // namespace

Mdp parse_mdp(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("model file must contain a JSON object");

  Mdp m;
  const auto& inputs = require_field(j, "inputs", "model");
  const auto& outputs = require_field(j, "outputs", "model");
  if (!inputs.is_array() || !outputs.is_array())
    throw ParseError("\"inputs\" and \"outputs\" must be arrays of strings");
  for (const auto& v : inputs) {
    if (!v.is_string()) throw ParseError("\"inputs\" must contain strings");
    if (m.inputs.index_of(v.get<std::string>()))
      throw ParseError("duplicate input symbol " + v.get<std::string>());
    m.inputs.add(v.get<std::string>());
  }
  for (const auto& v : outputs) {
    if (!v.is_string()) throw ParseError("\"outputs\" must contain strings");
    if (m.outputs.index_of(v.get<std::string>()))
      throw ParseError("duplicate output symbol " + v.get<std::string>());
    m.outputs.add(v.get<std::string>());
  }

  const auto& states = require_field(j, "states", "model");
  if (!states.is_array() || states.empty()) throw ParseError("\"states\" must be a non-empty array");
  std::map<std::string, int> state_ids;
  for (const auto& s : states) {
    if (!s.is_object()) throw ParseError("every state must be an object");
    std::string id = require_field(s, "id", "state").get<std::string>();
    std::string label = require_field(s, "label", "state").get<std::string>();
    if (state_ids.count(id)) throw ParseError("duplicate state id " + id);
    auto lbl = m.outputs.index_of(label);
    if (!lbl) throw ParseError("state " + id + ": label " + label + " not in outputs");
    state_ids[id] = m.add_state(id, *lbl);
  }

  std::string initial_name = require_field(j, "initial", "model").get<std::string>();
  auto init_it = state_ids.find(initial_name);
  if (init_it == state_ids.end()) throw ParseError("initial state " + initial_name + " not declared");
  m.initial = init_it->second;

  const auto& transitions = require_field(j, "transitions", "model");
  if (!transitions.is_array()) throw ParseError("\"transitions\" must be an array");
  for (const auto& t : transitions) {
    std::string from = require_field(t, "from", "transition").get<std::string>();
    std::string input = require_field(t, "input", "transition").get<std::string>();
    const auto& to = require_field(t, "to", "transition");
    auto from_it = state_ids.find(from);
    if (from_it == state_ids.end()) throw ParseError("transition from unknown state " + from);
    auto inp = m.inputs.index_of(input);
    if (!inp) throw ParseError("transition with unknown input " + input);
    if (!to.is_object() || to.empty())
      throw ParseError("transition " + from + "/" + input + ": \"to\" must be a non-empty object");
    auto& dist = m.trans[static_cast<std::size_t>(from_it->second)][static_cast<std::size_t>(*inp)];
    if (!dist.empty())
      throw ParseError("duplicate transition entry for " + from + "/" + input);
    for (auto it = to.begin(); it != to.end(); ++it) {
      auto succ_it = state_ids.find(it.key());
      if (succ_it == state_ids.end())
        throw ParseError("transition " + from + "/" + input + ": unknown successor " + it.key());
      if (!it.value().is_number())
        throw ParseError("transition " + from + "/" + input + ": probability must be a number");
      dist.emplace_back(succ_it->second, it.value().get<double>());
    }
    std::sort(dist.begin(), dist.end());
  }

  if (auto it = j.find("metadata"); it != j.end()) {
    if (!it->is_object()) throw ParseError("\"metadata\" must be an object of strings");
    for (auto kv = it->begin(); kv != it->end(); ++kv) {
      if (!kv.value().is_string()) throw ParseError("\"metadata\" values must be strings");
      m.metadata[kv.key()] = kv.value().get<std::string>();
    }
  }
  return m;
}

Mdp load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mdp(buf.str());
}

std::string serialize_mdp(const Mdp& m) {
  ordered_json j;
  j["inputs"] = m.inputs.names();
  j["outputs"] = m.outputs.names();
  j["initial"] = m.state_names.at(static_cast<std::size_t>(m.initial));
  ordered_json states = ordered_json::array();
  for (int q = 0; q < m.num_states(); ++q) {
    ordered_json s;
    s["id"] = m.state_names[static_cast<std::size_t>(q)];
    s["label"] = m.outputs.name(m.labels[static_cast<std::size_t>(q)]);
    states.push_back(std::move(s));
  }
  j["states"] = std::move(states);
  ordered_json transitions = ordered_json::array();
  for (int q = 0; q < m.num_states(); ++q) {
    for (int i = 0; i < m.inputs.size(); ++i) {
      const auto& dist = m.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)];
      if (dist.empty()) continue;
      ordered_json t;
      t["from"] = m.state_names[static_cast<std::size_t>(q)];
      t["input"] = m.inputs.name(i);
      ordered_json to = ordered_json::object();
      for (const auto& [succ, p] : dist) to[m.state_names[static_cast<std::size_t>(succ)]] = p;
      t["to"] = std::move(to);
      transitions.push_back(std::move(t));
    }
  }
  j["transitions"] = std::move(transitions);
  if (!m.metadata.empty()) {
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : m.metadata) meta[k] = v;
    j["metadata"] = std::move(meta);
  }
  return j.dump(2) + "\n";
}

void save_mdp(const Mdp& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_mdp(m);
}

std::string export_dot(const Mdp& m) {
  std::ostringstream os;
  os << "digraph mdp {\n";
  os << "  rankdir=LR;\n";
  os << "  __start [shape=point];\n";
  for (int q = 0; q < m.num_states(); ++q) {
    os << "  \"" << m.state_names[static_cast<std::size_t>(q)] << "\" [shape=circle,label=\""
       << m.state_names[static_cast<std::size_t>(q)] << "/"
       << m.outputs.name(m.labels[static_cast<std::size_t>(q)]) << "\"];\n";
  }
  os << "  __start -> \"" << m.state_names[static_cast<std::size_t>(m.initial)] << "\";\n";
  for (int q = 0; q < m.num_states(); ++q) {
    for (int i = 0; i < m.inputs.size(); ++i) {
      for (const auto& [succ, p] : m.trans[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)]) {
        if (p <= 0.0) continue;
        os << "  \"" << m.state_names[static_cast<std::size_t>(q)] << "\" -> \""
           << m.state_names[static_cast<std::size_t>(succ)] << "\" [label=\"" << m.inputs.name(i)
           << ":" << double_to_json(p) << "\"];\n";
      }
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace mdplearn
