#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "mdplearn/alergia.hpp"
#include "mdplearn/exact_learning.hpp"
#include "mdplearn/experiment.hpp"
#include "mdplearn/gridworld.hpp"
#include "mdplearn/mdp.hpp"
#include "mdplearn/mdp_io.hpp"
#include "mdplearn/metrics.hpp"
#include "mdplearn/rng.hpp"
#include "mdplearn/sampling_learning.hpp"
#include "mdplearn/sampling_teacher.hpp"
#include "mdplearn/sul.hpp"

namespace py = pybind11;

namespace {

using namespace mdplearn;

py::dict sampling_result_dict(const SamplingLearnResult& res) {
  py::dict d;
  bool chaos = res.hypothesis.chaos_reachable();
  d["model"] = chaos ? res.hypothesis.model : res.hypothesis.stripped();
  d["chaos_reachable"] = chaos;
  d["samples"] = res.samples;
  d["outputs"] = res.total_outputs;
  d["rounds"] = res.rounds.size();
  d["trim_violations"] = res.trim_violations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Active learning of deterministic labelled MDPs";

  py::class_<Mdp>(m, "Mdp")
      .def_property_readonly("num_states", &Mdp::num_states)
      .def_property_readonly("initial", [](const Mdp& x) { return x.initial; })
      .def_property_readonly("state_names", [](const Mdp& x) { return x.state_names; })
      .def_property_readonly("inputs", [](const Mdp& x) { return x.inputs.names(); })
      .def_property_readonly("outputs", [](const Mdp& x) { return x.outputs.names(); })
      .def("label_of",
           [](const Mdp& x, int q) {
             return x.outputs.name(x.labels.at(static_cast<std::size_t>(q)));
           })
      .def("transition",
           [](const Mdp& x, int q, const std::string& input) {
             int i = x.inputs.require(input);
             py::dict row;
             for (const auto& [succ, p] :
                  x.trans.at(static_cast<std::size_t>(q)).at(static_cast<std::size_t>(i)))
               row[py::int_(succ)] = p;
             return row;
           })
      .def("__repr__", [](const Mdp& x) {
        return "<Mdp states=" + std::to_string(x.num_states()) + ">";
      });

  m.def("parse_mdp", &parse_mdp, py::arg("text"));
  m.def("serialize_mdp", &serialize_mdp, py::arg("model"));
  m.def("load_mdp", &load_mdp, py::arg("path"));
  m.def("save_mdp", &save_mdp, py::arg("model"), py::arg("path"));
  m.def("export_dot", &export_dot, py::arg("model"));
  m.def("validate", &validate, py::arg("model"));
  m.def("minimize", &minimize, py::arg("model"));
  m.def("coffee_machine", &build_coffee_machine);
  m.def(
      "gridworld_from_map",
      [](const std::string& text) { return build_gridworld(parse_gridworld_map(text)).model; },
      py::arg("text"));
  m.def(
      "equivalence_check",
      [](const Mdp& a, const Mdp& b) -> std::optional<std::string> {
        auto witness = equivalence_check(a, b);
        if (!witness) return std::nullopt;
        return format_test_sequence(a, *witness);
      },
      py::arg("a"), py::arg("b"),
      "None when the models have the same semantics, else a witness sequence");
  m.def(
      "pmax", [](const Mdp& x, const std::string& prop) { return pmax(x, parse_property(prop)); },
      py::arg("model"), py::arg("property"));
  m.def(
      "bisim_distance",
      [](const Mdp& a, const Mdp& b, double discount) {
        DistanceConfig cfg;
        cfg.discount = discount;
        return bisim_distance(a, b, cfg);
      },
      py::arg("a"), py::arg("b"), py::arg("discount") = 0.9);

  m.def(
      "learn_exact",
      [](const Mdp& truth) {
        ExactTeacher teacher(truth);
        ExactLearnResult res = learn_exact(teacher);
        py::dict d;
        d["model"] = std::move(res.model);
        d["output_queries"] = res.output_queries;
        d["equivalence_queries"] = res.equivalence_queries;
        d["rounds"] = res.rounds.size();
        return d;
      },
      py::arg("truth"));

  m.def(
      "learn_sampling",
      [](const Mdp& truth, std::uint64_t seed, double alpha, double t_unamb, int r_min, int r_max,
         std::int64_t n_c, int n_resample, int n_retest, int n_test, double p_stop, double p_rand,
         bool trim, bool check_trim) {
        Rng master(seed);
        Sul sul(truth, master.next_u64());
        TeacherConfig tc;
        tc.n_c = n_c;
        tc.n_resample = n_resample;
        tc.n_retest = n_retest;
        tc.n_test = n_test;
        tc.p_stop = p_stop;
        tc.p_rand = p_rand;
        SulTeacher teacher(sul, tc, master.next_u64());
        LearnerConfig lc;
        lc.alpha = alpha;
        lc.unambiguity_threshold = t_unamb;
        lc.min_rounds = r_min;
        lc.max_rounds = r_max;
        lc.trim = trim;
        lc.check_trim = check_trim;
        return sampling_result_dict(mdplearn::learn_sampling(teacher, lc));
      },
      py::arg("truth"), py::arg("seed") = 1, py::arg("alpha") = 0.05, py::arg("t_unamb") = 0.99,
      py::arg("r_min") = 500, py::arg("r_max") = 4000, py::arg("n_c") = 20,
      py::arg("n_resample") = 300, py::arg("n_retest") = 300, py::arg("n_test") = 50,
      py::arg("p_stop") = 0.25, py::arg("p_rand") = 0.25, py::arg("trim") = true,
      py::arg("check_trim") = false);

  m.def(
      "learn_alergia",
      [](const Mdp& truth, std::int64_t budget, std::uint64_t seed, double p_l,
         std::optional<double> eps) {
        Rng master(seed);
        Sul sul(truth, master.next_u64());
        SampleStore store(truth.labels[static_cast<std::size_t>(truth.initial)],
                          truth.inputs.size());
        for (std::int64_t k = 0; k < budget; ++k) store.add_trace(sul.sample_trace(p_l));
        double confidence = eps ? *eps : alergia_epsilon(store);
        py::dict d;
        d["model"] = ioalergia_learn(store, truth.inputs, truth.outputs, confidence);
        d["traces"] = store.size();
        d["outputs"] = store.size() + store.total_inputs();
        d["epsilon"] = confidence;
        return d;
      },
      py::arg("truth"), py::arg("budget"), py::arg("seed") = 1, py::arg("p_l") = 0.25,
      py::arg("eps") = std::nullopt);
}
