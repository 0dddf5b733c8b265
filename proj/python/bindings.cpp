// Python module _bees. Vectors go in and out as lists; nothing here is hot.

#include <sstream>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bees/core.hpp"
#include "bees/error.hpp"
#include "bees/exp4r.hpp"
#include "bees/experiment.hpp"
#include "bees/meta.hpp"

namespace py = pybind11;
using namespace bees;

namespace {

py::dict row_dict(const ResultRow& r) {
  py::dict d;
  d["algorithm"] = to_string(r.algorithm);
  d["T"] = r.horizon;
  d["seed"] = r.seed;
  d["regret"] = r.regret;
  d["total_reward"] = r.total_reward;
  d["lower_bound"] = r.lower_bound ? py::cast(*r.lower_bound) : py::none();
  d["epochs"] = r.epochs;
  return d;
}

AdviceMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  return AdviceMatrix::from_rows(rows);
}

}  // namespace

PYBIND11_MODULE(_bees, m) {
  m.doc() = "Exp4.R, BEES and BEES.LB expert-selection bandits";

  auto base = py::register_exception<Error>(m, "BeesError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<SequencingError>(m, "SequencingError", base.ptr());

  m.def("rho_default", &rho_default, py::arg("experts"), py::arg("actions"), py::arg("horizon"));
  m.def("check_assumption1", &check_assumption1, py::arg("actions"), py::arg("experts"),
        py::arg("horizon"), py::arg("delta"));
  m.def("default_C", &default_C, py::arg("alpha"), py::arg("c"), py::arg("actions"),
        py::arg("delta"));
  m.def("epoch_lengths", &epoch_lengths, py::arg("horizon"), py::arg("C"));
  m.def("pts", [](const std::vector<double>& lw, const std::vector<double>& eps,
                  std::uint64_t i_lower) { return pts(lw, eps, i_lower); },
        py::arg("log_w"), py::arg("epsilon"), py::arg("i_lower") = 1);
  m.def("pts_fast", [](const std::vector<double>& lw, const std::vector<double>& eps,
                       std::uint64_t i_lower) { return pts_fast(lw, eps, i_lower); },
        py::arg("log_w"), py::arg("epsilon"), py::arg("i_lower") = 1);
  m.def("normalize_log_weights", [](const std::vector<double>& lw) {
    return normalize_log_weights(LogWeightVector(lw)).vector();
  });
  m.def("mix_advice", [](const std::vector<double>& q, const std::vector<std::vector<double>>& advice,
                         double rho) {
    return mix_advice(ProbVector(q), to_matrix(advice), rho).vector();
  }, py::arg("q"), py::arg("advice"), py::arg("rho"));

  py::class_<Exp4R>(m, "Exp4R")
      .def(py::init([](std::size_t actions, std::vector<std::uint64_t> ids, std::uint64_t horizon,
                       double rho, double delta) {
             Exp4RConfig c;
             c.actions = actions;
             c.expert_ids = std::move(ids);
             c.horizon = horizon;
             c.rho = rho;
             c.delta = delta;
             return Exp4R(std::move(c));
           }),
           py::arg("actions"), py::arg("expert_ids"), py::arg("horizon"), py::arg("rho"),
           py::arg("delta") = 0.05)
      .def_property_readonly("beta", &Exp4R::beta)
      .def_property_readonly("round", &Exp4R::round)
      .def_property_readonly("finished", &Exp4R::finished)
      .def_property_readonly("log_weights", [](const Exp4R& e) { return e.log_weights().vector(); })
      .def("policy", [](const Exp4R& e, const std::vector<std::vector<double>>& advice) {
        return e.policy(to_matrix(advice)).vector();
      })
      .def("update", [](Exp4R& e, const std::vector<std::vector<double>>& advice, std::size_t action,
                        double reward, const std::vector<double>& p) {
        e.update(to_matrix(advice), action, reward, p);
      }, py::arg("advice"), py::arg("action"), py::arg("reward"), py::arg("p"))
      .def("finalize", [](const Exp4R& e) {
        const auto out = e.finalize();
        py::dict d;
        d["log_w"] = out.log_w_final.vector();
        d["epsilon"] = out.epsilon;
        d["vhat_sum"] = out.vhat_sum;
        d["estimated_rewards"] = out.estimated_rewards();
        return d;
      });

  m.def("canonical_config", [](const std::string& text) {
    return to_canonical_json(parse_config(text));
  }, py::arg("text"), "Parse a JSON config and return its canonical form.");
  m.def("run_config", [](const std::string& text, unsigned threads) {
    const auto config = parse_config(text);
    RunSettings s;
    s.threads = threads;
    std::vector<ResultRow> rows;
    {
      py::gil_scoped_release release;
      rows = run_experiment(config, s);
    }
    py::list out;
    for (const auto& r : rows) out.append(row_dict(r));
    return out;
  }, py::arg("text"), py::arg("threads") = 1);
  m.def("summarize_csv", [](const std::string& csv) {
    std::istringstream is(csv);
    const auto rows = read_csv(is);
    py::list out;
    for (const auto& s : summarize(rows)) {
      py::dict d;
      d["algorithm"] = to_string(s.algorithm);
      d["T"] = s.horizon;
      d["runs"] = s.runs;
      d["mean_regret"] = s.mean_regret;
      d["std_regret"] = s.std_regret;
      out.append(d);
    }
    return out;
  }, py::arg("csv"));
}
