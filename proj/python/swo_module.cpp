#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "swo/alloc.hpp"
#include "swo/data.hpp"
#include "swo/errors.hpp"
#include "swo/learn.hpp"
#include "swo/metrics.hpp"
#include "swo/swf.hpp"

namespace py = pybind11;

namespace {

py::dict solution_dict(const swo::AllocationSolution& s) {
  py::dict d;
  d["granted"] = s.granted;
  d["utility"] = s.utility;
  d["objective"] = s.objective;
  d["solver"] = std::string(swo::solver_name(s.solver));
  d["iterations"] = s.iterations;
  d["converged"] = s.converged;
  d["degenerate_players"] = s.degenerate_players;
  d["beta"] = s.beta;
  d["water_level"] = s.water_level;
  return d;
}

swo::TrainConfig make_config(double c, double lambda1, double lambda2, const std::string& swf,
                             double kappa, std::size_t max_iter) {
  swo::TrainConfig cfg;
  cfg.c = c;
  cfg.lambda1 = lambda1;
  cfg.lambda2 = lambda2;
  cfg.swf = swo::SwfSpec::parse(swf);
  cfg.kappa = kappa;
  cfg.max_iter = max_iter;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Social-welfare functions, fair allocation and welfare-regularized logistic regression";

  py::register_exception<swo::Error>(m, "SwoError");

  m.def(
      "evaluate",
      [](const std::string& spec, const std::vector<double>& u, const std::vector<double>& u_max) {
        return swo::evaluate(swo::SwfSpec::parse(spec), u, u_max);
      },
      py::arg("spec"), py::arg("u"), py::arg("u_max") = std::vector<double>{},
      "Evaluate an SWF given in canonical text form, e.g. 'alpha:alpha=0.5'.");
  m.def(
      "canonical_spec", [](const std::string& spec) { return swo::SwfSpec::parse(spec).to_string(); },
      py::arg("spec"));
  m.def(
      "welfare_gradient",
      [](const std::string& spec, const std::vector<double>& u) {
        return swo::welfare_gradient(swo::SwfSpec::parse(spec), u);
      },
      py::arg("spec"), py::arg("u"));
  m.def(
      "leximax_compare",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto c = swo::leximax_compare(a, b);
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
      },
      py::arg("a"), py::arg("b"), "-1, 0 or 1; 1 means a is leximax-preferred.");

  m.def(
      "solve",
      [](const std::vector<double>& p_hat, const std::vector<double>& requests, double budget,
         const std::string& swf) {
        const swo::AllocationProblem prob(p_hat, requests, budget);
        return solution_dict(swo::solve(prob, swo::SwfSpec::parse(swf)));
      },
      py::arg("p_hat"), py::arg("requests"), py::arg("budget"), py::arg("swf") = "utilitarian");
  m.def(
      "brute_force_oracle",
      [](const std::vector<double>& p_hat, const std::vector<double>& requests, double budget,
         const std::string& swf, double step) {
        const swo::AllocationProblem prob(p_hat, requests, budget);
        return solution_dict(swo::brute_force_oracle(prob, swo::SwfSpec::parse(swf), step));
      },
      py::arg("p_hat"), py::arg("requests"), py::arg("budget"), py::arg("swf"), py::arg("step"));

  m.def(
      "outcome_utility", [](int y, int y_hat) { return swo::outcome_utility(y, y_hat); },
      py::arg("y"), py::arg("y_hat"));
  m.def(
      "train",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double c, double lambda1,
         double lambda2, const std::string& swf, double kappa, std::size_t max_iter) {
        const auto cfg = make_config(c, lambda1, lambda2, swf, kappa, max_iter);
        const auto model = lambda2 == 0.0 ? swo::train_standard(x, y, cfg)
                                          : swo::train_in_processing(x, y, cfg);
        return model.theta;
      },
      py::arg("x"), py::arg("y"), py::arg("c") = 1.0, py::arg("lambda1") = 1e-4,
      py::arg("lambda2") = 0.0, py::arg("swf") = "utilitarian", py::arg("kappa") = 5.0,
      py::arg("max_iter") = 2000,
      "Fit theta; column 0 of x is the intercept. lambda2 > 0 adds the welfare term.");
  m.def(
      "predict_prob",
      [](const Eigen::VectorXd& theta, const Eigen::MatrixXd& x) {
        swo::LinearModel model;
        model.theta = theta;
        std::vector<double> out;
        for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(swo::predict_prob(model, x.row(i).transpose()));
        return out;
      },
      py::arg("theta"), py::arg("x"));

  m.def(
      "dataset_facts",
      [](const std::string& path) {
        const auto f = swo::dataset_facts(swo::load_german_credit(path));
        py::dict d;
        d["records"] = f.records;
        d["young"] = f.young;
        d["old"] = f.old;
        d["young_positive_share"] = f.young_positive_share;
        d["old_positive_share"] = f.old_positive_share;
        return d;
      },
      py::arg("path"));
  m.def(
      "encode_german_credit",
      [](const std::string& path) {
        const auto records = swo::load_german_credit(path);
        std::vector<std::size_t> rows(records.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        const auto data = swo::FeatureEncoder::fit(records, rows).transform(records, rows);
        std::vector<int> young;
        for (auto g : data.groups) young.push_back(g == swo::AgeGroup::Young);
        return py::make_tuple(data.x, data.y, young, data.feature_names);
      },
      py::arg("path"), "(x, y, young, feature_names) with every record used for standardization.");

  m.def(
      "gini_index",
      [](const std::vector<double>& values) { return swo::lorenz_and_gini(values).gini; },
      py::arg("values"));
}
