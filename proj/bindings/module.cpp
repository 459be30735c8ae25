#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rsd/io.hpp"
#include "rsd/likelihood.hpp"
#include "rsd/mcmc.hpp"
#include "rsd/mle.hpp"
#include "rsd/priors.hpp"
#include "rsd/rsd_loop.hpp"
#include "rsd/schema.hpp"
#include "rsd/simulator.hpp"

namespace py = pybind11;
using namespace rsd;

namespace {

CovariateSchema schema_from_entries(const py::list& entries) {
  std::vector<SchemaEntry> out;
  for (const auto& item : entries) {
    const py::dict d = item.cast<py::dict>();
    SchemaEntry e;
    e.name = d["name"].cast<std::string>();
    const std::string kind = d["kind"].cast<std::string>();
    if (kind == "numeric") {
      e.kind = CovariateKind::Numeric;
    } else if (kind == "categorical") {
      e.kind = CovariateKind::Categorical;
      e.levels = d["levels"].cast<std::vector<std::string>>();
      e.reference = d["reference"].cast<std::string>();
    } else {
      fail(ErrorKind::InvalidConfig, "kind must be 'numeric' or 'categorical'");
    }
    out.push_back(std::move(e));
  }
  return CovariateSchema(std::move(out));
}

CallRecord record_from_dict(const py::dict& d) {
  CallRecord r;
  if (d.contains("quarter")) r.quarter = d["quarter"].cast<int>();
  if (d.contains("case_id")) r.case_id = d["case_id"].cast<std::string>();
  if (d.contains("day")) r.day = d["day"].cast<int>();
  if (d.contains("attempt")) r.attempt = d["attempt"].cast<int>();
  if (d.contains("outcome")) r.outcome = d["outcome"].cast<int>();
  const py::dict cov = d["covariates"].cast<py::dict>();
  for (const auto& kv : cov) {
    const std::string name = kv.first.cast<std::string>();
    if (py::isinstance<py::str>(kv.second))
      r.covariates[name] = kv.second.cast<std::string>();
    else
      r.covariates[name] = kv.second.cast<double>();
  }
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian daily response-propensity prediction for responsive "
            "survey designs";

  py::register_exception<Error>(m, "RsdError", PyExc_RuntimeError);

  py::class_<CovariateSchema>(m, "CovariateSchema")
      .def(py::init(&schema_from_entries), py::arg("entries"))
      .def_property_readonly("coefficient_count", &CovariateSchema::coefficient_count)
      .def_property_readonly("coefficient_names", &CovariateSchema::coefficient_names)
      .def_property_readonly("fingerprint", &CovariateSchema::fingerprint)
      .def("coefficient_index", &CovariateSchema::coefficient_index);

  py::class_<Dataset>(m, "Dataset")
      .def_static("from_matrix", &Dataset::from_matrix, py::arg("X"), py::arg("y"))
      .def_static(
          "from_records",
          [](const CovariateSchema& schema, const py::list& records) {
            std::vector<CallRecord> rs;
            for (const auto& item : records)
              rs.push_back(record_from_dict(item.cast<py::dict>()));
            return Dataset::from_records(schema, rs);
          },
          py::arg("schema"), py::arg("records"))
      .def_readonly("X", &Dataset::X)
      .def_readonly("y", &Dataset::y)
      .def_property_readonly("n_rows", &Dataset::n_rows)
      .def_property_readonly("coefficient_count", &Dataset::coefficient_count);

  m.def("build_design_row",
        [](const py::dict& record, const CovariateSchema& schema) {
          return build_design_row(record_from_dict(record), schema);
        },
        py::arg("record"), py::arg("schema"));

  m.def("inverse_logit", &inverse_logit, py::arg("eta"));
  m.def("log_likelihood",
        py::overload_cast<const Eigen::VectorXd&, const Dataset&>(&log_likelihood),
        py::arg("beta"), py::arg("data"));
  m.def("log_likelihood_gradient",
        py::overload_cast<const Eigen::VectorXd&, const Dataset&>(
            &log_likelihood_gradient),
        py::arg("beta"), py::arg("data"));
  m.def("log_likelihood_hessian",
        py::overload_cast<const Eigen::VectorXd&, const Dataset&>(
            &log_likelihood_hessian),
        py::arg("beta"), py::arg("data"));

  py::class_<CoefEstimate>(m, "CoefEstimate")
      .def(py::init([](std::string schema_hash, Eigen::VectorXd beta,
                       Eigen::MatrixXd cov, int n_rows, bool converged,
                       double loglik) {
             return CoefEstimate{std::move(schema_hash), std::move(beta),
                                 std::move(cov), n_rows, converged, loglik};
           }),
           py::arg("schema_hash"), py::arg("beta"), py::arg("cov"),
           py::arg("n_rows"), py::arg("converged"), py::arg("loglik"))
      .def_readonly("schema_hash", &CoefEstimate::schema_hash)
      .def_readonly("beta", &CoefEstimate::beta)
      .def_readonly("cov", &CoefEstimate::cov)
      .def_readonly("n_rows", &CoefEstimate::n_rows)
      .def_readonly("converged", &CoefEstimate::converged)
      .def_readonly("loglik", &CoefEstimate::loglik);

  m.def("fit_mle",
        [](const Dataset& data, double tol, int max_iter, double ridge) {
          return fit_mle(data, MleOptions{tol, max_iter, ridge});
        },
        py::arg("data"), py::arg("tol") = 1e-8, py::arg("max_iter") = 100,
        py::arg("ridge_on_separation") = 1e-4);
  m.def("nagelkerke_r2", &nagelkerke_r2, py::arg("est"), py::arg("data"));
  m.def("auc", &auc, py::arg("pred"), py::arg("y"));
  m.def("hosmer_lemeshow", &hosmer_lemeshow, py::arg("pred"), py::arg("y"),
        py::arg("groups") = 10);
  m.def("fitted_probabilities", &fitted_probabilities, py::arg("est"),
        py::arg("data"));

  py::class_<PriorSpec>(m, "PriorSpec")
      .def_property_readonly("method",
                             [](const PriorSpec& p) { return std::string(to_string(p.method)); })
      .def_readonly("mean", &PriorSpec::mean)
      .def_readonly("cov", &PriorSpec::cov)
      .def_readonly("provenance", &PriorSpec::provenance)
      .def_readonly("schema_hash", &PriorSpec::schema_hash);

  m.def("standard_prior", &standard_prior, py::arg("dim"),
        py::arg("variance") = 1e6);
  m.def("ridge_stabilize", &ridge_stabilize, py::arg("V"), py::arg("lam"));
  m.def("pwp_prior", &pwp_prior, py::arg("fits"), py::arg("lam") = 0.003,
        py::arg("weights") = std::vector<double>{});
  m.def("last_prior", &last_prior, py::arg("fit"));
  m.def("lastz_prior", &lastz_prior, py::arg("fit"));
  m.def("probit_to_logit", &probit_to_logit, py::arg("estimate"),
        py::arg("std_error"));
  m.def("lit_prior",
        [](const py::list& entries, const CovariateSchema& schema,
           double fallback_mean, double fallback_variance) {
          std::vector<LitStudyEntry> es;
          for (const auto& item : entries) {
            const py::dict d = item.cast<py::dict>();
            LitStudyEntry e;
            e.study = d["study"].cast<std::string>();
            if (d.contains("year")) e.year = d["year"].cast<int>();
            e.predictor = d["predictor"].cast<std::string>();
            const std::string scale = d["scale"].cast<std::string>();
            if (scale == "logit")
              e.scale = LitScale::Logit;
            else if (scale == "probit")
              e.scale = LitScale::Probit;
            else
              fail(ErrorKind::InvalidConfig, "scale must be 'logit' or 'probit'");
            e.estimate = d["estimate"].cast<double>();
            e.std_error = d["std_error"].cast<double>();
            es.push_back(std::move(e));
          }
          return lit_prior(es, schema, LitFallback{fallback_mean, fallback_variance});
        },
        py::arg("entries"), py::arg("schema"), py::arg("fallback_mean") = 0.0,
        py::arg("fallback_variance") = 10.0);

  py::enum_<McmcInit>(m, "McmcInit")
      .value("MLE", McmcInit::Mle)
      .value("PRIOR_MEAN", McmcInit::PriorMean)
      .value("ZERO", McmcInit::Zero);

  py::class_<McmcConfig>(m, "McmcConfig")
      .def(py::init<>())
      .def_readwrite("tune_loops", &McmcConfig::tune_loops)
      .def_readwrite("tune_len", &McmcConfig::tune_len)
      .def_readwrite("burn_in", &McmcConfig::burn_in)
      .def_readwrite("draws", &McmcConfig::draws)
      .def_readwrite("seed", &McmcConfig::seed)
      .def_readwrite("target_accept", &McmcConfig::target_accept)
      .def_readwrite("init", &McmcConfig::init)
      .def_readwrite("initial_step_scale", &McmcConfig::initial_step_scale);

  py::class_<PosteriorDraws>(m, "PosteriorDraws")
      .def_readonly("draws", &PosteriorDraws::draws)
      .def_readonly("accept_rate", &PosteriorDraws::accept_rate)
      .def_readonly("final_step_scale", &PosteriorDraws::final_step_scale);

  m.def("log_posterior", &log_posterior, py::arg("beta"), py::arg("data"),
        py::arg("prior"));
  m.def("sample_posterior", &sample_posterior, py::arg("data"), py::arg("prior"),
        py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("posterior_mean_prediction", &posterior_mean_prediction,
        py::arg("draws"), py::arg("x"));
  m.def("posterior_mean_predictions", &posterior_mean_predictions,
        py::arg("draws"), py::arg("X"));
  m.def("effective_sample_size", &effective_sample_size, py::arg("draws"));

  py::class_<QuarterData>(m, "QuarterData")
      .def_static(
          "create",
          [](int quarter_id, const CovariateSchema& schema,
             const py::list& records, int quarter_length) {
            std::vector<CallRecord> rs;
            for (const auto& item : records)
              rs.push_back(record_from_dict(item.cast<py::dict>()));
            return QuarterData::create(quarter_id, schema, std::move(rs),
                                       quarter_length);
          },
          py::arg("quarter_id"), py::arg("schema"), py::arg("records"),
          py::arg("quarter_length") = 84)
      .def_readonly("quarter_id", &QuarterData::quarter_id)
      .def_readonly("quarter_length", &QuarterData::quarter_length)
      .def_property_readonly(
          "n_records",
          [](const QuarterData& q) { return q.records.size(); });

  py::class_<DailyEvalRow>(m, "DailyEvalRow")
      .def_readonly("day", &DailyEvalRow::day)
      .def_readonly("n", &DailyEvalRow::n)
      .def_readonly("bias", &DailyEvalRow::bias)
      .def_readonly("se", &DailyEvalRow::se)
      .def_readonly("rmse", &DailyEvalRow::rmse);

  py::class_<QuarterRunResult>(m, "QuarterRunResult")
      .def_readonly("rows", &QuarterRunResult::rows)
      .def_readonly("skipped_days", &QuarterRunResult::skipped_days)
      .def_readonly("start_day", &QuarterRunResult::start_day)
      .def_readonly("end_day", &QuarterRunResult::end_day)
      .def_readonly("diffs", &QuarterRunResult::diffs);

  m.def("benchmark_predictions", &benchmark_predictions, py::arg("quarter"));
  m.def("daily_predictions",
        [](const QuarterData& q, const PriorSpec& prior, int day,
           const McmcConfig& cfg, bool exclude_current_day) {
          std::map<std::pair<std::string, int>, double> preds =
              daily_predictions(q, prior, day, cfg, exclude_current_day);
          py::dict out;
          for (const auto& [key, value] : preds)
            out[py::make_tuple(key.first, key.second)] = value;
          return out;
        },
        py::arg("quarter"), py::arg("prior"), py::arg("day"), py::arg("config"),
        py::arg("exclude_current_day") = false);
  m.def("daily_bias", &daily_bias, py::arg("diffs"));
  m.def("rmse", &rmse, py::arg("bias"), py::arg("se"));
  m.def("run_quarter",
        [](const QuarterData& q, const PriorSpec& prior, const McmcConfig& cfg,
           int start_day, int end_day, bool exclude_current_day, int jobs,
           bool keep_diffs) {
          RunOptions opts{start_day, end_day, exclude_current_day, jobs,
                          keep_diffs};
          py::gil_scoped_release release;
          return run_quarter(q, prior, cfg, opts);
        },
        py::arg("quarter"), py::arg("prior"), py::arg("config"),
        py::arg("start_day") = 7, py::arg("end_day") = 0,
        py::arg("exclude_current_day") = false, py::arg("jobs") = 1,
        py::arg("keep_diffs") = false);

  py::class_<WindowStats>(m, "WindowStats")
      .def_property_readonly(
          "window",
          [](const WindowStats& w) { return py::make_tuple(w.window.lo, w.window.hi); })
      .def_readonly("n_days", &WindowStats::n_days)
      .def_readonly("mean_bias", &WindowStats::mean_bias)
      .def_readonly("median_bias", &WindowStats::median_bias)
      .def_readonly("iqr_bias", &WindowStats::iqr_bias)
      .def_readonly("n_rmse", &WindowStats::n_rmse)
      .def_readonly("mean_rmse", &WindowStats::mean_rmse)
      .def_readonly("median_rmse", &WindowStats::median_rmse)
      .def_readonly("iqr_rmse", &WindowStats::iqr_rmse);

  m.def("window_summary",
        [](const std::vector<DailyEvalRow>& rows,
           const std::vector<std::pair<int, int>>& windows) {
          std::vector<DayWindow> ws;
          for (const auto& [lo, hi] : windows) ws.push_back({lo, hi});
          return window_summary(rows, ws);
        },
        py::arg("rows"),
        py::arg("windows") = std::vector<std::pair<int, int>>{{7, 30}, {31, 60}, {61, 84}});

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_static("desk_default", &SimConfig::desk_default)
      .def_readwrite("n_quarters", &SimConfig::n_quarters)
      .def_readwrite("cases_per_quarter", &SimConfig::cases_per_quarter)
      .def_readwrite("quarter_length", &SimConfig::quarter_length)
      .def_readwrite("phase2_start", &SimConfig::phase2_start)
      .def_readwrite("true_beta", &SimConfig::true_beta)
      .def_readwrite("max_attempts_per_case", &SimConfig::max_attempts_per_case)
      .def_readwrite("attempt_gap", &SimConfig::attempt_gap)
      .def_readwrite("contact_prob", &SimConfig::contact_prob)
      .def_readwrite("target_rr", &SimConfig::target_rr)
      .def_readwrite("drift", &SimConfig::drift)
      .def_readwrite("seed", &SimConfig::seed)
      .def("schema", &SimConfig::schema);

  py::class_<SimResult>(m, "SimResult")
      .def_readonly("quarters", &SimResult::quarters)
      .def_readonly("true_beta", &SimResult::true_beta)
      .def_readonly("calibrated_intercept", &SimResult::calibrated_intercept)
      .def_readonly("realized_response_rate", &SimResult::realized_response_rate);

  m.def("simulate_quarters", &simulate_quarters, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  m.attr("__version__") = "0.1.0";
}
