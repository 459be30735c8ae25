// Experiment harness: simulate -> fit -> prior -> run-quarter -> summarize /
// report, with every output carrying the schema fingerprint and master seed.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsd/io.hpp"
#include "rsd/logging.hpp"
#include "rsd/mcmc.hpp"
#include "rsd/mle.hpp"
#include "rsd/priors.hpp"
#include "rsd/rng.hpp"
#include "rsd/rsd_loop.hpp"
#include "rsd/simulator.hpp"

namespace {

namespace fs = std::filesystem;

std::vector<rsd::DayWindow> parse_windows(const std::string& spec) {
  std::vector<rsd::DayWindow> windows;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::string part =
        spec.substr(start, comma == std::string::npos ? comma : comma - start);
    const std::size_t dash = part.find('-');
    if (dash == std::string::npos)
      rsd::fail(rsd::ErrorKind::InvalidConfig,
                "window '" + part + "' must look like 7-30");
    windows.push_back({std::stoi(part.substr(0, dash)),
                       std::stoi(part.substr(dash + 1))});
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].lo > windows[i].hi)
      rsd::fail(rsd::ErrorKind::InvalidConfig, "window lo > hi");
    if (i > 0 && windows[i].lo <= windows[i - 1].hi)
      rsd::fail(rsd::ErrorKind::InvalidConfig,
                "windows must be disjoint and ordered");
  }
  return windows;
}

// Records for one quarter out of a (possibly multi-quarter) call file.
std::vector<rsd::CallRecord> select_quarter(std::vector<rsd::CallRecord> all,
                                            std::optional<int> quarter) {
  if (!quarter) return all;
  std::vector<rsd::CallRecord> out;
  for (auto& r : all)
    if (r.quarter == *quarter) out.push_back(std::move(r));
  if (out.empty())
    rsd::fail(rsd::ErrorKind::InvalidConfig,
              "no records for quarter " + std::to_string(*quarter));
  return out;
}

struct SimulateArgs {
  std::string out_dir;
  std::uint64_t seed = 0;
  int quarters = 9;
  int cases = 700;
  int quarter_length = 84;
  int phase2_start = 71;
  double target_rr = 0.89;
  double drift = 0.0;
  int max_attempts = 12;
  double attempt_gap = 5.0;
};

int cmd_simulate(const SimulateArgs& a) {
  rsd::SimConfig cfg = rsd::SimConfig::desk_default();
  cfg.n_quarters = a.quarters;
  cfg.cases_per_quarter = a.cases;
  cfg.quarter_length = a.quarter_length;
  cfg.phase2_start = a.phase2_start;
  cfg.target_rr = a.target_rr;
  cfg.drift = a.drift;
  cfg.max_attempts_per_case = a.max_attempts;
  cfg.attempt_gap = a.attempt_gap;
  cfg.seed = a.seed;

  rsd::SimResult sim = rsd::simulate_quarters(cfg);
  const rsd::CovariateSchema schema = cfg.schema();
  rsd::log_info("simulated " + std::to_string(sim.quarters.size()) +
                " quarters, realized case response rate " +
                rsd::format_double(sim.realized_response_rate));

  fs::create_directories(a.out_dir);
  rsd::FileMeta meta{rsd::kFormatVersion, a.seed, schema.fingerprint()};
  std::vector<rsd::CallRecord> all;
  for (const auto& q : sim.quarters)
    all.insert(all.end(), q.records.begin(), q.records.end());
  rsd::write_call_csv(a.out_dir + "/calls.csv", schema, all, meta);
  rsd::write_schema_json(a.out_dir + "/schema.json", schema, meta);
  rsd::write_truth_json(a.out_dir + "/truth.json", sim, meta);
  rsd::write_truth_propensity_csv(a.out_dir + "/truth_propensity.csv", sim, meta);
  return 0;
}

struct FitArgs {
  std::string data;
  std::string schema;
  std::string out;
  std::optional<int> quarter;
  bool stats = false;
  bool ignore_extra = false;
  std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a) {
  const rsd::CovariateSchema schema = rsd::read_schema_json(a.schema);
  auto records = select_quarter(
      rsd::read_call_csv(a.data, schema, a.ignore_extra), a.quarter);
  const rsd::Dataset data = rsd::Dataset::from_records(schema, records);
  const rsd::CoefEstimate est = rsd::fit_mle(data);
  rsd::log_info("fit: n=" + std::to_string(est.n_rows) +
                " converged=" + (est.converged ? "yes" : "no") +
                " loglik=" + rsd::format_double(est.loglik));
  std::optional<rsd::FitStats> stats;
  if (a.stats) stats = rsd::fit_stats(est, data);
  rsd::write_fit_json(a.out, est, stats,
                      {rsd::kFormatVersion, a.seed, schema.fingerprint()});
  return 0;
}

struct PriorArgs {
  std::string out;
  std::uint64_t seed = 0;
  // standard
  int dim = 0;
  double variance = 1e6;
  // pwp
  std::vector<std::string> fit_files;
  double lambda = 0.003;
  std::vector<double> weights;
  // last / lastz
  std::string fit_file;
  // lit
  std::string crosswalk;
  std::string schema_file;
  double fallback_mean = 0.0;
  double fallback_variance = 10.0;
};

int cmd_prior(const std::string& method, const PriorArgs& a) {
  rsd::PriorSpec prior;
  if (method == "standard") {
    prior = rsd::standard_prior(a.dim, a.variance);
  } else if (method == "pwp") {
    std::vector<rsd::CoefEstimate> fits;
    for (const auto& f : a.fit_files) fits.push_back(rsd::read_fit_json(f));
    prior = rsd::pwp_prior(fits, a.lambda, a.weights);
    for (const auto& f : a.fit_files) prior.provenance.push_back("source " + f);
  } else if (method == "last" || method == "lastz") {
    const rsd::CoefEstimate fit = rsd::read_fit_json(a.fit_file);
    prior = method == "last" ? rsd::last_prior(fit) : rsd::lastz_prior(fit);
    prior.provenance.push_back("source " + a.fit_file);
  } else if (method == "lit") {
    const rsd::CovariateSchema schema = rsd::read_schema_json(a.schema_file);
    const auto entries = rsd::read_lit_csv(a.crosswalk);
    prior = rsd::lit_prior(entries, schema,
                           {a.fallback_mean, a.fallback_variance});
  }
  for (const auto& p : prior.provenance) rsd::log_info("prior: " + p);
  rsd::write_prior_json(a.out, prior,
                        {rsd::kFormatVersion, a.seed, prior.schema_hash});
  return 0;
}

struct RunArgs {
  std::string data;
  std::string schema;
  std::string prior;
  std::string out;
  int quarter = 0;
  int quarter_length = 84;
  std::uint64_t seed = 0;
  int start_day = 7;
  int end_day = 0;
  int tune = 100;
  int tune_len = 50;
  int burn_in = 1000;
  int draws = 5000;
  double target_accept = 0.234;
  std::string profile;
  int jobs = 1;
  bool exclude_current_day = false;
  bool ignore_extra = false;
  std::string method_label;
  int dump_day = 0;
  std::string dump_prefix;
};

int cmd_run_quarter(const RunArgs& a) {
  const rsd::CovariateSchema schema = rsd::read_schema_json(a.schema);
  const rsd::PriorSpec prior = rsd::read_prior_json(a.prior);
  if (!prior.schema_hash.empty() && prior.schema_hash != schema.fingerprint())
    rsd::fail(rsd::ErrorKind::SchemaFingerprintMismatch,
              "prior was built for schema " + prior.schema_hash +
                  ", data uses " + schema.fingerprint());
  auto records = select_quarter(
      rsd::read_call_csv(a.data, schema, a.ignore_extra), a.quarter);
  rsd::QuarterData q = rsd::QuarterData::create(a.quarter, schema,
                                                std::move(records),
                                                a.quarter_length);

  rsd::McmcConfig cfg;
  cfg.tune_loops = a.tune;
  cfg.tune_len = a.tune_len;
  cfg.burn_in = a.burn_in;
  cfg.draws = a.draws;
  cfg.seed = a.seed;
  cfg.target_accept = a.target_accept;
  if (a.profile == "desk") cfg.draws = 1000;
  else if (!a.profile.empty())
    rsd::fail(rsd::ErrorKind::InvalidConfig, "unknown profile '" + a.profile + "'");

  rsd::RunOptions opts;
  opts.start_day = a.start_day;
  opts.end_day = a.end_day;
  opts.exclude_current_day = a.exclude_current_day;
  opts.jobs = a.jobs;
  const rsd::QuarterRunResult result = rsd::run_quarter(q, prior, cfg, opts);
  rsd::log_info("run-quarter: evaluated " + std::to_string(result.rows.size()) +
                " days, skipped " + std::to_string(result.skipped_days.size()));

  rsd::EvalFile eval;
  eval.meta = {rsd::kFormatVersion, a.seed, schema.fingerprint()};
  eval.method = a.method_label.empty() ? rsd::to_string(prior.method)
                                       : a.method_label;
  eval.quarter = a.quarter;
  eval.start_day = result.start_day;
  eval.end_day = result.end_day;
  eval.rows = result.rows;
  eval.skipped_days = result.skipped_days;
  rsd::write_eval_csv(a.out, eval);

  if (a.dump_day > 0) {
    rsd::McmcConfig day_cfg = cfg;
    day_cfg.seed = rsd::derive_seed(cfg.seed,
                                    {static_cast<std::uint64_t>(q.quarter_id),
                                     static_cast<std::uint64_t>(a.dump_day)});
    // Rebuild the cumulative dataset for the dumped day.
    std::vector<rsd::CallRecord> cum;
    for (const auto& r : q.records)
      if (r.day <= (a.exclude_current_day ? a.dump_day - 1 : a.dump_day))
        cum.push_back(r);
    const rsd::Dataset data = rsd::Dataset::from_records(schema, cum);
    const rsd::PosteriorDraws draws = rsd::sample_posterior(data, prior, day_cfg);
    rsd::write_draws_csv(a.dump_prefix + "_draws.csv", draws, eval.meta);
    rsd::write_mcmc_diag_json(a.dump_prefix + "_diag.json", draws, eval.meta);
  }
  return 0;
}

struct SummarizeArgs {
  std::vector<std::string> eval_files;
  std::string out;
  std::string windows = "7-30,31-60,61-84";
};

// Shared by summarize/report: read eval files and insist on one schema.
std::vector<rsd::EvalFile> read_evals(const std::vector<std::string>& paths) {
  if (paths.empty()) rsd::fail(rsd::ErrorKind::EmptyInput, "no eval files given");
  std::vector<rsd::EvalFile> evals;
  for (const auto& p : paths) evals.push_back(rsd::read_eval_csv(p));
  for (const auto& e : evals)
    if (e.meta.schema_hash != evals.front().meta.schema_hash)
      rsd::fail(rsd::ErrorKind::SchemaFingerprintMismatch,
                "eval files mix schema fingerprints");
  return evals;
}

int cmd_summarize(const SummarizeArgs& a) {
  const auto windows = parse_windows(a.windows);
  const auto evals = read_evals(a.eval_files);
  std::vector<std::vector<rsd::WindowStats>> per_file;
  std::vector<std::string> methods;
  std::vector<int> quarters;
  for (const auto& e : evals) {
    per_file.push_back(rsd::window_summary(e.rows, windows));
    methods.push_back(e.method);
    quarters.push_back(e.quarter);
  }
  rsd::write_window_json(a.out, a.eval_files, per_file, methods, quarters,
                         evals.front().meta);
  return 0;
}

int cmd_report(const std::vector<std::string>& eval_files, const std::string& out) {
  const auto evals = read_evals(eval_files);
  rsd::write_plot_csv(out, evals, evals.front().meta);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Daily response-propensity prediction under responsive survey "
               "design: simulate, fit, build priors, evaluate"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate synthetic quarters");
  c_sim->add_option("--out", sim.out_dir, "Output directory")->required();
  c_sim->add_option("--seed", sim.seed, "Master seed");
  c_sim->add_option("--quarters", sim.quarters, "Number of quarters");
  c_sim->add_option("--cases", sim.cases, "Cases per quarter");
  c_sim->add_option("--quarter-length", sim.quarter_length, "Days per quarter");
  c_sim->add_option("--phase2-start", sim.phase2_start, "Second-phase start day");
  c_sim->add_option("--target-rr", sim.target_rr, "Case-level response rate");
  c_sim->add_option("--drift", sim.drift, "Per-quarter coefficient drift sd");
  c_sim->add_option("--max-attempts", sim.max_attempts, "Attempt cap per case");
  c_sim->add_option("--attempt-gap", sim.attempt_gap, "Mean days between attempts");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Maximum-likelihood fit");
  c_fit->add_option("--data", fit.data, "Call-record CSV")->required();
  c_fit->add_option("--schema", fit.schema, "Schema JSON")->required();
  c_fit->add_option("--out", fit.out, "Output fit JSON")->required();
  int fit_quarter = 0;
  auto* fit_q = c_fit->add_option("--quarter", fit_quarter, "Restrict to one quarter");
  c_fit->add_flag("--stats", fit.stats, "Include fit statistics");
  c_fit->add_flag("--ignore-extra", fit.ignore_extra, "Skip unknown CSV columns");
  c_fit->add_option("--seed", fit.seed, "Master seed to embed");

  auto* c_prior = app.add_subcommand("prior", "Build a prior");
  c_prior->require_subcommand(1);
  PriorArgs pa;
  auto* p_std = c_prior->add_subcommand("standard", "Non-informative prior");
  p_std->add_option("--dim", pa.dim, "Coefficient count")->required();
  p_std->add_option("--variance", pa.variance, "Diagonal variance");
  auto* p_pwp = c_prior->add_subcommand("pwp", "Precision-weighted pooling");
  p_pwp->add_option("fits", pa.fit_files, "Fit JSON files")->required();
  p_pwp->add_option("--lambda", pa.lambda, "Ridge stabilization");
  p_pwp->add_option("--weights", pa.weights, "Per-quarter weights");
  auto* p_last = c_prior->add_subcommand("last", "Most recent quarter");
  p_last->add_option("--fit", pa.fit_file, "Fit JSON")->required();
  auto* p_lastz = c_prior->add_subcommand("lastz", "Most recent quarter, zeroed covariances");
  p_lastz->add_option("--fit", pa.fit_file, "Fit JSON")->required();
  auto* p_lit = c_prior->add_subcommand("lit", "Literature pooling");
  p_lit->add_option("--crosswalk", pa.crosswalk, "Crosswalk CSV")->required();
  p_lit->add_option("--schema", pa.schema_file, "Schema JSON")->required();
  p_lit->add_option("--fallback-mean", pa.fallback_mean, "Fallback mean");
  p_lit->add_option("--fallback-variance", pa.fallback_variance, "Fallback variance");
  for (auto* sub : {p_std, p_pwp, p_last, p_lastz, p_lit}) {
    sub->add_option("--out", pa.out, "Output prior JSON")->required();
    sub->add_option("--seed", pa.seed, "Master seed to embed");
  }

  RunArgs run;
  auto* c_run = app.add_subcommand("run-quarter", "Daily evaluation loop");
  c_run->add_option("--data", run.data, "Call-record CSV")->required();
  c_run->add_option("--schema", run.schema, "Schema JSON")->required();
  c_run->add_option("--prior", run.prior, "Prior JSON")->required();
  c_run->add_option("--out", run.out, "Output eval CSV")->required();
  c_run->add_option("--quarter", run.quarter, "Quarter to evaluate")->required();
  c_run->add_option("--quarter-length", run.quarter_length, "Days per quarter");
  c_run->add_option("--seed", run.seed, "Master seed");
  c_run->add_option("--start-day", run.start_day, "First evaluated day");
  c_run->add_option("--end-day", run.end_day, "Last evaluated day (0 = quarter end)");
  c_run->add_option("--tune", run.tune, "Tuning loops");
  c_run->add_option("--tune-len", run.tune_len, "Proposals per tuning loop");
  c_run->add_option("--burn-in", run.burn_in, "Burn-in iterations");
  c_run->add_option("--draws", run.draws, "Retained draws");
  c_run->add_option("--target-accept", run.target_accept, "Adaptation target");
  c_run->add_option("--profile", run.profile, "Preset: desk (1000 draws)");
  c_run->add_option("--jobs", run.jobs, "Parallel day workers");
  c_run->add_flag("--exclude-current-day", run.exclude_current_day,
                  "Fit on days < d instead of <= d");
  c_run->add_flag("--ignore-extra", run.ignore_extra, "Skip unknown CSV columns");
  c_run->add_option("--method-label", run.method_label, "Override method tag");
  c_run->add_option("--dump-day", run.dump_day, "Dump draws for one day");
  c_run->add_option("--dump-prefix", run.dump_prefix, "Prefix for draw dump");

  SummarizeArgs sum;
  auto* c_sum = app.add_subcommand("summarize", "Window summaries of eval files");
  c_sum->add_option("evals", sum.eval_files, "Eval CSV files")->required();
  c_sum->add_option("--out", sum.out, "Output window JSON")->required();
  c_sum->add_option("--windows", sum.windows, "Comma-separated day windows");

  std::vector<std::string> report_files;
  std::string report_out;
  auto* c_rep = app.add_subcommand("report", "Long-format plot CSV");
  c_rep->add_option("evals", report_files, "Eval CSV files")->required();
  c_rep->add_option("--out", report_out, "Output plot CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_fit->parsed()) {
      if (fit_q->count()) fit.quarter = fit_quarter;
      return cmd_fit(fit);
    }
    if (c_prior->parsed()) {
      for (auto* sub : {p_std, p_pwp, p_last, p_lastz, p_lit})
        if (sub->parsed()) return cmd_prior(sub->get_name(), pa);
    }
    if (c_run->parsed()) return cmd_run_quarter(run);
    if (c_sum->parsed()) return cmd_summarize(sum);
    if (c_rep->parsed()) return cmd_report(report_files, report_out);
  } catch (const rsd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
