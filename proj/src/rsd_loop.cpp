#include "rsd/rsd_loop.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "rsd/likelihood.hpp"
#include "rsd/logging.hpp"
#include "rsd/math.hpp"
#include "rsd/mle.hpp"
#include "rsd/rng.hpp"

namespace rsd {

QuarterData QuarterData::create(int quarter_id, CovariateSchema schema,
                                std::vector<CallRecord> records,
                                int quarter_length) {
  if (quarter_length < 1)
    fail(ErrorKind::InvalidConfig, "quarter_length must be >= 1");
  std::stable_sort(records.begin(), records.end(),
                   [](const CallRecord& a, const CallRecord& b) {
                     return std::tie(a.day, a.case_id, a.attempt) <
                            std::tie(b.day, b.case_id, b.attempt);
                   });
  struct CaseState {
    int last_day = 0;
    int last_attempt = 0;
    bool succeeded = false;
  };
  std::map<std::string, CaseState> state;
  for (const auto& r : records) {
    if (r.day < 1 || r.day > quarter_length)
      fail(ErrorKind::InvalidConfig,
           "case " + r.case_id + ": day " + std::to_string(r.day) +
               " outside [1, " + std::to_string(quarter_length) + "]");
    auto& cs = state[r.case_id];
    if (cs.succeeded)
      fail(ErrorKind::InvalidConfig,
           "case " + r.case_id + ": attempt after a completed interview");
    if (cs.last_attempt > 0 &&
        (r.attempt <= cs.last_attempt || r.day < cs.last_day))
      fail(ErrorKind::InvalidConfig,
           "case " + r.case_id + ": attempts not increasing in (day, attempt)");
    cs.last_day = r.day;
    cs.last_attempt = r.attempt;
    if (r.outcome == 1) cs.succeeded = true;
  }
  return QuarterData{quarter_id, std::move(schema), std::move(records),
                     quarter_length};
}

namespace {

// Design rows in record order; records are day-sorted so cumulative data
// through day d is a row prefix.
struct QuarterDesign {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<int> day;
  std::vector<int> rows_through_day;  // prefix row count per day (1-based)

  explicit QuarterDesign(const QuarterData& q)
      : X(q.records.size(), q.schema.coefficient_count()),
        y(q.records.size()),
        rows_through_day(static_cast<std::size_t>(q.quarter_length) + 1, 0) {
    for (std::size_t i = 0; i < q.records.size(); ++i) {
      const auto& r = q.records[i];
      X.row(static_cast<Eigen::Index>(i)) = build_design_row(r, q.schema);
      y[static_cast<Eigen::Index>(i)] = r.outcome ? 1.0 : 0.0;
      day.push_back(r.day);
    }
    std::size_t i = 0;
    for (int d = 1; d <= q.quarter_length; ++d) {
      while (i < q.records.size() && q.records[i].day <= d) ++i;
      rows_through_day[static_cast<std::size_t>(d)] = static_cast<int>(i);
    }
  }

  Dataset prefix(const QuarterData& q, int through_day) const {
    const int n = rows_through_day[static_cast<std::size_t>(
        std::clamp(through_day, 0, q.quarter_length))];
    return Dataset{q.schema, X.topRows(n), y.head(n), {}};
  }
};

std::map<std::pair<std::string, int>, double> predict_day(
    const QuarterData& q, const QuarterDesign& design, const PriorSpec& prior,
    int day, const McmcConfig& config, bool exclude_current_day) {
  if (day < 1 || day > q.quarter_length)
    fail(ErrorKind::InvalidConfig, "day outside the quarter");
  const int first =
      day >= 2 ? design.rows_through_day[static_cast<std::size_t>(day - 1)] : 0;
  const int last = design.rows_through_day[static_cast<std::size_t>(day)];
  if (first == last)
    fail(ErrorKind::NoAttemptsThatDay,
         "no attempts on day " + std::to_string(day));

  McmcConfig cfg = config;
  cfg.seed = derive_seed(config.seed,
                         {static_cast<std::uint64_t>(q.quarter_id),
                          static_cast<std::uint64_t>(day)});
  Dataset fit_data = design.prefix(q, exclude_current_day ? day - 1 : day);
  PosteriorDraws draws = sample_posterior(fit_data, prior, cfg);

  Eigen::VectorXd preds = posterior_mean_predictions(
      draws, design.X.middleRows(first, last - first));
  std::map<std::pair<std::string, int>, double> out;
  for (int i = first; i < last; ++i) {
    const auto& r = q.records[static_cast<std::size_t>(i)];
    out[{r.case_id, r.attempt}] = preds[i - first];
  }
  return out;
}

}  // namespace

std::map<std::string, double> benchmark_predictions(const QuarterData& q) {
  if (q.records.empty()) fail(ErrorKind::EmptyInput, "quarter has no records");
  Dataset all = Dataset::from_records(q.schema, q.records);
  CoefEstimate est = fit_mle(all);
  if (!est.converged)
    log_info("benchmark fit for quarter " + std::to_string(q.quarter_id) +
             " did not converge; penalized fit used");
  // Final-attempt row per case: records are sorted, so the last occurrence
  // wins.
  std::map<std::string, double> out;
  for (const auto& r : q.records) {
    const Eigen::VectorXd x = build_design_row(r, q.schema);
    out[r.case_id] = inverse_logit(est.beta.dot(x));
  }
  return out;
}

std::map<std::pair<std::string, int>, double> daily_predictions(
    const QuarterData& q, const PriorSpec& prior, int day,
    const McmcConfig& config, bool exclude_current_day) {
  const QuarterDesign design(q);
  return predict_day(q, design, prior, day, config, exclude_current_day);
}

std::pair<double, std::optional<double>> daily_bias(
    const std::vector<double>& diffs) {
  if (diffs.empty()) fail(ErrorKind::EmptyInput, "no differences");
  const double bias = mean(diffs);
  if (diffs.size() < 2) return {bias, std::nullopt};
  return {bias, sample_sd(diffs) / std::sqrt(static_cast<double>(diffs.size()))};
}

double rmse(double bias, double se) {
  return std::sqrt(bias * bias + se * se);
}

QuarterRunResult run_quarter(const QuarterData& q, const PriorSpec& prior,
                             const McmcConfig& config, const RunOptions& opts) {
  const int start = opts.start_day;
  const int end = opts.end_day > 0 ? opts.end_day : q.quarter_length;
  if (start < 1 || end > q.quarter_length || start > end)
    fail(ErrorKind::InvalidConfig, "day range outside the quarter");

  const QuarterDesign design(q);
  const auto benchmark = benchmark_predictions(q);

  const int n_days = end - start + 1;
  std::vector<std::optional<DailyEvalRow>> slots(
      static_cast<std::size_t>(n_days));
  std::vector<std::vector<double>> day_diffs(static_cast<std::size_t>(n_days));
  std::vector<char> skipped(static_cast<std::size_t>(n_days), 0);

  auto eval_day = [&](int offset) {
    const int d = start + offset;
    const int first =
        d >= 2 ? design.rows_through_day[static_cast<std::size_t>(d - 1)] : 0;
    const int last = design.rows_through_day[static_cast<std::size_t>(d)];
    if (first == last) {
      skipped[static_cast<std::size_t>(offset)] = 1;
      return;
    }
    auto preds =
        predict_day(q, design, prior, d, config, opts.exclude_current_day);
    std::vector<double> diffs;
    diffs.reserve(preds.size());
    for (int i = first; i < last; ++i) {
      const auto& r = q.records[static_cast<std::size_t>(i)];
      diffs.push_back(preds.at({r.case_id, r.attempt}) -
                      benchmark.at(r.case_id));
    }
    auto [bias, se] = daily_bias(diffs);
    DailyEvalRow row{d, static_cast<int>(diffs.size()), bias, se, std::nullopt};
    if (se) row.rmse = rmse(bias, *se);
    slots[static_cast<std::size_t>(offset)] = row;
    if (opts.keep_diffs)
      day_diffs[static_cast<std::size_t>(offset)] = std::move(diffs);
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    for (int off = 0; off < n_days; ++off) eval_day(off);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&]() {
        for (int off = next.fetch_add(1); off < n_days;
             off = next.fetch_add(1))
          eval_day(off);
      });
    for (auto& t : workers) t.join();
  }

  QuarterRunResult result;
  result.start_day = start;
  result.end_day = end;
  for (int off = 0; off < n_days; ++off) {
    if (skipped[static_cast<std::size_t>(off)]) {
      result.skipped_days.push_back(start + off);
    } else if (slots[static_cast<std::size_t>(off)]) {
      result.rows.push_back(*slots[static_cast<std::size_t>(off)]);
      if (opts.keep_diffs)
        result.diffs.push_back(std::move(day_diffs[static_cast<std::size_t>(off)]));
    }
  }
  return result;
}

std::vector<DayWindow> default_windows() {
  return {{7, 30}, {31, 60}, {61, 84}};
}

std::vector<WindowStats> window_summary(const std::vector<DailyEvalRow>& rows,
                                        const std::vector<DayWindow>& windows) {
  if (rows.empty()) fail(ErrorKind::EmptyInput, "no evaluation rows");
  std::vector<WindowStats> out;
  for (const auto& w : windows) {
    if (w.lo > w.hi) fail(ErrorKind::InvalidConfig, "window lo > hi");
    WindowStats ws;
    ws.window = w;
    std::vector<double> bias;
    std::vector<double> rmses;
    for (const auto& r : rows) {
      if (r.day < w.lo || r.day > w.hi) continue;
      bias.push_back(r.bias);
      if (r.rmse) rmses.push_back(*r.rmse);
    }
    ws.n_days = static_cast<int>(bias.size());
    if (!bias.empty()) {
      ws.mean_bias = mean(bias);
      ws.median_bias = median(bias);
      ws.iqr_bias = iqr(bias);
    }
    ws.n_rmse = static_cast<int>(rmses.size());
    if (!rmses.empty()) {
      ws.mean_rmse = mean(rmses);
      ws.median_rmse = median(rmses);
      ws.iqr_rmse = iqr(rmses);
    }
    out.push_back(ws);
  }
  return out;
}

}  // namespace rsd
