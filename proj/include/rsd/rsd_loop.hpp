#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rsd/mcmc.hpp"
#include "rsd/schema.hpp"

namespace rsd {

// One quarter of call records, sorted by (day, case_id, attempt) and
// validated against the attempt-sequence invariants.
struct QuarterData {
  int quarter_id = 0;
  CovariateSchema schema;
  std::vector<CallRecord> records;
  int quarter_length = 84;

  static QuarterData create(int quarter_id, CovariateSchema schema,
                            std::vector<CallRecord> records,
                            int quarter_length = 84);
};

struct DailyEvalRow {
  int day = 0;
  int n = 0;
  double bias = 0.0;
  std::optional<double> se;    // absent when n < 2
  std::optional<double> rmse;  // absent with se
};

// End-of-quarter MLE predictions evaluated at each case's final attempt row.
std::map<std::string, double> benchmark_predictions(const QuarterData& q);

// Posterior-mean predictions for every attempt made on day `day`, fitting on
// the cumulative data through that day (or strictly before it). The chain
// seed derives from (config.seed, quarter_id, day).
std::map<std::pair<std::string, int>, double> daily_predictions(
    const QuarterData& q, const PriorSpec& prior, int day,
    const McmcConfig& config, bool exclude_current_day = false);

// Mean difference and its standard error (n-1 sd / sqrt(n); absent at n=1).
std::pair<double, std::optional<double>> daily_bias(
    const std::vector<double>& diffs);

double rmse(double bias, double se);

struct RunOptions {
  int start_day = 7;
  int end_day = 0;  // <= 0 means quarter_length
  bool exclude_current_day = false;
  int jobs = 1;
  bool keep_diffs = false;  // retain per-day diffs for audits
};

struct QuarterRunResult {
  std::vector<DailyEvalRow> rows;
  std::vector<int> skipped_days;  // days in range with no attempts
  int start_day = 0;
  int end_day = 0;
  std::vector<std::vector<double>> diffs;  // parallel to rows when kept
};

// The full daily evaluation protocol: benchmark once, then for every day in
// [start_day, end_day] with attempts, predict and difference against the
// benchmark. Parallel execution over days reproduces serial output exactly.
QuarterRunResult run_quarter(const QuarterData& q, const PriorSpec& prior,
                             const McmcConfig& config,
                             const RunOptions& opts = {});

struct DayWindow {
  int lo = 0;
  int hi = 0;
};

struct WindowStats {
  DayWindow window;
  int n_days = 0;  // rows contributing bias stats
  double mean_bias = 0.0;
  double median_bias = 0.0;
  double iqr_bias = 0.0;
  int n_rmse = 0;  // rows contributing rmse stats
  double mean_rmse = 0.0;
  double median_rmse = 0.0;
  double iqr_rmse = 0.0;
};

std::vector<DayWindow> default_windows();

// Per-window summaries over days; inclusive bounds, missing days simply do
// not contribute.
std::vector<WindowStats> window_summary(
    const std::vector<DailyEvalRow>& rows,
    const std::vector<DayWindow>& windows = default_windows());

}  // namespace rsd
