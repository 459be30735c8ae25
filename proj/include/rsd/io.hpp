#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsd/mle.hpp"
#include "rsd/priors.hpp"
#include "rsd/rsd_loop.hpp"
#include "rsd/schema.hpp"
#include "rsd/simulator.hpp"

namespace rsd {

inline constexpr int kFormatVersion = 1;

// Embedded in every file this project writes; CSV files carry it as
// leading "# key=value" comment lines, JSON files as top-level fields.
struct FileMeta {
  int format_version = kFormatVersion;
  std::uint64_t seed = 0;
  std::string schema_hash;
};

// --- schema JSON -----------------------------------------------------------

void write_schema_json(const std::string& path, const CovariateSchema& schema,
                       const FileMeta& meta);
// Accepts both the wrapped object form and a bare entry array.
CovariateSchema read_schema_json(const std::string& path);

// --- call-record CSV -------------------------------------------------------

void write_call_csv(const std::string& path, const CovariateSchema& schema,
                    const std::vector<CallRecord>& records, const FileMeta& meta);
std::vector<CallRecord> read_call_csv(const std::string& path,
                                      const CovariateSchema& schema,
                                      bool ignore_extra = false);

// --- coefficient-estimate JSON ---------------------------------------------

void write_fit_json(const std::string& path, const CoefEstimate& est,
                    const std::optional<FitStats>& stats, const FileMeta& meta);
CoefEstimate read_fit_json(const std::string& path);

// --- prior JSON -------------------------------------------------------------

void write_prior_json(const std::string& path, const PriorSpec& prior,
                      const FileMeta& meta);
PriorSpec read_prior_json(const std::string& path);

// --- daily evaluation CSV ----------------------------------------------------

struct EvalFile {
  FileMeta meta;
  std::string method;
  int quarter = 0;
  int start_day = 0;
  int end_day = 0;
  std::vector<DailyEvalRow> rows;
  std::vector<int> skipped_days;
};

void write_eval_csv(const std::string& path, const EvalFile& eval);
EvalFile read_eval_csv(const std::string& path);

// --- window-summary JSON ------------------------------------------------------

void write_window_json(const std::string& path,
                       const std::vector<std::string>& source_files,
                       const std::vector<std::vector<WindowStats>>& per_file,
                       const std::vector<std::string>& methods,
                       const std::vector<int>& quarters, const FileMeta& meta);

// --- long-format plot CSV -----------------------------------------------------

void write_plot_csv(const std::string& path, const std::vector<EvalFile>& evals,
                    const FileMeta& meta);

// --- literature crosswalk CSV --------------------------------------------------

std::vector<LitStudyEntry> read_lit_csv(const std::string& path);

// --- simulator truth sidecars ----------------------------------------------------

void write_truth_json(const std::string& path, const SimResult& sim,
                      const FileMeta& meta);
void write_truth_propensity_csv(const std::string& path, const SimResult& sim,
                                const FileMeta& meta);

// --- MCMC draw dump ----------------------------------------------------------------

void write_draws_csv(const std::string& path, const PosteriorDraws& draws,
                     const FileMeta& meta);
void write_mcmc_diag_json(const std::string& path, const PosteriorDraws& draws,
                          const FileMeta& meta);

// Shared helper: shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace rsd
