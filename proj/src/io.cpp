#include "rsd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rsd/mcmc.hpp"

namespace rsd {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

namespace {

std::ifstream open_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::FileNotFound, path);
  return in;
}

std::ofstream open_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::FileNotFound, "cannot write " + path);
  return out;
}

[[noreturn]] void parse_fail(const std::string& path, int line, int col,
                             const std::string& what) {
  fail(ErrorKind::ParseError,
       path + ": line " + std::to_string(line) + ", column " +
           std::to_string(col) + ": " + what);
}

long parse_long(const std::string& s, const std::string& path, int line, int col) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    parse_fail(path, line, col, "expected an integer, got '" + s + "'");
  return v;
}

double parse_num(const std::string& s, const std::string& path, int line, int col) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    parse_fail(path, line, col, "expected a number, got '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void check_csv_safe(const std::string& s) {
  if (s.find_first_of(",\"\r\n") != std::string::npos)
    fail(ErrorKind::InvalidConfig,
         "value '" + s + "' cannot be written to CSV (contains a delimiter)");
}

void write_meta_comments(std::ofstream& out, const FileMeta& meta,
                         const std::vector<std::pair<std::string, std::string>>&
                             extra = {}) {
  out << "# format_version=" << meta.format_version << "\n";
  out << "# seed=" << meta.seed << "\n";
  if (!meta.schema_hash.empty()) out << "# schema_hash=" << meta.schema_hash << "\n";
  for (const auto& [k, v] : extra) out << "# " << k << "=" << v << "\n";
}

// Reads leading "# key=value" lines; returns them and leaves `line` holding
// the first non-comment line (usually the header).
std::map<std::string, std::string> read_meta_comments(std::ifstream& in,
                                                      std::string& line,
                                                      int& line_no) {
  std::map<std::string, std::string> meta;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] != '#') break;
    std::string body = line.substr(1);
    const std::size_t sp = body.find_first_not_of(' ');
    if (sp != std::string::npos) body = body.substr(sp);
    const std::size_t eq = body.find('=');
    if (eq != std::string::npos)
      meta[body.substr(0, eq)] = body.substr(eq + 1);
  }
  return meta;
}

FileMeta meta_from_map(const std::map<std::string, std::string>& m) {
  FileMeta meta;
  if (auto it = m.find("format_version"); it != m.end())
    meta.format_version = static_cast<int>(std::stol(it->second));
  if (auto it = m.find("seed"); it != m.end())
    meta.seed = std::stoull(it->second);
  if (auto it = m.find("schema_hash"); it != m.end()) meta.schema_hash = it->second;
  return meta;
}

json parse_json_file(const std::string& path) {
  std::ifstream in = open_read(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

json meta_to_json(const FileMeta& meta) {
  json j;
  j["format_version"] = meta.format_version;
  j["seed"] = meta.seed;
  if (!meta.schema_hash.empty()) j["schema_hash"] = meta.schema_hash;
  return j;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::MatrixXd matrix_from_json(const json& a) {
  const auto rows = a.size();
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const auto cols = a[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (a[i].size() != cols)
      fail(ErrorKind::ParseError, "ragged matrix in JSON input");
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          a[i][j].get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

void dump_json(const std::string& path, const json& j) {
  std::ofstream out = open_write(path);
  out << j.dump(2) << "\n";
}

}  // namespace

// --- schema JSON -----------------------------------------------------------

void write_schema_json(const std::string& path, const CovariateSchema& schema,
                       const FileMeta& meta) {
  json j = meta_to_json(meta);
  j["schema_hash"] = schema.fingerprint();
  json entries = json::array();
  for (const auto& e : schema.entries()) {
    json je;
    je["name"] = e.name;
    je["kind"] = e.kind == CovariateKind::Numeric ? "numeric" : "categorical";
    if (e.kind == CovariateKind::Categorical) {
      je["levels"] = e.levels;
      je["reference"] = e.reference;
    }
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  dump_json(path, j);
}

CovariateSchema read_schema_json(const std::string& path) {
  const json j = parse_json_file(path);
  const json& arr = j.is_array() ? j : j.at("entries");
  std::vector<SchemaEntry> entries;
  try {
    for (const auto& je : arr) {
      SchemaEntry e;
      e.name = je.at("name").get<std::string>();
      const std::string kind = je.at("kind").get<std::string>();
      if (kind == "numeric") {
        e.kind = CovariateKind::Numeric;
      } else if (kind == "categorical") {
        e.kind = CovariateKind::Categorical;
        e.levels = je.at("levels").get<std::vector<std::string>>();
        e.reference = je.at("reference").get<std::string>();
      } else {
        fail(ErrorKind::ParseError, path + ": unknown covariate kind '" + kind + "'");
      }
      entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  return CovariateSchema(std::move(entries));
}

// --- call-record CSV -------------------------------------------------------

void write_call_csv(const std::string& path, const CovariateSchema& schema,
                    const std::vector<CallRecord>& records, const FileMeta& meta) {
  std::ofstream out = open_write(path);
  FileMeta m = meta;
  m.schema_hash = schema.fingerprint();
  write_meta_comments(out, m);
  out << "quarter,case_id,day,attempt,outcome";
  for (const auto& e : schema.entries()) {
    check_csv_safe(e.name);
    out << ',' << e.name;
  }
  out << "\n";
  for (const auto& r : records) {
    check_csv_safe(r.case_id);
    out << r.quarter << ',' << r.case_id << ',' << r.day << ',' << r.attempt
        << ',' << r.outcome;
    for (const auto& e : schema.entries()) {
      auto it = r.covariates.find(e.name);
      if (it == r.covariates.end()) fail(ErrorKind::MissingCovariate, e.name);
      out << ',';
      if (const double* d = std::get_if<double>(&it->second)) {
        out << format_double(*d);
      } else {
        const std::string& s = std::get<std::string>(it->second);
        check_csv_safe(s);
        out << s;
      }
    }
    out << "\n";
  }
}

std::vector<CallRecord> read_call_csv(const std::string& path,
                                      const CovariateSchema& schema,
                                      bool ignore_extra) {
  std::ifstream in = open_read(path);
  std::string line;
  int line_no = 0;
  read_meta_comments(in, line, line_no);
  if (line.empty()) parse_fail(path, line_no, 1, "missing header row");
  const std::vector<std::string> header = split_csv(line);

  const std::vector<std::string> fixed = {"quarter", "case_id", "day", "attempt",
                                          "outcome"};
  std::map<std::string, int> col_of;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    const bool is_fixed =
        std::find(fixed.begin(), fixed.end(), name) != fixed.end();
    bool is_entry = false;
    for (const auto& e : schema.entries())
      if (e.name == name) is_entry = true;
    if (!is_fixed && !is_entry) {
      if (ignore_extra) continue;
      parse_fail(path, line_no, static_cast<int>(c) + 1,
                 "unknown column '" + name + "' (use --ignore-extra to skip)");
    }
    if (col_of.count(name))
      parse_fail(path, line_no, static_cast<int>(c) + 1,
                 "duplicate column '" + name + "'");
    col_of[name] = static_cast<int>(c);
  }
  for (const auto& name : fixed)
    if (!col_of.count(name))
      parse_fail(path, line_no, 1, "missing required column '" + name + "'");
  for (const auto& e : schema.entries())
    if (!col_of.count(e.name))
      parse_fail(path, line_no, 1, "missing covariate column '" + e.name + "'");

  std::vector<CallRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != header.size())
      parse_fail(path, line_no, 1,
                 "expected " + std::to_string(header.size()) + " fields, got " +
                     std::to_string(f.size()));
    auto field = [&](const std::string& name) -> const std::string& {
      return f[static_cast<std::size_t>(col_of.at(name))];
    };
    CallRecord r;
    r.quarter = static_cast<int>(
        parse_long(field("quarter"), path, line_no, col_of.at("quarter") + 1));
    r.case_id = field("case_id");
    r.day = static_cast<int>(
        parse_long(field("day"), path, line_no, col_of.at("day") + 1));
    r.attempt = static_cast<int>(
        parse_long(field("attempt"), path, line_no, col_of.at("attempt") + 1));
    const long outcome =
        parse_long(field("outcome"), path, line_no, col_of.at("outcome") + 1);
    if (outcome != 0 && outcome != 1)
      parse_fail(path, line_no, col_of.at("outcome") + 1, "outcome must be 0 or 1");
    r.outcome = static_cast<int>(outcome);
    for (const auto& e : schema.entries()) {
      const std::string& raw = field(e.name);
      if (e.kind == CovariateKind::Numeric)
        r.covariates[e.name] = parse_num(raw, path, line_no, col_of.at(e.name) + 1);
      else
        r.covariates[e.name] = raw;
    }
    records.push_back(std::move(r));
  }
  return records;
}

// --- coefficient-estimate JSON ---------------------------------------------

void write_fit_json(const std::string& path, const CoefEstimate& est,
                    const std::optional<FitStats>& stats, const FileMeta& meta) {
  json j = meta_to_json(meta);
  j["schema_hash"] = est.schema_hash;
  j["beta"] = vector_to_json(est.beta);
  j["cov"] = matrix_to_json(est.cov);
  j["n_rows"] = est.n_rows;
  j["converged"] = est.converged;
  j["loglik"] = est.loglik;
  if (stats) {
    j["stats"] = {{"nagelkerke_r2", stats->nagelkerke_r2},
                  {"auc", stats->auc},
                  {"hl_stat", stats->hl_stat},
                  {"hl_pvalue", stats->hl_pvalue},
                  {"hl_groups", stats->hl_groups}};
  }
  dump_json(path, j);
}

CoefEstimate read_fit_json(const std::string& path) {
  const json j = parse_json_file(path);
  try {
    CoefEstimate est;
    est.schema_hash = j.at("schema_hash").get<std::string>();
    est.beta = vector_from_json(j.at("beta"));
    est.cov = matrix_from_json(j.at("cov"));
    est.n_rows = j.at("n_rows").get<int>();
    est.converged = j.at("converged").get<bool>();
    est.loglik = j.at("loglik").get<double>();
    if (est.cov.rows() != est.beta.size() || est.cov.cols() != est.beta.size())
      fail(ErrorKind::DimensionMismatch, path + ": beta/cov dimensions differ");
    return est;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

// --- prior JSON -------------------------------------------------------------

void write_prior_json(const std::string& path, const PriorSpec& prior,
                      const FileMeta& meta) {
  json j = meta_to_json(meta);
  if (!prior.schema_hash.empty()) j["schema_hash"] = prior.schema_hash;
  j["method"] = to_string(prior.method);
  j["mean"] = vector_to_json(prior.mean);
  if (prior.diagonal)
    j["diag"] = vector_to_json(prior.cov.diagonal());
  else
    j["cov"] = matrix_to_json(prior.cov);
  j["provenance"] = prior.provenance;
  dump_json(path, j);
}

PriorSpec read_prior_json(const std::string& path) {
  const json j = parse_json_file(path);
  try {
    PriorSpec prior;
    prior.method = prior_method_from_string(j.at("method").get<std::string>());
    prior.mean = vector_from_json(j.at("mean"));
    if (j.contains("diag")) {
      prior.diagonal = true;
      prior.cov = Eigen::MatrixXd(vector_from_json(j.at("diag")).asDiagonal());
    } else {
      prior.cov = matrix_from_json(j.at("cov"));
    }
    if (j.contains("provenance"))
      prior.provenance = j.at("provenance").get<std::vector<std::string>>();
    if (j.contains("schema_hash"))
      prior.schema_hash = j.at("schema_hash").get<std::string>();
    validate_prior(prior);
    return prior;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

// --- daily evaluation CSV ----------------------------------------------------

void write_eval_csv(const std::string& path, const EvalFile& eval) {
  std::ofstream out = open_write(path);
  write_meta_comments(out, eval.meta,
                      {{"method", eval.method},
                       {"quarter", std::to_string(eval.quarter)},
                       {"start_day", std::to_string(eval.start_day)},
                       {"end_day", std::to_string(eval.end_day)}});
  out << "day,n,bias,se,rmse,skipped\n";
  // Interleave evaluated and skipped days in day order.
  std::size_t ri = 0;
  std::size_t si = 0;
  while (ri < eval.rows.size() || si < eval.skipped_days.size()) {
    const bool take_row =
        si >= eval.skipped_days.size() ||
        (ri < eval.rows.size() && eval.rows[ri].day < eval.skipped_days[si]);
    if (take_row) {
      const auto& r = eval.rows[ri++];
      out << r.day << ',' << r.n << ',' << format_double(r.bias) << ',';
      if (r.se) out << format_double(*r.se);
      out << ',';
      if (r.rmse) out << format_double(*r.rmse);
      out << ",0\n";
    } else {
      out << eval.skipped_days[si++] << ",0,,,,1\n";
    }
  }
}

EvalFile read_eval_csv(const std::string& path) {
  std::ifstream in = open_read(path);
  std::string line;
  int line_no = 0;
  const auto raw_meta = read_meta_comments(in, line, line_no);
  EvalFile eval;
  eval.meta = meta_from_map(raw_meta);
  if (auto it = raw_meta.find("method"); it != raw_meta.end())
    eval.method = it->second;
  if (auto it = raw_meta.find("quarter"); it != raw_meta.end())
    eval.quarter = static_cast<int>(std::stol(it->second));
  if (auto it = raw_meta.find("start_day"); it != raw_meta.end())
    eval.start_day = static_cast<int>(std::stol(it->second));
  if (auto it = raw_meta.find("end_day"); it != raw_meta.end())
    eval.end_day = static_cast<int>(std::stol(it->second));
  if (line != "day,n,bias,se,rmse,skipped")
    parse_fail(path, line_no, 1, "unexpected eval header '" + line + "'");
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6)
      parse_fail(path, line_no, 1, "expected 6 fields, got " +
                                       std::to_string(f.size()));
    const int day = static_cast<int>(parse_long(f[0], path, line_no, 1));
    const long skipped = parse_long(f[5], path, line_no, 6);
    if (skipped == 1) {
      eval.skipped_days.push_back(day);
      continue;
    }
    DailyEvalRow row;
    row.day = day;
    row.n = static_cast<int>(parse_long(f[1], path, line_no, 2));
    row.bias = parse_num(f[2], path, line_no, 3);
    if (!f[3].empty()) row.se = parse_num(f[3], path, line_no, 4);
    if (!f[4].empty()) row.rmse = parse_num(f[4], path, line_no, 5);
    eval.rows.push_back(row);
  }
  return eval;
}

// --- window-summary JSON ------------------------------------------------------

namespace {

json window_stats_to_json(const WindowStats& w) {
  json j;
  j["window"] = std::to_string(w.window.lo) + "-" + std::to_string(w.window.hi);
  j["n_days"] = w.n_days;
  if (w.n_days > 0) {
    j["mean_bias"] = w.mean_bias;
    j["median_bias"] = w.median_bias;
    j["iqr_bias"] = w.iqr_bias;
  }
  j["n_rmse"] = w.n_rmse;
  if (w.n_rmse > 0) {
    j["mean_rmse"] = w.mean_rmse;
    j["median_rmse"] = w.median_rmse;
    j["iqr_rmse"] = w.iqr_rmse;
  }
  return j;
}

}  // namespace

void write_window_json(const std::string& path,
                       const std::vector<std::string>& source_files,
                       const std::vector<std::vector<WindowStats>>& per_file,
                       const std::vector<std::string>& methods,
                       const std::vector<int>& quarters, const FileMeta& meta) {
  json j = meta_to_json(meta);
  json files = json::array();
  for (std::size_t i = 0; i < per_file.size(); ++i) {
    json jf;
    jf["file"] = source_files[i];
    jf["method"] = methods[i];
    jf["quarter"] = quarters[i];
    json ws = json::array();
    for (const auto& w : per_file[i]) ws.push_back(window_stats_to_json(w));
    jf["windows"] = std::move(ws);
    files.push_back(std::move(jf));
  }
  j["files"] = std::move(files);
  dump_json(path, j);
}

// --- long-format plot CSV -----------------------------------------------------

void write_plot_csv(const std::string& path, const std::vector<EvalFile>& evals,
                    const FileMeta& meta) {
  std::ofstream out = open_write(path);
  write_meta_comments(out, meta);
  out << "method,quarter,day,bias,se,rmse\n";
  for (const auto& e : evals) {
    check_csv_safe(e.method);
    for (const auto& r : e.rows) {
      out << e.method << ',' << e.quarter << ',' << r.day << ','
          << format_double(r.bias) << ',';
      if (r.se) out << format_double(*r.se);
      out << ',';
      if (r.rmse) out << format_double(*r.rmse);
      out << "\n";
    }
  }
}

// --- literature crosswalk CSV --------------------------------------------------

std::vector<LitStudyEntry> read_lit_csv(const std::string& path) {
  std::ifstream in = open_read(path);
  std::string line;
  int line_no = 0;
  read_meta_comments(in, line, line_no);
  if (line != "study,year,predictor,scale,estimate,std_error")
    parse_fail(path, line_no, 1, "unexpected crosswalk header '" + line + "'");
  std::vector<LitStudyEntry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6)
      parse_fail(path, line_no, 1, "expected 6 fields, got " +
                                       std::to_string(f.size()));
    LitStudyEntry e;
    e.study = f[0];
    e.year = static_cast<int>(parse_long(f[1], path, line_no, 2));
    e.predictor = f[2];
    if (f[3] == "logit")
      e.scale = LitScale::Logit;
    else if (f[3] == "probit")
      e.scale = LitScale::Probit;
    else
      parse_fail(path, line_no, 4, "scale must be 'logit' or 'probit'");
    e.estimate = parse_num(f[4], path, line_no, 5);
    e.std_error = parse_num(f[5], path, line_no, 6);
    entries.push_back(std::move(e));
  }
  return entries;
}

// --- simulator truth sidecars ----------------------------------------------------

void write_truth_json(const std::string& path, const SimResult& sim,
                      const FileMeta& meta) {
  json j = meta_to_json(meta);
  j["calibrated_intercept"] = sim.calibrated_intercept;
  j["realized_response_rate"] = sim.realized_response_rate;
  json quarters = json::array();
  for (std::size_t q = 0; q < sim.quarters.size(); ++q) {
    json jq;
    jq["quarter"] = sim.quarters[q].quarter_id;
    jq["true_beta"] = vector_to_json(sim.true_beta[q]);
    quarters.push_back(std::move(jq));
  }
  j["quarters"] = std::move(quarters);
  dump_json(path, j);
}

void write_truth_propensity_csv(const std::string& path, const SimResult& sim,
                                const FileMeta& meta) {
  std::ofstream out = open_write(path);
  write_meta_comments(out, meta);
  out << "quarter,case_id,day,attempt,true_p\n";
  for (const auto& t : sim.truth) {
    out << t.quarter << ',' << t.case_id << ',' << t.day << ',' << t.attempt
        << ',' << format_double(t.p) << "\n";
  }
}

// --- MCMC draw dump ----------------------------------------------------------------

void write_draws_csv(const std::string& path, const PosteriorDraws& draws,
                     const FileMeta& meta) {
  std::ofstream out = open_write(path);
  write_meta_comments(out, meta);
  for (int c = 0; c < draws.dim(); ++c) out << (c ? "," : "") << 'b' << c;
  out << "\n";
  for (int k = 0; k < draws.n_draws(); ++k) {
    for (int c = 0; c < draws.dim(); ++c)
      out << (c ? "," : "") << format_double(draws.draws(k, c));
    out << "\n";
  }
}

void write_mcmc_diag_json(const std::string& path, const PosteriorDraws& draws,
                          const FileMeta& meta) {
  json j = meta_to_json(meta);
  j["accept_rate"] = draws.accept_rate;
  j["step_scale"] = draws.final_step_scale;
  j["ess"] = vector_to_json(effective_sample_size(draws.draws));
  dump_json(path, j);
}

}  // namespace rsd
