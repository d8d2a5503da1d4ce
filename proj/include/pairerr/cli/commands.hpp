// Copyright 2026 The pairerr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Subcommand implementations behind tools/pairerr.cpp. Each command writes its
// artifacts under GlobalOptions::out_dir and returns the paths it wrote.
// Wall-clock timestamps go only into the <prefix>.meta.json sidecar, so every
// other artifact is byte-identical across runs with the same --seed.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairerr/btmodel.hpp"
#include "pairerr/builders.hpp"
#include "pairerr/copeland.hpp"
#include "pairerr/csv.hpp"
#include "pairerr/error.hpp"
#include "pairerr/estimator.hpp"
#include "pairerr/harness/corpus.hpp"
#include "pairerr/harness/plan.hpp"
#include "pairerr/harness/provider.hpp"
#include "pairerr/harness/runner.hpp"
#include "pairerr/probmodel.hpp"
#include "pairerr/records.hpp"
#include "pairerr/synth.hpp"

namespace pairerr::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitInput = 3, kExitProvider = 4, kExitNumerical = 5 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAuthError:
    case ErrorCode::kRateLimited:
    case ErrorCode::kParseFailure:
    case ErrorCode::kNetworkError: return kExitProvider;
    case ErrorCode::kDegenerateStrengths: return kExitNumerical;
    default: return kExitInput;
  }
}

struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out_dir = ".";
  std::string format = "csv";  // tabular artifacts: csv or json
};

namespace detail {

inline fs::path output_path(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

inline void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write '" + path.string() + "'");
  out << content;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

// CSV text rendered by the module writers, re-emitted as JSON when asked:
// {"schema_version", "columns", "rows"} with numeric cells as numbers and
// empty cells as null.
inline nlohmann::json csv_to_json(const std::string& csv_text) {
  std::istringstream in(csv_text);
  const auto rows = csv::read(in);
  nlohmann::json j = {{"schema_version", kSchemaVersion}, {"columns", nlohmann::json::array()}, {"rows", nlohmann::json::array()}};
  if (rows.empty()) return j;
  j["columns"] = rows.front();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& cell : rows[r]) {
      if (cell.empty()) {
        row.push_back(nullptr);
        continue;
      }
      try {
        row.push_back(csv::parse_double(cell));
      } catch (const Error&) {
        row.push_back(cell);
      }
    }
    j["rows"].push_back(std::move(row));
  }
  return j;
}

/// Writes <stem>.csv or <stem>.json depending on --format.
template <typename Writer>
std::string write_table(const GlobalOptions& g, const std::string& stem, Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  if (g.format == "json") {
    const auto path = output_path(g, stem + ".json");
    write_json(path, csv_to_json(buf.str()));
    return path.string();
  }
  const auto path = output_path(g, stem + ".csv");
  write_text(path, buf.str());
  return path.string();
}

inline std::string write_meta(const GlobalOptions& g, const std::string& prefix, const std::string& command,
                              const nlohmann::json& params, const std::string& started) {
  const auto path = output_path(g, prefix + ".meta.json");
  write_json(path, {{"schema_version", kSchemaVersion},
                    {"command", command},
                    {"params", params},
                    {"seed", g.seed},
                    {"threads", g.threads},
                    {"started_at", started},
                    {"finished_at", harness::utc_now()}});
  return path.string();
}

inline bool is_record_log(const std::string& path) {
  const auto ext = fs::path(path).extension().string();
  return ext == ".jsonl" || ext == ".ndjson" || ext == ".log";
}

inline std::string default_prefix(const std::string& input, const std::string& given) {
  if (!given.empty()) return given;
  return fs::path(input).stem().string();
}

struct RunRecords {
  std::vector<PreferenceRecord> records;
  std::string run_id;
  std::string model_id;
  std::size_t n = 0;
};

inline RunRecords load_run(const std::string& path, const std::string& run_id, std::optional<std::size_t> n) {
  auto all = read_records(path);
  if (all.empty()) throw Error(ErrorCode::kInvalidInput, "record log '" + path + "' is empty");
  RunRecords out;
  if (run_id.empty()) {
    std::set<std::string> ids;
    for (const auto& r : all) ids.insert(r.run_id);
    if (ids.size() > 1) {
      std::string list;
      for (const auto& id : ids) list += (list.empty() ? "" : ", ") + id;
      throw Error(ErrorCode::kInvalidInput, "log holds several runs (" + list + "); pick one with --run-id");
    }
    out.run_id = *ids.begin();
    out.records = std::move(all);
  } else {
    out.run_id = run_id;
    out.records = filter_run(all, run_id);
    if (out.records.empty()) throw Error(ErrorCode::kInvalidInput, "no records for run '" + run_id + "'");
  }
  out.model_id = out.records.front().model_id;
  out.n = n.value_or(infer_size(out.records));
  return out;
}

inline std::string write_ranking(const GlobalOptions& g, const std::string& stem, const std::vector<std::size_t>& ranking,
                                 const std::vector<std::string>& ids, const std::vector<double>& scores,
                                 const std::vector<double>& stability) {
  return write_table(g, stem, [&](std::ostream& out) {
    csv::write_schema_comment(out);
    csv::write_row(out, {"position", "item", "id", "score", "stability"});
    for (std::size_t p = 0; p < ranking.size(); ++p) {
      const auto item = ranking[p];
      csv::write_row(out, {std::to_string(p + 1), std::to_string(item), ids.empty() ? std::to_string(item) : ids[item],
                           std::isfinite(scores[item]) ? csv::fixed(scores[item], 9) : "",
                           stability.empty() ? "" : csv::fixed(stability[p], 4)});
    }
  });
}

}  // namespace detail

// ---------------------------------------------------------------- collect

using ProviderFactory = std::function<std::unique_ptr<harness::ChatProvider>(const harness::ProviderConfig&)>;

/// Built-in simulator only; the CLI adds the HTTP client on top.
inline std::unique_ptr<harness::ChatProvider> offline_provider(const harness::ProviderConfig& cfg) {
  if (!cfg.is_mock())
    throw Error(ErrorCode::kInvalidInput, "endpoint '" + cfg.endpoint + "' needs the HTTP provider, not built in here");
  return std::make_unique<harness::MockProvider>(cfg.endpoint, cfg.model_name);
}

struct CollectOptions {
  std::string plan_file;
  std::string log_path;           // default <out_dir>/<run_id>.jsonl
  std::string provider_override;  // replaces the plan's endpoint, e.g. "mock:eps=0.1"
  ProviderFactory provider_factory = offline_provider;
};

inline std::vector<std::string> cmd_collect(const GlobalOptions& g, const CollectOptions& o,
                                            harness::RunSummary* summary_out = nullptr) {
  const auto started = harness::utc_now();
  auto plan = harness::read_plan(o.plan_file);
  if (!o.provider_override.empty()) plan.provider.endpoint = o.provider_override;
  const std::string log_path =
      o.log_path.empty() ? detail::output_path(g, plan.run_id + ".jsonl").string() : o.log_path;
  auto provider = o.provider_factory(plan.provider);
  harness::RunOptions run;
  run.log_path = log_path;
  const auto summary = harness::run_comparisons(plan, *provider, run);
  if (summary_out) *summary_out = summary;
  std::vector<std::string> files{log_path};
  const auto summary_path = detail::output_path(g, plan.run_id + ".collect.json");
  auto j = to_json(summary);
  j["run_id"] = plan.run_id;
  j["log"] = log_path;
  detail::write_json(summary_path, j);
  files.push_back(summary_path.string());
  files.push_back(detail::write_meta(g, plan.run_id + ".collect", "collect",
                                     {{"plan", o.plan_file}, {"provider", plan.provider}}, started));
  return files;
}

// ---------------------------------------------------------------- estimate

struct EstimateOptions {
  std::string input;  // record log (.jsonl) or Z matrix (.csv)
  std::string mode = "uniform";
  std::optional<int> k_plus;
  std::optional<int> k_minus;
  bool paper_exact = false;
  bool desk_scale = false;
  std::optional<double> grid_lo, grid_hi, grid_step;
  std::optional<std::size_t> replicates, runs, stride;
  std::size_t occurrence = 0;  // which both-order run of a repeated log forms Z
  std::optional<std::size_t> n;
  std::string run_id;
  std::string prefix;
  std::size_t surface_stride = 1;
};

/// Uniform fits default to the full-resolution settings, positional fits to
/// the coarse preset; --paper-exact / --desk-scale force either.
inline FitConfig resolve_fit_config(const GlobalOptions& g, const EstimateOptions& o) {
  FitConfig cfg = o.mode == "positional" ? FitConfig::desk_scale() : FitConfig::paper_exact();
  if (o.paper_exact && o.desk_scale) throw Error(ErrorCode::kInvalidInput, "--paper-exact and --desk-scale conflict");
  if (o.paper_exact) cfg = FitConfig::paper_exact();
  if (o.desk_scale) cfg = FitConfig::desk_scale();
  if (o.grid_lo) cfg.grid_lo = *o.grid_lo;
  if (o.grid_hi) cfg.grid_hi = *o.grid_hi;
  if (o.grid_step) cfg.grid_step = *o.grid_step;
  if (o.replicates) cfg.synth_replicates = *o.replicates;
  if (o.runs) cfg.curve_runs = *o.runs;
  if (o.stride) cfg.n_stride = *o.stride;
  cfg.rng_seed = g.seed;
  cfg.threads = g.threads;
  cfg.validate();
  return cfg;
}

inline std::vector<std::string> cmd_estimate(const GlobalOptions& g, const EstimateOptions& o,
                                             ErrorEstimate* estimate_out = nullptr) {
  const auto started = harness::utc_now();
  if (o.mode != "uniform" && o.mode != "positional")
    throw Error(ErrorCode::kInvalidInput, "mode must be 'uniform' or 'positional'");
  const auto cfg = resolve_fit_config(g, o);
  const auto prefix = detail::default_prefix(o.input, o.prefix);

  nlohmann::json meta = {{"input", fs::path(o.input).filename().string()}, {"mode", o.mode}};
  std::vector<std::string> ids;
  std::optional<double> s_com;
  ErrorEstimate est;
  std::vector<std::size_t> copeland_rank;
  std::vector<double> copeland_values;

  if (o.mode == "uniform") {
    ConsensusMatrixZ z(2);
    if (detail::is_record_log(o.input)) {
      const auto run = detail::load_run(o.input, o.run_id, o.n);
      const auto y = build_y(run.records, run.n, TrialSelector::occurrence(o.occurrence));
      s_com = commutativity_score(y);
      z = build_z(y);
      meta["run_id"] = run.run_id;
      meta["model_id"] = run.model_id;
    } else {
      std::ifstream in(o.input, std::ios::binary);
      if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open '" + o.input + "'");
      z = read_z_csv(in, &ids);
      // Z is zero exactly where both orders agreed on the same position.
      std::size_t zeros = 0;
      for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j) zeros += z.entry(i, j) == 0;
      s_com = static_cast<double>(zeros) / static_cast<double>(z.size() * (z.size() - 1) / 2);
    }
    est = estimate_uniform(z, cfg);
    const auto scores = copeland_scores(z);
    copeland_values = scores.values();
    copeland_rank = ranking_by_score(copeland_values);
  } else {
    if (!detail::is_record_log(o.input))
      throw Error(ErrorCode::kInvalidInput, "positional fits need a record log (sub-count matrices come from trials)");
    const auto run = detail::load_run(o.input, o.run_id, o.n);
    const RepeatSpec rep{o.k_plus.value_or(3), o.k_minus.value_or(3)};
    rep.validate();
    est = estimate_positional(run.records, run.n, rep, cfg);
    s_com = commutativity_score(build_y(run.records, run.n, TrialSelector::occurrence(o.occurrence)));
    const auto w = build_w(subselect_trials(run.records, rep.k_plus, rep.k_minus), run.n, rep.k_plus, rep.k_minus);
    copeland_values = copeland_scores(w).values();
    copeland_rank = ranking_by_score(copeland_values);
    meta["run_id"] = run.run_id;
    meta["model_id"] = run.model_id;
  }

  auto report = to_json(est, o.surface_stride);
  report["label"] = prefix;
  report["s_com"] = s_com ? nlohmann::json(*s_com) : nlohmann::json(nullptr);
  for (const auto& [k, v] : meta.items()) report[k] = v;

  std::vector<std::string> files;
  const auto report_path = detail::output_path(g, prefix + ".estimate.json");
  detail::write_json(report_path, report);
  files.push_back(report_path.string());
  files.push_back(detail::write_table(g, prefix + ".curves", [&](std::ostream& out) {
    write_curves_csv(out, {est.empirical, est.best_synthetic});
  }));
  files.push_back(detail::write_table(g, prefix + ".surface", [&](std::ostream& out) { write_surface_csv(out, est); }));
  files.push_back(detail::write_ranking(g, prefix + ".copeland_ranking", copeland_rank, ids, copeland_values, {}));
  auto params = meta;
  params["config"] = to_json(cfg);
  files.push_back(detail::write_meta(g, prefix + ".estimate", "estimate", params, started));
  if (estimate_out) *estimate_out = std::move(est);
  return files;
}

// ---------------------------------------------------------------- scalability

struct ScalabilityOptions {
  std::string kind = "uniform";
  std::vector<double> eps{0.1, 0.2, 0.3, 0.4, 0.5};  // uniform rates
  double eps_plus = 0.1, eps_minus = 0.1;             // positional rates
  int k_plus = 1, k_minus = 1;
  std::vector<std::size_t> m{1, 2, 3, 4, 5, 6, 7, 8};
  std::size_t n_min = 2;
  std::size_t n_max = 60;
  std::string prefix = "scalability";
};

inline std::vector<std::string> cmd_scalability(const GlobalOptions& g, const ScalabilityOptions& o) {
  const auto started = harness::utc_now();
  if (o.n_min < 1 || o.n_max < o.n_min) throw Error(ErrorCode::kInvalidInput, "need 1 <= n_min <= n_max");
  std::vector<std::size_t> n_range;
  for (std::size_t n = o.n_min; n <= o.n_max; ++n) n_range.push_back(n);
  const RepeatSpec rep{o.k_plus, o.k_minus};
  rep.validate();
  std::vector<ErrorSpec> specs;
  if (o.kind == "uniform") {
    for (double e : o.eps) specs.push_back(ErrorSpec::uniform(e));
  } else if (o.kind == "positional") {
    specs.push_back(ErrorSpec::positional(o.eps_plus, o.eps_minus));
  } else {
    throw Error(ErrorCode::kInvalidInput, "kind must be 'uniform' or 'positional'");
  }
  std::vector<ScalabilityTable> tables;
  for (const auto& s : specs) {
    s.validate();
    tables.push_back(scalability_table(s, rep, o.m, n_range));
  }
  std::vector<std::string> files;
  files.push_back(detail::write_table(g, o.prefix, [&](std::ostream& out) {
    write_scalability_header(out);
    for (const auto& t : tables) write_scalability_rows(out, t);
  }));
  nlohmann::json summary = {{"schema_version", kSchemaVersion}, {"tables", nlohmann::json::array()}};
  for (const auto& t : tables) {
    nlohmann::json dec;
    for (const auto& [m, ok] : t.strictly_decreasing) dec[std::to_string(m)] = ok;
    summary["tables"].push_back({{"spec", to_json(t.spec)},
                                 {"rep", {{"k_plus", t.rep.k_plus}, {"k_minus", t.rep.k_minus}}},
                                 {"strictly_decreasing", dec}});
  }
  const auto summary_path = detail::output_path(g, o.prefix + ".summary.json");
  detail::write_json(summary_path, summary);
  files.push_back(summary_path.string());
  files.push_back(detail::write_meta(g, o.prefix, "scalability", {{"kind", o.kind}}, started));
  return files;
}

// ---------------------------------------------------------------- bt

struct BtOptions {
  std::string input;  // record log (.jsonl) or X matrix (.csv)
  std::string objective = "min";
  std::optional<double> eps;  // rank at this bias instead of searching
  std::size_t seeds = 200;
  double grid_lo = 0.0, grid_hi = 0.5, grid_step = 0.005, bin_width = 0.02;
  std::size_t max_iters = 500;
  std::optional<std::size_t> n;
  std::string run_id;
  std::string prefix;
};

inline std::vector<std::string> cmd_bt(const GlobalOptions& g, const BtOptions& o) {
  const auto started = harness::utc_now();
  if (o.seeds < 1) throw Error(ErrorCode::kInvalidInput, "--seeds must be >= 1");
  const auto prefix = detail::default_prefix(o.input, o.prefix);
  std::vector<std::string> ids;
  StrengthMatrixX x(2);
  if (detail::is_record_log(o.input)) {
    const auto run = detail::load_run(o.input, o.run_id, o.n);
    x = build_x(run.records, run.n);
  } else {
    std::ifstream in(o.input, std::ios::binary);
    if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open '" + o.input + "'");
    x = read_x_csv(in, &ids);
  }

  std::vector<std::string> files;
  nlohmann::json params = {{"input", fs::path(o.input).filename().string()}, {"seeds", o.seeds}, {"max_iters", o.max_iters}};
  if (o.eps) {
    params["eps"] = *o.eps;
    const auto r = bt_rank_with_eps(x, *o.eps, o.seeds, g.seed, o.max_iters);
    auto j = to_json(r.representative);
    j["ranking"] = r.ranking;
    j["stability"] = r.stability;
    j["seeds"] = r.seeds;
    const auto path = detail::output_path(g, prefix + ".bt_fit.json");
    detail::write_json(path, j);
    files.push_back(path.string());
    files.push_back(detail::write_ranking(g, prefix + ".ranking", r.ranking, ids, r.representative.scores, r.stability));
  } else {
    SpreadObjective objective;
    if (o.objective == "min")
      objective = SpreadObjective::kMinSpread;
    else if (o.objective == "max")
      objective = SpreadObjective::kMaxSpread;
    else
      throw Error(ErrorCode::kInvalidInput, "objective must be 'min' or 'max'");
    params["objective"] = o.objective;
    BTSearchConfig cfg;
    cfg.grid_lo = o.grid_lo;
    cfg.grid_hi = o.grid_hi;
    cfg.grid_step = o.grid_step;
    cfg.bin_width = o.bin_width;
    cfg.max_iters = o.max_iters;
    cfg.rng_seed = g.seed;
    cfg.threads = g.threads;
    const auto r = bt_eps_search(x, objective, o.seeds, cfg);
    std::size_t failed_seeds = 0, edge = 0;
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& b : r.histogram) hist.push_back({{"bin_lo", b.lo}, {"bin_hi", b.hi}, {"count", b.count}});
    for (const auto& s : r.seeds) {
      if (std::isnan(s.eps_opt)) {
        ++failed_seeds;
        continue;
      }
      const auto k = bin_index(s.eps_opt, cfg, r.histogram.size());
      edge += k == 0 || k + 1 == r.histogram.size();
    }
    nlohmann::json j = {{"schema_version", kSchemaVersion},
                        {"objective", o.objective},
                        {"seeds", o.seeds},
                        {"histogram", hist},
                        {"modal_bin", {{"bin_lo", r.histogram[r.modal_bin].lo}, {"bin_hi", r.histogram[r.modal_bin].hi}}},
                        {"lowest_bin_fraction", r.lowest_bin_fraction},
                        {"every_seed_in_lowest_bin", r.every_seed_in_lowest_bin},
                        {"modal_bin_is_lowest", r.modal_bin_is_lowest},
                        {"edge_bin_seeds", edge},
                        {"seeds_without_estimate", failed_seeds}};
    const auto path = detail::output_path(g, prefix + ".bt_search.json");
    detail::write_json(path, j);
    files.push_back(path.string());
    files.push_back(detail::write_table(g, prefix + ".histogram", [&](std::ostream& out) { write_histogram_csv(out, r); }));
    files.push_back(detail::write_table(g, prefix + ".seeds", [&](std::ostream& out) { write_seed_table_csv(out, r); }));
    files.push_back(detail::write_table(g, prefix + ".spread", [&](std::ostream& out) { write_spread_csv(out, r); }));
  }
  files.push_back(detail::write_meta(g, prefix + ".bt", "bt", params, started));
  return files;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::vector<std::string> estimates;  // *.estimate.json
  std::vector<std::string> rankings;   // ranking tables (position, item, ...)
  std::string prefix = "report";
};

/// Ranking table (CSV or JSON as written by this tool) -> items best first.
inline std::vector<std::size_t> read_ranking(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  if (fs::path(path).extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open ranking '" + path + "'");
    const auto j = nlohmann::json::parse(in);
    std::vector<std::string> header;
    for (const auto& c : j.at("columns")) header.push_back(c.get<std::string>());
    rows.push_back(header);
    for (const auto& r : j.at("rows")) {
      std::vector<std::string> row;
      for (const auto& cell : r) row.push_back(cell.is_null() ? "" : cell.is_string() ? cell.get<std::string>() : cell.dump());
      rows.push_back(row);
    }
  } else {
    rows = csv::read_file(path);
  }
  if (rows.empty()) throw Error(ErrorCode::kInvalidInput, "ranking '" + path + "' is empty");
  std::size_t pos_col = rows[0].size(), item_col = rows[0].size();
  for (std::size_t c = 0; c < rows[0].size(); ++c) {
    if (rows[0][c] == "position") pos_col = c;
    if (rows[0][c] == "item") item_col = c;
  }
  if (pos_col == rows[0].size() || item_col == rows[0].size())
    throw Error(ErrorCode::kInvalidInput, "ranking '" + path + "' lacks position/item columns");
  std::vector<std::pair<double, std::size_t>> entries;
  for (std::size_t r = 1; r < rows.size(); ++r)
    entries.push_back({csv::parse_double(rows[r][pos_col]), static_cast<std::size_t>(csv::parse_double(rows[r][item_col]))});
  std::sort(entries.begin(), entries.end());
  std::vector<std::size_t> ranking;
  for (const auto& e : entries) ranking.push_back(e.second);
  return ranking;
}

inline std::vector<std::string> cmd_report(const GlobalOptions& g, const ReportOptions& o) {
  const auto started = harness::utc_now();
  if (o.estimates.empty() && o.rankings.size() < 2)
    throw Error(ErrorCode::kInvalidInput, "report needs estimate files or at least two rankings");
  std::vector<std::string> files;
  auto num = [](const nlohmann::json& j, const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  auto cell = [](std::optional<double> v, int digits) { return v ? csv::fixed(*v, digits) : std::string(); };

  if (!o.estimates.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    std::ostringstream table;
    csv::write_schema_comment(table);
    csv::write_row(table, {"label", "run_id", "model_id", "kind", "s_com", "eps", "eps_plus", "eps_minus", "s_com_over_eps"});
    for (const auto& path : o.estimates) {
      std::ifstream in(path);
      if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open estimate '" + path + "'");
      nlohmann::json e;
      try {
        e = nlohmann::json::parse(in);
      } catch (const std::exception& ex) {
        throw Error(ErrorCode::kInvalidInput, "estimate '" + path + "': " + ex.what());
      }
      const auto kind = e.value("kind", std::string("uniform"));
      const auto s_com = num(e, "s_com");
      const auto eps = kind == "uniform" ? num(e, "best_eps") : std::nullopt;
      const auto eps_plus = kind == "positional" ? num(e, "best_eps_plus") : std::nullopt;
      const auto eps_minus = kind == "positional" ? num(e, "best_eps_minus") : std::nullopt;
      // a ratio against a zero rate is reported empty rather than infinite
      std::optional<double> ratio;
      if (s_com && eps && *eps > 0) ratio = *s_com / *eps;
      const auto label = e.value("label", fs::path(path).stem().string());
      const auto run_id = e.value("run_id", std::string());
      const auto model_id = e.value("model_id", std::string());
      csv::write_row(table, {label, run_id, model_id, kind, cell(s_com, 6), cell(eps, 3), cell(eps_plus, 3),
                             cell(eps_minus, 3), cell(ratio, 6)});
      auto opt = [](std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
      rows.push_back({{"label", label},
                      {"run_id", run_id},
                      {"model_id", model_id},
                      {"kind", kind},
                      {"s_com", opt(s_com)},
                      {"eps", opt(eps)},
                      {"eps_plus", opt(eps_plus)},
                      {"eps_minus", opt(eps_minus)},
                      {"s_com_over_eps", opt(ratio)}});
    }
    const auto csv_path = detail::output_path(g, o.prefix + ".csv");
    detail::write_text(csv_path, table.str());
    files.push_back(csv_path.string());
    const auto json_path = detail::output_path(g, o.prefix + ".json");
    detail::write_json(json_path, {{"schema_version", kSchemaVersion}, {"rows", rows}});
    files.push_back(json_path.string());
  }

  if (o.rankings.size() >= 2) {
    std::vector<std::vector<std::size_t>> rankings;
    std::vector<std::string> labels;
    for (const auto& path : o.rankings) {
      rankings.push_back(read_ranking(path));
      labels.push_back(fs::path(path).stem().string());
    }
    files.push_back(detail::write_table(g, o.prefix + ".spearman", [&](std::ostream& out) {
      csv::write_schema_comment(out);
      std::vector<std::string> header{"ranking"};
      header.insert(header.end(), labels.begin(), labels.end());
      csv::write_row(out, header);
      for (std::size_t a = 0; a < rankings.size(); ++a) {
        std::vector<std::string> row{labels[a]};
        for (std::size_t b = 0; b < rankings.size(); ++b) row.push_back(csv::fixed(spearman_rho(rankings[a], rankings[b]), 6));
        csv::write_row(out, row);
      }
    }));
  }
  files.push_back(detail::write_meta(g, o.prefix, "report", {{"estimates", o.estimates}, {"rankings", o.rankings}}, started));
  return files;
}

// ---------------------------------------------------------------- helpers

struct SynthOptions {
  std::size_t n = 100;
  std::optional<double> eps;
  std::optional<double> eps_plus, eps_minus;
  std::string sequence = "+-";
  std::string run_id = "synthetic";
  std::string model_id = "synthetic";
  std::string output;  // default <out_dir>/<run_id>.jsonl
};

/// Judgment log of a simulated judge with known error rates.
inline std::vector<std::string> cmd_synth(const GlobalOptions& g, const SynthOptions& o) {
  const auto started = harness::utc_now();
  ErrorSpec spec;
  if (o.eps && (o.eps_plus || o.eps_minus)) throw Error(ErrorCode::kInvalidInput, "give --eps or --eps-plus/--eps-minus");
  if (o.eps)
    spec = ErrorSpec::uniform(*o.eps);
  else if (o.eps_plus && o.eps_minus)
    spec = ErrorSpec::positional(*o.eps_plus, *o.eps_minus);
  else
    throw Error(ErrorCode::kInvalidInput, "give --eps or both --eps-plus and --eps-minus");
  spec.validate();
  const auto records = synth_records(o.n, spec, o.sequence, g.seed, o.run_id, o.model_id);
  const std::string path = o.output.empty() ? detail::output_path(g, o.run_id + ".jsonl").string() : o.output;
  write_records(path, records);
  return {path, detail::write_meta(g, o.run_id + ".synth", "synth",
                                   {{"n", o.n}, {"spec", to_json(spec)}, {"sequence", o.sequence}}, started)};
}

struct CorpusOptions {
  std::string kind = "pseudo_word";
  std::size_t n = 100;
  std::size_t words = 100;
  std::string lexicon;
  std::string output;  // default <out_dir>/<kind>.json
};

/// Writes a JSON array of {"id", "text"} usable as a plan's texts_file.
inline std::vector<std::string> cmd_corpus(const GlobalOptions& g, const CorpusOptions& o) {
  const auto started = harness::utc_now();
  const auto kind = harness::parse_corpus_kind(o.kind);
  std::vector<std::string> lexicon;
  if (!o.lexicon.empty()) lexicon = harness::read_lexicon(o.lexicon);
  const auto texts = harness::generate_pseudo_corpus(kind, o.n, o.words, lexicon.empty() ? nullptr : &lexicon, g.seed);
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < texts.size(); ++i) arr.push_back({{"id", "t" + std::to_string(i)}, {"text", texts[i]}});
  const std::string path = o.output.empty() ? detail::output_path(g, o.kind + ".json").string() : o.output;
  detail::write_json(path, arr);
  return {path, detail::write_meta(g, o.kind + ".corpus", "corpus", {{"kind", o.kind}, {"n", o.n}, {"words", o.words}}, started)};
}

}  // namespace pairerr::cli
