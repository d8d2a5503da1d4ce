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

// pairerr: estimate pairwise-comparison error rates of LLM judges.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "pairerr/cli/commands.hpp"
#include "pairerr/harness/http_provider.hpp"

namespace {

using namespace pairerr;
using namespace pairerr::cli;

std::unique_ptr<harness::ChatProvider> any_provider(const harness::ProviderConfig& cfg) {
  if (cfg.is_mock()) return std::make_unique<harness::MockProvider>(cfg.endpoint, cfg.model_name);
  return std::make_unique<harness::HttpProvider>(cfg);
}

void print_files(const std::vector<std::string>& files) {
  for (const auto& f : files) std::cout << f << '\n';
}

// Populated by CLI11 and dispatched after a successful parse.
struct Invocation {
  GlobalOptions global;
  CollectOptions collect;
  EstimateOptions estimate;
  ScalabilityOptions scalability;
  BtOptions bt;
  ReportOptions report;
  SynthOptions synth;
  CorpusOptions corpus;
  double synth_eps = -1, synth_eps_plus = -1, synth_eps_minus = -1;
  double bt_eps = -1;
  int k_plus = 0, k_minus = 0;
  std::size_t n = 0;
};

void add_fit_flags(CLI::App* cmd, EstimateOptions& o) {
  cmd->add_flag("--paper-exact", o.paper_exact, "Grid 0.005, 10 replicates, 200 runs, stride 1");
  cmd->add_flag("--desk-scale", o.desk_scale, "Grid 0.01, 3 replicates, 50 runs, stride 5");
  cmd->add_option_function<double>("--grid-lo", [&o](double v) { o.grid_lo = v; }, "Lowest grid rate");
  cmd->add_option_function<double>("--grid-hi", [&o](double v) { o.grid_hi = v; }, "Highest grid rate (<= 0.5)");
  cmd->add_option_function<double>("--grid-step", [&o](double v) { o.grid_step = v; }, "Grid spacing");
  cmd->add_option_function<std::size_t>("--replicates", [&o](std::size_t v) { o.replicates = v; },
                                        "Synthetic matrices averaged per grid point");
  cmd->add_option_function<std::size_t>("--runs", [&o](std::size_t v) { o.runs = v; }, "Random subsets per subset size");
  cmd->add_option_function<std::size_t>("--stride", [&o](std::size_t v) { o.stride = v; }, "Spacing of subset sizes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate error rates of pairwise text comparisons (uniform and positional error models)."};
  app.require_subcommand(1);
  Invocation inv;
  auto& g = inv.global;
  app.add_option("--seed", g.seed, "Master seed; identical seeds give identical outputs")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--format", g.format, "Tabular output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  auto* collect = app.add_subcommand("collect", "Query a judge for every pair, order and trial of a run plan");
  collect->add_option("plan", inv.collect.plan_file, "Run plan (JSON)")->required()->check(CLI::ExistingFile);
  collect->add_option("--log", inv.collect.log_path, "Record log to append to (default <out-dir>/<run_id>.jsonl)");
  collect->add_option("--provider", inv.collect.provider_override, "Override the plan endpoint, e.g. mock:eps=0.1");

  auto* estimate = app.add_subcommand("estimate", "Fit error rates to a record log or Z matrix");
  auto& eo = inv.estimate;
  estimate->add_option("input", eo.input, "Record log (.jsonl) or Z matrix (.csv)")->required()->check(CLI::ExistingFile);
  estimate->add_option("--mode", eo.mode, "uniform or positional")->check(CLI::IsMember({"uniform", "positional"}))->capture_default_str();
  estimate->add_option("--k-plus", inv.k_plus, "Trials with the better-indexed text first (positional, default 3)");
  estimate->add_option("--k-minus", inv.k_minus, "Trials with it second (positional, default 3)");
  estimate->add_option("--occurrence", eo.occurrence, "Which both-order run forms Z in a repeated log")->capture_default_str();
  estimate->add_option("--n", inv.n, "Number of texts (default: inferred from the log)");
  estimate->add_option("--run-id", eo.run_id, "Run to use when the log holds several");
  estimate->add_option("--prefix", eo.prefix, "Output file prefix (default: input stem)");
  estimate->add_option("--surface-stride", eo.surface_stride, "Keep every k-th grid point in the JSON surface")->capture_default_str();
  add_fit_flags(estimate, eo);

  auto* scal = app.add_subcommand("scalability", "Probability that rank m keeps its true Copeland score, against N");
  auto& so = inv.scalability;
  scal->add_option("--kind", so.kind, "uniform or positional")->check(CLI::IsMember({"uniform", "positional"}))->capture_default_str();
  scal->add_option("--eps", so.eps, "Uniform error rates")->delimiter(',');
  scal->add_option("--eps-plus", so.eps_plus, "Positional rate, better text first")->capture_default_str();
  scal->add_option("--eps-minus", so.eps_minus, "Positional rate, better text second")->capture_default_str();
  scal->add_option("--k-plus", so.k_plus, "Trials per pair in + order")->capture_default_str();
  scal->add_option("--k-minus", so.k_minus, "Trials per pair in - order")->capture_default_str();
  scal->add_option("--m", so.m, "Ranks m")->delimiter(',');
  scal->add_option("--n-min", so.n_min, "Smallest N")->capture_default_str();
  scal->add_option("--n-max", so.n_max, "Largest N")->capture_default_str();
  scal->add_option("--prefix", so.prefix, "Output file prefix")->capture_default_str();

  auto* bt = app.add_subcommand("bt", "Biased Bradley-Terry: bias search by score spread, or ranking at a given bias");
  auto& bo = inv.bt;
  bt->add_option("input", bo.input, "Record log (.jsonl) or X win-count matrix (.csv)")->required()->check(CLI::ExistingFile);
  bt->add_option("--objective", bo.objective, "min or max spread")->check(CLI::IsMember({"min", "max"}))->capture_default_str();
  bt->add_option("--eps", inv.bt_eps, "Rank at this bias instead of searching");
  bt->add_option("--seeds", bo.seeds, "Random initial-score seeds")->capture_default_str();
  bt->add_option("--grid-step", bo.grid_step, "Bias grid spacing")->capture_default_str();
  bt->add_option("--bin-width", bo.bin_width, "Histogram bin width")->capture_default_str();
  bt->add_option("--max-iters", bo.max_iters, "Sweep limit per fit")->capture_default_str();
  bt->add_option("--n", inv.n, "Number of texts (default: inferred from the log)");
  bt->add_option("--run-id", bo.run_id, "Run to use when the log holds several");
  bt->add_option("--prefix", bo.prefix, "Output file prefix (default: input stem)");

  auto* report = app.add_subcommand("report", "Summary table of estimates and Spearman matrix of rankings");
  report->add_option("--estimate", inv.report.estimates, "Estimate JSON files")->check(CLI::ExistingFile);
  report->add_option("--ranking", inv.report.rankings, "Ranking tables")->check(CLI::ExistingFile);
  report->add_option("--prefix", inv.report.prefix, "Output file prefix")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Write the record log of a simulated judge");
  auto& sy = inv.synth;
  synth->add_option("--n", sy.n, "Number of texts")->capture_default_str();
  synth->add_option("--eps", inv.synth_eps, "Uniform error rate");
  synth->add_option("--eps-plus", inv.synth_eps_plus, "Error rate with the better text first");
  synth->add_option("--eps-minus", inv.synth_eps_minus, "Error rate with the better text second");
  synth->add_option("--sequence", sy.sequence, "Order pattern per pair, e.g. +-+-+-")->capture_default_str();
  synth->add_option("--run-id", sy.run_id, "run_id of the records")->capture_default_str();
  synth->add_option("--model-id", sy.model_id, "model_id of the records")->capture_default_str();
  synth->add_option("--output", sy.output, "Log path (default <out-dir>/<run-id>.jsonl)");

  auto* corpus = app.add_subcommand("corpus", "Generate pseudo-word or pseudo-paragraph texts");
  auto& co = inv.corpus;
  corpus->add_option("--kind", co.kind, "pseudo_word or pseudo_paragraph")
      ->check(CLI::IsMember({"pseudo_word", "pseudo_paragraph"}))
      ->capture_default_str();
  corpus->add_option("--n", co.n, "Number of texts")->capture_default_str();
  corpus->add_option("--words", co.words, "Words per text")->capture_default_str();
  corpus->add_option("--lexicon", co.lexicon, "Word list, one per line")->check(CLI::ExistingFile);
  corpus->add_option("--output", co.output, "Output path (default <out-dir>/<kind>.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (inv.n > 0) eo.n = bo.n = inv.n;
    if (inv.k_plus > 0) eo.k_plus = inv.k_plus;
    if (inv.k_minus > 0) eo.k_minus = inv.k_minus;
    if (*collect) {
      inv.collect.provider_factory = any_provider;
      harness::RunSummary summary;
      print_files(cmd_collect(g, inv.collect, &summary));
      std::cerr << "issued " << summary.requests_issued << " requests, wrote " << summary.records_written
                << " records, " << summary.failed << " failed, " << summary.already_done << " already present\n";
    } else if (*estimate) {
      ErrorEstimate est;
      print_files(cmd_estimate(g, eo, &est));
      if (est.kind == ErrorSpec::Kind::kUniform)
        std::fprintf(stderr, "eps = %.3f\n", est.best_eps_plus);
      else
        std::fprintf(stderr, "eps_plus = %.3f, eps_minus = %.3f\n", est.best_eps_plus, est.best_eps_minus);
    } else if (*scal) {
      print_files(cmd_scalability(g, so));
    } else if (*bt) {
      if (inv.bt_eps >= 0) bo.eps = inv.bt_eps;
      print_files(cmd_bt(g, bo));
    } else if (*report) {
      print_files(cmd_report(g, inv.report));
    } else if (*synth) {
      if (inv.synth_eps >= 0) sy.eps = inv.synth_eps;
      if (inv.synth_eps_plus >= 0) sy.eps_plus = inv.synth_eps_plus;
      if (inv.synth_eps_minus >= 0) sy.eps_minus = inv.synth_eps_minus;
      print_files(cmd_synth(g, sy));
    } else if (*corpus) {
      print_files(cmd_corpus(g, co));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
