#include "t2ibench/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "t2ibench/dataset.hpp"
#include "t2ibench/error.hpp"
#include "t2ibench/format.hpp"
#include "t2ibench/promptgen.hpp"
#include "t2ibench/report.hpp"
#include "t2ibench/scoring.hpp"
#include "t2ibench/service.hpp"
#include "t2ibench/synth.hpp"

namespace t2ibench {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string dataset;
  std::string results;
  std::string out;
  std::string profile;
  std::string weights;
  std::size_t k = kDefaultRecallK;
  std::string cohort_scope;
  std::string direction = "gen-to-gt";
  unsigned workers = 1;
  std::uint64_t seed = 7;
  int port = 8080;
  std::string host = "127.0.0.1";
};

ProfileRegistry registry_from_env() {
  const char* dir = std::getenv("T2IBENCH_PROFILE_DIR");
  return ProfileRegistry::with_user_dir(dir ? fs::path(dir) : fs::path());
}

WeightProfile resolve_profile(const RunConfig& cfg, const ProfileRegistry& registry) {
  if (!cfg.weights.empty() && !cfg.profile.empty()) {
    throw UsageError("--weights and --profile are mutually exclusive");
  }
  WeightProfile p = cfg.weights.empty() ? registry.find(cfg.profile.empty() ? "paper-default" : cfg.profile)
                                        : parse_weights(cfg.weights);
  if (!cfg.cohort_scope.empty()) p.cohort_scope = parse_cohort_scope(cfg.cohort_scope);
  return p;
}

CohortMetricOptions metric_options(const RunConfig& cfg) {
  CohortMetricOptions opts;
  if (cfg.k == 0) throw UsageError("--k must be >= 1");
  opts.k = cfg.k;
  if (cfg.direction == "gen-to-gt") {
    opts.direction = RetrievalDirection::kGenToGt;
  } else if (cfg.direction == "gt-to-gen") {
    opts.direction = RetrievalDirection::kGtToGen;
  } else {
    throw UsageError("--retrieval-direction must be gen-to-gt or gt-to-gen");
  }
  return opts;
}

void print_report(const ValidationReport& report, std::ostream& os) {
  for (const auto& issue : report.issues) {
    os << to_string(issue.severity) << ": " << issue.location << ": " << issue.message << '\n';
  }
}

EvaluationDataset load_valid_dataset(const std::string& root, std::ostream& err) {
  auto ds = load_dataset(root);
  const auto report = validate_dataset(ds);
  print_report(report, err);
  if (!report.ok) {
    throw Error(ErrorKind::kDomain, "dataset " + root + " failed validation with " +
                                        std::to_string(report.count(Severity::kError)) + " error(s)");
  }
  return ds;
}

// Raw rows from --results or, failing that, by evaluating --dataset.
std::vector<RawMetricRow> input_rows(const RunConfig& cfg, std::ostream& err) {
  if (!cfg.results.empty() && !cfg.dataset.empty()) {
    throw UsageError("--results and --dataset are mutually exclusive");
  }
  if (!cfg.results.empty()) return read_results_csv(cfg.results);
  if (!cfg.dataset.empty()) {
    return evaluate_dataset(load_valid_dataset(cfg.dataset, err), metric_options(cfg), cfg.workers);
  }
  throw UsageError("one of --results or --dataset is required");
}

void add_input_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--results", cfg.results, "evaluation_results.csv to read");
  cmd->add_option("--dataset", cfg.dataset, "dataset directory to evaluate");
  cmd->add_option("--k", cfg.k, "Recall@K cutoff when evaluating a dataset");
  cmd->add_option("--retrieval-direction", cfg.direction, "gen-to-gt (default) or gt-to-gen");
  cmd->add_option("--workers", cfg.workers, "parallel cohort workers");
}

void add_profile_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--profile", cfg.profile, "weight profile name");
  cmd->add_option("--weights", cfg.weights, "clip,lpips,fid,ret,clip_prompt");
  cmd->add_option("--cohort-scope", cfg.cohort_scope, "all or per-prompt-type");
}

fs::path results_path(const std::string& out) {
  fs::path p(out.empty() ? "." : out);
  if (fs::is_directory(p) || p.extension() != ".csv") {
    fs::create_directories(p);
    return p / std::string(kResultsFileName);
  }
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

int cmd_promptgen(const std::string& annotations, const std::string& captions, const std::string& out,
                  std::ostream& os) {
  const auto n = generate_prompt_csv(annotations, captions, out);
  os << "wrote " << n << " prompts to " << out << '\n';
  return 0;
}

int cmd_validate(const RunConfig& cfg, std::ostream& os) {
  if (cfg.dataset.empty()) throw UsageError("--dataset is required");
  const auto ds = load_dataset(cfg.dataset);
  const auto report = validate_dataset(ds);
  print_report(report, os);
  os << (report.ok ? "ok" : "invalid") << ": " << report.count(Severity::kError) << " error(s), "
     << report.count(Severity::kWarning) << " warning(s)\n";
  return report.ok ? 0 : 1;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  if (cfg.dataset.empty()) throw UsageError("--dataset is required");
  const auto registry = registry_from_env();
  const WeightProfile profile = resolve_profile(cfg, registry);
  const auto ds = load_valid_dataset(cfg.dataset, err);
  const auto rows = evaluate_dataset(ds, metric_options(cfg), cfg.workers);
  const auto board = rank_models(rows, profile);
  const fs::path path = results_path(cfg.out);
  const auto n = write_results_csv(board, path);
  os << "wrote " << n << " rows to " << path.string() << '\n';
  return 0;
}

int cmd_rank(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  const auto registry = registry_from_env();
  const WeightProfile profile = resolve_profile(cfg, registry);
  const auto board = rank_models(input_rows(cfg, err), profile);
  const std::string text = results_csv(board);
  if (!cfg.out.empty()) write_results_csv(board, results_path(cfg.out));
  os << text;
  return 0;
}

int cmd_compare(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  const auto registry = registry_from_env();
  const auto report = compare_prompt_types(input_rows(cfg, err), resolve_profile(cfg, registry));
  std::ostringstream text;
  csv::write_row(text, {"model", "base_weighted_score", "metadata_weighted_score", "delta",
                        "d_avg_clip_score_prompt", "d_avg_clip_cosine_gt", "d_avg_lpips", "d_fid", "d_mrr",
                        "d_recall"});
  for (const auto& d : report.models) {
    csv::write_row(text, {d.model, fixed6(d.base_score), fixed6(d.metadata_score), fixed6(d.delta),
                          fixed6(d.d_clip_prompt), fixed6(d.d_clip_cos), d.d_lpips ? fixed6(*d.d_lpips) : "",
                          fixed6(d.d_fid), fixed6(d.d_mrr), fixed6(d.d_recall)});
  }
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::kIo, "cannot write " + cfg.out);
    f << text.str();
  }
  os << text.str();
  return 0;
}

int cmd_recommend(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  const auto registry = registry_from_env();
  const auto rec = recommend(input_rows(cfg, err), cfg.profile.empty() ? "paper-default" : cfg.profile, registry);
  os << "model: " << rec.model << '\n'
     << "prompt_type: " << to_string(rec.prompt_type) << '\n'
     << "weighted_score: " << fixed6(rec.weighted_score) << (rec.partial ? " (partial)" : "") << '\n'
     << "rationale: " << rec.rationale << '\n';
  return 0;
}

int cmd_charts(const RunConfig& cfg, const std::string& kind, std::size_t top, const std::string& metric,
               std::ostream& os, std::ostream& err) {
  const auto registry = registry_from_env();
  const auto board = rank_models(input_rows(cfg, err), resolve_profile(cfg, registry));
  ChartOptions opts;
  if (top > 0) opts.top_n = top;
  opts.metric = metric;
  std::vector<ChartKind> kinds;
  if (kind == "all") {
    kinds = {ChartKind::kBarCompare, ChartKind::kRadar, ChartKind::kParallel, ChartKind::kHeatmap,
             ChartKind::kScatter};
  } else {
    kinds = {parse_chart_kind(kind)};
  }
  nlohmann::ordered_json all = nlohmann::ordered_json::object();
  for (auto k : kinds) {
    const auto chart = chart_data(k, board, opts);
    for (const auto& w : chart.warnings) err << "warning: " << to_string(k) << ": " << w << '\n';
    const auto j = to_json(chart);
    if (!cfg.out.empty()) {
      fs::create_directories(cfg.out);
      std::ofstream f(fs::path(cfg.out) / (std::string(to_string(k)) + ".json"), std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorKind::kIo, "cannot write charts to " + cfg.out);
      f << j.dump(2) << '\n';
    }
    all[std::string(to_string(k))] = j;
  }
  if (cfg.out.empty()) {
    os << (kinds.size() == 1 ? all.begin().value() : all).dump(2) << '\n';
  } else {
    os << "wrote " << kinds.size() << " chart file(s) to " << cfg.out << '\n';
  }
  return 0;
}

int cmd_synth(const RunConfig& cfg, SynthOptions opts, const std::string& lpips, std::ostream& os) {
  if (cfg.out.empty()) throw UsageError("--out is required");
  opts.seed = cfg.seed;
  opts.lpips_source = parse_lpips_source(lpips);
  write_synthetic_dataset(cfg.out, opts);
  os << "wrote synthetic dataset (" << opts.models << " models x 2 prompt types x " << opts.prompts
     << " prompts) to " << cfg.out << '\n';
  return 0;
}

int cmd_serve(const RunConfig& cfg, std::ostream& os) {
  if (cfg.results.empty() == cfg.dataset.empty()) throw UsageError("exactly one of --results or --dataset is required");
  SnapshotSource source;
  source.results_csv = cfg.results;
  source.dataset = cfg.dataset;
  if (const char* dir = std::getenv("T2IBENCH_PROFILE_DIR")) source.profile_dir = dir;
  source.metric_options = metric_options(cfg);
  Service service(source);
  HttpServer server(service);
  const int port = server.start(cfg.host, cfg.port);
  os << "serving on http://" << cfg.host << ":" << port << '\n' << std::flush;
  server.wait();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Text-to-image benchmark engine: metrics, weighted scoring, rankings and recommendations",
               "t2ibench"};
  app.require_subcommand(1);
  RunConfig cfg;

  std::string annotations, captions, prompts_out = "prompts.csv";
  auto* promptgen = app.add_subcommand("promptgen", "build prompts.csv from captions and attribute annotations");
  promptgen->add_option("--annotations", annotations, "image_key,attribute,value CSV")->required();
  promptgen->add_option("--captions", captions, "image_key,caption[,gt_image] CSV")->required();
  promptgen->add_option("--out", prompts_out, "output prompts.csv");

  auto* validate = app.add_subcommand("validate", "check a dataset directory");
  validate->add_option("--dataset", cfg.dataset, "dataset directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "compute cohort metrics and write evaluation_results.csv");
  evaluate->add_option("--dataset", cfg.dataset, "dataset directory")->required();
  evaluate->add_option("--out", cfg.out, "output directory or .csv path");
  evaluate->add_option("--k", cfg.k, "Recall@K cutoff");
  evaluate->add_option("--retrieval-direction", cfg.direction, "gen-to-gt (default) or gt-to-gen");
  evaluate->add_option("--workers", cfg.workers, "parallel cohort workers");
  add_profile_flags(evaluate, cfg);

  auto* rank = app.add_subcommand("rank", "rank cohorts by weighted score (results CSV on stdout)");
  add_input_flags(rank, cfg);
  add_profile_flags(rank, cfg);
  rank->add_option("--out", cfg.out, "also write evaluation_results.csv here");

  auto* compare = app.add_subcommand("compare", "base vs metadata weighted-score deltas per model");
  add_input_flags(compare, cfg);
  add_profile_flags(compare, cfg);
  compare->add_option("--out", cfg.out, "also write the delta CSV here");

  auto* recommend_cmd = app.add_subcommand("recommend", "top model for a task profile");
  add_input_flags(recommend_cmd, cfg);
  recommend_cmd->add_option("--profile", cfg.profile, "task profile name");

  std::string chart_kind = "all", chart_metric = "weighted_score";
  std::size_t chart_top = 0;
  auto* charts = app.add_subcommand("charts", "chart-ready JSON series");
  add_input_flags(charts, cfg);
  add_profile_flags(charts, cfg);
  charts->add_option("--kind", chart_kind, "bar_compare, radar, parallel, heatmap, scatter or all");
  charts->add_option("--top", chart_top, "entries for radar/parallel");
  charts->add_option("--metric", chart_metric, "bar_compare metric");
  charts->add_option("--out", cfg.out, "directory for <kind>.json files");

  SynthOptions synth_opts;
  std::string synth_lpips = "scalar_csv";
  auto* synth = app.add_subcommand("synth", "write a deterministic synthetic dataset");
  synth->add_option("--seed", cfg.seed, "random seed");
  synth->add_option("--models", synth_opts.models, "number of models");
  synth->add_option("--prompts", synth_opts.prompts, "number of prompts");
  synth->add_option("--clip-dim", synth_opts.clip_dim, "CLIP embedding dimension");
  synth->add_option("--inception-dim", synth_opts.inception_dim, "Inception feature dimension");
  synth->add_option("--metadata-noise-scale", synth_opts.metadata_noise_scale,
                    "metadata cohort noise relative to base");
  synth->add_option("--lpips", synth_lpips, "scalar_csv, feature_stacks or absent");
  synth->add_option("--out", cfg.out, "output dataset directory")->required();

  auto* serve = app.add_subcommand("serve", "HTTP API over a results snapshot");
  add_input_flags(serve, cfg);
  serve->add_option("--port", cfg.port, "listen port");
  serve->add_option("--host", cfg.host, "listen address");

  std::vector<std::string> argv_store{"t2ibench"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*promptgen) return cmd_promptgen(annotations, captions, prompts_out, out);
    if (*validate) return cmd_validate(cfg, out);
    if (*evaluate) return cmd_evaluate(cfg, out, err);
    if (*rank) return cmd_rank(cfg, out, err);
    if (*compare) return cmd_compare(cfg, out, err);
    if (*recommend_cmd) return cmd_recommend(cfg, out, err);
    if (*charts) return cmd_charts(cfg, chart_kind, chart_top, chart_metric, out, err);
    if (*synth) return cmd_synth(cfg, synth_opts, synth_lpips, out);
    if (*serve) return cmd_serve(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace t2ibench
