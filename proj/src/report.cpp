#include "t2ibench/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "t2ibench/error.hpp"
#include "t2ibench/format.hpp"

namespace t2ibench {

using nlohmann::ordered_json;

csv::Row results_header(std::size_t k) {
  return {"model",          "prompt_type", "avg_clip_score_prompt", "avg_clip_cosine_gt",
          "avg_lpips",      "fid",         "mrr",                   "recall_at_" + std::to_string(k),
          "n_clip",         "n_lpips",     "n_fid",                 "n_ret",
          "n_clip_prompt",  "weighted_score", "flags"};
}

namespace {

std::string opt6(const std::optional<double>& v) { return v ? fixed6(*v) : std::string(); }

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(sep);
    out += items[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::string results_csv(const Leaderboard& board) {
  if (board.entries.empty()) throw Error(ErrorKind::kDomain, "results: no rows to write");
  std::ostringstream os;
  csv::write_row(os, results_header(board.entries.front().raw.k));
  for (const auto& e : board.entries) {
    const auto& r = e.raw;
    const auto& n = e.normalized;
    csv::write_row(os, {r.model, std::string(to_string(r.prompt_type)), fixed6(r.avg_clip_prompt),
                        fixed6(r.avg_clip_cos), opt6(r.avg_lpips), fixed6(r.fid), fixed6(r.mrr),
                        fixed6(r.recall_at_k), opt6(n.n_clip), opt6(n.n_lpips), opt6(n.n_fid),
                        opt6(n.n_ret), opt6(n.n_clip_prompt), fixed6(e.weighted_score),
                        join(e.flags(), ';')});
  }
  return os.str();
}

std::size_t write_results_csv(const Leaderboard& board, const std::filesystem::path& out) {
  const std::string text = results_csv(board);
  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + out.string());
  os << text;
  if (!os) throw Error(ErrorKind::kIo, "write failed: " + out.string());
  return board.entries.size();
}

std::vector<RawMetricRow> parse_results_csv(std::string_view text, const std::string& source) {
  const auto table = csv::parse_table(text, source);
  std::size_t k = 0;
  int c_recall = -1;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    const auto& h = table.header[i];
    if (h.rfind("recall_at_", 0) == 0) {
      try {
        k = std::stoul(h.substr(10));
      } catch (const std::exception&) {
        throw Error(ErrorKind::kFormat, source + ": bad recall column '" + h + "'");
      }
      c_recall = static_cast<int>(i);
    }
  }
  if (c_recall < 0 || k == 0) throw Error(ErrorKind::kFormat, source + ": missing recall_at_<k> column");

  const auto c_model = table.require_column("model", source);
  const auto c_type = table.require_column("prompt_type", source);
  const auto c_prompt = table.require_column("avg_clip_score_prompt", source);
  const auto c_cos = table.require_column("avg_clip_cosine_gt", source);
  const auto c_lpips = table.require_column("avg_lpips", source);
  const auto c_fid = table.require_column("fid", source);
  const auto c_mrr = table.require_column("mrr", source);
  const int c_flags = table.column("flags");

  auto number = [&](const std::string& s, const char* what) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::kFormat, source + ": invalid " + what + " value '" + s + "'");
    }
  };

  std::vector<RawMetricRow> rows;
  for (const auto& row : table.rows) {
    RawMetricRow r;
    r.model = row[c_model];
    r.prompt_type = parse_prompt_type(row[c_type]);
    r.avg_clip_prompt = number(row[c_prompt], "avg_clip_score_prompt");
    r.avg_clip_cos = number(row[c_cos], "avg_clip_cosine_gt");
    if (!row[c_lpips].empty()) r.avg_lpips = number(row[c_lpips], "avg_lpips");
    r.fid = number(row[c_fid], "fid");
    r.mrr = number(row[c_mrr], "mrr");
    r.recall_at_k = number(row[static_cast<std::size_t>(c_recall)], "recall");
    r.k = k;
    if (c_flags >= 0) {
      for (auto& f : split(row[static_cast<std::size_t>(c_flags)], ';')) {
        if (f != kFlagPartial) r.flags.push_back(std::move(f));
      }
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorKind::kFormat, source + ": no result rows");
  return rows;
}

std::vector<RawMetricRow> read_results_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::kIo, "missing file: " + path.string());
  return parse_results_csv(read_file_bytes(path), path.string());
}

namespace {

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(round6(*v)) : ordered_json(nullptr);
}

}  // namespace

ordered_json to_json(const RawMetricRow& r) {
  ordered_json j;
  j["model"] = r.model;
  j["prompt_type"] = std::string(to_string(r.prompt_type));
  j["avg_clip_score_prompt"] = round6(r.avg_clip_prompt);
  j["avg_clip_cosine_gt"] = round6(r.avg_clip_cos);
  j["avg_lpips"] = opt_json(r.avg_lpips);
  j["fid"] = round6(r.fid);
  j["mrr"] = round6(r.mrr);
  j["recall_at_k"] = round6(r.recall_at_k);
  j["k"] = r.k;
  j["flags"] = r.flags;
  return j;
}

ordered_json to_json(const Leaderboard& board) {
  ordered_json entries = ordered_json::array();
  std::size_t rank = 1;
  for (const auto& e : board.entries) {
    const auto& n = e.normalized;
    ordered_json j;
    j["rank"] = rank++;
    j["model"] = e.raw.model;
    j["prompt_type"] = std::string(to_string(e.raw.prompt_type));
    j["weighted_score"] = round6(e.weighted_score);
    j["partial"] = e.partial;
    j["raw"] = to_json(e.raw);
    j["normalized"] = ordered_json{{"n_clip", opt_json(n.n_clip)},
                                   {"n_lpips", opt_json(n.n_lpips)},
                                   {"n_fid", opt_json(n.n_fid)},
                                   {"n_ret", opt_json(n.n_ret)},
                                   {"n_clip_prompt", opt_json(n.n_clip_prompt)},
                                   {"n_mrr", opt_json(n.n_mrr)},
                                   {"n_recall", opt_json(n.n_recall)}};
    j["flags"] = e.flags();
    entries.push_back(std::move(j));
  }
  ordered_json out;
  out["profile"] = to_json(board.profile);
  out["ties_broken_by"] = std::string(Leaderboard::kTieBreak);
  out["entries"] = entries;
  return out;
}

std::string_view to_string(ChartKind k) {
  switch (k) {
    case ChartKind::kBarCompare: return "bar_compare";
    case ChartKind::kRadar: return "radar";
    case ChartKind::kParallel: return "parallel";
    case ChartKind::kHeatmap: return "heatmap";
    case ChartKind::kScatter: return "scatter";
  }
  return "radar";
}

ChartKind parse_chart_kind(std::string_view s) {
  for (auto k : {ChartKind::kBarCompare, ChartKind::kRadar, ChartKind::kParallel, ChartKind::kHeatmap,
                 ChartKind::kScatter}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::kNotFound, "unknown chart kind '" + std::string(s) +
                                        "' (expected bar_compare, radar, parallel, heatmap or scatter)");
}

std::vector<std::string> bar_compare_metrics() {
  return {"weighted_score", "avg_clip_score_prompt", "avg_clip_cosine_gt", "avg_lpips",
          "fid",            "mrr",                   "recall"};
}

namespace {

constexpr const char* kHigher = "higher is better";
constexpr const char* kInvertedNorm = "inverted-normalized, higher is better";

std::string entry_label(const LeaderboardEntry& e) {
  return e.raw.model + " (" + std::string(to_string(e.raw.prompt_type)) + ")";
}

std::vector<ChartAxis> profile_axes() {
  return {{"weighted_score", "Weighted Score", kHigher},
          {"n_clip", "CLIP Cosine Similarity", "normalized, higher is better"},
          {"n_lpips", "LPIPS", kInvertedNorm},
          {"n_fid", "FID", kInvertedNorm},
          {"n_mrr", "MRR", "normalized, higher is better"},
          {"n_recall", "Recall@K", "normalized, higher is better"}};
}

std::vector<std::optional<double>> profile_values(const LeaderboardEntry& e) {
  const auto& n = e.normalized;
  return {e.weighted_score, n.n_clip, n.n_lpips, n.n_fid, n.n_mrr, n.n_recall};
}

std::optional<double> metric_value(const LeaderboardEntry& e, const std::string& metric) {
  const auto& r = e.raw;
  if (metric == "weighted_score") return e.weighted_score;
  if (metric == "avg_clip_score_prompt") return r.avg_clip_prompt;
  if (metric == "avg_clip_cosine_gt") return r.avg_clip_cos;
  if (metric == "avg_lpips") return r.avg_lpips;
  if (metric == "fid") return r.fid;
  if (metric == "mrr") return r.mrr;
  if (metric == "recall") return r.recall_at_k;
  std::string available;
  for (const auto& m : bar_compare_metrics()) available += (available.empty() ? "" : ", ") + m;
  throw Error(ErrorKind::kValidation, "unknown bar_compare metric '" + metric + "'; available: " + available);
}

std::size_t top_count(const Leaderboard& board, const ChartOptions& opts, std::size_t fallback,
                      ChartSeries& chart) {
  const std::size_t want = opts.top_n.value_or(fallback);
  if (want == 0) throw Error(ErrorKind::kValidation, "top_n must be >= 1");
  if (want > board.entries.size()) {
    // Only report the clamp when the caller asked for it explicitly.
    if (opts.top_n) {
      chart.warnings.push_back("top_n " + std::to_string(want) + " exceeds " +
                               std::to_string(board.entries.size()) + " entries; clamped");
    }
    return board.entries.size();
  }
  return want;
}

}  // namespace

ChartSeries chart_data(ChartKind kind, const Leaderboard& board, const ChartOptions& opts) {
  if (board.entries.empty()) throw Error(ErrorKind::kDomain, "chart_data: empty leaderboard");
  ChartSeries chart;
  chart.kind = kind;
  switch (kind) {
    case ChartKind::kRadar:
    case ChartKind::kParallel: {
      const bool radar = kind == ChartKind::kRadar;
      const std::size_t n = top_count(board, opts, radar ? 3 : 5, chart);
      chart.title = radar ? "Top " + std::to_string(n) + " entries across all metrics"
                          : "Parallel coordinates of the top " + std::to_string(n) + " entries";
      chart.axes = profile_axes();
      for (std::size_t i = 0; i < n; ++i) {
        chart.series.push_back({entry_label(board.entries[i]), profile_values(board.entries[i])});
      }
      chart.notes.push_back("LPIPS and FID are inverted so that 1 is best");
      break;
    }
    case ChartKind::kHeatmap: {
      chart.title = "Normalized metric scores for all entries";
      chart.axes = {{"n_clip", "CLIP Cosine Similarity", kHigher},
                    {"n_lpips", "LPIPS", kInvertedNorm},
                    {"n_fid", "FID", kInvertedNorm},
                    {"n_ret", "Retrieval", kHigher},
                    {"n_clip_prompt", "CLIP Prompt Score", kHigher},
                    {"weighted_score", "Weighted Score", kHigher}};
      for (const auto& e : board.entries) {
        const auto& n = e.normalized;
        chart.series.push_back(
            {entry_label(e), {n.n_clip, n.n_lpips, n.n_fid, n.n_ret, n.n_clip_prompt, e.weighted_score}});
      }
      chart.notes.push_back("normalization population: " + std::string(to_string(board.profile.cohort_scope)));
      break;
    }
    case ChartKind::kScatter: {
      chart.title = "FID (lower is better) vs Weighted Score (higher is better)";
      chart.axes = {{"fid", "FID", "lower is better"}, {"weighted_score", "Weighted Score", kHigher}};
      for (const auto& e : board.entries) {
        chart.series.push_back({entry_label(e), {e.raw.fid, e.weighted_score}});
      }
      break;
    }
    case ChartKind::kBarCompare: {
      chart.title = opts.metric + ": base vs metadata-augmented prompts";
      std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> by_model;
      for (const auto& e : board.entries) {
        auto& slot = by_model[e.raw.model];
        (e.raw.prompt_type == PromptType::kBase ? slot.first : slot.second) = metric_value(e, opts.metric);
      }
      NamedSeries base{"base", {}};
      NamedSeries meta{"metadata", {}};
      for (const auto& [model, slot] : by_model) {
        chart.axes.push_back({model, model, opts.metric == "fid" || opts.metric == "avg_lpips"
                                                ? "lower is better"
                                                : kHigher});
        base.values.push_back(slot.first);
        meta.values.push_back(slot.second);
      }
      chart.series = {std::move(base), std::move(meta)};
      break;
    }
  }
  return chart;
}

ordered_json to_json(const ChartSeries& chart, bool round) {
  ordered_json j;
  j["kind"] = std::string(to_string(chart.kind));
  j["title"] = chart.title;
  ordered_json axes = ordered_json::array();
  for (const auto& a : chart.axes) {
    axes.push_back(ordered_json{{"key", a.key}, {"label", a.label}, {"orientation", a.orientation}});
  }
  j["axes"] = axes;
  ordered_json series = ordered_json::array();
  for (const auto& s : chart.series) {
    ordered_json values = ordered_json::array();
    for (const auto& v : s.values) {
      if (v) {
        values.push_back(round ? round6(*v) : *v);
      } else {
        values.push_back(nullptr);
      }
    }
    series.push_back(ordered_json{{"label", s.label}, {"values", values}});
  }
  j["series"] = series;
  j["notes"] = chart.notes;
  j["warnings"] = chart.warnings;
  return j;
}

}  // namespace t2ibench
