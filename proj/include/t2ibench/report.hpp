#pragma once

// evaluation_results.csv emission/parsing and chart-ready data series.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "t2ibench/csv.hpp"
#include "t2ibench/scoring.hpp"

namespace t2ibench {

inline constexpr std::string_view kResultsFileName = "evaluation_results.csv";

// model,prompt_type,avg_clip_score_prompt,avg_clip_cosine_gt,avg_lpips,fid,mrr,
// recall_at_<k>,n_clip,n_lpips,n_fid,n_ret,n_clip_prompt,weighted_score,flags
csv::Row results_header(std::size_t k = kDefaultRecallK);

// Rows in leaderboard order, reals with 6 decimals, missing values empty,
// flags ';'-joined. LF line endings.
std::string results_csv(const Leaderboard& board);
std::size_t write_results_csv(const Leaderboard& board, const std::filesystem::path& out);

// Raw metric rows back out of a results file; the "partial" flag is dropped
// since scoring recomputes it.
std::vector<RawMetricRow> parse_results_csv(std::string_view text, const std::string& source = "<memory>");
std::vector<RawMetricRow> read_results_csv(const std::filesystem::path& path);

// Leaderboard as JSON (numbers rounded to 6 decimals), ranks starting at 1.
nlohmann::ordered_json to_json(const Leaderboard& board);
nlohmann::ordered_json to_json(const RawMetricRow& row);

enum class ChartKind { kBarCompare, kRadar, kParallel, kHeatmap, kScatter };

std::string_view to_string(ChartKind k);
ChartKind parse_chart_kind(std::string_view s);  // "bar_compare", "radar", ...

struct ChartAxis {
  std::string key;
  std::string label;
  std::string orientation;  // "higher is better", ...
};

struct NamedSeries {
  std::string label;
  std::vector<std::optional<double>> values;  // one per axis
};

struct ChartSeries {
  ChartKind kind = ChartKind::kRadar;
  std::string title;
  std::vector<ChartAxis> axes;
  std::vector<NamedSeries> series;
  std::vector<std::string> notes;
  std::vector<std::string> warnings;
};

struct ChartOptions {
  std::optional<std::size_t> top_n;     // radar: 3, parallel: 5 by default
  std::string metric = "weighted_score";  // bar_compare only
};

// Bar-compare metric keys.
std::vector<std::string> bar_compare_metrics();

ChartSeries chart_data(ChartKind kind, const Leaderboard& board, const ChartOptions& opts = {});

// Stable key order. With `round`, numbers are rounded to 6 decimals.
nlohmann::ordered_json to_json(const ChartSeries& chart, bool round = false);

}  // namespace t2ibench
