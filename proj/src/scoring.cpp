#include "t2ibench/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "t2ibench/error.hpp"
#include "t2ibench/format.hpp"

namespace t2ibench {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(CohortScope s) {
  return s == CohortScope::kAllRows ? "all_rows" : "per_prompt_type";
}

CohortScope parse_cohort_scope(std::string_view s) {
  if (s == "all_rows" || s == "all") return CohortScope::kAllRows;
  if (s == "per_prompt_type" || s == "per-prompt-type") return CohortScope::kPerPromptType;
  throw Error(ErrorKind::kValidation, "unknown cohort scope '" + std::string(s) +
                                          "' (expected all_rows or per_prompt_type)");
}

double WeightProfile::sum() const {
  double s = 0.0;
  for (double w : weights()) s += w;
  return s;
}

void WeightProfile::validate() const {
  static constexpr std::array<const char*, 5> kNames = {"clip", "lpips", "fid", "ret", "clip_prompt"};
  const auto w = weights();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) {
      throw Error(ErrorKind::kValidation, "weight '" + std::string(kNames[i]) +
                                              "' must be finite and >= 0, got " + fixed6(w[i]));
    }
  }
  if (std::abs(sum() - 1.0) > kWeightSumTolerance) {
    throw Error(ErrorKind::kValidation,
                "weights must sum to 1 (within 1e-9), got " + fixed6(sum()));
  }
}

WeightProfile WeightProfile::renormalized() const {
  for (double w : weights()) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorKind::kValidation, "weights must be finite and >= 0");
    }
  }
  const double s = sum();
  if (s <= 0.0) throw Error(ErrorKind::kValidation, "weights sum to zero; cannot renormalize");
  WeightProfile p = *this;
  p.w_clip /= s;
  p.w_lpips /= s;
  p.w_fid /= s;
  p.w_ret /= s;
  p.w_clip_prompt /= s;
  return p;
}

WeightProfile paper_default_profile() {
  return WeightProfile{"paper-default", 0.4, 0.3, 0.15, 0.1, 0.05, CohortScope::kAllRows};
}

WeightProfile parse_weights(std::string_view csv, std::string name) {
  std::vector<double> values;
  std::string item;
  std::stringstream ss{std::string(csv)};
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kValidation, "invalid weight '" + item + "'");
    }
  }
  if (values.size() != 5) {
    throw Error(ErrorKind::kValidation,
                "expected 5 comma-separated weights (clip,lpips,fid,ret,clip_prompt), got " +
                    std::to_string(values.size()));
  }
  WeightProfile p{std::move(name), values[0], values[1], values[2], values[3], values[4],
                  CohortScope::kAllRows};
  p.validate();
  return p;
}

ordered_json to_json(const WeightProfile& p) {
  ordered_json j;
  j["name"] = p.name;
  j["weights"] = ordered_json{{"clip", p.w_clip},
                              {"lpips", p.w_lpips},
                              {"fid", p.w_fid},
                              {"ret", p.w_ret},
                              {"clip_prompt", p.w_clip_prompt}};
  j["cohort_scope"] = std::string(to_string(p.cohort_scope));
  return j;
}

WeightProfile profile_from_json(const json& j) {
  try {
    WeightProfile p;
    p.name = j.at("name").get<std::string>();
    const auto& w = j.at("weights");
    if (w.is_array()) {
      if (w.size() != 5) throw Error(ErrorKind::kValidation, "weights array must have 5 entries");
      p.w_clip = w[0];
      p.w_lpips = w[1];
      p.w_fid = w[2];
      p.w_ret = w[3];
      p.w_clip_prompt = w[4];
    } else {
      p.w_clip = w.at("clip");
      p.w_lpips = w.at("lpips");
      p.w_fid = w.at("fid");
      p.w_ret = w.at("ret");
      p.w_clip_prompt = w.at("clip_prompt");
    }
    if (j.contains("cohort_scope")) p.cohort_scope = parse_cohort_scope(j.at("cohort_scope").get<std::string>());
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("invalid profile: ") + e.what());
  }
}

std::vector<std::optional<double>> min_max_normalize(std::span<const std::optional<double>> values,
                                                     bool invert) {
  if (values.empty()) throw Error(ErrorKind::kDomain, "min_max_normalize: empty input");
  std::optional<double> lo;
  std::optional<double> hi;
  for (const auto& v : values) {
    if (!v) continue;
    if (!std::isfinite(*v)) throw Error(ErrorKind::kDomain, "min_max_normalize: non-finite value");
    lo = lo ? std::min(*lo, *v) : *v;
    hi = hi ? std::max(*hi, *v) : *v;
  }
  std::vector<std::optional<double>> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    if (*hi == *lo) {
      out[i] = 0.5;
    } else {
      const double range = *hi - *lo;
      out[i] = invert ? (*hi - *values[i]) / range : (*values[i] - *lo) / range;
    }
  }
  return out;
}

std::vector<double> min_max_normalize(std::span<const double> values, bool invert) {
  std::vector<std::optional<double>> in(values.begin(), values.end());
  const auto norm = min_max_normalize(in, invert);
  std::vector<double> out;
  out.reserve(norm.size());
  for (const auto& v : norm) out.push_back(*v);
  return out;
}

double retrieval_composite(double mrr, double recall) {
  if (!(mrr >= 0.0 && mrr <= 1.0) || !(recall >= 0.0 && recall <= 1.0)) {
    throw Error(ErrorKind::kDomain, "retrieval_composite: inputs must lie in [0, 1]");
  }
  return (mrr + recall) / 2.0;
}

WeightedScore weighted_score(const NormalizedMetrics& n, const WeightProfile& p) {
  const std::array<std::optional<double>, 5> comps = {n.n_clip, n.n_lpips, n.n_fid, n.n_ret,
                                                      n.n_clip_prompt};
  const auto w = p.weights();
  double total = 0.0;
  double used_weight = 0.0;
  bool partial = false;
  bool any = false;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (!comps[i]) {
      if (w[i] > 0.0) partial = true;
      continue;
    }
    any = true;
    total += w[i] * *comps[i];
    used_weight += w[i];
  }
  if (!any) throw Error(ErrorKind::kDomain, "weighted_score: all components missing");
  if (!partial) return {total, false};
  if (used_weight <= 0.0) {
    throw Error(ErrorKind::kDomain, "weighted_score: every weighted component is missing");
  }
  return {total / used_weight, true};
}

std::vector<std::string> LeaderboardEntry::flags() const {
  std::vector<std::string> out = raw.flags;
  if (partial) out.emplace_back(kFlagPartial);
  return out;
}

namespace {

std::vector<std::optional<double>> column(std::span<const RawMetricRow* const> rows,
                                          std::optional<double> (*get)(const RawMetricRow&)) {
  std::vector<std::optional<double>> out;
  out.reserve(rows.size());
  for (const auto* r : rows) out.push_back(get(*r));
  return out;
}

// Normalizes one scope (a set of rows sharing a min/max population).
void normalize_scope(std::span<const RawMetricRow* const> rows, std::span<NormalizedMetrics* const> out) {
  const auto clip = min_max_normalize(column(rows, [](const RawMetricRow& r) -> std::optional<double> { return r.avg_clip_cos; }), false);
  const auto lpips = min_max_normalize(column(rows, [](const RawMetricRow& r) { return r.avg_lpips; }), true);
  const auto fid = min_max_normalize(column(rows, [](const RawMetricRow& r) -> std::optional<double> { return r.fid; }), true);
  const auto mrr = min_max_normalize(column(rows, [](const RawMetricRow& r) -> std::optional<double> { return r.mrr; }), false);
  const auto rec = min_max_normalize(column(rows, [](const RawMetricRow& r) -> std::optional<double> { return r.recall_at_k; }), false);
  const auto prompt = min_max_normalize(column(rows, [](const RawMetricRow& r) -> std::optional<double> { return r.avg_clip_prompt; }), false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    NormalizedMetrics& n = *out[i];
    n.n_clip = clip[i];
    n.n_lpips = lpips[i];
    n.n_fid = fid[i];
    n.n_mrr = mrr[i];
    n.n_recall = rec[i];
    n.n_ret = retrieval_composite(*mrr[i], *rec[i]);
    n.n_clip_prompt = prompt[i];
  }
}

bool entry_before(const LeaderboardEntry& a, const LeaderboardEntry& b) {
  if (a.weighted_score != b.weighted_score) return a.weighted_score > b.weighted_score;
  if (a.raw.model != b.raw.model) return a.raw.model < b.raw.model;
  return a.raw.prompt_type < b.raw.prompt_type;
}

}  // namespace

Leaderboard rank_models(std::span<const RawMetricRow> rows, const WeightProfile& p) {
  if (rows.empty()) throw Error(ErrorKind::kDomain, "rank_models: no rows");
  p.validate();
  std::set<CohortKey> seen;
  for (const auto& r : rows) {
    if (!seen.insert(r.key()).second) {
      throw Error(ErrorKind::kDomain, "rank_models: duplicate row for cohort " + to_string(r.key()));
    }
  }

  Leaderboard board;
  board.profile = p;
  board.entries.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) board.entries[i].raw = rows[i];

  std::map<std::optional<PromptType>, std::vector<std::size_t>> scopes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::optional<PromptType> scope;
    if (p.cohort_scope == CohortScope::kPerPromptType) scope = rows[i].prompt_type;
    scopes[scope].push_back(i);
  }
  for (const auto& [scope, idx] : scopes) {
    std::vector<const RawMetricRow*> in;
    std::vector<NormalizedMetrics*> out;
    for (std::size_t i : idx) {
      in.push_back(&rows[i]);
      out.push_back(&board.entries[i].normalized);
    }
    normalize_scope(in, out);
  }
  for (auto& e : board.entries) {
    const auto s = weighted_score(e.normalized, p);
    e.weighted_score = s.value;
    e.partial = s.partial;
  }
  std::sort(board.entries.begin(), board.entries.end(), entry_before);
  return board;
}

DeltaReport compare_prompt_types(std::span<const RawMetricRow> rows, const WeightProfile& p) {
  const Leaderboard board = rank_models(rows, p);
  std::map<std::string, std::pair<const LeaderboardEntry*, const LeaderboardEntry*>> by_model;
  for (const auto& e : board.entries) {
    auto& slot = by_model[e.raw.model];
    (e.raw.prompt_type == PromptType::kBase ? slot.first : slot.second) = &e;
  }
  DeltaReport report;
  report.profile = p;
  for (const auto& [model, slot] : by_model) {
    if (!slot.first || !slot.second) {
      throw Error(ErrorKind::kDomain, "compare_prompt_types: model '" + model + "' is missing its " +
                                          (slot.first ? "metadata" : "base") + " cohort");
    }
    const RawMetricRow& b = slot.first->raw;
    const RawMetricRow& m = slot.second->raw;
    ModelDelta d;
    d.model = model;
    d.base_score = slot.first->weighted_score;
    d.metadata_score = slot.second->weighted_score;
    d.delta = d.metadata_score - d.base_score;
    d.d_clip_prompt = m.avg_clip_prompt - b.avg_clip_prompt;
    d.d_clip_cos = m.avg_clip_cos - b.avg_clip_cos;
    if (b.avg_lpips && m.avg_lpips) d.d_lpips = *m.avg_lpips - *b.avg_lpips;
    d.d_fid = m.fid - b.fid;
    d.d_mrr = m.mrr - b.mrr;
    d.d_recall = m.recall_at_k - b.recall_at_k;
    report.models.push_back(std::move(d));
  }
  return report;
}

ProfileRegistry ProfileRegistry::builtin() {
  ProfileRegistry r;
  r.add(paper_default_profile());
  r.add({"realism", 0.15, 0.3, 0.4, 0.1, 0.05, CohortScope::kAllRows});
  r.add({"semantic-fidelity", 0.3, 0.1, 0.1, 0.2, 0.3, CohortScope::kAllRows});
  r.add({"retrieval", 0.2, 0.1, 0.1, 0.5, 0.1, CohortScope::kAllRows});
  return r;
}

ProfileRegistry ProfileRegistry::with_user_dir(const std::filesystem::path& dir) {
  ProfileRegistry r = builtin();
  if (dir.empty() || !std::filesystem::is_directory(dir)) return r;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    try {
      r.merge_json(json::parse(in));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kValidation, f.string() + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), f.string() + ": " + e.what());
    }
  }
  return r;
}

void ProfileRegistry::add(WeightProfile p) {
  p.validate();
  for (auto& existing : profiles_) {
    if (existing.name == p.name) {
      existing = std::move(p);
      return;
    }
  }
  profiles_.push_back(std::move(p));
}

bool ProfileRegistry::contains(std::string_view name) const {
  return std::any_of(profiles_.begin(), profiles_.end(),
                     [name](const WeightProfile& p) { return p.name == name; });
}

const WeightProfile& ProfileRegistry::find(std::string_view name) const {
  for (const auto& p : profiles_) {
    if (p.name == name) return p;
  }
  std::string available;
  for (const auto& n : names()) available += (available.empty() ? "" : ", ") + n;
  throw Error(ErrorKind::kNotFound,
              "unknown profile '" + std::string(name) + "'; available profiles: " + available);
}

std::vector<std::string> ProfileRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& p : profiles_) out.push_back(p.name);
  return out;
}

ordered_json ProfileRegistry::to_json() const {
  ordered_json arr = ordered_json::array();
  for (const auto& p : profiles_) arr.push_back(t2ibench::to_json(p));
  return ordered_json{{"profiles", arr}};
}

void ProfileRegistry::merge_json(const json& doc) {
  if (doc.contains("profiles")) {
    for (const auto& p : doc.at("profiles")) add(profile_from_json(p));
  } else {
    add(profile_from_json(doc));
  }
}

Recommendation recommend(std::span<const RawMetricRow> rows, std::string_view task,
                         const ProfileRegistry& registry) {
  const WeightProfile& profile = registry.find(task);
  const Leaderboard board = rank_models(rows, profile);
  const LeaderboardEntry& top = board.entries.front();

  const std::array<std::pair<const char*, std::optional<double>>, 5> metrics = {{
      {"CLIP cosine to ground truth", top.normalized.n_clip},
      {"LPIPS", top.normalized.n_lpips},
      {"FID", top.normalized.n_fid},
      {"retrieval", top.normalized.n_ret},
      {"CLIP prompt score", top.normalized.n_clip_prompt},
  }};
  std::vector<std::pair<const char*, double>> present;
  for (const auto& [name, v] : metrics) {
    if (v) present.emplace_back(name, *v);
  }
  std::stable_sort(present.begin(), present.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (present.size() > 3) present.resize(3);

  std::string rationale = top.raw.model + " (" + std::string(to_string(top.raw.prompt_type)) +
                          " prompts) ranks first under profile '" + profile.name +
                          "' with weighted score " + fixed6(top.weighted_score);
  if (top.partial) rationale += " (partial)";
  rationale += "; strongest normalized metrics: ";
  for (std::size_t i = 0; i < present.size(); ++i) {
    if (i) rationale += ", ";
    rationale += std::string(present[i].first) + " " + fixed6(present[i].second);
  }
  return Recommendation{top.raw.model, top.raw.prompt_type, top.weighted_score, top.partial, rationale};
}

}  // namespace t2ibench
