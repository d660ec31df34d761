#include "t2ibench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "t2ibench/csv.hpp"
#include "t2ibench/error.hpp"

namespace t2ibench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(PromptType t) {
  return t == PromptType::kBase ? "base" : "metadata";
}

PromptType parse_prompt_type(std::string_view s) {
  if (s == "base") return PromptType::kBase;
  if (s == "metadata") return PromptType::kMetadata;
  throw Error(ErrorKind::kValidation,
              "unknown prompt_type '" + std::string(s) + "' (expected base or metadata)");
}

std::string_view to_string(LpipsSource s) {
  switch (s) {
    case LpipsSource::kScalarCsv: return "scalar_csv";
    case LpipsSource::kFeatureStacks: return "feature_stacks";
    case LpipsSource::kAbsent: return "absent";
  }
  return "absent";
}

LpipsSource parse_lpips_source(std::string_view s) {
  if (s == "scalar_csv") return LpipsSource::kScalarCsv;
  if (s == "feature_stacks") return LpipsSource::kFeatureStacks;
  if (s == "absent") return LpipsSource::kAbsent;
  throw Error(ErrorKind::kFormat, "unknown lpips_source '" + std::string(s) + "'");
}

std::string_view to_string(Severity s) { return s == Severity::kError ? "error" : "warning"; }

std::string to_string(const CohortKey& key) {
  return key.model + "/" + std::string(to_string(key.prompt_type));
}

std::vector<CohortKey> EvaluationDataset::cohort_keys() const {
  std::vector<CohortKey> keys;
  for (const auto& model : models) {
    for (auto pt : prompt_types) keys.push_back({model, pt});
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::vector<const PairRecord*> EvaluationDataset::cohort_pairs(const CohortKey& key) const {
  std::vector<const PairRecord*> out;
  for (const auto& p : pairs) {
    if (p.model == key.model && p.prompt_type == key.prompt_type) out.push_back(&p);
  }
  std::stable_sort(out.begin(), out.end(), [](const PairRecord* a, const PairRecord* b) {
    return a->row_index < b->row_index;
  });
  return out;
}

std::optional<std::size_t> EvaluationDataset::prompt_index(std::string_view prompt_id) const {
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (prompts[i].prompt_id == prompt_id) return i;
  }
  return std::nullopt;
}

std::size_t ValidationReport::count(Severity s) const {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(), [s](const ValidationIssue& i) { return i.severity == s; }));
}

namespace {

const std::set<std::string> kPromptCoreColumns = {"prompt_id", "base_prompt", "metadata_prompt",
                                                   "gt_image"};

std::string default_cohort_file(const std::string& prefix, const CohortKey& key,
                                const std::string& ext) {
  return prefix + "_" + key.model + "_" + std::string(to_string(key.prompt_type)) + ext;
}


}  // namespace

CohortFiles default_cohort_files(const CohortKey& key) {
  return CohortFiles{
      default_cohort_file("gen_clip", key, ".emb"),
      default_cohort_file("gen_inception", key, ".emb"),
      default_cohort_file("lpips", key, ".csv"),
      default_cohort_file("lpips_stacks", key, ""),
  };
}

namespace {

json read_manifest(const fs::path& root) {
  const fs::path path = root / "manifest.json";
  if (!fs::exists(path)) throw Error(ErrorKind::kIo, "missing file: " + path.string());
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

EmbeddingBlock load_block(const fs::path& root, const std::string& name, BlockKind kind,
                          std::uint32_t expected_rows, std::uint32_t expected_dim) {
  const fs::path path = root / name;
  if (!fs::exists(path)) throw Error(ErrorKind::kIo, "missing block: " + path.string());
  auto block = read_embedding_block(path, kind);
  if (block.rows() != expected_rows) {
    throw Error(ErrorKind::kFormat, path.string() + ": row count mismatch: block has " +
                                        std::to_string(block.rows()) + " rows, dataset has " +
                                        std::to_string(expected_rows) + " prompts");
  }
  if (block.dim() != expected_dim) {
    throw Error(ErrorKind::kFormat, path.string() + ": dim mismatch: block has dim " +
                                        std::to_string(block.dim()) + ", manifest declares " +
                                        std::to_string(expected_dim));
  }
  return block;
}

std::vector<PromptRecord> load_prompts(const fs::path& root) {
  const fs::path path = root / "prompts.csv";
  if (!fs::exists(path)) throw Error(ErrorKind::kIo, "missing file: " + path.string());
  const auto table = csv::read_table(path.string());
  const auto c_id = table.require_column("prompt_id", path.string());
  const auto c_base = table.require_column("base_prompt", path.string());
  const auto c_meta = table.require_column("metadata_prompt", path.string());
  const auto c_gt = table.require_column("gt_image", path.string());

  std::vector<PromptRecord> prompts;
  prompts.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    PromptRecord rec{row[c_id], row[c_base], row[c_meta], row[c_gt], {}};
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (kPromptCoreColumns.count(table.header[c]) || row[c].empty()) continue;
      rec.attributes.emplace_back(table.header[c], row[c]);
    }
    prompts.push_back(std::move(rec));
  }
  return prompts;
}

void load_lpips_scalars(const fs::path& root, const CohortKey& key, const std::string& file,
                        std::vector<PairRecord>& pairs) {
  const fs::path path = root / file;
  if (!fs::exists(path)) return;  // tolerated; surfaces as a validation warning
  const auto table = csv::read_table(path.string());
  const auto c_id = table.require_column("prompt_id", path.string());
  const auto c_val = table.require_column("lpips", path.string());
  std::map<std::string, double> values;
  for (const auto& row : table.rows) {
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(row[c_val], &used);
      if (used != row[c_val].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::kFormat, path.string() + ": invalid lpips value '" + row[c_val] + "'");
    }
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::kFormat, path.string() + ": lpips must be finite and non-negative, got " +
                                          row[c_val]);
    }
    if (!values.emplace(row[c_id], v).second) {
      throw Error(ErrorKind::kFormat, path.string() + ": duplicate prompt_id " + row[c_id]);
    }
  }
  for (auto& p : pairs) {
    if (p.model != key.model || p.prompt_type != key.prompt_type) continue;
    if (auto it = values.find(p.prompt_id); it != values.end()) p.lpips_value = it->second;
  }
}

std::map<std::string, FeatureStack> load_stacks(const fs::path& dir,
                                                const std::vector<PromptRecord>& prompts) {
  std::map<std::string, FeatureStack> stacks;
  if (!fs::is_directory(dir)) return stacks;
  for (const auto& p : prompts) {
    const fs::path file = dir / (p.prompt_id + ".lfs");
    if (fs::exists(file)) stacks.emplace(p.prompt_id, read_feature_stack(file));
  }
  return stacks;
}

}  // namespace

EvaluationDataset load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(ErrorKind::kIo, "not a directory: " + root.string());
  const json manifest = read_manifest(root);

  EvaluationDataset ds;
  ds.root = root;
  try {
    for (const auto& m : manifest.at("models")) ds.models.push_back(m.get<std::string>());
    if (manifest.contains("prompt_types")) {
      for (const auto& t : manifest.at("prompt_types")) {
        ds.prompt_types.push_back(parse_prompt_type(t.get<std::string>()));
      }
    } else {
      ds.prompt_types = {PromptType::kBase, PromptType::kMetadata};
    }
    if (manifest.contains("dims")) {
      const auto& d = manifest.at("dims");
      ds.dims.clip = d.value("clip", kDefaultClipDim);
      ds.dims.inception = d.value("inception", kDefaultInceptionDim);
    }
    ds.lpips_source = parse_lpips_source(manifest.value("lpips_source", std::string("absent")));
    ds.lpips_backbone = manifest.value("lpips_backbone", std::string());
    if (manifest.contains("lpips_layer_weights")) {
      ds.lpips_weights = manifest.at("lpips_layer_weights").get<std::vector<std::vector<float>>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, (root / "manifest.json").string() + ": " + e.what());
  }
  if (ds.models.empty()) throw Error(ErrorKind::kFormat, "manifest.json: models[] is empty");

  ds.prompts = load_prompts(root);
  if (ds.prompts.empty()) throw Error(ErrorKind::kFormat, "prompts.csv has no rows");
  const auto n_prompts = static_cast<std::uint32_t>(ds.prompts.size());

  // Pairing file.
  {
    const fs::path path = root / "gen_img_metadata.csv";
    if (!fs::exists(path)) throw Error(ErrorKind::kIo, "missing file: " + path.string());
    const auto table = csv::read_table(path.string());
    const auto c_model = table.require_column("model", path.string());
    const auto c_type = table.require_column("prompt_type", path.string());
    const auto c_id = table.require_column("prompt_id", path.string());
    const auto c_gen = table.require_column("gen_image", path.string());
    const auto c_gt = table.require_column("gt_image", path.string());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ds.prompts.size(); ++i) index.emplace(ds.prompts[i].prompt_id, i);
    std::set<std::tuple<std::string, PromptType, std::string>> seen;
    for (const auto& row : table.rows) {
      PairRecord p;
      p.model = row[c_model];
      p.prompt_type = parse_prompt_type(row[c_type]);
      p.prompt_id = row[c_id];
      p.gen_image_ref = row[c_gen];
      p.gt_image_ref = row[c_gt];
      if (std::find(ds.models.begin(), ds.models.end(), p.model) == ds.models.end()) {
        throw Error(ErrorKind::kFormat, path.string() + ": model '" + p.model +
                                            "' not declared in manifest");
      }
      auto it = index.find(p.prompt_id);
      if (it == index.end()) {
        throw Error(ErrorKind::kFormat, path.string() + ": unknown prompt_id '" + p.prompt_id + "'");
      }
      p.row_index = it->second;
      if (!seen.emplace(p.model, p.prompt_type, p.prompt_id).second) {
        throw Error(ErrorKind::kFormat, path.string() + ": duplicate pair (" + p.model + ", " +
                                            std::string(to_string(p.prompt_type)) + ", " +
                                            p.prompt_id + ")");
      }
      ds.pairs.push_back(std::move(p));
    }
  }

  const json shared = manifest.value("shared", json::object());
  ds.gt_clip = load_block(root, shared.value("gt_clip", std::string("gt_clip.emb")),
                          BlockKind::kClipImage, n_prompts, ds.dims.clip);
  ds.gt_inception = load_block(root, shared.value("gt_inception", std::string("gt_inception.emb")),
                               BlockKind::kInception, n_prompts, ds.dims.inception);
  const json text = shared.value("text_clip", json::object());
  for (auto pt : ds.prompt_types) {
    const std::string key(to_string(pt));
    const std::string name = text.value(key, "text_clip_" + key + ".emb");
    ds.text_clip.emplace(pt, load_block(root, name, BlockKind::kClipText, n_prompts, ds.dims.clip));
  }

  std::map<CohortKey, json> declared;
  for (const auto& c : manifest.value("cohorts", json::array())) {
    try {
      CohortKey key{c.at("model").get<std::string>(),
                    parse_prompt_type(c.at("prompt_type").get<std::string>())};
      declared.emplace(std::move(key), c);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kFormat, "manifest.json cohorts[]: " + std::string(e.what()));
    }
  }

  for (const auto& key : ds.cohort_keys()) {
    CohortData cohort;
    cohort.files = default_cohort_files(key);
    if (auto it = declared.find(key); it != declared.end()) {
      const auto& c = it->second;
      cohort.files.gen_clip = c.value("gen_clip", cohort.files.gen_clip);
      cohort.files.gen_inception = c.value("gen_inception", cohort.files.gen_inception);
      cohort.files.lpips_csv = c.value("lpips", cohort.files.lpips_csv);
      cohort.files.lpips_stacks = c.value("lpips_stacks", cohort.files.lpips_stacks);
    }
    cohort.gen_clip =
        load_block(root, cohort.files.gen_clip, BlockKind::kClipImage, n_prompts, ds.dims.clip);
    cohort.gen_inception = load_block(root, cohort.files.gen_inception, BlockKind::kInception,
                                      n_prompts, ds.dims.inception);
    if (ds.lpips_source == LpipsSource::kScalarCsv) {
      load_lpips_scalars(root, key, cohort.files.lpips_csv, ds.pairs);
    } else if (ds.lpips_source == LpipsSource::kFeatureStacks) {
      cohort.lpips_stacks = load_stacks(root / cohort.files.lpips_stacks, ds.prompts);
    }
    ds.cohorts.emplace(key, std::move(cohort));
  }
  if (ds.lpips_source == LpipsSource::kFeatureStacks) {
    ds.gt_lpips_stacks =
        load_stacks(root / shared.value("gt_lpips_stacks", std::string("lpips_stacks_gt")), ds.prompts);
  }
  return ds;
}

namespace {

class ReportBuilder {
 public:
  void error(std::string location, std::string message) {
    report_.issues.push_back({Severity::kError, std::move(location), std::move(message)});
    report_.ok = false;
  }
  void warning(std::string location, std::string message) {
    report_.issues.push_back({Severity::kWarning, std::move(location), std::move(message)});
  }
  ValidationReport take() { return std::move(report_); }

 private:
  ValidationReport report_;
};

void check_block(ReportBuilder& rb, const std::string& location,
                 const std::optional<EmbeddingBlock>& block, std::size_t rows,
                 std::uint32_t dim) {
  if (!block) {
    rb.error(location, "missing block");
    return;
  }
  if (block->rows() != rows) {
    rb.error(location, "block has " + std::to_string(block->rows()) + " rows, expected " +
                           std::to_string(rows));
  }
  if (block->dim() != dim) {
    rb.error(location, "block has dim " + std::to_string(block->dim()) + ", manifest declares " +
                           std::to_string(dim));
  }
}

bool same_shape(const FeatureStack& a, const FeatureStack& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const auto& x = a.layers[l];
    const auto& y = b.layers[l];
    if (x.channels != y.channels || x.height != y.height || x.width != y.width) return false;
  }
  return true;
}

}  // namespace

ValidationReport validate_dataset(const EvaluationDataset& ds) {
  ReportBuilder rb;
  const std::size_t n = ds.prompts.size();

  if (ds.models.empty()) rb.error("manifest", "no models declared");
  if (ds.prompt_types.empty()) rb.error("manifest", "no prompt types declared");
  if (n == 0) rb.error("prompts.csv", "no prompts");

  std::map<std::string, std::size_t> id_count;
  for (const auto& p : ds.prompts) ++id_count[p.prompt_id];
  for (const auto& [id, count] : id_count) {
    if (count > 1) {
      rb.error("prompts.csv", "duplicate prompt_id '" + id + "' (" + std::to_string(count) +
                                  " occurrences)");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.prompts[i].base_prompt.empty()) {
      rb.error("prompts.csv row " + std::to_string(i + 1),
               "empty base_prompt for '" + ds.prompts[i].prompt_id + "'");
    }
  }

  check_block(rb, "gt_clip", ds.gt_clip, n, ds.dims.clip);
  check_block(rb, "gt_inception", ds.gt_inception, n, ds.dims.inception);
  for (auto pt : ds.prompt_types) {
    auto it = ds.text_clip.find(pt);
    check_block(rb, "text_clip/" + std::string(to_string(pt)),
                it == ds.text_clip.end() ? std::nullopt : std::optional<EmbeddingBlock>(it->second),
                n, ds.dims.clip);
  }

  for (const auto& key : ds.cohort_keys()) {
    const std::string loc = "cohort " + to_string(key);
    auto it = ds.cohorts.find(key);
    if (it == ds.cohorts.end()) {
      rb.error(loc, "cohort absent");
      continue;
    }
    check_block(rb, loc + " gen_clip", it->second.gen_clip, n, ds.dims.clip);
    check_block(rb, loc + " gen_inception", it->second.gen_inception, n, ds.dims.inception);
  }

  // Pairs: declared cohort, in-range row, consistent prompt id, one pair per
  // (cohort, row), full coverage of the prompt list.
  std::set<std::tuple<std::string, PromptType, std::size_t>> seen;
  std::map<CohortKey, std::size_t> per_cohort;
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    const auto& p = ds.pairs[i];
    const std::string loc = "gen_img_metadata.csv row " + std::to_string(i + 1);
    const CohortKey key{p.model, p.prompt_type};
    if (std::find(ds.models.begin(), ds.models.end(), p.model) == ds.models.end() ||
        std::find(ds.prompt_types.begin(), ds.prompt_types.end(), p.prompt_type) ==
            ds.prompt_types.end()) {
      rb.error(loc, "pair references undeclared cohort " + to_string(key));
      continue;
    }
    if (p.row_index >= n) {
      rb.error(loc, "row_index " + std::to_string(p.row_index) + " out of range");
      continue;
    }
    if (ds.prompts[p.row_index].prompt_id != p.prompt_id) {
      rb.error(loc, "prompt_id '" + p.prompt_id + "' does not match prompts.csv row " +
                        std::to_string(p.row_index + 1));
    }
    if (!seen.emplace(p.model, p.prompt_type, p.row_index).second) {
      rb.error(loc, "duplicate pair (" + p.model + ", " + std::string(to_string(p.prompt_type)) +
                        ", " + p.prompt_id + ")");
      continue;
    }
    if (p.gt_image_ref != ds.prompts[p.row_index].gt_image_ref) {
      rb.warning(loc, "gt_image '" + p.gt_image_ref + "' differs from prompts.csv '" +
                          ds.prompts[p.row_index].gt_image_ref + "'");
    }
    if (p.lpips_value && (!std::isfinite(*p.lpips_value) || *p.lpips_value < 0.0)) {
      rb.error(loc, "lpips value must be finite and non-negative");
    }
    ++per_cohort[key];
  }
  for (const auto& key : ds.cohort_keys()) {
    const std::size_t have = per_cohort[key];
    if (have != n) {
      rb.error("cohort " + to_string(key),
               std::to_string(have) + " pairs, expected one per prompt (" + std::to_string(n) + ")");
    }
  }

  switch (ds.lpips_source) {
    case LpipsSource::kAbsent:
      rb.warning("manifest", "LPIPS unavailable; metric will be reported as missing");
      break;
    case LpipsSource::kScalarCsv:
      for (const auto& key : ds.cohort_keys()) {
        std::size_t missing = 0;
        std::size_t total = 0;
        for (const auto* p : ds.cohort_pairs(key)) {
          ++total;
          if (!p->lpips_value) ++missing;
        }
        if (missing == total && total > 0) {
          rb.warning("cohort " + to_string(key),
                     "LPIPS unavailable; metric will be reported as missing");
        } else if (missing > 0) {
          rb.warning("cohort " + to_string(key),
                     "LPIPS missing for " + std::to_string(missing) + " of " +
                         std::to_string(total) + " pairs; averaging the rest");
        }
      }
      break;
    case LpipsSource::kFeatureStacks:
      for (const auto& key : ds.cohort_keys()) {
        auto it = ds.cohorts.find(key);
        if (it == ds.cohorts.end()) continue;
        const std::string loc = "cohort " + to_string(key);
        std::size_t missing = 0;
        for (const auto& prompt : ds.prompts) {
          auto gen = it->second.lpips_stacks.find(prompt.prompt_id);
          auto gt = ds.gt_lpips_stacks.find(prompt.prompt_id);
          if (gen == it->second.lpips_stacks.end() || gt == ds.gt_lpips_stacks.end()) {
            ++missing;
            continue;
          }
          if (!same_shape(gen->second, gt->second)) {
            rb.error(loc, "feature stack shape mismatch for '" + prompt.prompt_id + "'");
            continue;
          }
          if (!ds.lpips_weights.empty()) {
            bool ok = ds.lpips_weights.size() == gt->second.layers.size();
            for (std::size_t l = 0; ok && l < ds.lpips_weights.size(); ++l) {
              ok = ds.lpips_weights[l].size() == gt->second.layers[l].channels;
            }
            if (!ok) rb.error(loc, "lpips_layer_weights do not match feature stack channels");
          }
        }
        if (missing == n && n > 0) {
          rb.warning(loc, "LPIPS unavailable; metric will be reported as missing");
        } else if (missing > 0) {
          rb.warning(loc, "LPIPS feature stacks missing for " + std::to_string(missing) + " of " +
                              std::to_string(n) + " prompts; averaging the rest");
        }
      }
      break;
  }
  return rb.take();
}

}  // namespace t2ibench
