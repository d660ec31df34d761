#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "t2ibench/csv.hpp"
#include "t2ibench/dataset.hpp"
#include "t2ibench/error.hpp"
#include "t2ibench/format.hpp"

namespace t2ibench {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  return os;
}

CohortFiles resolved_files(const CohortKey& key, const CohortFiles& files) {
  const CohortFiles d = default_cohort_files(key);
  return CohortFiles{files.gen_clip.empty() ? d.gen_clip : files.gen_clip,
                     files.gen_inception.empty() ? d.gen_inception : files.gen_inception,
                     files.lpips_csv.empty() ? d.lpips_csv : files.lpips_csv,
                     files.lpips_stacks.empty() ? d.lpips_stacks : files.lpips_stacks};
}

}  // namespace

void write_dataset(const fs::path& root, const EvaluationDataset& ds) {
  fs::create_directories(root);

  ordered_json manifest;
  manifest["format"] = "t2ibench-dataset";
  manifest["version"] = 1;
  manifest["models"] = ds.models;
  ordered_json types = ordered_json::array();
  for (auto pt : ds.prompt_types) types.push_back(std::string(to_string(pt)));
  manifest["prompt_types"] = types;
  manifest["dims"] = ordered_json{{"clip", ds.dims.clip}, {"inception", ds.dims.inception}};
  manifest["lpips_source"] = std::string(to_string(ds.lpips_source));
  if (!ds.lpips_backbone.empty()) manifest["lpips_backbone"] = ds.lpips_backbone;
  if (!ds.lpips_weights.empty()) manifest["lpips_layer_weights"] = ds.lpips_weights;

  ordered_json text = ordered_json::object();
  for (auto pt : ds.prompt_types) {
    text[std::string(to_string(pt))] = "text_clip_" + std::string(to_string(pt)) + ".emb";
  }
  ordered_json shared{{"gt_clip", "gt_clip.emb"}, {"gt_inception", "gt_inception.emb"}, {"text_clip", text}};
  if (ds.lpips_source == LpipsSource::kFeatureStacks) shared["gt_lpips_stacks"] = "lpips_stacks_gt";
  manifest["shared"] = shared;

  ordered_json cohorts = ordered_json::array();
  for (const auto& [key, cohort] : ds.cohorts) {
    const CohortFiles f = resolved_files(key, cohort.files);
    ordered_json c{{"model", key.model},
                   {"prompt_type", std::string(to_string(key.prompt_type))},
                   {"gen_clip", f.gen_clip},
                   {"gen_inception", f.gen_inception}};
    if (ds.lpips_source == LpipsSource::kScalarCsv) c["lpips"] = f.lpips_csv;
    if (ds.lpips_source == LpipsSource::kFeatureStacks) c["lpips_stacks"] = f.lpips_stacks;
    cohorts.push_back(c);

    if (cohort.gen_clip) write_embedding_block(root / f.gen_clip, *cohort.gen_clip);
    if (cohort.gen_inception) write_embedding_block(root / f.gen_inception, *cohort.gen_inception);
    if (ds.lpips_source == LpipsSource::kScalarCsv) {
      auto os = open_out(root / f.lpips_csv);
      csv::write_row(os, {"prompt_id", "lpips"});
      for (const auto* p : ds.cohort_pairs(key)) {
        if (p->lpips_value) csv::write_row(os, {p->prompt_id, fixed6(*p->lpips_value)});
      }
    } else if (ds.lpips_source == LpipsSource::kFeatureStacks) {
      fs::create_directories(root / f.lpips_stacks);
      for (const auto& [id, stack] : cohort.lpips_stacks) {
        write_feature_stack(root / f.lpips_stacks / (id + ".lfs"), stack);
      }
    }
  }
  manifest["cohorts"] = cohorts;
  {
    auto os = open_out(root / "manifest.json");
    os << manifest.dump(2) << '\n';
  }

  if (ds.gt_clip) write_embedding_block(root / "gt_clip.emb", *ds.gt_clip);
  if (ds.gt_inception) write_embedding_block(root / "gt_inception.emb", *ds.gt_inception);
  for (const auto& [pt, block] : ds.text_clip) {
    write_embedding_block(root / ("text_clip_" + std::string(to_string(pt)) + ".emb"), block);
  }
  if (ds.lpips_source == LpipsSource::kFeatureStacks) {
    fs::create_directories(root / "lpips_stacks_gt");
    for (const auto& [id, stack] : ds.gt_lpips_stacks) {
      write_feature_stack(root / "lpips_stacks_gt" / (id + ".lfs"), stack);
    }
  }

  // Attribute columns in order of first appearance.
  std::vector<std::string> attr_cols;
  for (const auto& p : ds.prompts) {
    for (const auto& [k, v] : p.attributes) {
      if (std::find(attr_cols.begin(), attr_cols.end(), k) == attr_cols.end()) attr_cols.push_back(k);
    }
  }
  {
    auto os = open_out(root / "prompts.csv");
    csv::Row header = {"prompt_id", "base_prompt", "metadata_prompt", "gt_image"};
    header.insert(header.end(), attr_cols.begin(), attr_cols.end());
    csv::write_row(os, header);
    for (const auto& p : ds.prompts) {
      csv::Row row = {p.prompt_id, p.base_prompt, p.metadata_prompt, p.gt_image_ref};
      for (const auto& col : attr_cols) {
        std::string value;
        for (const auto& [k, v] : p.attributes) {
          if (k == col) value = v;
        }
        row.push_back(value);
      }
      csv::write_row(os, row);
    }
  }
  {
    auto os = open_out(root / "gen_img_metadata.csv");
    csv::write_row(os, {"model", "prompt_type", "prompt_id", "gen_image", "gt_image"});
    for (const auto& p : ds.pairs) {
      csv::write_row(os, {p.model, std::string(to_string(p.prompt_type)), p.prompt_id, p.gen_image_ref,
                          p.gt_image_ref});
    }
  }
}

}  // namespace t2ibench
