#include "t2ibench/promptgen.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "t2ibench/csv.hpp"
#include "t2ibench/error.hpp"

namespace t2ibench {

namespace {

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::size_t canonical_rank(std::string_view name) {
  const auto it = std::find(kCanonicalAttributes.begin(), kCanonicalAttributes.end(), name);
  return static_cast<std::size_t>(it - kCanonicalAttributes.begin());
}

}  // namespace

bool attribute_before(std::string_view a, std::string_view b) {
  const auto ra = canonical_rank(a);
  const auto rb = canonical_rank(b);
  if (ra != rb) return ra < rb;
  return a < b;
}

AttributeSet::AttributeSet(std::initializer_list<std::pair<std::string, std::string>> items) {
  for (const auto& [k, v] : items) set(k, v);
}

void AttributeSet::set(std::string_view name, std::string_view value) {
  std::string key = lower(trim(name));
  std::string val = trim(value);
  if (key.empty()) throw Error(ErrorKind::kValidation, "attribute name must not be empty");
  if (val.empty()) {
    values_.erase(key);
    return;
  }
  values_[std::move(key)] = std::move(val);
}

std::vector<std::pair<std::string, std::string>> AttributeSet::entries() const {
  std::vector<std::pair<std::string, std::string>> out(values_.begin(), values_.end());
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return attribute_before(a.first, b.first); });
  return out;
}

bool has_metadata_marker(std::string_view prompt) {
  return prompt.find(kMetadataMarker) != std::string_view::npos;
}

std::string build_metadata_prompt(std::string_view base, const AttributeSet& attrs) {
  if (base.empty()) throw Error(ErrorKind::kValidation, "base prompt must not be empty");
  if (attrs.empty()) return std::string(base);
  std::string out(base);
  out += kMetadataMarker;
  bool first = true;
  for (const auto& [k, v] : attrs.entries()) {
    if (!first) out += "; ";
    first = false;
    out += k;
    out += ": ";
    out += v;
  }
  return out;
}

std::size_t generate_prompt_csv(const std::filesystem::path& annotations,
                                const std::filesystem::path& captions,
                                const std::filesystem::path& out) {
  const auto ann = csv::read_table(annotations.string());
  const auto a_key = ann.require_column("image_key", annotations.string());
  const auto a_attr = ann.require_column("attribute", annotations.string());
  const auto a_val = ann.require_column("value", annotations.string());

  std::map<std::string, AttributeSet> attrs;
  std::map<std::pair<std::string, std::string>, std::string> seen;
  for (const auto& row : ann.rows) {
    const std::string key = row[a_key];
    const std::string name = lower(trim(row[a_attr]));
    const std::string value = trim(row[a_val]);
    auto [it, inserted] = seen.emplace(std::make_pair(key, name), value);
    if (!inserted && it->second != value) {
      throw Error(ErrorKind::kFormat, annotations.string() + ": conflicting values for '" + name +
                                          "' of image '" + key + "'");
    }
    attrs[key].set(name, value);
  }

  const auto cap = csv::read_table(captions.string());
  const auto c_key = cap.require_column("image_key", captions.string());
  const auto c_text = cap.require_column("caption", captions.string());
  const int c_gt = cap.column("gt_image");

  struct Row {
    std::string caption;
    std::string gt_image;
  };
  std::map<std::string, Row> caption_rows;
  for (const auto& row : cap.rows) {
    Row r{row[c_text], c_gt >= 0 ? row[static_cast<std::size_t>(c_gt)] : row[c_key]};
    if (!caption_rows.emplace(row[c_key], std::move(r)).second) {
      throw Error(ErrorKind::kFormat, captions.string() + ": duplicate image_key '" + row[c_key] + "'");
    }
  }

  std::vector<std::string> keys;
  std::set<std::string, decltype(&attribute_before)> columns(&attribute_before);
  for (const auto& [key, row] : caption_rows) {
    auto it = attrs.find(key);
    if (it == attrs.end()) continue;
    keys.push_back(key);
    for (const auto& [name, value] : it->second.entries()) columns.insert(name);
  }
  if (keys.empty()) {
    throw Error(ErrorKind::kDomain, "no overlapping image keys between " + annotations.string() +
                                        " and " + captions.string());
  }

  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + out.string());
  csv::Row header = {"prompt_id", "base_prompt", "metadata_prompt", "gt_image"};
  header.insert(header.end(), columns.begin(), columns.end());
  csv::write_row(os, header);

  for (const auto& key : keys) {
    const Row& row = caption_rows.at(key);
    const AttributeSet& set = attrs.at(key);
    if (row.caption.empty()) {
      throw Error(ErrorKind::kFormat, captions.string() + ": empty caption for '" + key + "'");
    }
    const std::string metadata =
        has_metadata_marker(row.caption) ? row.caption : build_metadata_prompt(row.caption, set);
    csv::Row line = {key, row.caption, metadata, row.gt_image};
    const auto entries = set.entries();
    for (const auto& col : columns) {
      auto e = std::find_if(entries.begin(), entries.end(),
                            [&](const auto& kv) { return kv.first == col; });
      line.push_back(e == entries.end() ? std::string() : e->second);
    }
    csv::write_row(os, line);
  }
  if (!os) throw Error(ErrorKind::kIo, "write failed: " + out.string());
  return keys.size();
}

}  // namespace t2ibench
