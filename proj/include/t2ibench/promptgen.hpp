#pragma once

// Metadata-augmented prompt construction.
//
//   <base> | metadata: gender: women; category: shirt; sleeve length: medium
//
// Keys follow a fixed canonical order (kCanonicalAttributes), then any other
// attribute names alphabetically.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace t2ibench {

inline constexpr std::array<std::string_view, 7> kCanonicalAttributes = {
    "gender", "category", "sleeve length", "neckline", "fabric", "color", "accessories"};

inline constexpr std::string_view kMetadataMarker = " | metadata: ";

class AttributeSet {
 public:
  AttributeSet() = default;
  AttributeSet(std::initializer_list<std::pair<std::string, std::string>> items);

  // Name is trimmed and lower-cased, value trimmed. Empty values are dropped.
  void set(std::string_view name, std::string_view value);

  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  // Entries in canonical order.
  std::vector<std::pair<std::string, std::string>> entries() const;

 private:
  std::map<std::string, std::string> values_;
};

// Attribute names in canonical order: known names first, extras alphabetical.
bool attribute_before(std::string_view a, std::string_view b);

bool has_metadata_marker(std::string_view prompt);

// Throws on an empty base. An empty attribute set returns `base` unchanged.
std::string build_metadata_prompt(std::string_view base, const AttributeSet& attrs);

// Joins `annotations` (image_key,attribute,value) with `captions`
// (image_key,caption[,gt_image]) and writes a prompts.csv to `out`. Rows are
// ordered by image key. Captions that already carry the metadata marker are
// not augmented again. Returns the number of data rows written.
std::size_t generate_prompt_csv(const std::filesystem::path& annotations,
                                const std::filesystem::path& captions,
                                const std::filesystem::path& out);

}  // namespace t2ibench
