#include <doctest.h>

#include "t2ibench/csv.hpp"
#include "t2ibench/embedding.hpp"
#include "t2ibench/error.hpp"
#include "t2ibench/promptgen.hpp"
#include "test_util.hpp"

using namespace t2ibench;
using t2ibench::testing::TempDir;

namespace {

const char* kBase = "a woman wears a medium-sleeve cotton shirt with lapel neckline";
const char* kGolden =
    "a woman wears a medium-sleeve cotton shirt with lapel neckline | metadata: gender: women; category: shirt; "
    "sleeve length: medium; neckline: lapel; fabric: cotton";

}  // namespace

TEST_CASE("golden metadata prompt") {
  const AttributeSet attrs{{"gender", "women"},
                           {"category", "shirt"},
                           {"sleeve length", "medium"},
                           {"neckline", "lapel"},
                           {"fabric", "cotton"}};
  CHECK(build_metadata_prompt(kBase, attrs) == kGolden);
}

TEST_CASE("insertion order does not matter") {
  const AttributeSet reversed{{"fabric", "cotton"},
                              {"neckline", "lapel"},
                              {"sleeve length", "medium"},
                              {"category", "shirt"},
                              {"gender", "women"}};
  CHECK(build_metadata_prompt(kBase, reversed) == kGolden);
}

TEST_CASE("names are normalized, extras sort after canonical keys") {
  AttributeSet a;
  a.set("  Pattern ", "striped");
  a.set("Color", " red ");
  a.set("belt", "yes");
  a.set("fabric", "");
  CHECK(a.size() == 3);
  CHECK(build_metadata_prompt("x", a) == "x | metadata: color: red; belt: yes; pattern: striped");
  CHECK(attribute_before("gender", "accessories"));
  CHECK(attribute_before("accessories", "aaa"));
  CHECK_FALSE(attribute_before("zeta", "alpha"));
}

TEST_CASE("empty attributes leave the base unchanged") {
  CHECK(build_metadata_prompt(kBase, AttributeSet{}) == kBase);
  CHECK_THROWS_AS(build_metadata_prompt("", AttributeSet{{"gender", "men"}}), Error);
}

TEST_CASE("base is a prefix and the marker is detectable") {
  const AttributeSet attrs{{"color", "blue"}};
  const auto s = build_metadata_prompt(kBase, attrs);
  CHECK(s.rfind(kBase, 0) == 0);
  CHECK(has_metadata_marker(s));
  CHECK_FALSE(has_metadata_marker(kBase));
}

TEST_CASE("generate prompt csv for 8 captions") {
  TempDir dir;
  std::string ann = "image_key,attribute,value\n";
  std::string cap = "image_key,caption\n";
  // Written in reverse key order; output is sorted.
  for (int i = 7; i >= 0; --i) {
    const std::string k = "img" + std::to_string(i);
    ann += k + ",gender," + (i % 2 ? "men" : "women") + "\n";
    ann += k + ",category,shirt\n";
    if (i % 3 == 0) ann += k + ",fabric,denim\n";
    cap += k + ",\"a person, wearing a shirt " + std::to_string(i) + "\"\n";
  }
  write_file_bytes(dir / "ann.csv", ann);
  write_file_bytes(dir / "cap.csv", cap);
  CHECK(generate_prompt_csv(dir / "ann.csv", dir / "cap.csv", dir / "prompts.csv") == 8);
  const std::string text = read_file_bytes(dir / "prompts.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') >= 9);
  const auto table = csv::read_table((dir / "prompts.csv").string());
  REQUIRE(table.rows.size() == 8);
  const std::size_t c_meta = table.require_column("metadata_prompt", "p");
  const std::size_t c_base = table.require_column("base_prompt", "p");
  for (std::size_t r = 0; r < 8; ++r) {
    const auto& row = table.rows[r];
    CHECK(row[0] == "img" + std::to_string(r));
    AttributeSet attrs;
    for (std::size_t c = 4; c < table.header.size(); ++c) attrs.set(table.header[c], row[c]);
    CHECK(row[c_meta] == build_metadata_prompt(row[c_base], attrs));
  }
  // Byte-identical on a second run.
  generate_prompt_csv(dir / "ann.csv", dir / "cap.csv", dir / "again.csv");
  CHECK(read_file_bytes(dir / "again.csv") == text);
}

TEST_CASE("disjoint keys") {
  TempDir dir;
  write_file_bytes(dir / "ann.csv", "image_key,attribute,value\na,gender,men\n");
  write_file_bytes(dir / "cap.csv", "image_key,caption\nb,hello\n");
  CHECK_THROWS_WITH_AS(generate_prompt_csv(dir / "ann.csv", dir / "cap.csv", dir / "p.csv"),
                       doctest::Contains("no overlapping image keys"), Error);
}

TEST_CASE("conflicting annotations and duplicate captions") {
  TempDir dir;
  write_file_bytes(dir / "ann.csv", "image_key,attribute,value\na,gender,men\na,gender,women\n");
  write_file_bytes(dir / "cap.csv", "image_key,caption\na,hello\n");
  CHECK_THROWS_AS(generate_prompt_csv(dir / "ann.csv", dir / "cap.csv", dir / "p.csv"), Error);
  write_file_bytes(dir / "ann.csv", "image_key,attribute,value\na,gender,men\n");
  write_file_bytes(dir / "cap.csv", "image_key,caption\na,hello\na,again\n");
  CHECK_THROWS_AS(generate_prompt_csv(dir / "ann.csv", dir / "cap.csv", dir / "p.csv"), Error);
}

TEST_CASE("already augmented captions are not augmented again") {
  TempDir dir;
  write_file_bytes(dir / "ann.csv", "image_key,attribute,value\na,gender,women\n");
  const std::string augmented = build_metadata_prompt("a dress", AttributeSet{{"gender", "women"}});
  write_file_bytes(dir / "cap.csv", "image_key,caption\na," + csv::escape_field(augmented) + "\n");
  generate_prompt_csv(dir / "ann.csv", dir / "cap.csv", dir / "p.csv");
  const auto table = csv::read_table((dir / "p.csv").string());
  CHECK(table.rows[0][2] == augmented);
}
