#include <doctest.h>

#include <algorithm>
#include <random>

#include "t2ibench/error.hpp"
#include "t2ibench/report.hpp"
#include "t2ibench/scoring.hpp"
#include "test_util.hpp"

using namespace t2ibench;
using t2ibench::testing::TempDir;

namespace {

std::vector<RawMetricRow> planted() { return read_results_csv(T2IBENCH_TEST_DATA "/planted_rows.csv"); }

RawMetricRow row(std::string model, PromptType pt, double cp, double cos, std::optional<double> lpips,
                 double fid, double mrr, double recall) {
  RawMetricRow r;
  r.model = std::move(model);
  r.prompt_type = pt;
  r.avg_clip_prompt = cp;
  r.avg_clip_cos = cos;
  r.avg_lpips = lpips;
  r.fid = fid;
  r.mrr = mrr;
  r.recall_at_k = recall;
  return r;
}

std::vector<std::pair<std::string, PromptType>> order(const Leaderboard& b) {
  std::vector<std::pair<std::string, PromptType>> out;
  for (const auto& e : b.entries) out.emplace_back(e.raw.model, e.raw.prompt_type);
  return out;
}

std::vector<RawMetricRow> random_rows(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RawMetricRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(row("m" + std::to_string(i), PromptType::kBase, 100 * u(rng), u(rng), u(rng), 50 * u(rng),
                       0.01 + 0.99 * u(rng), u(rng)));
  }
  return rows;
}

constexpr auto kBase = PromptType::kBase;
constexpr auto kMeta = PromptType::kMetadata;

}  // namespace

TEST_CASE("min-max examples") {
  const std::vector<double> x{2, 4, 6};
  CHECK(min_max_normalize(x, false) == std::vector<double>{0, 0.5, 1});
  CHECK(min_max_normalize(x, true) == std::vector<double>{1, 0.5, 0});
  const std::vector<double> c{5, 5, 5};
  CHECK(min_max_normalize(c, false) == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(min_max_normalize(c, true) == std::vector<double>{0.5, 0.5, 0.5});
  CHECK_THROWS_AS(min_max_normalize(std::vector<double>{}, false), Error);

  const std::vector<std::optional<double>> o{2.0, std::nullopt, 6.0};
  const auto n = min_max_normalize(o, false);
  CHECK(n[0] == 0.0);
  CHECK_FALSE(n[1].has_value());
  CHECK(n[2] == 1.0);
}

TEST_CASE("min-max affine invariance") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> pos(0.01, 100.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> x(2 + rng() % 10);
    for (auto& v : x) v = u(rng);
    const double a = pos(rng), b = u(rng);
    std::vector<double> y = x;
    for (auto& v : y) v = a * v + b;
    for (bool inv : {false, true}) {
      const auto nx = min_max_normalize(x, inv);
      const auto ny = min_max_normalize(y, inv);
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(nx[i] - ny[i]) <= 1e-12);
    }
  }
}

TEST_CASE("retrieval composite") {
  CHECK(retrieval_composite(1.0, 1.0) == 1.0);
  CHECK(retrieval_composite(0.6, 0.8) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(retrieval_composite(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(retrieval_composite(1.1, 0.5), Error);
}

TEST_CASE("weighted score examples") {
  const auto p = paper_default_profile();
  NormalizedMetrics ones{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  CHECK(weighted_score(ones, p).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(weighted_score(ones, p).partial);

  NormalizedMetrics m{0.8, 0.6, 0.5, 0.4, 1.0, std::nullopt, std::nullopt};
  CHECK(std::abs(weighted_score(m, p).value - 0.665) <= 1e-12);

  NormalizedMetrics no_lpips = ones;
  no_lpips.n_lpips.reset();
  const auto s = weighted_score(no_lpips, p);
  CHECK(std::abs(s.value - 1.0) <= 1e-12);
  CHECK(s.partial);

  CHECK_THROWS_AS(weighted_score(NormalizedMetrics{}, p), Error);
}

TEST_CASE("profiles") {
  const auto p = paper_default_profile();
  CHECK(p.name == "paper-default");
  CHECK(p.weights() == std::array<double, 5>{0.4, 0.3, 0.15, 0.1, 0.05});
  CHECK_NOTHROW(p.validate());
  CHECK(parse_weights("0.4,0.3,0.15,0.1,0.05").weights() == p.weights());
  CHECK_THROWS_AS(parse_weights("0.4,0.3,0.15,0.1").validate(), Error);
  try {
    parse_weights("0.3,0.3,0.15,0.1,0.05").validate();
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kValidation);
  }
  CHECK_THROWS_AS(parse_weights("1.1,-0.1,0,0,0").validate(), Error);
  WeightProfile raw{"raw", 2, 1, 1, 0, 0};
  CHECK(raw.renormalized().weights() == std::array<double, 5>{0.5, 0.25, 0.25, 0, 0});
  CHECK_THROWS_AS(WeightProfile{"zero"}.renormalized(), Error);
  CHECK(profile_from_json(to_json(p)) == p);

  const auto reg = ProfileRegistry::builtin();
  CHECK(reg.names() == std::vector<std::string>{"paper-default", "realism", "semantic-fidelity", "retrieval"});
  const auto& r = reg.find("realism");
  CHECK(r.weights() == std::array<double, 5>{0.15, 0.3, 0.4, 0.1, 0.05});
  for (const auto& prof : reg.profiles()) CHECK_NOTHROW(prof.validate());
  CHECK_THROWS_WITH_AS(reg.find("foo"), doctest::Contains("paper-default"), Error);
  CHECK_THROWS_WITH_AS(reg.find("foo"), doctest::Contains("foo"), Error);
}

TEST_CASE("user profile directory") {
  TempDir dir;
  t2ibench::write_file_bytes(dir / "b.json",
                             R"({"name":"sharp","weights":[0,1,0,0,0]})");
  t2ibench::write_file_bytes(dir / "a.json",
                             R"({"profiles":[{"name":"sharp","weights":{"clip":1,"lpips":0,"fid":0,"ret":0,"clip_prompt":0}}]})");
  const auto reg = ProfileRegistry::with_user_dir(dir.path());
  // b.json is read after a.json and wins.
  CHECK(reg.find("sharp").w_lpips == 1.0);
  CHECK(reg.contains("paper-default"));
  t2ibench::write_file_bytes(dir / "c.json", R"({"name":"bad","weights":[0.5,0,0,0,0]})");
  CHECK_THROWS_AS(ProfileRegistry::with_user_dir(dir.path()), Error);
}

TEST_CASE("planted fixture equals the spreadsheet oracle") {
  const auto rows = planted();
  REQUIRE(rows.size() == 6);
  const auto board = rank_models(rows, paper_default_profile());
  const std::vector<std::pair<std::string, PromptType>> expected{
      {"bravo", kMeta}, {"alpha", kMeta}, {"bravo", kBase}, {"alpha", kBase}, {"charlie", kMeta}, {"charlie", kBase}};
  CHECK(order(board) == expected);
  const std::vector<double> scores{0.9433333333333334, 0.7623785425101215, 0.7383164642375168,
                                   0.49784412955465585, 0.24581646423751688, 0.05};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    CHECK(std::abs(board.entries[i].weighted_score - scores[i]) <= 1e-12);
    CHECK_FALSE(board.entries[i].partial);
  }
  const auto& top = board.entries[0].normalized;
  CHECK(*top.n_clip == doctest::Approx(1.0));
  CHECK(*top.n_lpips == doctest::Approx(1.0));
  CHECK(*top.n_fid == doctest::Approx(1.0));
  CHECK(*top.n_ret == doctest::Approx(14.0 / 15.0));
  CHECK(*top.n_clip_prompt == doctest::Approx(0.0));
}

TEST_CASE("planted fixture under realism") {
  const auto board = rank_models(planted(), ProfileRegistry::builtin().find("realism"));
  const std::vector<double> scores{0.9433333333333333, 0.7913866396761133, 0.7128171390013496,
                                   0.4743792172739541, 0.2447199730094467, 0.05};
  const std::vector<std::pair<std::string, PromptType>> expected{
      {"bravo", kMeta}, {"bravo", kBase}, {"alpha", kMeta}, {"alpha", kBase}, {"charlie", kMeta}, {"charlie", kBase}};
  CHECK(order(board) == expected);
  for (std::size_t i = 0; i < scores.size(); ++i) CHECK(std::abs(board.entries[i].weighted_score - scores[i]) <= 1e-12);
}

TEST_CASE("planted deltas") {
  const auto report = compare_prompt_types(planted(), paper_default_profile());
  REQUIRE(report.models.size() == 3);
  CHECK(report.models[0].model == "alpha");
  CHECK(std::abs(report.models[0].delta - 0.2645344129554656) <= 1e-12);
  CHECK(std::abs(report.models[1].delta - 0.20501686909581646) <= 1e-12);
  CHECK(std::abs(report.models[2].delta - 0.19581646423751686) <= 1e-12);
  for (const auto& m : report.models) {
    CHECK(m.delta == m.metadata_score - m.base_score);
    CHECK(m.d_fid < 0.0);
  }
  CHECK(report.models[0].d_clip_cos == doctest::Approx(0.07));
}

TEST_CASE("identical base and metadata rows have zero deltas") {
  std::vector<RawMetricRow> rows;
  for (const char* m : {"a", "b"}) {
    rows.push_back(row(m, kBase, 30, m[0] == 'a' ? 0.7 : 0.6, 0.3, 20, 0.5, 0.6));
    rows.push_back(row(m, kMeta, 30, m[0] == 'a' ? 0.7 : 0.6, 0.3, 20, 0.5, 0.6));
  }
  for (const auto& d : compare_prompt_types(rows, paper_default_profile()).models) {
    CHECK(d.delta == 0.0);
    CHECK(d.d_clip_cos == 0.0);
    CHECK(*d.d_lpips == 0.0);
  }
  rows.pop_back();
  CHECK_THROWS_AS(compare_prompt_types(rows, paper_default_profile()), Error);
}

TEST_CASE("recommend") {
  const auto rows = planted();
  const auto rec = recommend(rows, "paper-default");
  const auto board = rank_models(rows, paper_default_profile());
  CHECK(rec.model == board.entries[0].raw.model);
  CHECK(rec.prompt_type == board.entries[0].raw.prompt_type);
  CHECK(rec.weighted_score == board.entries[0].weighted_score);
  // Top three normalized metrics of bravo/metadata: CLIP cosine, LPIPS, FID (all 1).
  CHECK(rec.rationale.find("strongest normalized metrics: CLIP cosine to ground truth 1.000000, LPIPS 1.000000, "
                           "FID 1.000000") != std::string::npos);
  CHECK_THROWS_WITH_AS(recommend(rows, "foo"), doctest::Contains("available profiles"), Error);
}

TEST_CASE("realism flips the winner toward the best FID/LPIPS model") {
  // A leads on CLIP cosine and retrieval, B on LPIPS and FID.
  const std::vector<RawMetricRow> rows{row("A", kBase, 30, 0.9, 0.5, 20, 1.0, 1.0),
                                       row("B", kBase, 30, 0.8, 0.4, 10, 0.5, 0.5)};
  CHECK(recommend(rows, "paper-default").model == "A");
  CHECK(recommend(rows, "realism").model == "B");
  const auto board = rank_models(rows, paper_default_profile());
  CHECK(board.entries[0].weighted_score == doctest::Approx(0.525));
  CHECK(board.entries[1].weighted_score == doctest::Approx(0.475));
}

TEST_CASE("single row and missing metrics") {
  const std::vector<RawMetricRow> one{row("solo", kBase, 20, 0.5, 0.2, 10, 0.5, 0.5)};
  const auto board = rank_models(one, paper_default_profile());
  REQUIRE(board.entries.size() == 1);
  CHECK(*board.entries[0].normalized.n_clip == 0.5);
  CHECK(*board.entries[0].normalized.n_fid == 0.5);
  CHECK(board.entries[0].weighted_score == doctest::Approx(0.5));

  const std::vector<RawMetricRow> lp{row("a", kBase, 20, 0.5, std::nullopt, 10, 0.5, 0.5),
                                     row("b", kBase, 25, 0.6, std::nullopt, 12, 0.6, 0.6)};
  const auto b2 = rank_models(lp, paper_default_profile());
  for (const auto& e : b2.entries) {
    CHECK(e.partial);
    CHECK(std::find(e.flags().begin(), e.flags().end(), std::string(kFlagPartial)) != e.flags().end());
    CHECK_FALSE(e.normalized.n_lpips.has_value());
  }
  CHECK_THROWS_AS(rank_models({}, paper_default_profile()), Error);
  CHECK_THROWS_AS(rank_models(std::vector<RawMetricRow>{one[0], one[0]}, paper_default_profile()), Error);
}

TEST_CASE("ties break by model then prompt type") {
  std::vector<RawMetricRow> rows{row("b", kMeta, 20, 0.5, 0.2, 10, 0.5, 0.5),
                                 row("b", kBase, 20, 0.5, 0.2, 10, 0.5, 0.5),
                                 row("a", kMeta, 20, 0.5, 0.2, 10, 0.5, 0.5)};
  const auto board = rank_models(rows, paper_default_profile());
  const std::vector<std::pair<std::string, PromptType>> expected{{"a", kMeta}, {"b", kBase}, {"b", kMeta}};
  CHECK(order(board) == expected);
  CHECK(Leaderboard::kTieBreak == "model name, then prompt_type, lexicographic");
}

TEST_CASE("per prompt type scope normalizes each prompt type separately") {
  auto p = paper_default_profile();
  p.cohort_scope = CohortScope::kPerPromptType;
  const auto board = rank_models(planted(), p);
  for (const auto& e : board.entries) {
    if (e.raw.model == "charlie") CHECK(*e.normalized.n_clip == 0.0);
    if (e.raw.model == "bravo") CHECK(*e.normalized.n_fid == 1.0);
  }
  CHECK(parse_cohort_scope("per-prompt-type") == CohortScope::kPerPromptType);
  CHECK(parse_cohort_scope("all") == CohortScope::kAllRows);
  CHECK_THROWS_AS(parse_cohort_scope("x"), Error);
}

TEST_CASE("leaderboard order survives positive affine rescaling of one column") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  for (int t = 0; t < 100; ++t) {
    auto rows = random_rows(rng, 8);
    const auto before = order(rank_models(rows, paper_default_profile()));
    const double a = pos(rng), b = pos(rng);
    for (auto& r : rows) r.fid = a * r.fid + b;
    CHECK(order(rank_models(rows, paper_default_profile())) == before);
  }
}

TEST_CASE("scores lie in [0,1] and ranking is pure") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const auto rows = random_rows(rng, 5);
    const auto a = rank_models(rows, paper_default_profile());
    for (const auto& e : a.entries) {
      CHECK(e.weighted_score >= 0.0);
      CHECK(e.weighted_score <= 1.0);
    }
    CHECK(results_csv(a) == results_csv(rank_models(rows, paper_default_profile())));
  }
}

TEST_CASE("monotonicity in clip cosine") {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 100; ++t) {
    auto rows = random_rows(rng, 6);
    const std::size_t who = rng() % rows.size();
    auto position = [&](const std::vector<RawMetricRow>& rs) {
      const auto b = rank_models(rs, paper_default_profile());
      for (std::size_t i = 0; i < b.entries.size(); ++i)
        if (b.entries[i].raw.model == rows[who].model) return i;
      return b.entries.size();
    };
    const auto before = position(rows);
    rows[who].avg_clip_cos += 0.3;
    CHECK(position(rows) <= before);
  }
}

TEST_CASE("pareto consistency") {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (int t = 0; t < 1000; ++t) {
    auto rows = random_rows(rng, 4);
    // rows[0] dominates rows[1] by construction.
    rows[0] = rows[1];
    rows[0].model = "m0";
    rows[0].avg_clip_cos += u(rng);
    rows[0].avg_clip_prompt += u(rng);
    *rows[0].avg_lpips -= u(rng);
    rows[0].fid -= u(rng);
    rows[0].mrr = std::min(1.0, rows[0].mrr + u(rng));
    rows[0].recall_at_k = std::min(1.0, rows[0].recall_at_k + u(rng));
    const auto b = rank_models(rows, paper_default_profile());
    std::size_t p0 = 0, p1 = 0;
    for (std::size_t i = 0; i < b.entries.size(); ++i) {
      if (b.entries[i].raw.model == "m0") p0 = i;
      if (b.entries[i].raw.model == "m1") p1 = i;
    }
    CHECK(p0 < p1);
  }
}
