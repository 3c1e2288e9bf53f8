#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>

#include "tvt/error.h"
#include "tvt/search.h"

namespace tvt {
namespace {

const std::string kSpaces = std::string(TVT_DATA_DIR) + "/spaces/";

SearchConfig InjectedConfig(int n, int k) {
  SearchConfig cfg;
  cfg.space = LoadSpace(kSpaces + "tiny.json");
  cfg.population_size = n;
  cfg.topk = k;
  cfg.master_seed = 17;
  return cfg;
}

// Metrics keyed by candidate index.
CandidateScorer TableScorer(std::vector<RawMetrics> table) {
  return [table](int64_t i, const Genome&, uint64_t) { return table[static_cast<size_t>(i)]; };
}

TEST(SearchTest, InjectedMetricsPickExpectedArgmax) {
  SearchResult r = RunSearch(InjectedConfig(3, 3), TableScorer({{1, 3}, {2, 2}, {3, 1}}));
  ASSERT_EQ(r.population.size(), 3u);
  EXPECT_EQ(r.population[0].tvt, -3.0);
  EXPECT_EQ(r.population[1].tvt, -0.5);
  EXPECT_EQ(r.population[2].tvt, 2.0);
  EXPECT_EQ(r.best.index, 2);
  EXPECT_EQ(r.topk[0].index, 2);
  EXPECT_EQ(r.topk[1].index, 1);
  EXPECT_EQ(r.topk[2].index, 0);
}

TEST(SearchTest, SingleCandidateIsBest) {
  SearchResult r = RunSearch(InjectedConfig(1, 1), TableScorer({{4, 4}}));
  EXPECT_EQ(r.best.index, 0);
  EXPECT_EQ(r.best.tvt, 0.0);
}

TEST(SearchTest, TopkOutOfRangeRejected) {
  EXPECT_THROW(RunSearch(InjectedConfig(3, 4), TableScorer({{1, 1}, {2, 2}, {3, 3}})), Error);
  EXPECT_THROW(RunSearch(InjectedConfig(3, 0), TableScorer({{1, 1}, {2, 2}, {3, 3}})), Error);
}

TEST(SearchTest, BestIsBruteForceArgmax) {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.UniformIndex(40));
    std::vector<RawMetrics> table(static_cast<size_t>(n));
    for (auto& m : table) m = {rng.Uniform(0, 5), rng.Uniform(0, 1)};
    SearchResult r = RunSearch(InjectedConfig(n, std::min(n, 5)), TableScorer(table));
    double best = -1e300;
    for (const auto& c : r.population) best = std::max(best, c.tvt);
    EXPECT_EQ(r.best.tvt, best);
  }
}

TEST(SearchTest, RankingInvariantUnderMetricScaling) {
  Rng rng(2);
  std::vector<RawMetrics> table(20), scaled(20);
  for (size_t i = 0; i < table.size(); ++i) {
    // Dyadic values keep the scaled min-max exact.
    table[i] = {static_cast<double>(rng.UniformIndex(64)), static_cast<double>(rng.UniformIndex(64))};
    scaled[i] = {table[i].m_s * 8.0 + 16.0, table[i].m_t * 0.25};
  }
  SearchResult a = RunSearch(InjectedConfig(20, 20), TableScorer(table));
  SearchResult b = RunSearch(InjectedConfig(20, 20), TableScorer(scaled));
  for (size_t i = 0; i < a.topk.size(); ++i) EXPECT_EQ(a.topk[i].index, b.topk[i].index);
}

TEST(SearchTest, ScorerFailureAbortsWithCandidateError) {
  auto scorer = [](int64_t i, const Genome&, uint64_t) -> RawMetrics {
    if (i >= 3) throw Error(ErrorKind::kDimension, "boom " + std::to_string(i));
    return {1.0, 1.0};
  };
  SearchConfig cfg = InjectedConfig(8, 2);
  cfg.workers = 1;
  try {
    RunSearch(cfg, scorer);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "boom 3");
  }
}

TEST(SearchTest, CandidateSeedsAreDistinctAndPassedThrough) {
  std::vector<uint64_t> seen(10);
  auto scorer = [&](int64_t i, const Genome&, uint64_t seed) -> RawMetrics {
    seen[static_cast<size_t>(i)] = seed;
    return {static_cast<double>(i), 0.0};
  };
  SearchResult r = RunSearch(InjectedConfig(10, 3), scorer);
  for (size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i], CandidateSeed(17, static_cast<int64_t>(i)));
    EXPECT_EQ(r.population[i].seed, seen[i]);
    for (size_t j = 0; j < i; ++j) EXPECT_NE(seen[i], seen[j]);
  }
}

ScoredCandidate Candidate(int64_t index, double tvt, uint64_t hash) {
  ScoredCandidate c;
  c.index = index;
  c.tvt = tvt;
  c.genome_hash = hash;
  return c;
}

TEST(TopkMergeTest, TieBreaksOnHashThenIndex) {
  ScoredCandidate a = Candidate(0, 1.0, 50), b = Candidate(1, 1.0, 20), c = Candidate(2, 1.0, 20);
  EXPECT_TRUE(RanksBefore(b, a));
  EXPECT_TRUE(RanksBefore(b, c));
  EXPECT_FALSE(RanksBefore(c, b));
  auto merged = TopkMerge({b, a}, {c}, 3);
  EXPECT_EQ(merged[0].index, 1);
  EXPECT_EQ(merged[1].index, 2);
  EXPECT_EQ(merged[2].index, 0);
}

TEST(TopkMergeTest, MatchesSortAndTruncate) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredCandidate> all;
    const int n = static_cast<int>(rng.UniformIndex(30));
    for (int i = 0; i < n; ++i) {
      all.push_back(Candidate(i, static_cast<double>(rng.UniformIndex(5)), rng.UniformIndex(4)));
    }
    const size_t split = n == 0 ? 0 : rng.UniformIndex(static_cast<uint64_t>(n) + 1);
    std::vector<ScoredCandidate> left(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(split));
    std::vector<ScoredCandidate> right(all.begin() + static_cast<std::ptrdiff_t>(split), all.end());
    std::sort(left.begin(), left.end(), RanksBefore);
    std::sort(right.begin(), right.end(), RanksBefore);
    const int k = static_cast<int>(rng.UniformIndex(12));
    auto merged = TopkMerge(left, right, k);
    std::sort(all.begin(), all.end(), RanksBefore);
    all.resize(std::min(all.size(), static_cast<size_t>(k)));
    ASSERT_EQ(merged.size(), all.size());
    for (size_t i = 0; i < all.size(); ++i) EXPECT_EQ(merged[i].index, all[i].index);
  }
}

TEST(SearchTest, RealScorerIsDeterministic) {
  SearchConfig cfg;
  cfg.space = LoadSpace(kSpaces + "tiny.json");
  cfg.population_size = 6;
  cfg.topk = 3;
  cfg.master_seed = 5;
  cfg.proxy.batch.size = 2;
  SearchResult a = RunSearch(cfg), b = RunSearch(cfg);
  EXPECT_EQ(SearchResultToJson(a).dump(), SearchResultToJson(b).dump());
  EXPECT_EQ(a.population_digest, b.population_digest);
  cfg.master_seed = 6;
  EXPECT_NE(RunSearch(cfg).population_digest, a.population_digest);
}

TEST(SearchTest, TeacherInputMismatchIsConfigError) {
  SearchConfig cfg;
  cfg.space = LoadSpace(kSpaces + "autoformer_ti.json");
  cfg.population_size = 2;
  cfg.topk = 1;
  try {
    RunSearch(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(TeacherSourceTest, JsonRoundTrip) {
  TeacherSource src;
  src.random_config.tap_point = "stage2";
  src.random_seed = 12;
  TeacherSource back = TeacherSourceFromJson(nlohmann::json::parse(TeacherSourceToJson(src).dump()));
  EXPECT_EQ(back.random_seed, 12u);
  EXPECT_EQ(back.random_config.tap_point, "stage2");
  TeacherSource ckpt;
  ckpt.checkpoint = "/tmp/x";
  EXPECT_EQ(TeacherSourceFromJson(nlohmann::json::parse(TeacherSourceToJson(ckpt).dump())).checkpoint,
            "/tmp/x");
}

}  // namespace
}  // namespace tvt
