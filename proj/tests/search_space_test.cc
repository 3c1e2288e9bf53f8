#include <gtest/gtest.h>

#include "tvt/error.h"
#include "tvt/search_space.h"
#include "tvt/student.h"

namespace tvt {
namespace {

const std::string kSpaces = std::string(TVT_DATA_DIR) + "/spaces/";

Genome ToyGenome() {
  Genome g;
  g.space_id = "toy";
  g.image_size = 8;
  g.num_classes = 10;
  g.patch_size = 4;
  g.depth = 1;
  g.embed_dim = 8;
  g.heads = {2};
  g.mlp_ratio = {2.0};
  return g;
}

SearchSpaceSpec SingletonSpace() {
  SearchSpaceSpec s;
  s.id = "single";
  s.image_size = 8;
  s.num_classes = 10;
  s.patch_size = {4};
  s.depth = {1};
  s.embed_dim = {8};
  s.heads = {2};
  s.mlp_ratio = {2.0};
  s.min_params = 1;
  s.max_params = 1'000'000;
  return s;
}

TEST(SearchSpaceTest, BundledSpacesCarryTheirBudgets) {
  SearchSpaceSpec af = LoadSpace(kSpaces + "autoformer_ti.json");
  EXPECT_EQ(af.family, Family::kFlatViT);
  EXPECT_EQ(af.min_params, 4'000'000);
  EXPECT_EQ(af.max_params, 9'000'000);
  SearchSpaceSpec pit = LoadSpace(kSpaces + "pit.json");
  EXPECT_EQ(pit.family, Family::kHierarchicalViT);
  EXPECT_EQ(pit.min_params, 2'000'000);
  EXPECT_EQ(pit.max_params, 25'000'000);
}

TEST(SearchSpaceTest, NonDividingHeadsRejectedWithGeneName) {
  nlohmann::json j = SpaceToJson(SingletonSpace());
  j["choices"]["heads"] = {3};
  j["choices"]["embed_dim"] = {64};
  try {
    SpaceFromJson(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    EXPECT_NE(std::string(e.what()).find("heads"), std::string::npos);
  }
}

TEST(SearchSpaceTest, EmptyOptionListAndBadRangeRejected) {
  nlohmann::json j = SpaceToJson(SingletonSpace());
  j["choices"]["mlp_ratio"] = nlohmann::json::array();
  EXPECT_THROW(SpaceFromJson(j), Error);
  j = SpaceToJson(SingletonSpace());
  j["param_range"] = {5, 5};
  EXPECT_THROW(SpaceFromJson(j), Error);
}

TEST(ParamCountTest, EmptyBodyCountsEmbeddingNormAndHead) {
  Genome g = ToyGenome();
  g.depth = 0;
  g.heads.clear();
  g.mlp_ratio.clear();
  // patch embed 8*3*4*4 + 8, cls 8, pos (4+1)*8, final norm 16, head 10*8 + 10.
  EXPECT_EQ(ParamCount(g), 392 + 8 + 40 + 16 + 90);
}

TEST(ParamCountTest, MatchesMaterializedWeights) {
  const Genome g = ToyGenome();
  const StudentModel m = BuildStudent(g, 0);
  EXPECT_EQ(ParamCount(g), m.weights.TotalElements());
  EXPECT_EQ(ParamCount(g), 392 + 8 + 40 + 16 + 90 + (16 + 216 + 72 + 16 + 144 + 136));
}

TEST(ParamCountTest, MatchesMaterializedWeightsOnSampledGenomes) {
  for (const char* space : {"tiny.json", "tiny_pit.json"}) {
    const SearchSpaceSpec spec = LoadSpace(kSpaces + space);
    Rng rng(5);
    for (const Genome& g : SamplePopulation(spec, 50, rng)) {
      EXPECT_EQ(ParamCount(g), BuildStudent(g, 1).weights.TotalElements()) << CanonicalJson(g);
    }
  }
}

TEST(ParamCountTest, LargerMlpRatioIncreasesCount) {
  Genome g = ToyGenome();
  const int64_t before = ParamCount(g);
  g.mlp_ratio = {4.0};
  EXPECT_GT(ParamCount(g), before);
}

TEST(SampleTest, SamplesRespectAutoformerBudget) {
  const SearchSpaceSpec spec = LoadSpace(kSpaces + "autoformer_ti.json");
  Rng rng(0);
  for (const Genome& g : SamplePopulation(spec, 1000, rng)) {
    const int64_t n = ParamCount(g);
    EXPECT_GE(n, 4'000'000);
    EXPECT_LE(n, 9'000'000);
    ValidateGenome(g);
  }
}

TEST(SampleTest, SingletonSpaceReturnsItsOnlyGenome) {
  Rng rng(1);
  Genome g = SampleGenome(SingletonSpace(), rng);
  Genome expected = ToyGenome();
  expected.space_id = "single";
  EXPECT_EQ(g, expected);
}

TEST(SampleTest, ImpossibleBudgetIsInfeasible) {
  SearchSpaceSpec s = SingletonSpace();
  s.min_params = 1;
  s.max_params = 2;
  Rng rng(2);
  try {
    SampleGenome(s, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleBudget);
  }
}

TEST(SampleTest, PopulationSizeAndDeterminism) {
  const SearchSpaceSpec spec = LoadSpace(kSpaces + "tiny.json");
  Rng a(3), b(3);
  auto pa = SamplePopulation(spec, 1000, a);
  EXPECT_EQ(pa.size(), 1000u);
  EXPECT_EQ(pa, SamplePopulation(spec, 1000, b));
  Rng c(3);
  EXPECT_EQ(SamplePopulation(spec, 1, c).size(), 1u);
}

TEST(GenomeTest, CanonicalJsonRoundTripsAndHashIsStable) {
  const SearchSpaceSpec spec = LoadSpace(kSpaces + "tiny_pit.json");
  Rng rng(4);
  for (const Genome& g : SamplePopulation(spec, 20, rng)) {
    Genome back = GenomeFromJson(nlohmann::json::parse(CanonicalJson(g)));
    EXPECT_EQ(back, g);
    EXPECT_EQ(GenomeHash(back), GenomeHash(g));
  }
  EXPECT_EQ(CanonicalJson(ToyGenome()),
            R"({"space_id":"toy","family":"flat","image_size":8,"in_channels":3,)"
            R"("num_classes":10,"patch_size":4,"depth":1,"embed_dim":8,"heads":[2],)"
            R"("mlp_ratio":[2.0]})");
}

TEST(GenomeTest, InvariantViolationsRejected) {
  Genome g = ToyGenome();
  g.heads = {3};
  EXPECT_THROW(ValidateGenome(g), Error);
  g = ToyGenome();
  g.mlp_ratio.clear();
  EXPECT_THROW(ValidateGenome(g), Error);
  g = ToyGenome();
  g.patch_size = 3;
  EXPECT_THROW(ValidateGenome(g), Error);
}

}  // namespace
}  // namespace tvt
