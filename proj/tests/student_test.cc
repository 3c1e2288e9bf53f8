#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "tvt/error.h"
#include "tvt/kernels.h"
#include "tvt/student.h"

namespace tvt {
namespace {

const std::string kSpaces = std::string(TVT_DATA_DIR) + "/spaces/";

Genome FlatGenome(int image, int patch, int embed, int depth, int heads) {
  Genome g;
  g.space_id = "test";
  g.image_size = image;
  g.num_classes = 10;
  g.patch_size = patch;
  g.depth = depth;
  g.embed_dim = embed;
  g.heads.assign(static_cast<size_t>(depth), heads);
  g.mlp_ratio.assign(static_cast<size_t>(depth), 2.0);
  return g;
}

Tensor UniformBatch(Rng& rng, Shape shape, double lo, double hi) {
  Tensor t(std::move(shape));
  for (float& v : t.mutable_data()) v = static_cast<float>(rng.Uniform(lo, hi));
  return t;
}

TEST(StudentTest, BuildIsDeterministicPerSeed) {
  const Genome g = FlatGenome(8, 4, 8, 2, 2);
  const StudentModel a = BuildStudent(g, 11), b = BuildStudent(g, 11), c = BuildStudent(g, 12);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_FALSE(a.weights == c.weights);
  ASSERT_EQ(a.weights.size(), c.weights.size());
  for (size_t i = 0; i < a.weights.size(); ++i) {
    EXPECT_EQ(a.weights.entries()[i].first, c.weights.entries()[i].first);
    EXPECT_EQ(a.weights.entries()[i].second.shape(), c.weights.entries()[i].second.shape());
  }
  EXPECT_EQ(a.weights.TotalElements(), ParamCount(g));
}

TEST(StudentTest, InitializationConventions) {
  const StudentModel m = BuildStudent(FlatGenome(8, 4, 8, 1, 2), 3);
  for (float v : m.weights.Get("blocks.0.attn.qkv.bias").data()) EXPECT_EQ(v, 0.0f);
  for (float v : m.weights.Get("blocks.0.norm1.weight").data()) EXPECT_EQ(v, 1.0f);
  for (float v : m.weights.Get("blocks.0.mlp.fc1.weight").data()) {
    EXPECT_LE(std::abs(v), 2 * kInitStd);
  }
}

TEST(StudentTest, TokenGridShape) {
  const StudentModel m = BuildStudent(FlatGenome(8, 4, 8, 2, 2), 0);
  Rng rng(1);
  Tensor out = StudentTokens(m, UniformBatch(rng, {3, 3, 8, 8}, -1, 1), -1);
  EXPECT_EQ(out.shape(), (Shape{3, 8, 2, 2}));
  Tensor first = StudentTokens(m, UniformBatch(rng, {1, 3, 8, 8}, -1, 1), 0);
  EXPECT_EQ(first.shape(), (Shape{1, 8, 2, 2}));
  EXPECT_THROW(StudentTokens(m, UniformBatch(rng, {1, 3, 8, 8}, -1, 1), 2), Error);
  EXPECT_THROW(StudentTokens(m, UniformBatch(rng, {1, 3, 4, 4}, -1, 1), 0), Error);
}

TEST(StudentTest, HierarchicalTokensUseLastStageGrid) {
  const SearchSpaceSpec spec = LoadSpace(kSpaces + "tiny_pit.json");
  Rng rng(2);
  for (const Genome& g : SamplePopulation(spec, 5, rng)) {
    const StudentModel m = BuildStudent(g, 1);
    Tensor out = StudentTokens(m, UniformBatch(rng, {2, 3, 32, 32}, -1, 1), -1);
    const int last = g.num_stages() - 1;
    EXPECT_EQ(out.shape(), (Shape{2, g.StageWidth(last), g.StageGrid(last), g.StageGrid(last)}));
    EXPECT_EQ(StudentLogits(m, UniformBatch(rng, {2, 3, 32, 32}, -1, 1)).shape(),
              (Shape{2, 100}));
  }
}

TEST(StudentTest, BatchIsProcessedPerSample) {
  const StudentModel m = BuildStudent(FlatGenome(8, 4, 8, 2, 2), 5);
  Rng rng(3);
  Tensor one = UniformBatch(rng, {1, 3, 8, 8}, -1, 1);
  Tensor out = StudentTokens(m, Stack({one.Slice(0), one.Slice(0)}), -1);
  EXPECT_EQ(out.Slice(0), out.Slice(1));
}

TEST(StudentTest, AttentionRowsSumToOneAndOutputsFinite) {
  const SearchSpaceSpec spec = LoadSpace(kSpaces + "tiny.json");
  Rng rng(4);
  for (const Genome& g : SamplePopulation(spec, 8, rng)) {
    const StudentModel m = BuildStudent(g, 2);
    int observed = 0;
    Tensor out = StudentTokens(m, UniformBatch(rng, {2, 3, 32, 32}, -10, 10), -1,
                               [&](int, int, const Tensor& probs) {
                                 ++observed;
                                 Tensor sums = SumOverAxis(probs, 1);
                                 for (float s : sums.data()) ASSERT_NEAR(s, 1.0f, 1e-6);
                               });
    EXPECT_EQ(observed, 2 * std::accumulate(g.heads.begin(), g.heads.end(), 0));
    for (float v : out.data()) ASSERT_TRUE(std::isfinite(v));
  }
}

// Hand-set depth-1 model: Q = K = 0 gives uniform attention, V and the
// projection are identities and the MLP output is zero, so every token becomes
//   x_i + mean_j LN(x_j).
TEST(StudentTest, HandTracedForward) {
  Genome g = FlatGenome(4, 2, 2, 1, 1);
  g.in_channels = 1;
  g.mlp_ratio = {1.0};
  StudentModel m = BuildStudent(g, 0);
  auto zero = [&](const std::string& name) {
    m.weights.Set(name, Tensor::Zeros(m.weights.Get(name).shape()));
  };
  for (const auto& [name, t] : std::vector<WeightMap::Entry>(m.weights.entries())) {
    if (name.find("norm") == std::string::npos) zero(name);
  }
  Tensor pe({2, 1, 2, 2}, std::vector<float>{1, 1, 1, 1, 0, 0, 0, 0});
  m.weights.Set("patch_embed.weight", pe);
  m.weights.Set("patch_embed.bias", Tensor({2}, std::vector<float>{0, 1}));
  Tensor qkv = Tensor::Zeros({6, 2});
  qkv[4 * 2 + 0] = 1.0f;  // v0 <- x0
  qkv[5 * 2 + 1] = 1.0f;  // v1 <- x1
  m.weights.Set("blocks.0.attn.qkv.weight", qkv);
  m.weights.Set("blocks.0.attn.proj.weight", Tensor::FromRows({{1, 0}, {0, 1}}));

  Tensor image({1, 1, 4, 4});
  for (int i = 0; i < 16; ++i) image[i] = static_cast<float>(i);
  Tensor out = StudentTokens(m, image, 0);
  ASSERT_EQ(out.shape(), (Shape{1, 2, 2, 2}));

  // Oracle: tokens are [0,0] (class) and [patch sum, 1] per patch.
  std::vector<std::array<double, 2>> tokens{{0.0, 0.0}};
  for (int pr = 0; pr < 2; ++pr) {
    for (int pc = 0; pc < 2; ++pc) {
      double s = 0;
      for (int u = 0; u < 2; ++u) {
        for (int v = 0; v < 2; ++v) s += (pr * 2 + u) * 4 + (pc * 2 + v);
      }
      tokens.push_back({s, 1.0});
    }
  }
  std::array<double, 2> mean_ln{0.0, 0.0};
  for (const auto& t : tokens) {
    const double mu = (t[0] + t[1]) / 2;
    const double var = ((t[0] - mu) * (t[0] - mu) + (t[1] - mu) * (t[1] - mu)) / 2;
    for (int c = 0; c < 2; ++c) mean_ln[c] += (t[c] - mu) / std::sqrt(var + 1e-6) / 5.0;
  }
  for (int p = 0; p < 4; ++p) {
    for (int c = 0; c < 2; ++c) {
      const double expected = tokens[p + 1][c] + mean_ln[c];
      EXPECT_NEAR(out[c * 4 + p], expected, 1e-4 * std::max(1.0, std::abs(expected)))
          << "channel " << c << " position " << p;
    }
  }
}

}  // namespace
}  // namespace tvt
