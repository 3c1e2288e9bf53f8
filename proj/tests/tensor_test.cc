#include <gtest/gtest.h>

#include "tvt/error.h"
#include "tvt/rng.h"
#include "tvt/tensor.h"

namespace tvt {
namespace {

TEST(TensorTest, ShapeMatchesData) {
  Tensor t({2, 3}, 1.5f);
  EXPECT_EQ(t.size(), 6);
  EXPECT_EQ(t.dim(-1), 3);
  EXPECT_THROW(Tensor({2, 2}, std::vector<float>(3)), Error);
  EXPECT_THROW(Tensor({0, 2}), Error);
}

TEST(TensorTest, ReshapeAndSlice) {
  Tensor t({2, 2, 2}, std::vector<float>{0, 1, 2, 3, 4, 5, 6, 7});
  Tensor s = t.Slice(1);
  EXPECT_EQ(s.shape(), (Shape{2, 2}));
  EXPECT_FLOAT_EQ(s.at({1, 0}), 6.0f);
  EXPECT_EQ(t.Reshape({4, 2}).at({3, 1}), 7.0f);
  EXPECT_THROW(t.Reshape({3, 3}), Error);
}

TEST(TensorTest, StackRejectsMismatchedShapes) {
  EXPECT_THROW(Stack({Tensor({2}), Tensor({3})}), Error);
  Tensor s = Stack({Tensor({2}, 1.0f), Tensor({2}, 2.0f)});
  EXPECT_EQ(s.shape(), (Shape{2, 2}));
  EXPECT_EQ(s[3], 2.0f);
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngTest, DrawIsPureFunctionOfSeedAndCounter) {
  Rng a(9);
  for (int i = 0; i < 10; ++i) a.NextU64();
  const uint64_t eleventh = a.NextU64();
  Rng b(9);
  for (int i = 0; i < 10; ++i) b.NextU64();
  EXPECT_EQ(b.NextU64(), eleventh);
  EXPECT_NE(Rng(9).Child(0).NextU64(), Rng(9).Child(1).NextU64());
}

TEST(RngTest, UniformIndexInRange) {
  Rng r(3);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const uint64_t k = r.UniformIndex(5);
    ASSERT_LT(k, 5u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

}  // namespace
}  // namespace tvt
