#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "tvt/error.h"
#include "tvt/rng.h"
#include "tvt/teacher.h"

namespace tvt {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("tvt_teacher_test_" + name);
  fs::remove_all(p);
  return p;
}

Tensor RandomBatch(uint64_t seed, Shape shape) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (float& v : t.mutable_data()) v = static_cast<float>(rng.Normal());
  return t;
}

TEST(TeacherTest, DefaultTapIsLastStage) {
  TeacherConfig cfg;
  EXPECT_EQ(cfg.ResolvedTap(), "stage3");
  const TeacherModel t = RandomTeacher(cfg, 1);
  Tensor f = TeacherFeatures(t, RandomBatch(2, {2, 3, 32, 32}));
  EXPECT_EQ(f.shape(), (Shape{2, 64, 8, 8}));
  for (float v : f.data()) ASSERT_GE(v, 0.0f);
}

TEST(TeacherTest, TapPointSelectsStage) {
  TeacherConfig cfg;
  cfg.tap_point = "stage2";
  Tensor f = TeacherFeatures(RandomTeacher(cfg, 1), RandomBatch(2, {1, 3, 32, 32}));
  EXPECT_EQ(f.shape(), (Shape{1, 32, 16, 16}));
  cfg.tap_point = "stem";
  f = TeacherFeatures(RandomTeacher(cfg, 1), RandomBatch(2, {1, 3, 32, 32}));
  EXPECT_EQ(f.shape(), (Shape{1, 16, 32, 32}));
  cfg.tap_point = "stage9";
  EXPECT_THROW(RandomTeacher(cfg, 1), Error);
}

TEST(TeacherTest, ZeroInputGivesZeroFeatures) {
  Tensor f = TeacherFeatures(RandomTeacher(TeacherConfig{}, 4), Tensor::Zeros({1, 3, 32, 32}));
  for (float v : f.data()) EXPECT_EQ(v, 0.0f);
}

TEST(TeacherTest, HandSetOneByOneTeacher) {
  TeacherConfig cfg;
  cfg.in_channels = 1;
  cfg.image_size = 2;
  cfg.stem_channels = 2;
  cfg.stem_kernel = 1;
  cfg.stage_channels = {1};
  cfg.stage_kernel = 1;
  cfg.block = TeacherBlock::kPlain;
  TeacherModel t = RandomTeacher(cfg, 0);
  t.weights.Set("stem.conv.weight", Tensor({2, 1, 1, 1}, std::vector<float>{1, -1}));
  t.weights.Set("stem.norm.scale", Tensor({2}, std::vector<float>{2, 1}));
  t.weights.Set("stem.norm.shift", Tensor({2}, std::vector<float>{0, 1}));
  t.weights.Set("stage1.conv1.weight", Tensor({1, 2, 1, 1}, std::vector<float>{1, 1}));
  t.weights.Set("stage1.norm1.scale", Tensor({1}, std::vector<float>{1}));
  t.weights.Set("stage1.norm1.shift", Tensor({1}, std::vector<float>{-1}));
  // stem: relu(2x), relu(1 - x); stage1: relu(a + b - 1).
  Tensor x({1, 1, 2, 2}, std::vector<float>{1, -2, 3, 0});
  Tensor f = TeacherFeatures(t, x);
  EXPECT_EQ(f.shape(), (Shape{1, 1, 2, 2}));
  EXPECT_EQ(f.values(), (std::vector<float>{1, 2, 5, 0}));
}

TEST(TeacherTest, SameInputSameOutputAndSeedDeterminism) {
  const TeacherModel a = RandomTeacher(TeacherConfig{}, 9), b = RandomTeacher(TeacherConfig{}, 9);
  EXPECT_EQ(a.weights, b.weights);
  Tensor x = RandomBatch(3, {2, 3, 32, 32});
  EXPECT_EQ(TeacherFeatures(a, x), TeacherFeatures(a, x));
}

TEST(TeacherTest, InputShapeChecked) {
  EXPECT_THROW(TeacherFeatures(RandomTeacher(TeacherConfig{}, 1), Tensor({1, 3, 16, 16})), Error);
}

TEST(TeacherCheckpointTest, SaveLoadRoundTripIsBitExact) {
  const fs::path dir = TempDir("roundtrip");
  TeacherConfig cfg;
  cfg.tap_point = "stage2";
  const TeacherModel t = RandomTeacher(cfg, 5);
  SaveTeacher(dir, t);
  const TeacherModel back = LoadTeacher(dir);
  EXPECT_EQ(back.weights, t.weights);
  EXPECT_EQ(back.config.ResolvedTap(), "stage2");
  fs::remove_all(dir);
}

TEST(TeacherCheckpointTest, MissingTensorIsNamed) {
  const fs::path dir = TempDir("missing");
  SaveTeacher(dir, RandomTeacher(TeacherConfig{}, 5));
  nlohmann::json manifest;
  {
    std::ifstream is(dir / "manifest.json");
    manifest = nlohmann::json::parse(is);
  }
  auto& tensors = manifest["tensors"];
  tensors.erase(tensors.begin() + 3);
  {
    std::ofstream os(dir / "manifest.json");
    os << manifest.dump();
  }
  try {
    LoadTeacher(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingTensor);
    EXPECT_NE(std::string(e.what()).find("stage1.conv1.weight"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(TeacherCheckpointTest, ShapeMismatchRejected) {
  const fs::path dir = TempDir("shape");
  TeacherModel t = RandomTeacher(TeacherConfig{}, 5);
  SaveTeacher(dir, t);
  TeacherConfig wider;
  wider.stem_channels = 8;
  nlohmann::ordered_json manifest;
  {
    std::ifstream is(dir / "manifest.json");
    manifest = nlohmann::ordered_json::parse(is);
  }
  manifest["architecture"] = TeacherConfigToJson(wider);
  {
    std::ofstream os(dir / "manifest.json");
    os << manifest.dump();
  }
  try {
    LoadTeacher(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
  fs::remove_all(dir);
}

}  // namespace
}  // namespace tvt
