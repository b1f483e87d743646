#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <unistd.h>

#include "jigsaw3d/dataset.hpp"
#include "jigsaw3d/primitives.hpp"
#include "test_helpers.hpp"

namespace jigsaw3d {
namespace {

namespace fs = std::filesystem;

DatasetOptions small_options() {
  DatasetOptions o;
  o.image_size = 64;
  return o;
}

JigsawConfig small_config(double mask_ratio = 0.25) { return {16, mask_ratio, {0.5f}, 0}; }

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void expect_same_sample(const SamplePair& a, const SamplePair& b) {
  EXPECT_EQ(a.mesh_id, b.mesh_id);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.jigsaw_config, b.jigsaw_config);
  EXPECT_EQ(a.target_cameras, b.target_cameras);
  EXPECT_EQ(a.reference_cameras, b.reference_cameras);
  EXPECT_EQ(a.caption, b.caption);
  ASSERT_EQ(a.targets.size(), b.targets.size());
  for (std::size_t k = 0; k < a.targets.size(); ++k) {
    EXPECT_EQ(a.targets[k].color, b.targets[k].color);
    EXPECT_EQ(a.targets[k].position, b.targets[k].position);
    EXPECT_EQ(a.targets[k].normal, b.targets[k].normal);
  }
  ASSERT_EQ(a.references.size(), b.references.size());
  for (std::size_t j = 0; j < a.references.size(); ++j) {
    EXPECT_EQ(a.references[j].raw, b.references[j].raw);
    EXPECT_EQ(a.references[j].jigsawed, b.references[j].jigsawed);
    EXPECT_EQ(a.references[j].permutation, b.references[j].permutation);
    EXPECT_EQ(a.references[j].mask, b.references[j].mask);
    EXPECT_EQ(a.references[j].config, b.references[j].config);
  }
}

class DatasetTest : public ::testing::Test {
protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("jigsaw3d_ds_" + std::to_string(::getpid()) + "_" +
                                         ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  fs::path root_;
};

TEST(MakeSample, DefaultsGiveSixTargetsAndFourReferences) {
  const SamplePair s = make_sample(make_uv_cube(), checkerboard(256, 8, {0.2f, 0.2f, 0.2f}, {0.8f, 0.7f, 0.6f}),
                                   JigsawConfig{64, 0.25, {0.5f}, 0}, 3);
  EXPECT_EQ(s.targets.size(), 6u);
  EXPECT_EQ(s.references.size(), 4u);
  for (const auto& t : s.targets) EXPECT_EQ(t.color.width(), 512);
  for (const auto& r : s.references) {
    EXPECT_EQ(r.raw.height(), 512);
    EXPECT_EQ(r.permutation.rows, 8);
    EXPECT_GE(r.config.mask_ratio, 0.0);
    EXPECT_LE(r.config.mask_ratio, 0.25);
  }
}

TEST(MakeSample, DeterministicPerSeed) {
  const TriangleMesh sphere = make_uv_sphere(24, 12);
  const ImageGrid tex = value_noise(64, 4);
  const SamplePair a = make_sample(sphere, tex, small_config(), 77, "s", small_options());
  const SamplePair b = make_sample(sphere, tex, small_config(), 77, "s", small_options());
  expect_same_sample(a, b);
  const SamplePair c = make_sample(sphere, tex, small_config(), 78, "s", small_options());
  EXPECT_NE(a.reference_cameras, c.reference_cameras);
}

TEST(MakeSample, ZeroRatioKeepsMultisetAndInverts) {
  const SamplePair s = make_sample(make_uv_cube(), value_noise(64, 5), small_config(0.0), 9, "c", small_options());
  for (const auto& r : s.references) {
    EXPECT_EQ(r.config.mask_ratio, 0.0);
    EXPECT_EQ(r.mask.masked_count(), 0);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(testing::sorted_plane(r.jigsawed, c), testing::sorted_plane(r.raw, c));
    EXPECT_EQ(unshuffle(r.jigsawed, r.permutation, 16), r.raw);
  }
}

TEST(MakeSample, RejectsMissingUVs) {
  TriangleMesh m = make_uv_cube();
  for (Triangle& t : m.triangles)
    for (Corner& c : t) c.uv = -1;
  try {
    make_sample(m, value_noise(16, 1), small_config(), 1, "x", small_options());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kMissingUVs);
  }
}

TEST_F(DatasetTest, LayoutAndFileCount) {
  SamplePair s = make_sample(make_uv_cube(), value_noise(64, 6), small_config(), 1, "cube", small_options());
  s.caption = "a cube";
  const Manifest m = write_dataset({s}, root_);
  ASSERT_EQ(m.samples.size(), 1u);
  std::size_t png = 0, json = 0;
  for (const auto& e : fs::recursive_directory_iterator(root_)) {
    if (e.path().extension() == ".png") ++png;
    if (e.path().extension() == ".json") ++json;
  }
  EXPECT_EQ(png, 6u * 3u + 4u * 2u);
  EXPECT_EQ(json, 2u);
  EXPECT_TRUE(fs::exists(root_ / "cube" / "target_5_normal.png"));
  EXPECT_TRUE(fs::exists(root_ / "cube" / "ref_3_jigsaw.png"));
  EXPECT_TRUE(fs::exists(root_ / "manifest.json"));
  for (const auto& f : m.samples[0].files) EXPECT_TRUE(fs::exists(root_ / f)) << f;
}

TEST_F(DatasetTest, EmptySampleList) {
  EXPECT_TRUE(write_dataset({}, root_).samples.empty());
  EXPECT_TRUE(read_dataset(root_).empty());
}

TEST_F(DatasetTest, RoundTripIsLossless) {
  std::vector<SamplePair> samples{
      make_sample(make_uv_cube(), checkerboard(64, 4, {0.1f, 0.3f, 0.5f}, {0.9f, 0.6f, 0.2f}), small_config(), 11, "cube",
                  small_options()),
      make_sample(make_uv_sphere(16, 8), value_noise(64, 7), small_config(0.2), 12, "sphere", small_options())};
  samples[0].caption = "checkered";
  write_dataset(samples, root_);
  const auto back = read_dataset(root_);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) expect_same_sample(samples[i], back[i]);
}

TEST_F(DatasetTest, WritesAreByteIdentical) {
  const auto make = [] { return make_sample(make_uv_cube(), value_noise(64, 8), small_config(), 21, "c", small_options()); };
  write_dataset({make()}, root_ / "a");
  write_dataset({make()}, root_ / "b");
  for (const auto& e : fs::recursive_directory_iterator(root_ / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root_ / "a");
    EXPECT_EQ(file_bytes(e.path()), file_bytes(root_ / "b" / rel)) << rel;
  }
}

TEST_F(DatasetTest, MissingFileNamesPath) {
  write_dataset({make_sample(make_uv_cube(), value_noise(32, 1), small_config(), 1, "c", small_options())}, root_);
  fs::remove(root_ / "c" / "ref_2_raw.png");
  try {
    read_dataset(root_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kMissingFile);
    EXPECT_NE(std::string(e.what()).find("ref_2_raw.png"), std::string::npos);
  }
}

TEST_F(DatasetTest, VersionAndCorruption) {
  write_dataset({}, root_);
  write_json(root_ / "manifest.json", Json{{"version", kManifestVersion + 1}, {"samples", Json::array()}});
  try {
    read_dataset(root_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kVersionMismatch);
  }
  std::ofstream(root_ / "manifest.json") << "{ not json";
  try {
    read_dataset(root_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kCorruptManifest);
  }
  write_json(root_ / "manifest.json", Json{{"version", kManifestVersion}});
  try {
    read_dataset(root_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kCorruptManifest);
  }
}

TEST(Serialize, CamerasRoundTripBitExact) {
  auto cams = random_view_cameras(5, 99);
  const auto ortho = orthogonal_cameras();
  cams.insert(cams.end(), ortho.begin(), ortho.end());
  const Json j = Json::parse(cameras_to_json(cams).dump());
  EXPECT_EQ(cameras_from_json(j), cams);
}

}  // namespace
}  // namespace jigsaw3d
