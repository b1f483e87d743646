#include <gtest/gtest.h>

#include <filesystem>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include <unistd.h>

#include "jigsaw3d/png_io.hpp"
#include "test_helpers.hpp"

namespace jigsaw3d {
namespace {

namespace fs = std::filesystem;

class PngTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("jigsaw3d_png_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST_F(PngTest, CheckedInFixturesRegenerateByteIdentically) {
  const std::string cmd = std::string(JIGSAW3D_FIXTURES_TOOL) + " " + dir_.string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  for (const char* name : {"cube.obj", "sphere.obj", "cube.png", "sphere.png"}) {
    const std::string fresh = slurp(dir_ / name);
    EXPECT_FALSE(fresh.empty()) << name;
    EXPECT_EQ(fresh, slurp(fs::path(JIGSAW3D_DATA_DIR) / name)) << name;
  }
}

TEST_F(PngTest, SixteenBitRoundTripIsExactOnGrid) {
  for (int channels = 1; channels <= 4; ++channels) {
    ImageGrid img = testing::random_image(channels, 13, 17, channels);
    quantize16(img);
    write_png(dir_ / "a.png", img, BitDepth::k16);
    EXPECT_EQ(read_png(dir_ / "a.png"), img) << channels << " channels";
  }
}

TEST_F(PngTest, EightBitRoundTripWithinHalfCode) {
  const ImageGrid img = testing::random_image(3, 9, 11, 5);
  write_png(dir_ / "b.png", img, BitDepth::k8);
  const ImageGrid back = read_png(dir_ / "b.png");
  ASSERT_TRUE(back.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_LE(std::abs(back.data()[i] - img.data()[i]), 0.5f / 255.0f + 1e-7f);
}

TEST_F(PngTest, ValuesClampedOnWrite) {
  ImageGrid img(1, 1, 3);
  img.data()[0] = -0.5f;
  img.data()[1] = 1.5f;
  img.data()[2] = 0.5f;
  write_png(dir_ / "c.png", img, BitDepth::k16);
  const ImageGrid back = read_png(dir_ / "c.png");
  EXPECT_EQ(back.data()[0], 0.0f);
  EXPECT_EQ(back.data()[1], 1.0f);
}

TEST_F(PngTest, Errors) {
  try {
    read_png(dir_ / "missing.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kImageIo);
  }
  std::ofstream(dir_ / "text.png") << "definitely not a png";
  EXPECT_THROW(read_png(dir_ / "text.png"), Error);
  std::ofstream(dir_ / "trunc.png", std::ios::binary) << "\x89PNG\r\n\x1a\n\0\0";
  EXPECT_THROW(read_png(dir_ / "trunc.png"), Error);
  EXPECT_THROW(write_png(dir_ / "five.png", ImageGrid(5, 2, 2)), Error);
}

}  // namespace
}  // namespace jigsaw3d
