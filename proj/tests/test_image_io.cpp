#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "cetrace/error.hpp"
#include "cetrace/image_io.hpp"

using namespace cetrace;
namespace fs = std::filesystem;

namespace {

class ImageIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("cetrace_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write_bytes(const fs::path& p, const std::string& bytes) const {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
  }

  fs::path dir_;
};

GrayImage random_image(int w, int h, int bits, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> level(0, (1 << bits) - 1);
  std::vector<std::uint16_t> px(static_cast<std::size_t>(w) * h);
  for (auto& p : px) p = static_cast<std::uint16_t>(level(rng));
  return GrayImage(w, h, bits, px);
}

}  // namespace

TEST(GrayImageType, ValidatesPixels) {
  EXPECT_THROW(GrayImage(2, 2, 8, {0, 1, 2}), InputError);
  EXPECT_THROW(GrayImage(1, 1, 8, {256}), InputError);
  EXPECT_THROW(GrayImage(1, 1, 12, {4096}), InputError);
  EXPECT_NO_THROW(GrayImage(1, 1, 12, {4095}));
}

TEST_F(ImageIo, ReadsHandWrittenPgm) {
  write_bytes(path("a.pgm"), std::string("P5\n# comment\n2 2\n255\n") + std::string("\x00\x01\x02\xff", 4));
  const GrayImage a = read_image(path("a.pgm"));
  EXPECT_EQ(a.bits(), 8);
  EXPECT_EQ(a.width(), 2);
  EXPECT_EQ(a.at(1, 1), 255);

  write_bytes(path("b.pgm"), std::string("P5 1 2 4095\n") + std::string("\x0f\xff\x01\x00", 4));
  const GrayImage b = read_image(path("b.pgm"));
  EXPECT_EQ(b.bits(), 12);
  EXPECT_EQ(b.at(0, 0), 4095);
  EXPECT_EQ(b.at(0, 1), 256);
}

TEST_F(ImageIo, RejectsBadFiles) {
  write_bytes(path("over.pgm"), std::string("P5 1 1 4095\n") + std::string("\x10\x00", 2));
  EXPECT_THROW(read_image(path("over.pgm")), FormatError);
  write_bytes(path("maxval.pgm"), std::string("P5 1 1 1000\n") + std::string("\x00\x01", 2));
  EXPECT_THROW(read_image(path("maxval.pgm")), FormatError);
  write_bytes(path("short.pgm"), std::string("P5 4 4 255\n") + std::string("\x00\x01", 2));
  EXPECT_THROW(read_image(path("short.pgm")), IoError);
  write_bytes(path("text.txt"), "hello world");
  EXPECT_THROW(read_image(path("text.txt")), FormatError);
  EXPECT_THROW(read_image(path("missing.pgm")), IoError);
  EXPECT_THROW(write_image(random_image(2, 2, 8, 1), dir_ / "no" / "such" / "dir.pgm"), IoError);
}

TEST_F(ImageIo, RoundTripsEveryDepth) {
  for (int bits : {8, 12, 14, 16}) {
    const GrayImage img = random_image(37, 23, bits, static_cast<std::uint64_t>(bits));
    for (const char* ext : {".pgm", ".png"}) {
      const fs::path p = path("img" + std::to_string(bits) + ext);
      write_image(img, p);
      EXPECT_EQ(read_image(p), img) << bits << ext;
    }
  }
}

TEST_F(ImageIo, FourteenBitPgmStoresMaxval) {
  write_image(random_image(4, 4, 14, 3), path("a.pgm"));
  std::ifstream in(path("a.pgm"), std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(maxval, 16383);
}

TEST_F(ImageIo, MaskUsesZeroAnd255) {
  const std::vector<std::uint8_t> mask{0, 1, 1, 0, 1, 0};
  write_mask(mask, 3, 2, path("m.pgm"));
  const GrayImage raw = read_image(path("m.pgm"));
  EXPECT_EQ(raw.bits(), 8);
  EXPECT_EQ(raw.at(1, 0), 255);
  EXPECT_EQ(raw.at(0, 0), 0);
  int w = 0, h = 0;
  EXPECT_EQ(read_mask(path("m.pgm"), w, h), mask);
  EXPECT_EQ(w, 3);
  EXPECT_EQ(h, 2);
}
