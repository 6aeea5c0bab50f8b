#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hit/error.hpp"
#include "hit/io/image.hpp"
#include "hit/io/plot.hpp"
#include "hit/io/text_output.hpp"
#include "hit/parse.hpp"
#include "support/test_support.hpp"

using namespace hit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "hit_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& path, std::initializer_list<unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary);
  for (unsigned char b : bytes) out.put(static_cast<char>(b));
}

}  // namespace

TEST(Ppm, RoundTripQuantizesToEightBits) {
  std::mt19937_64 rng(1);
  Image img = fixtures::random_image(5, rng);
  write_ppm(scratch("a.ppm"), img);
  Image back = read_ppm(scratch("a.ppm"));
  ASSERT_EQ(back.height, 5);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) EXPECT_NEAR(back.pixels[i], img.pixels[i], 0.5 / 255.0 + 1e-6);
  write_ppm(scratch("b.ppm"), back);
  EXPECT_EQ(read_ppm(scratch("b.ppm")), back);
}

TEST(Ppm, MalformedFilesAreIoErrors) {
  { std::ofstream(scratch("bad.ppm")) << "P3\n1 1\n255\n0 0 0\n"; }
  EXPECT_THROW(read_ppm(scratch("bad.ppm")), IoError);
  { std::ofstream(scratch("short.ppm"), std::ios::binary) << "P6\n2 2\n255\nabc"; }
  EXPECT_THROW(read_ppm(scratch("short.ppm")), IoError);
  EXPECT_THROW(read_image(scratch("x.bmp")), IoError);
}

TEST(Png, ReadsRgbAndGray) {
  write_bytes(scratch("rgb.png"),
              {0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52, 0x00,
               0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x01, 0x08, 0x02, 0x00, 0x00, 0x00, 0x7b, 0x40, 0xe8, 0xdd, 0x00,
               0x00, 0x00, 0x0f, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0xc0, 0xd0, 0xf0, 0x1f,
               0x00, 0x08, 0x00, 0x02, 0x7f, 0x9c, 0x45, 0x40, 0x4e, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44,
               0xae, 0x42, 0x60, 0x82});
  Image rgb = read_image(scratch("rgb.png"));
  ASSERT_EQ(rgb.width, 2);
  ASSERT_EQ(rgb.height, 1);
  EXPECT_EQ(rgb.at(0, 0, 0), 1.0f);
  EXPECT_EQ(rgb.at(0, 0, 1), 0.0f);
  EXPECT_NEAR(rgb.at(0, 1, 1), 128.0f / 255.0f, 1e-7);
  EXPECT_EQ(rgb.at(0, 1, 2), 1.0f);

  write_bytes(scratch("gray.png"),
              {0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
               0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x00, 0x00, 0x00, 0x00, 0x3a, 0x7e, 0x9b,
               0x55, 0x00, 0x00, 0x00, 0x0a, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x30, 0x06, 0x00, 0x00,
               0x35, 0x00, 0x34, 0xca, 0xb4, 0x99, 0xed, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae,
               0x42, 0x60, 0x82});
  Image gray = read_png(scratch("gray.png"));
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(gray.at(0, 0, c), 51.0f / 255.0f, 1e-7);

  { std::ofstream(scratch("junk.png")) << "not a png"; }
  EXPECT_THROW(read_png(scratch("junk.png")), IoError);
}

TEST(Pgm, HeaderAndPayload) {
  write_pgm(scratch("g.pgm"), 2, 1, {7, 250});
  EXPECT_EQ(read_file(scratch("g.pgm")), std::string("P5\n2 1\n255\n") + '\x07' + '\xfa');
}

TEST(TextOutput, AtomicWriteReplacesContent) {
  write_file_atomic(scratch("t.txt"), "one");
  write_file_atomic(scratch("t.txt"), "two");
  EXPECT_EQ(read_file(scratch("t.txt")), "two");
  EXPECT_FALSE(fs::exists(scratch("t.txt.tmp")));
  EXPECT_THROW(write_file_atomic(scratch("t.txt") / "below_a_file.txt", "x"), IoError);
  EXPECT_THROW(read_file(scratch("absent.txt")), IoError);
}

TEST(Plot, WritesPpmOfRequestedSize) {
  std::vector<PlotSeries> s{{"a", {0, 0.5, 1}, {0, 1, 0.5}}, {"b", {0, 1}, {0.2, 0.2}}};
  write_line_plot(scratch("p.ppm"), s, 120, 80);
  Image img = read_ppm(scratch("p.ppm"));
  EXPECT_EQ(img.width, 120);
  EXPECT_EQ(img.height, 80);
  std::size_t non_white = 0;
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) non_white += img.pixels[i] < 1.0f || img.pixels[i + 1] < 1.0f;
  EXPECT_GT(non_white, 100u);
}

TEST(Parse, StrictScalars) {
  EXPECT_EQ(parse_int(" 42 ", "k"), 42);
  EXPECT_THROW(parse_int("42x", "k"), ConfigError);
  EXPECT_THROW(parse_int("", "k"), ConfigError);
  EXPECT_EQ(parse_double("1e-3", "k"), 1e-3);
  EXPECT_THROW(parse_double("nan", "k"), ConfigError);
  EXPECT_TRUE(parse_bool("true", "k"));
  EXPECT_FALSE(parse_bool("0", "k"));
  EXPECT_THROW(parse_bool("maybe", "k"), ConfigError);
  EXPECT_EQ(parse_int_list("1, 2,3", "k"), (std::vector<int>{1, 2, 3}));
  EXPECT_TRUE(parse_int_list("", "k").empty());
  EXPECT_EQ(format_int_list({4, 8}), "4,8");
  for (double v : {0.1, 1e-300, 3.0, -2.5e17}) EXPECT_EQ(parse_double(format_double(v), "k"), v);
}
