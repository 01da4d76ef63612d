#include <gtest/gtest.h>

#include "digest.hpp"
#include "expect_error.hpp"
#include "test_support.hpp"

using namespace favstego;
using namespace favstego::testing;

namespace {

IcoEntry entry_for(Bytes frame, int w, int h) {
  IcoEntry e;
  e.width_px = w;
  e.height_px = h;
  e.frame_bytes = std::move(frame);
  return e;
}

}  // namespace

TEST(PixelCodec, HandAssembledOnePixelDib) {
  Bytes frame;
  append_u32le(frame, 40);
  append_u32le(frame, 1);
  append_u32le(frame, 2);  // doubled height
  append_u16le(frame, 1);
  append_u16le(frame, 32);
  for (int i = 0; i < 6; ++i) append_u32le(frame, 0);
  frame.insert(frame.end(), {0x00, 0x00, 0x00, 0xFF});  // B G R A
  frame.insert(frame.end(), {0, 0, 0, 0});              // AND mask row
  const DecodedFrame d = decode_frame(entry_for(frame, 1, 1));
  EXPECT_EQ(d.image.width, 1);
  EXPECT_EQ(d.image.height, 1);
  EXPECT_EQ(d.image.pixels, (Bytes{0, 0, 0, 255}));
  EXPECT_TRUE(d.warnings.empty());
}

TEST(PixelCodec, UniformPngDecodesPerPixel) {
  const IcoFile f = synthetic("uniform64.ico");
  const RgbaImage img = decode_frame(f.entries[0]).image;
  ASSERT_EQ(img.pixel_count(), 4096u);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    ASSERT_EQ(img.pixels[p * 4], 10);
    ASSERT_EQ(img.pixels[p * 4 + 1], 20);
    ASSERT_EQ(img.pixels[p * 4 + 2], 30);
    ASSERT_EQ(img.pixels[p * 4 + 3], 255);
  }
}

TEST(PixelCodec, DecodedPixelsMatchIndependentDecoder) {
  for (const auto& [name, info] : oracle()["fixtures"].items()) {
    if (!info.contains("rgba_sha256")) continue;
    const IcoFile f = synthetic(name);
    for (std::size_t i = 0; i < f.entries.size(); ++i)
      EXPECT_EQ(cli::sha256_hex(decode_frame(f.entries[i]).image.pixels),
                info["rgba_sha256"][i].get<std::string>())
          << name << " entry " << i;
  }
}

TEST(PixelCodec, CorpusPixelsMatchIndependentDecoder) {
  for (const auto& path : corpus_files()) {
    const auto& info = oracle()["corpus"][path.filename().string()];
    const IcoFile f = parse_ico(read_fixture_bytes(path));
    for (std::size_t i = 0; i < f.entries.size(); ++i)
      EXPECT_EQ(cli::sha256_hex(decode_frame(f.entries[i]).image.pixels),
                info["rgba_sha256"][i].get<std::string>())
          << path.filename() << " entry " << i;
  }
}

TEST(PixelCodec, TruncatedIdatIsCorruptFrame) {
  const IcoFile f = synthetic("truncated_idat.ico");
  expect_error(ErrorCode::CorruptFrame, [&] { decode_frame(f.entries[0]); });
}

TEST(PixelCodec, NonThirtyTwoBitDibIsUnsupported) {
  const IcoFile f = synthetic("dib8.ico");
  expect_error(ErrorCode::UnsupportedDepth, [&] { decode_frame(f.entries[0]); });
  for (const auto& e : std::filesystem::directory_iterator(fixture_dir() / "unsupported")) {
    const IcoFile legacy = parse_ico(read_fixture_bytes(e.path()));
    expect_error(ErrorCode::UnsupportedDepth, [&] { decode_frame(legacy.entries[0]); });
  }
}

TEST(PixelCodec, DibShorterThanDeclaredIsCorrupt) {
  Bytes frame = encode_frame(uniform_image(4, 4, 1, 2, 3, 4), FrameFormat::DIB);
  frame.resize(40 + 4 * 4 * 4 - 1);
  expect_error(ErrorCode::CorruptFrame, [&] { decode_frame(entry_for(frame, 4, 4)); });
}

TEST(PixelCodec, StaleDirectoryGeometryWarnsAndTrustsFrame) {
  const IcoEntry e = entry_for(encode_frame(uniform_image(16, 8, 1, 2, 3, 200), FrameFormat::PNG), 32, 32);
  const DecodedFrame d = decode_frame(e);
  EXPECT_EQ(d.image.width, 16);
  EXPECT_EQ(d.image.height, 8);
  ASSERT_EQ(d.warnings.size(), 1u);
  EXPECT_NE(d.warnings[0].find("DimensionMismatch"), std::string::npos);
}

TEST(PixelCodec, DibLayoutArithmetic) {
  const Bytes two = encode_frame(uniform_image(2, 2, 0, 0, 0, 255), FrameFormat::DIB);
  // header + 2 rows of 2 px * 4 bytes + AND mask of 4 bytes/row * 2 rows
  EXPECT_EQ(two.size(), 40u + 16u + 8u);
  EXPECT_EQ(load_i32le(two, 8), 4);  // height doubled
  const Bytes three = encode_frame(uniform_image(3, 3, 0, 0, 0, 255), FrameFormat::DIB);
  EXPECT_EQ(three.size() - 40 - 3 * 4, 36u);  // XOR section is 36 bytes, mask 3 rows * 4 bytes
  for (std::size_t i = 40 + 36; i < three.size(); ++i) EXPECT_EQ(three[i], 0);
}

TEST(PixelCodec, DibIsStoredBottomUpAsBgra) {
  RgbaImage img(1, 2);
  img.pixels = {1, 2, 3, 4, /* row 1 */ 5, 6, 7, 8};
  const Bytes dib = encode_frame(img, FrameFormat::DIB);
  EXPECT_EQ(Bytes(dib.begin() + 40, dib.begin() + 48), (Bytes{7, 6, 5, 8, 3, 2, 1, 4}));
}

TEST(PixelCodec, ZeroDimensionRejected) {
  expect_error(ErrorCode::ZeroDimension, [] { encode_frame(RgbaImage(0, 4), FrameFormat::PNG); });
  expect_error(ErrorCode::ZeroDimension, [] { encode_frame(RgbaImage(4, 0), FrameFormat::DIB); });
}

TEST(PixelCodec, EncodedPngIsRgba8NonInterlaced) {
  const Bytes png = encode_frame(uniform_image(5, 3, 9, 9, 9, 9), FrameFormat::PNG);
  ASSERT_GT(png.size(), 33u);
  EXPECT_EQ(classify_frame(png), FrameFormat::PNG);
  // IHDR: width, height, bit depth 8, colour type 6, interlace 0
  EXPECT_EQ(png[16 + 8], 8);
  EXPECT_EQ(png[16 + 9], 6);
  EXPECT_EQ(png[16 + 12], 0);
}

TEST(PixelCodec, PropertyLosslessRoundTripBothFormats) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 128);
    const int h = 1 + static_cast<int>(rng() % 128);
    const RgbaImage img = random_image(rng, w, h);
    ASSERT_EQ(decode_frame_bytes(encode_frame(img, FrameFormat::PNG)), img) << w << "x" << h;
    ASSERT_EQ(decode_frame_bytes(encode_frame(img, FrameFormat::DIB)), img) << w << "x" << h;
  }
}

TEST(PixelCodec, EveryAlphaValueSurvives) {
  RgbaImage img(16, 16);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    img.pixels[p * 4] = static_cast<std::uint8_t>(p * 7);
    img.alpha(p) = static_cast<std::uint8_t>(p);
  }
  for (FrameFormat f : {FrameFormat::PNG, FrameFormat::DIB}) EXPECT_EQ(decode_frame_bytes(encode_frame(img, f)), img);
}
