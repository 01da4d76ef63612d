#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "expect_error.hpp"
#include "test_support.hpp"

using namespace favstego;
using namespace favstego::testing;

namespace {

double reference_entropy(const RgbaImage& img) {
  double ones = 0, n = 0;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    if (img.alpha(p) < 2) continue;
    n += 1;
    ones += img.alpha(p) & 1;
  }
  const double p1 = ones / n, p0 = 1 - p1;
  double h = 0;
  if (p0 > 0) h -= p0 * std::log2(p0);
  if (p1 > 0) h -= p1 * std::log2(p1);
  return h;
}

double reference_chi_square(const RgbaImage& img) {
  std::vector<double> hist(256, 0.0);
  for (std::size_t p = 0; p < img.pixel_count(); ++p)
    if (img.alpha(p) >= 2) hist[img.alpha(p)] += 1;
  double chi = 0;
  for (int k = 0; k < 128; ++k) {
    const double m = (hist[2 * k] + hist[2 * k + 1]) / 2;
    if (m > 0) chi += (hist[2 * k] - m) * (hist[2 * k] - m) / m;
  }
  return chi;
}

RgbaImage image_of(const IcoFile& f, std::size_t entry = 0) { return decode_frame(f.entries[entry]).image; }

}  // namespace

TEST(Steganalysis, EntropyDegenerateAndUniform) {
  EXPECT_DOUBLE_EQ(lsb_entropy(uniform_image(16, 16, 0, 0, 0, 255)), 0.0);
  RgbaImage half = uniform_image(16, 16, 0, 0, 0, 200);
  for (std::size_t p = 0; p < half.pixel_count(); p += 2) half.alpha(p) = 201;
  EXPECT_DOUBLE_EQ(lsb_entropy(half), 1.0);
}

TEST(Steganalysis, EntropyNeedsSixtyFourEligiblePixels) {
  RgbaImage img = uniform_image(16, 16, 0, 0, 0, 0);
  for (std::size_t p = 0; p < 63; ++p) img.alpha(p) = 255;
  img.alpha(100) = 1;  // alpha 1 does not count
  expect_error(ErrorCode::InsufficientSample, [&] { lsb_entropy(img); });
  expect_error(ErrorCode::InsufficientSample, [&] { chi_square_lsb(img); });
  img.alpha(63) = 255;
  EXPECT_NO_THROW(lsb_entropy(img));
}

TEST(Steganalysis, EntropyIsPermutationInvariant) {
  std::mt19937_64 rng(3);
  RgbaImage img = random_image(rng, 20, 20);
  const double h = lsb_entropy(img);
  for (int i = 0; i < 10; ++i) {
    std::vector<std::size_t> order(img.pixel_count());
    for (std::size_t p = 0; p < order.size(); ++p) order[p] = p;
    std::shuffle(order.begin(), order.end(), rng);
    RgbaImage shuffled(img.width, img.height);
    for (std::size_t p = 0; p < order.size(); ++p)
      std::copy_n(img.pixels.begin() + static_cast<std::ptrdiff_t>(order[p] * 4), 4,
                  shuffled.pixels.begin() + static_cast<std::ptrdiff_t>(p * 4));
    EXPECT_DOUBLE_EQ(lsb_entropy(shuffled), h);
  }
}

TEST(Steganalysis, EntropyAfterFillingOpaqueCover) {
  std::mt19937_64 rng(4);
  const IcoFile stego = embed(synthetic("opaque64.ico"), random_bytes(rng, 500));
  const RgbaImage img = image_of(stego);
  const double h = lsb_entropy(img);
  EXPECT_NEAR(h, reference_entropy(img), 1e-12);
  EXPECT_GE(h, 0.95);
}

TEST(Steganalysis, SurvivalFunctionMatchesReference) {
  for (const auto& row : oracle()["chi2_sf"]) {
    const double x = row["x"].get<double>();
    const int df = row["df"].get<int>();
    const double sf = row["sf"].get<double>();
    EXPECT_NEAR(chi_square_survival(x, df), sf, 1e-9 + 1e-9 * sf) << "x=" << x << " df=" << df;
  }
}

TEST(Steganalysis, ChiSquareMatchesBruteForceHistogram) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    RgbaImage img = random_image(rng, 32, 32);
    // skew the histogram so statistics vary across trials
    for (std::size_t p = 0; p < img.pixel_count(); ++p)
      if (rng() % 3 == 0) img.alpha(p) &= 0xFE;
    const ChiSquareResult r = chi_square_lsb(img);
    EXPECT_NEAR(r.statistic, reference_chi_square(img), 1e-9 * (1 + r.statistic));
    EXPECT_NEAR(r.p_value, chi_square_survival(r.statistic, r.degrees_of_freedom), 1e-15);
  }
}

TEST(Steganalysis, ChiSquareAllOpaqueHasNoContributingPairs) {
  expect_error(ErrorCode::NoContributingPairs, [] { chi_square_lsb(uniform_image(16, 16, 0, 0, 0, 255)); });
}

TEST(Steganalysis, ChiSquareSymmetricWithinPair) {
  // swapping the even/odd counts of one pair leaves the statistic unchanged
  std::mt19937_64 rng(13);
  RgbaImage img = random_image(rng, 24, 24);
  for (std::size_t p = 0; p < img.pixel_count(); ++p)
    if (img.alpha(p) < 2) img.alpha(p) = 100;
  const double before = chi_square_lsb(img).statistic;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    if (img.alpha(p) == 100) img.alpha(p) = 101;
    else if (img.alpha(p) == 101) img.alpha(p) = 100;
  }
  EXPECT_NEAR(chi_square_lsb(img).statistic, before, 1e-9);
}

TEST(Steganalysis, UniformRandomAlphaLooksRandomized) {
  std::mt19937_64 rng(99);
  int above = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    RgbaImage img(64, 64);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) img.alpha(p) = static_cast<std::uint8_t>(2 + rng() % 254);
    if (chi_square_lsb(img).p_value > 0.01) ++above;
  }
  EXPECT_GE(above, 990);
}

TEST(Steganalysis, EmbeddingCollapsesEvenClusteredStatistic) {
  std::mt19937_64 rng(14);
  const IcoFile cover = synthetic("even_alpha64.ico");
  const ChiSquareResult before = chi_square_lsb(image_of(cover));
  EXPECT_LT(before.p_value, 1e-6);
  EXPECT_NEAR(before.statistic, reference_chi_square(image_of(cover)), 1e-9);
  const IcoFile stego = embed(cover, random_bytes(rng, capacity(cover).net_capacity_bytes));
  const ChiSquareResult after = chi_square_lsb(image_of(stego));
  EXPECT_LE(after.statistic * 10, before.statistic);
}

TEST(Steganalysis, ScanFindsEmbeddedFrames) {
  const Bytes payload = to_bytes("console.log('Success from the ICO file!')");
  const IcoFile stego = embed(synthetic("demo.ico"), payload);
  const auto scans = scan_for_frame(stego);
  ASSERT_EQ(scans.size(), 1u);
  EXPECT_TRUE(scans[0].magic_found);
  EXPECT_TRUE(scans[0].frame_plausible);
  ASSERT_TRUE(scans[0].declared_length.has_value());
}

TEST(Steganalysis, ScanFollowsFrameAcrossEntries) {
  // first entry has only 8 eligible pixels, so the magic straddles into entry 1
  RgbaImage small = uniform_image(4, 4, 0, 0, 0, 0);
  for (std::size_t p = 0; p < 8; ++p) small.alpha(p) = 255;
  const IcoFile cover = make_icon({small, uniform_image(32, 32, 5, 5, 5, 255)});
  const IcoFile stego = embed(cover, to_bytes("spanning"), {EntrySelection::all()});
  const auto scans = scan_for_frame(stego);
  EXPECT_TRUE(scans[0].magic_found);
  EXPECT_TRUE(scans[0].frame_plausible);
  EXPECT_EQ(detect(stego).verdict, Verdict::StegoFramePresent);
}

TEST(Steganalysis, ScanRejectsImplausibleLength) {
  // magic + version but a declared length larger than the image can hold
  RgbaImage img = uniform_image(16, 16, 0, 0, 0, 254);
  Bytes fake = {0x49, 0x41, 0x01, 0x00};
  append_u32le(fake, 1000);
  const auto bits = to_bits_msb_first(fake);
  for (std::size_t i = 0; i < bits.size(); ++i) img.alpha(i) = static_cast<std::uint8_t>(254 | bits[i]);
  const auto scans = scan_for_frame(make_icon({img}));
  EXPECT_TRUE(scans[0].magic_found);
  EXPECT_FALSE(scans[0].frame_plausible);
  EXPECT_EQ(scans[0].declared_length, 1000u);
}

TEST(Steganalysis, CompareToCoverCountsOnlyLsbWrites) {
  std::mt19937_64 rng(15);
  for (const char* name : {"demo.ico", "dib32_48.ico", "alpha70_64.ico"}) {
    const IcoFile cover = synthetic(name);
    const Bytes payload = random_bytes(rng, capacity(cover).net_capacity_bytes / 2);
    const IcoFile stego = embed(cover, payload);

    // brute force: framed bits vs cover LSBs over the slot order
    const auto bits = to_bits_msb_first(frame_encode(payload));
    const auto slots = eligible_slots(cover);
    const RgbaImage c = image_of(cover, slots[0].entry_index);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) expected += (c.alpha(slots[i].pixel_index) & 1u) != bits[i];

    const CoverDiffReport r = compare_to_cover(stego, cover, SIZE_MAX);
    EXPECT_TRUE(r.dimensions_match);
    EXPECT_EQ(r.rgb_diff_count, 0u) << name;
    EXPECT_EQ(r.alpha_other_diff_count, 0u) << name;
    EXPECT_EQ(r.alpha_lsb_diff_count, expected) << name;
    EXPECT_LE(r.alpha_lsb_diff_count, bits.size());
    EXPECT_EQ(r.diff_pixel_indices.size(), r.diff_pixel_total);
    for (const auto& d : r.diff_pixel_indices) EXPECT_GE(c.alpha(d.pixel_index), 2);
  }
}

TEST(Steganalysis, CompareToSelfIsEmpty) {
  const IcoFile cover = synthetic("multi_32_48_64.ico");
  const CoverDiffReport r = compare_to_cover(cover, cover);
  EXPECT_TRUE(r.dimensions_match);
  EXPECT_EQ(r.entries_compared, 3u);
  EXPECT_EQ(r.alpha_lsb_diff_count + r.alpha_other_diff_count + r.rgb_diff_count + r.diff_pixel_total, 0u);
}

TEST(Steganalysis, CompareDistinguishesRgbPerturbation) {
  std::mt19937_64 rng(16);
  const IcoFile cover = synthetic("opaque64.ico");
  RgbaImage img = image_of(cover);
  for (std::size_t p = 0; p < img.pixel_count(); p += 7) img.pixels[p * 4 + 1] ^= 0x03;  // lossy-editor-like noise
  IcoFile resaved = cover;
  resaved.entries[0].frame_bytes = encode_frame(img, FrameFormat::PNG);
  const CoverDiffReport r = compare_to_cover(resaved, cover, 10);
  EXPECT_GT(r.rgb_diff_count, 0u);
  EXPECT_EQ(r.alpha_lsb_diff_count, 0u);
  EXPECT_EQ(r.diff_pixel_indices.size(), 10u);
  EXPECT_EQ(r.diff_pixel_total, r.rgb_diff_count);
}

TEST(Steganalysis, CompareReportsGeometryMismatch) {
  const CoverDiffReport r = compare_to_cover(synthetic("opaque64.ico"), synthetic("two_32_64.ico"));
  EXPECT_FALSE(r.dimensions_match);
  EXPECT_EQ(r.entries_compared, 0u);
}

TEST(Steganalysis, DetectVerdicts) {
  std::mt19937_64 rng(17);
  const IcoFile cover = synthetic("opaque64.ico");
  const DetectionReport clean = detect(cover);
  EXPECT_EQ(clean.verdict, Verdict::Clean);
  ASSERT_EQ(clean.per_entry.size(), 1u);
  EXPECT_EQ(clean.per_entry[0].eligible_pixels, 4096u);
  EXPECT_DOUBLE_EQ(*clean.per_entry[0].lsb_entropy_bits, 0.0);
  EXPECT_FALSE(clean.per_entry[0].chi_square_p.has_value());  // single contributing pair

  const IcoFile stego = embed(cover, to_bytes(std::string(3000, 'a')));
  EXPECT_EQ(detect(stego).verdict, Verdict::StegoFramePresent);

  // LSB-randomized without a frame: statistical path
  RgbaImage noisy(64, 64);
  for (std::size_t p = 0; p < noisy.pixel_count(); ++p) noisy.alpha(p) = static_cast<std::uint8_t>(2 + rng() % 254);
  const DetectionReport r = detect(make_icon({noisy}));
  EXPECT_EQ(r.verdict, Verdict::Suspicious);
  DetectorThresholds strict;
  strict.min_entropy = 1.01;
  EXPECT_EQ(detect(make_icon({noisy}), nullptr, strict).verdict, Verdict::Clean);
}

TEST(Steganalysis, DetectSmallEntriesLeaveStatisticsUndefined) {
  const DetectionReport r = detect(synthetic("transparent8.ico"));
  EXPECT_FALSE(r.per_entry[0].lsb_entropy_bits.has_value());
  EXPECT_FALSE(r.per_entry[0].chi_square_stat.has_value());
  EXPECT_EQ(r.verdict, Verdict::Clean);
}

TEST(Steganalysis, CoverComparisonUpgradesCleanToSuspicious) {
  const IcoFile cover = synthetic("opaque64.ico");
  RgbaImage img = image_of(cover);
  img.alpha(17) ^= 1;
  IcoFile touched = cover;
  touched.entries[0].frame_bytes = encode_frame(img, FrameFormat::PNG);
  EXPECT_EQ(detect(touched).verdict, Verdict::Clean);
  const DetectionReport r = detect(touched, &cover);
  EXPECT_EQ(r.verdict, Verdict::Suspicious);
  ASSERT_TRUE(r.cover_diff.has_value());
  EXPECT_EQ(r.cover_diff->alpha_lsb_diff_count, 1u);
}
