#pragma once

// Statistical and structural detection of the alpha-LSB channel.

#include <boost/math/special_functions/gamma.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "favstego/engine.hpp"
#include "favstego/error.hpp"
#include "favstego/framing.hpp"
#include "favstego/ico.hpp"
#include "favstego/pixel_codec.hpp"

namespace favstego {

/// Below this many eligible pixels entropy and chi-square are left undefined.
inline constexpr std::size_t kMinStatisticSample = 64;

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 0.0;
  int degrees_of_freedom = 0;
};

struct FrameScan {
  std::size_t entry_index = 0;
  bool magic_found = false;
  bool frame_plausible = false;
  std::optional<std::uint32_t> declared_length;
  /// Eligible bits from this entry's first slot to the end of the file.
  std::size_t available_bits = 0;
};

struct DiffLocation {
  std::size_t entry_index = 0;
  std::size_t pixel_index = 0;

  friend bool operator==(const DiffLocation&, const DiffLocation&) = default;
};

struct CoverDiffReport {
  bool dimensions_match = true;
  std::size_t entries_compared = 0;
  std::size_t alpha_lsb_diff_count = 0;
  std::size_t alpha_other_diff_count = 0;
  std::size_t rgb_diff_count = 0;
  std::size_t diff_pixel_total = 0;
  std::vector<DiffLocation> diff_pixel_indices;  // first max_listed differing pixels
};

enum class Verdict { Clean, Suspicious, StegoFramePresent };

constexpr std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Clean: return "clean";
    case Verdict::Suspicious: return "suspicious";
    case Verdict::StegoFramePresent: return "stego_frame_present";
  }
  return "?";
}

struct EntryDetection {
  std::size_t entry_index = 0;
  std::size_t eligible_pixels = 0;
  std::optional<double> lsb_entropy_bits;
  std::optional<double> chi_square_stat;
  std::optional<double> chi_square_p;
  bool magic_found = false;
  bool frame_plausible = false;
};

struct DetectionReport {
  std::vector<EntryDetection> per_entry;
  Verdict verdict = Verdict::Clean;
  std::optional<CoverDiffReport> cover_diff;
};

/// Calibration defaults; not derived from any published threshold.
struct DetectorThresholds {
  double min_entropy = 0.90;
  double min_p_value = 0.05;
  std::size_t min_eligible_pixels = 256;
};

namespace detail {

struct LsbCounts {
  std::size_t zeros = 0;
  std::size_t ones = 0;
  std::size_t total() const { return zeros + ones; }
};

inline LsbCounts eligible_lsb_counts(const RgbaImage& img) {
  LsbCounts c;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    const std::uint8_t a = img.alpha(p);
    if (!is_eligible_alpha(a)) continue;
    (a & 1u) ? ++c.ones : ++c.zeros;
  }
  return c;
}

inline double binary_entropy(std::size_t zeros, std::size_t ones) {
  const double n = static_cast<double>(zeros + ones);
  double h = 0.0;
  for (std::size_t k : {zeros, ones}) {
    if (k == 0) continue;
    const double p = static_cast<double>(k) / n;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace detail

/// Upper tail of the chi-square distribution.
inline double chi_square_survival(double statistic, int degrees_of_freedom) {
  return boost::math::gamma_q(degrees_of_freedom / 2.0, statistic / 2.0);
}

inline double lsb_entropy(const RgbaImage& image) {
  const auto c = detail::eligible_lsb_counts(image);
  if (c.total() < kMinStatisticSample)
    throw Error(ErrorCode::InsufficientSample, std::to_string(c.total()) + " eligible pixels (need " +
                                                   std::to_string(kMinStatisticSample) + ")");
  return detail::binary_entropy(c.zeros, c.ones);
}

/// Pairs-of-values test over the eligible alpha histogram. A small statistic
/// (p near 1) means even/odd counts are equalized, as LSB replacement does.
inline ChiSquareResult chi_square_lsb(const RgbaImage& image) {
  std::array<std::size_t, 256> hist{};
  std::size_t eligible = 0;
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    const std::uint8_t a = image.alpha(p);
    if (!is_eligible_alpha(a)) continue;
    ++hist[a];
    ++eligible;
  }
  if (eligible < kMinStatisticSample)
    throw Error(ErrorCode::InsufficientSample, std::to_string(eligible) + " eligible pixels (need " +
                                                   std::to_string(kMinStatisticSample) + ")");
  double stat = 0.0;
  int pairs = 0;
  for (std::size_t k = 0; k < 128; ++k) {
    const double even = static_cast<double>(hist[2 * k]);
    const double odd = static_cast<double>(hist[2 * k + 1]);
    if (even + odd == 0.0) continue;
    const double expected = (even + odd) / 2.0;
    stat += (even - expected) * (even - expected) / expected;
    ++pairs;
  }
  if (pairs < 2)
    throw Error(ErrorCode::NoContributingPairs, std::to_string(pairs) + " contributing value pair(s)");
  ChiSquareResult r;
  r.statistic = stat;
  r.degrees_of_freedom = pairs - 1;
  r.p_value = chi_square_survival(stat, r.degrees_of_freedom);
  return r;
}

inline std::vector<FrameScan> scan_for_frame(const IcoFile& file) {
  const auto images = detail::decode_selected(file, EntrySelection::all());
  std::vector<std::vector<std::uint8_t>> entry_bits;
  for (const auto& s : images) entry_bits.push_back(detail::harvest_bits({s}));

  std::vector<FrameScan> scans;
  std::size_t bits_after = 0;
  for (const auto& b : entry_bits) bits_after += b.size();

  for (std::size_t i = 0; i < images.size(); ++i) {
    FrameScan scan;
    scan.entry_index = images[i].entry_index;
    scan.available_bits = bits_after;
    bits_after -= entry_bits[i].size();
    if (entry_bits[i].empty()) {
      scans.push_back(scan);
      continue;
    }
    // Only the 8-byte prefix is needed; it may straddle into later entries.
    std::vector<std::uint8_t> prefix_bits;
    for (std::size_t j = i; j < entry_bits.size() && prefix_bits.size() < kFramePrefixSize * 8; ++j)
      for (std::uint8_t bit : entry_bits[j]) {
        if (prefix_bits.size() == kFramePrefixSize * 8) break;
        prefix_bits.push_back(bit);
      }
    const Bytes prefix = from_bits_msb_first(prefix_bits);
    scan.magic_found = has_frame_magic(prefix);
    if (scan.magic_found && prefix.size() == kFramePrefixSize) {
      const std::uint32_t length = load_u32le(prefix, 4);
      scan.declared_length = length;
      const bool header_ok = prefix[2] == kFrameVersion && (prefix[3] & ~kFlagCompressed) == 0;
      scan.frame_plausible =
          header_ok && 8 * (kFrameOverhead + static_cast<std::uint64_t>(length)) <= scan.available_bits;
    }
    scans.push_back(scan);
  }
  return scans;
}

/// Pixel-level diff against a known original. Entries are compared pairwise by
/// index when both exist and share decoded geometry.
inline CoverDiffReport compare_to_cover(const IcoFile& suspect, const IcoFile& original,
                                        std::size_t max_listed = 256) {
  CoverDiffReport r;
  r.dimensions_match = suspect.entries.size() == original.entries.size();
  const std::size_t n = std::min(suspect.entries.size(), original.entries.size());
  for (std::size_t e = 0; e < n; ++e) {
    const RgbaImage s = decode_frame(suspect.entries[e]).image;
    const RgbaImage o = decode_frame(original.entries[e]).image;
    if (s.width != o.width || s.height != o.height) {
      r.dimensions_match = false;
      continue;
    }
    ++r.entries_compared;
    for (std::size_t p = 0; p < s.pixel_count(); ++p) {
      const std::uint8_t* sp = &s.pixels[p * 4];
      const std::uint8_t* op = &o.pixels[p * 4];
      const bool rgb = sp[0] != op[0] || sp[1] != op[1] || sp[2] != op[2];
      // LSB-only means the alpha bytes differ in bit 0 alone; 1<->2 is |d|=1 but not an LSB write.
      const std::uint8_t alpha_xor = sp[3] ^ op[3];
      if (rgb) ++r.rgb_diff_count;
      if (alpha_xor == 1) {
        ++r.alpha_lsb_diff_count;
      } else if (alpha_xor != 0) {
        ++r.alpha_other_diff_count;
      }
      if (rgb || alpha_xor != 0) {
        ++r.diff_pixel_total;
        if (r.diff_pixel_indices.size() < max_listed) r.diff_pixel_indices.push_back({e, p});
      }
    }
  }
  return r;
}

inline DetectionReport detect(const IcoFile& file, const IcoFile* cover = nullptr,
                              const DetectorThresholds& thresholds = {}) {
  DetectionReport report;
  const auto scans = scan_for_frame(file);
  bool frame_hit = false;
  bool statistically_suspicious = false;
  for (std::size_t i = 0; i < file.entries.size(); ++i) {
    const RgbaImage img = decode_frame(file.entries[i]).image;
    EntryDetection d;
    d.entry_index = i;
    d.eligible_pixels = detail::count_eligible(img);
    d.magic_found = scans[i].magic_found;
    d.frame_plausible = scans[i].frame_plausible;
    if (d.eligible_pixels >= kMinStatisticSample) {
      d.lsb_entropy_bits = lsb_entropy(img);
      try {
        const ChiSquareResult chi = chi_square_lsb(img);
        d.chi_square_stat = chi.statistic;
        d.chi_square_p = chi.p_value;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoContributingPairs) throw;
      }
    }
    frame_hit = frame_hit || (d.magic_found && d.frame_plausible);
    if (d.eligible_pixels >= thresholds.min_eligible_pixels && d.lsb_entropy_bits &&
        *d.lsb_entropy_bits >= thresholds.min_entropy && d.chi_square_p &&
        *d.chi_square_p >= thresholds.min_p_value)
      statistically_suspicious = true;
    report.per_entry.push_back(d);
  }
  if (cover != nullptr) report.cover_diff = compare_to_cover(file, *cover);

  if (frame_hit) {
    report.verdict = Verdict::StegoFramePresent;
  } else if (statistically_suspicious || (report.cover_diff && report.cover_diff->alpha_lsb_diff_count > 0)) {
    report.verdict = Verdict::Suspicious;
  }
  return report;
}

}  // namespace favstego
