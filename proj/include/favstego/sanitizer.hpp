#pragma once

// Alpha-LSB neutralization: every change is at most one alpha unit, RGB and
// fully transparent pixels are never touched.

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "favstego/engine.hpp"
#include "favstego/error.hpp"
#include "favstego/ico.hpp"
#include "favstego/pixel_codec.hpp"

namespace favstego {

enum class SanitizeMode { RandomizeLsb, NormalizeExtremes, Both };

constexpr std::string_view to_string(SanitizeMode m) noexcept {
  switch (m) {
    case SanitizeMode::RandomizeLsb: return "randomize_lsb";
    case SanitizeMode::NormalizeExtremes: return "normalize_extremes";
    case SanitizeMode::Both: return "both";
  }
  return "?";
}

struct SanitizeOptions {
  SanitizeMode mode = SanitizeMode::Both;
  std::optional<std::uint64_t> rng_seed;  // unset: seeded from std::random_device
};

struct NeutralizationCheck {
  bool neutralized = false;
  std::string reason;
};

namespace detail {

inline void normalize_extremes(RgbaImage& img) {
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    std::uint8_t& a = img.alpha(p);
    if (a == 1) a = 0;
    else if (a == 254) a = 255;
  }
}

inline void randomize_lsb(RgbaImage& img, std::mt19937_64& rng) {
  std::uint64_t pool = 0;
  int remaining = 0;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    std::uint8_t& a = img.alpha(p);
    if (!is_eligible_alpha(a)) continue;
    if (remaining == 0) {
      pool = rng();
      remaining = 64;
    }
    a = static_cast<std::uint8_t>((a & 0xFE) | (pool & 1u));
    pool >>= 1;
    --remaining;
  }
}

inline std::uint64_t os_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace detail

inline IcoFile sanitize(const IcoFile& file, const SanitizeOptions& options = {}) {
  std::mt19937_64 rng(options.rng_seed ? *options.rng_seed : detail::os_seed());
  IcoFile out = file;
  for (IcoEntry& entry : out.entries) {
    RgbaImage img = decode_frame(entry).image;
    if (options.mode != SanitizeMode::RandomizeLsb) detail::normalize_extremes(img);
    if (options.mode != SanitizeMode::NormalizeExtremes) detail::randomize_lsb(img, rng);
    detail::store_image(entry, img);
  }
  return out;
}

/// True iff extraction fails at the framing layer for both the largest entry
/// and the all-entries stream. Codec failures report false with the reason.
inline NeutralizationCheck verify_neutralized(const IcoFile& file) {
  NeutralizationCheck check{true, {}};
  for (const EntrySelection sel : {EntrySelection::largest(), EntrySelection::all()}) {
    try {
      const Bytes payload = extract(file, {sel});
      return {false, "payload of " + std::to_string(payload.size()) + " bytes still extractable (entry " +
                         to_string(sel) + ")"};
    } catch (const Error& e) {
      if (!is_framing_error(e.code())) return {false, e.what()};
      if (!check.reason.empty()) check.reason += "; ";
      check.reason += to_string(sel) + ": " + std::string(to_string(e.code()));
    }
  }
  return check;
}

}  // namespace favstego
