#pragma once

// Alpha-LSB channel over the concatenated alpha planes of an ICO.
//
// Channel convention (shared with the browser extractor):
//  * a pixel is an eligible slot iff its alpha is >= 2, so a written LSB can
//    never turn it transparent and desynchronize the reader;
//  * slots are ordered by entry (directory order, restricted by EntrySelection)
//    and then row-major top-down within the decoded image;
//  * framed payload bytes are written MSB-first, one bit per slot.

#include <cstdint>
#include <string>
#include <vector>

#include "favstego/bytes.hpp"
#include "favstego/error.hpp"
#include "favstego/framing.hpp"
#include "favstego/ico.hpp"
#include "favstego/pixel_codec.hpp"

namespace favstego {

inline constexpr std::uint8_t kMinEligibleAlpha = 2;

inline bool is_eligible_alpha(std::uint8_t alpha) { return alpha >= kMinEligibleAlpha; }

struct EntrySelection {
  enum class Kind { Largest, Single, All };
  Kind kind = Kind::Largest;
  std::size_t index = 0;  // only meaningful for Single

  static EntrySelection largest() { return {Kind::Largest, 0}; }
  static EntrySelection single(std::size_t i) { return {Kind::Single, i}; }
  static EntrySelection all() { return {Kind::All, 0}; }

  friend bool operator==(const EntrySelection&, const EntrySelection&) = default;
};

inline std::string to_string(const EntrySelection& s) {
  switch (s.kind) {
    case EntrySelection::Kind::Largest: return "largest";
    case EntrySelection::Kind::All: return "all";
    case EntrySelection::Kind::Single: return std::to_string(s.index);
  }
  return "?";
}

struct EmbedOptions {
  EntrySelection entry_selection = EntrySelection::largest();
};

struct EmbedSlot {
  std::size_t entry_index = 0;
  std::size_t pixel_index = 0;

  friend bool operator==(const EmbedSlot&, const EmbedSlot&) = default;
};

struct EntryCapacity {
  std::size_t entry_index = 0;
  int width = 0;
  int height = 0;
  std::size_t eligible_pixels = 0;
  double eligible_fraction = 0.0;
};

struct CapacityReport {
  std::vector<EntryCapacity> per_entry;
  std::size_t total_eligible_bits = 0;
  std::size_t gross_capacity_bytes = 0;
  std::size_t net_capacity_bytes = 0;
};

struct EmbedSummary {
  std::vector<std::size_t> entries_used;  // entries that received at least one bit
  std::size_t bits_written = 0;
  std::size_t slack_bits = 0;
  std::size_t payload_bytes = 0;
  std::size_t stored_body_bytes = 0;
  bool compressed = false;
};

struct EmbedResult {
  IcoFile file;
  EmbedSummary summary;
};

/// Largest directory area wins; ties go to the lowest index.
inline std::size_t largest_entry_index(const IcoFile& file) {
  if (file.entries.empty()) throw Error(ErrorCode::ZeroEntries, "icon has no entries");
  std::size_t best = 0;
  for (std::size_t i = 1; i < file.entries.size(); ++i)
    if (file.entries[i].pixel_area() > file.entries[best].pixel_area()) best = i;
  return best;
}

/// Entry indices covered by the selection, in directory order.
inline std::vector<std::size_t> selected_entries(const IcoFile& file, const EntrySelection& sel) {
  if (file.entries.empty()) throw Error(ErrorCode::ZeroEntries, "icon has no entries");
  switch (sel.kind) {
    case EntrySelection::Kind::Largest:
      return {largest_entry_index(file)};
    case EntrySelection::Kind::Single:
      if (sel.index >= file.entries.size())
        throw Error(ErrorCode::InvalidOption, "entry index " + std::to_string(sel.index) +
                                                  " out of range (icon has " +
                                                  std::to_string(file.entries.size()) + " entries)");
      return {sel.index};
    case EntrySelection::Kind::All: {
      std::vector<std::size_t> all(file.entries.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      return all;
    }
  }
  return {};
}

namespace detail {

struct SelectedImage {
  std::size_t entry_index;
  RgbaImage image;
};

inline std::vector<SelectedImage> decode_selected(const IcoFile& file, const EntrySelection& sel) {
  std::vector<SelectedImage> out;
  for (std::size_t i : selected_entries(file, sel)) out.push_back({i, decode_frame(file.entries[i]).image});
  return out;
}

inline std::vector<std::size_t> eligible_pixels_of(const RgbaImage& img) {
  std::vector<std::size_t> idx;
  for (std::size_t p = 0; p < img.pixel_count(); ++p)
    if (is_eligible_alpha(img.alpha(p))) idx.push_back(p);
  return idx;
}

inline std::size_t count_eligible(const RgbaImage& img) {
  std::size_t n = 0;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) n += is_eligible_alpha(img.alpha(p)) ? 1 : 0;
  return n;
}

/// Alpha LSBs of the eligible pixels of each image, concatenated in order.
inline std::vector<std::uint8_t> harvest_bits(const std::vector<SelectedImage>& images) {
  std::vector<std::uint8_t> bits;
  for (const auto& s : images)
    for (std::size_t p = 0; p < s.image.pixel_count(); ++p)
      if (is_eligible_alpha(s.image.alpha(p))) bits.push_back(s.image.alpha(p) & 1u);
  return bits;
}

/// Re-encodes a frame in its original format and marks the directory entry 32 bpp.
inline void store_image(IcoEntry& entry, const RgbaImage& img) {
  const FrameFormat format = entry.frame_format();
  entry.frame_bytes = encode_frame(img, format);
  entry.bit_count = 32;
  entry.color_count = 0;
}

}  // namespace detail

inline std::vector<EmbedSlot> eligible_slots(const IcoFile& file, const EmbedOptions& options = {}) {
  std::vector<EmbedSlot> slots;
  for (const auto& s : detail::decode_selected(file, options.entry_selection))
    for (std::size_t p : detail::eligible_pixels_of(s.image)) slots.push_back({s.entry_index, p});
  return slots;
}

inline CapacityReport capacity(const IcoFile& file, const EmbedOptions& options = {}) {
  CapacityReport report;
  for (const auto& s : detail::decode_selected(file, options.entry_selection)) {
    EntryCapacity c;
    c.entry_index = s.entry_index;
    c.width = s.image.width;
    c.height = s.image.height;
    c.eligible_pixels = detail::count_eligible(s.image);
    c.eligible_fraction = static_cast<double>(c.eligible_pixels) / static_cast<double>(s.image.pixel_count());
    report.total_eligible_bits += c.eligible_pixels;
    report.per_entry.push_back(c);
  }
  report.gross_capacity_bytes = report.total_eligible_bits / 8;
  report.net_capacity_bytes =
      report.gross_capacity_bytes > kFrameOverhead ? report.gross_capacity_bytes - kFrameOverhead : 0;
  return report;
}

inline EmbedResult embed_with_summary(const IcoFile& file, ByteView payload, const EmbedOptions& options = {}) {
  auto images = detail::decode_selected(file, options.entry_selection);
  const Bytes framed = frame_encode(payload);
  const std::vector<std::uint8_t> bits = to_bits_msb_first(framed);

  std::size_t available = 0;
  for (const auto& s : images) available += detail::count_eligible(s.image);
  if (bits.size() > available)
    throw Error(ErrorCode::PayloadTooLarge, "Payload too large for this image (" + std::to_string(bits.size()) +
                                                " framed bits, " + std::to_string(available) + " eligible slots)");

  EmbedResult result{file, {}};
  std::size_t next_bit = 0;
  for (auto& s : images) {
    if (next_bit == bits.size()) break;
    const std::size_t first_bit = next_bit;
    for (std::size_t p = 0; p < s.image.pixel_count() && next_bit < bits.size(); ++p) {
      std::uint8_t& a = s.image.alpha(p);
      if (!is_eligible_alpha(a)) continue;
      a = static_cast<std::uint8_t>((a & 0xFE) | bits[next_bit++]);
    }
    if (next_bit == first_bit) continue;
    detail::store_image(result.file.entries[s.entry_index], s.image);
    result.summary.entries_used.push_back(s.entry_index);
  }

  const FrameHeader header = read_frame_header(framed);
  result.summary.bits_written = bits.size();
  result.summary.slack_bits = available - bits.size();
  result.summary.payload_bytes = payload.size();
  result.summary.stored_body_bytes = header.body_length;
  result.summary.compressed = header.compressed();
  return result;
}

/// Fails with PayloadTooLarge when the framed payload needs more bits than there are slots.
inline IcoFile embed(const IcoFile& file, ByteView payload, const EmbedOptions& options = {}) {
  return embed_with_summary(file, payload, options).file;
}

/// Raw alpha-LSB byte stream of the selected entries, before frame decoding.
inline Bytes harvest_stream(const IcoFile& file, const EmbedOptions& options = {}) {
  return from_bits_msb_first(detail::harvest_bits(detail::decode_selected(file, options.entry_selection)));
}

inline Bytes extract(const IcoFile& file, const EmbedOptions& options = {}) {
  return frame_decode(harvest_stream(file, options));
}

}  // namespace favstego
