#pragma once

// ICO container: 6-byte header, 16-byte directory entries, frame blobs.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "favstego/bytes.hpp"
#include "favstego/error.hpp"

namespace favstego {

enum class FrameFormat { PNG, DIB };

constexpr std::string_view to_string(FrameFormat f) noexcept {
  return f == FrameFormat::PNG ? "PNG" : "DIB";
}

inline constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 0x50, 0x4E, 0x47,
                                                             0x0D, 0x0A, 0x1A, 0x0A};
inline constexpr std::size_t kIcoHeaderSize = 6;
inline constexpr std::size_t kIcoDirEntrySize = 16;

inline FrameFormat classify_frame(ByteView frame_bytes) {
  if (frame_bytes.size() >= kPngSignature.size() &&
      std::equal(kPngSignature.begin(), kPngSignature.end(), frame_bytes.begin()))
    return FrameFormat::PNG;
  return FrameFormat::DIB;
}

struct IcoEntry {
  int width_px = 0;   // 1..256
  int height_px = 0;  // 1..256
  std::uint8_t color_count = 0;
  std::uint16_t planes = 0;
  std::uint16_t bit_count = 0;
  Bytes frame_bytes;

  FrameFormat frame_format() const { return classify_frame(frame_bytes); }
  long long pixel_area() const { return static_cast<long long>(width_px) * height_px; }

  friend bool operator==(const IcoEntry&, const IcoEntry&) = default;
};

struct IcoFile {
  std::vector<IcoEntry> entries;
  Bytes trailing_bytes;

  friend bool operator==(const IcoFile&, const IcoFile&) = default;
};

namespace detail {

inline int decode_dimension_byte(std::uint8_t b) { return b == 0 ? 256 : b; }

inline std::uint8_t encode_dimension_byte(int px) {
  if (px < 1 || px > 256)
    throw Error(ErrorCode::InvalidOption, "icon dimension out of range 1..256: " + std::to_string(px));
  return static_cast<std::uint8_t>(px == 256 ? 0 : px);
}

}  // namespace detail

/// Parses an ICO buffer. Frames may be laid out with gaps or out of order;
/// bytes after the furthest frame end are kept as trailing_bytes.
inline IcoFile parse_ico(ByteView bytes) {
  if (bytes.size() < kIcoHeaderSize)
    throw Error(ErrorCode::TruncatedFile, "file shorter than the 6-byte ICO header");
  const std::uint16_t reserved = load_u16le(bytes, 0);
  const std::uint16_t type = load_u16le(bytes, 2);
  const std::uint16_t count = load_u16le(bytes, 4);
  if (reserved != 0) throw Error(ErrorCode::MalformedHeader, "reserved header field is not zero");
  if (type != 1) throw Error(ErrorCode::MalformedHeader, "resource type " + std::to_string(type) + " is not an icon");
  if (count == 0) throw Error(ErrorCode::ZeroEntries, "directory declares no images");

  const std::size_t table_end = kIcoHeaderSize + kIcoDirEntrySize * count;
  if (table_end > bytes.size())
    throw Error(ErrorCode::TruncatedFile, "directory table extends past end of file");

  IcoFile file;
  file.entries.reserve(count);
  std::size_t furthest_end = table_end;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = kIcoHeaderSize + kIcoDirEntrySize * i;
    IcoEntry e;
    e.width_px = detail::decode_dimension_byte(bytes[at]);
    e.height_px = detail::decode_dimension_byte(bytes[at + 1]);
    e.color_count = bytes[at + 2];
    e.planes = load_u16le(bytes, at + 4);
    e.bit_count = load_u16le(bytes, at + 6);
    const std::uint64_t size = load_u32le(bytes, at + 8);
    const std::uint64_t offset = load_u32le(bytes, at + 12);
    if (size == 0)
      throw Error(ErrorCode::MalformedHeader, "entry " + std::to_string(i) + " has zero size");
    if (offset < table_end)
      throw Error(ErrorCode::MalformedHeader,
                  "entry " + std::to_string(i) + " overlaps the header or directory table");
    if (offset + size > bytes.size())
      throw Error(ErrorCode::TruncatedFile, "entry " + std::to_string(i) + " window exceeds file size");
    e.frame_bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                         bytes.begin() + static_cast<std::ptrdiff_t>(offset + size));
    furthest_end = std::max<std::size_t>(furthest_end, offset + size);
    file.entries.push_back(std::move(e));
  }
  file.trailing_bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(furthest_end), bytes.end());
  return file;
}

/// Canonical layout: header, directory, frames packed in entry order, trailing bytes.
inline Bytes serialize_ico(const IcoFile& file) {
  const std::size_t count = file.entries.size();
  if (count > std::numeric_limits<std::uint16_t>::max())
    throw Error(ErrorCode::TooManyEntries, std::to_string(count) + " entries exceed the u16 count field");
  if (count == 0) throw Error(ErrorCode::ZeroEntries, "cannot serialize an icon without entries");

  std::uint64_t offset = kIcoHeaderSize + kIcoDirEntrySize * count;
  std::uint64_t total = offset + file.trailing_bytes.size();
  for (const IcoEntry& e : file.entries) total += e.frame_bytes.size();

  Bytes out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(total, std::uint64_t{1} << 32)));
  append_u16le(out, 0);
  append_u16le(out, 1);
  append_u16le(out, static_cast<std::uint16_t>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const IcoEntry& e = file.entries[i];
    if (e.frame_bytes.empty())
      throw Error(ErrorCode::InvalidOption, "entry " + std::to_string(i) + " has no frame bytes");
    const std::uint64_t size = e.frame_bytes.size();
    if (size > std::numeric_limits<std::uint32_t>::max() ||
        offset > std::numeric_limits<std::uint32_t>::max())
      throw Error(ErrorCode::OversizeFrame, "entry " + std::to_string(i) + " does not fit u32 size/offset");
    out.push_back(detail::encode_dimension_byte(e.width_px));
    out.push_back(detail::encode_dimension_byte(e.height_px));
    out.push_back(e.color_count);
    out.push_back(0);
    append_u16le(out, e.planes);
    append_u16le(out, e.bit_count);
    append_u32le(out, static_cast<std::uint32_t>(size));
    append_u32le(out, static_cast<std::uint32_t>(offset));
    offset += size;
  }
  for (const IcoEntry& e : file.entries) out.insert(out.end(), e.frame_bytes.begin(), e.frame_bytes.end());
  out.insert(out.end(), file.trailing_bytes.begin(), file.trailing_bytes.end());
  return out;
}

}  // namespace favstego
