#pragma once

// Payload envelope written into the alpha LSB stream:
//
//   offset  size  field
//   0       2     magic "IA" (0x49 0x41)
//   2       1     version (0x01)
//   3       1     flags (bit0: body is raw DEFLATE; other bits zero)
//   4       4     body length, u32 LE
//   8       n     body
//   8+n     4     CRC32 (IEEE) of the original payload, u32 LE

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "favstego/bytes.hpp"
#include "favstego/error.hpp"

namespace favstego {

inline constexpr std::uint8_t kFrameMagic0 = 0x49;
inline constexpr std::uint8_t kFrameMagic1 = 0x41;
inline constexpr std::uint8_t kFrameVersion = 0x01;
inline constexpr std::uint8_t kFlagCompressed = 0x01;
inline constexpr std::size_t kFrameOverhead = 12;
inline constexpr std::size_t kFramePrefixSize = 8;
/// Inflate output cap; frames claiming more are treated as corrupt.
inline constexpr std::size_t kMaxInflatedSize = std::size_t{1} << 28;

struct FrameHeader {
  std::uint8_t version = 0;
  std::uint8_t flags = 0;
  std::uint32_t body_length = 0;

  bool compressed() const { return (flags & kFlagCompressed) != 0; }
};

inline std::uint32_t crc32_ieee(ByteView data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for >4 GiB safety.
  std::size_t pos = 0;
  while (pos < data.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(data.size() - pos, 1u << 30));
    crc = crc32(crc, data.data() + pos, n);
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

inline Bytes deflate_raw(ByteView data, int level = Z_BEST_COMPRESSION) {
  z_stream zs{};
  if (deflateInit2(&zs, level, Z_DEFLATED, -15, 9, Z_DEFAULT_STRATEGY) != Z_OK)
    throw std::runtime_error("deflateInit2 failed");
  Bytes out(deflateBound(&zs, static_cast<uLong>(data.size())));
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const std::size_t produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw std::runtime_error("deflate did not finish");
  out.resize(produced);
  return out;
}

/// Inflates a raw DEFLATE stream that must occupy all of `data`.
inline Bytes inflate_raw(ByteView data, std::size_t max_output = kMaxInflatedSize) {
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) throw Error(ErrorCode::InflateError, "inflateInit2 failed");
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  Bytes out;
  std::uint8_t chunk[16384];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk;
    zs.avail_out = sizeof chunk;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw Error(ErrorCode::InflateError, zs.msg != nullptr ? zs.msg : "inflate failed");
    }
    const std::size_t produced = sizeof chunk - zs.avail_out;
    if (out.size() + produced > max_output) {
      inflateEnd(&zs);
      throw Error(ErrorCode::InflateError, "inflated size exceeds limit");
    }
    out.insert(out.end(), chunk, chunk + produced);
    if (rc == Z_OK && produced == 0 && zs.avail_in == 0) {
      inflateEnd(&zs);
      throw Error(ErrorCode::InflateError, "DEFLATE stream ended prematurely");
    }
  }
  const bool leftover = zs.avail_in != 0;
  inflateEnd(&zs);
  if (leftover) throw Error(ErrorCode::InflateError, "trailing bytes after DEFLATE stream");
  return out;
}

/// Compresses only when that makes the body strictly smaller.
inline Bytes frame_encode(ByteView payload) {
  if (payload.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::PayloadTooLarge, "payload length does not fit u32");
  Bytes body;
  std::uint8_t flags = 0;
  if (!payload.empty()) {
    Bytes compressed = deflate_raw(payload);
    if (compressed.size() < payload.size()) {
      body = std::move(compressed);
      flags |= kFlagCompressed;
    }
  }
  ByteView stored = (flags & kFlagCompressed) ? ByteView(body) : payload;

  Bytes out;
  out.reserve(kFrameOverhead + stored.size());
  out.push_back(kFrameMagic0);
  out.push_back(kFrameMagic1);
  out.push_back(kFrameVersion);
  out.push_back(flags);
  append_u32le(out, static_cast<std::uint32_t>(stored.size()));
  out.insert(out.end(), stored.begin(), stored.end());
  append_u32le(out, crc32_ieee(payload));
  return out;
}

inline bool has_frame_magic(ByteView stream) {
  return stream.size() >= 2 && stream[0] == kFrameMagic0 && stream[1] == kFrameMagic1;
}

/// Validates magic and version and returns the fixed-size prefix fields.
inline FrameHeader read_frame_header(ByteView stream) {
  if (!has_frame_magic(stream)) throw Error(ErrorCode::BadMagic, "no stego frame found");
  if (stream.size() < kFramePrefixSize) throw Error(ErrorCode::TruncatedBody, "frame header is truncated");
  FrameHeader h{stream[2], stream[3], load_u32le(stream, 4)};
  if (h.version != kFrameVersion)
    throw Error(ErrorCode::UnsupportedVersion, "frame version " + std::to_string(h.version));
  return h;
}

inline Bytes frame_decode(ByteView stream) {
  const FrameHeader h = read_frame_header(stream);
  const std::uint64_t needed = kFrameOverhead + static_cast<std::uint64_t>(h.body_length);
  if (needed > stream.size())
    throw Error(ErrorCode::TruncatedBody, "frame declares " + std::to_string(h.body_length) +
                                              " body bytes but only " +
                                              std::to_string(stream.size() - std::min(stream.size(), kFrameOverhead)) +
                                              " are available");
  ByteView body = stream.subspan(kFramePrefixSize, h.body_length);
  const std::uint32_t expected_crc = load_u32le(stream, kFramePrefixSize + h.body_length);
  Bytes payload = h.compressed() ? inflate_raw(body) : Bytes(body.begin(), body.end());
  if (crc32_ieee(payload) != expected_crc) throw Error(ErrorCode::IntegrityFailure, "CRC32 mismatch");
  return payload;
}

}  // namespace favstego
