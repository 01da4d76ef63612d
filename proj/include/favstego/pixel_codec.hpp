#pragma once

// Lossless RGBA8 decoding/encoding of ICO frames (PNG, or 32-bpp DIB with AND mask).

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "favstego/bytes.hpp"
#include "favstego/error.hpp"
#include "favstego/ico.hpp"

namespace favstego {

/// Top-down, row-major, 4 bytes per pixel (R, G, B, A).
struct RgbaImage {
  int width = 0;
  int height = 0;
  Bytes pixels;

  RgbaImage() = default;
  RgbaImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 4, 0) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t& alpha(std::size_t i) { return pixels[i * 4 + 3]; }
  std::uint8_t alpha(std::size_t i) const { return pixels[i * 4 + 3]; }

  friend bool operator==(const RgbaImage&, const RgbaImage&) = default;
};

struct DecodedFrame {
  RgbaImage image;
  /// Set when the directory geometry disagrees with the frame; the frame wins.
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kBitmapInfoHeaderSize = 40;
inline constexpr int kMaxPngDimension = 4096;

namespace detail {

struct PngReadSource {
  ByteView data;
  std::size_t pos = 0;
};

struct PngErrorSlot {
  char message[256] = {};
};

inline void png_error_to_slot(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<PngErrorSlot*>(png_get_error_ptr(png));
  if (slot != nullptr) std::snprintf(slot->message, sizeof slot->message, "%s", msg);
  png_longjmp(png, 1);
}

inline void png_ignore_warning(png_structp, png_const_charp) {}

inline void png_read_from_span(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->data.size() - src->pos < n) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, src->data.data() + src->pos, n);
  src->pos += n;
}

inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

inline void png_flush_noop(png_structp) {}

// Keeps only trivially destructible locals alive across setjmp; `out` and
// `rows` are owned by the caller.
inline bool png_decode_into(ByteView data, RgbaImage& out, std::vector<png_bytep>& rows,
                            PngErrorSlot& err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_to_slot,
                                           png_ignore_warning);
  if (png == nullptr) {
    std::snprintf(err.message, sizeof err.message, "png_create_read_struct failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::snprintf(err.message, sizeof err.message, "png_create_info_struct failed");
    return false;
  }
  PngReadSource src{data, 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &src, png_read_from_span);
  png_set_user_limits(png, kMaxPngDimension, kMaxPngDimension);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_scale_16(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  if (!(color_type & PNG_COLOR_MASK_ALPHA) && !png_get_valid(png, info, PNG_INFO_tRNS))
    png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(w) * 4)
    png_error(png, "unexpected row layout after RGBA8 transforms");

  out = RgbaImage(static_cast<int>(w), static_cast<int>(h));
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = out.pixels.data() + static_cast<std::size_t>(y) * w * 4;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

inline bool png_encode_into(const RgbaImage& img, Bytes& out, std::vector<png_bytep>& rows,
                            PngErrorSlot& err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_to_slot,
                                            png_ignore_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB_ALPHA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  rows.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y)
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(y) * img.width * 4);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

inline RgbaImage decode_png(ByteView data) {
  RgbaImage img;
  std::vector<png_bytep> rows;
  PngErrorSlot err;
  if (!png_decode_into(data, img, rows, err))
    throw Error(ErrorCode::CorruptFrame, std::string("PNG decode failed: ") + err.message);
  return img;
}

inline std::size_t and_mask_row_bytes(int width) {
  return ((static_cast<std::size_t>(width) + 31) / 32) * 4;
}

inline RgbaImage decode_dib(ByteView data) {
  if (data.size() < kBitmapInfoHeaderSize)
    throw Error(ErrorCode::CorruptFrame, "DIB frame shorter than BITMAPINFOHEADER");
  const std::uint32_t header_size = load_u32le(data, 0);
  const std::int32_t width = load_i32le(data, 4);
  const std::int32_t doubled_height = load_i32le(data, 8);
  const std::uint16_t bpp = load_u16le(data, 14);
  const std::uint32_t compression = load_u32le(data, 16);
  if (header_size < kBitmapInfoHeaderSize || header_size > data.size())
    throw Error(ErrorCode::CorruptFrame, "bad BITMAPINFOHEADER size " + std::to_string(header_size));
  if (bpp != 32) throw Error(ErrorCode::UnsupportedDepth, "DIB bit depth " + std::to_string(bpp) + " (need 32)");
  if (compression != 0) throw Error(ErrorCode::CorruptFrame, "compressed DIB frames are not supported");
  if (width <= 0 || width > 65536 || doubled_height <= 0 || doubled_height % 2 != 0 ||
      doubled_height > 2 * 65536)
    throw Error(ErrorCode::CorruptFrame, "bad DIB dimensions " + std::to_string(width) + "x" +
                                             std::to_string(doubled_height));
  const int height = doubled_height / 2;
  const std::size_t row_bytes = static_cast<std::size_t>(width) * 4;
  const std::size_t xor_bytes = row_bytes * static_cast<std::size_t>(height);
  if (data.size() - header_size < xor_bytes)
    throw Error(ErrorCode::CorruptFrame, "DIB pixel data shorter than declared dimensions");

  RgbaImage img(width, height);
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* src = data.data() + header_size + row_bytes * static_cast<std::size_t>(height - 1 - y);
    std::uint8_t* dst = img.pixels.data() + row_bytes * static_cast<std::size_t>(y);
    for (int x = 0; x < width; ++x, src += 4, dst += 4) {
      dst[0] = src[2];
      dst[1] = src[1];
      dst[2] = src[0];
      dst[3] = src[3];
    }
  }
  return img;
}

inline Bytes encode_dib(const RgbaImage& img) {
  const std::size_t row_bytes = static_cast<std::size_t>(img.width) * 4;
  const std::size_t xor_bytes = row_bytes * static_cast<std::size_t>(img.height);
  const std::size_t mask_bytes = and_mask_row_bytes(img.width) * static_cast<std::size_t>(img.height);
  Bytes out;
  out.reserve(kBitmapInfoHeaderSize + xor_bytes + mask_bytes);
  append_u32le(out, static_cast<std::uint32_t>(kBitmapInfoHeaderSize));
  append_u32le(out, static_cast<std::uint32_t>(img.width));
  append_u32le(out, static_cast<std::uint32_t>(img.height * 2));
  append_u16le(out, 1);   // planes
  append_u16le(out, 32);  // bits per pixel
  append_u32le(out, 0);   // BI_RGB
  append_u32le(out, static_cast<std::uint32_t>(xor_bytes + mask_bytes));
  append_u32le(out, 0);
  append_u32le(out, 0);
  append_u32le(out, 0);
  append_u32le(out, 0);
  for (int y = img.height - 1; y >= 0; --y) {
    const std::uint8_t* src = img.pixels.data() + row_bytes * static_cast<std::size_t>(y);
    for (int x = 0; x < img.width; ++x, src += 4) {
      out.push_back(src[2]);
      out.push_back(src[1]);
      out.push_back(src[0]);
      out.push_back(src[3]);
    }
  }
  out.insert(out.end(), mask_bytes, 0);
  return out;
}

}  // namespace detail

/// Decodes raw frame bytes, dispatching on the PNG signature.
inline RgbaImage decode_frame_bytes(ByteView frame_bytes) {
  if (frame_bytes.empty()) throw Error(ErrorCode::CorruptFrame, "empty frame");
  return classify_frame(frame_bytes) == FrameFormat::PNG ? detail::decode_png(frame_bytes)
                                                         : detail::decode_dib(frame_bytes);
}

inline DecodedFrame decode_frame(const IcoEntry& entry) {
  DecodedFrame out{decode_frame_bytes(entry.frame_bytes), {}};
  if (out.image.width != entry.width_px || out.image.height != entry.height_px)
    out.warnings.push_back("DimensionMismatch: directory says " + std::to_string(entry.width_px) + "x" +
                           std::to_string(entry.height_px) + ", frame is " +
                           std::to_string(out.image.width) + "x" + std::to_string(out.image.height));
  return out;
}

inline Bytes encode_frame(const RgbaImage& image, FrameFormat format) {
  if (image.width <= 0 || image.height <= 0)
    throw Error(ErrorCode::ZeroDimension, "image has zero width or height");
  if (image.pixels.size() != image.pixel_count() * 4)
    throw Error(ErrorCode::CorruptFrame, "pixel buffer length does not match dimensions");
  if (format == FrameFormat::DIB) return detail::encode_dib(image);

  Bytes out;
  std::vector<png_bytep> rows;
  detail::PngErrorSlot err;
  if (!detail::png_encode_into(image, out, rows, err))
    throw Error(ErrorCode::CorruptFrame, std::string("PNG encode failed: ") + err.message);
  return out;
}

}  // namespace favstego
