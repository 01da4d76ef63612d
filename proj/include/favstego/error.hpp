#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace favstego {

enum class ErrorCode {
  // container
  MalformedHeader,
  TruncatedFile,
  ZeroEntries,
  TooManyEntries,
  OversizeFrame,
  // pixels
  UnsupportedDepth,
  CorruptFrame,
  ZeroDimension,
  // framing
  BadMagic,
  UnsupportedVersion,
  TruncatedBody,
  IntegrityFailure,
  InflateError,
  // channel
  PayloadTooLarge,
  InvalidOption,
  // statistics
  InsufficientSample,
  NoContributingPairs,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::ZeroEntries: return "ZeroEntries";
    case ErrorCode::TooManyEntries: return "TooManyEntries";
    case ErrorCode::OversizeFrame: return "OversizeFrame";
    case ErrorCode::UnsupportedDepth: return "UnsupportedDepth";
    case ErrorCode::CorruptFrame: return "CorruptFrame";
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedBody: return "TruncatedBody";
    case ErrorCode::IntegrityFailure: return "IntegrityFailure";
    case ErrorCode::InflateError: return "InflateError";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::InvalidOption: return "InvalidOption";
    case ErrorCode::InsufficientSample: return "InsufficientSample";
    case ErrorCode::NoContributingPairs: return "NoContributingPairs";
  }
  return "Unknown";
}

/// True for the errors raised by the payload envelope decoder.
constexpr bool is_framing_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadMagic:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::TruncatedBody:
    case ErrorCode::IntegrityFailure:
    case ErrorCode::InflateError:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace favstego
