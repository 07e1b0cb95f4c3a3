#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace mvkit {

// Every failure the library can raise, by identity rather than by message.
// The CLI maps these to machine-readable error reports.
enum class ErrorCode {
  // geometry
  NonPositiveDepth,
  BehindCamera,
  ShapeMismatch,
  // robust fitting
  DegenerateSample,
  TooFewPoints,
  ZeroGradient,
  TooFewCorrespondences,
  DegenerateConfiguration,
  // curation
  EmptyClip,
  MissingMasks,
  NoUsableTracks,
  // schedule / condition
  TimestepOutOfRange,
  MaskFractionUnreachable,
  BadChannelCount,
  // depth alignment
  EmptyGuidance,
  InconsistentMatches,
  SingularSystem,
  NoValidPixels,
  // pipeline
  EmptyState,
  GeneratorFailed,
  ConfigError,
  // file formats
  BadMagic,
  TruncatedPayload,
  DimensionOverflow,
  UnsupportedFormat,
  SchemaError,
  InvalidRotation,
  HeaderMismatch,
  RowParseError,
  IoError,
};

inline std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::TooFewCorrespondences: return "TooFewCorrespondences";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::EmptyClip: return "EmptyClip";
    case ErrorCode::MissingMasks: return "MissingMasks";
    case ErrorCode::NoUsableTracks: return "NoUsableTracks";
    case ErrorCode::TimestepOutOfRange: return "TimestepOutOfRange";
    case ErrorCode::MaskFractionUnreachable: return "MaskFractionUnreachable";
    case ErrorCode::BadChannelCount: return "BadChannelCount";
    case ErrorCode::EmptyGuidance: return "EmptyGuidance";
    case ErrorCode::InconsistentMatches: return "InconsistentMatches";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NoValidPixels: return "NoValidPixels";
    case ErrorCode::EmptyState: return "EmptyState";
    case ErrorCode::GeneratorFailed: return "GeneratorFailed";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvalidRotation: return "InvalidRotation";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::RowParseError: return "RowParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }

  // Message without the code-name prefix, for structured error reports.
  const std::string& message() const noexcept { return message_; }

  // Stage label used by the CLI error report ("ingest", "align", ...).
  // Empty until a boundary tags it.
  const std::string& stage() const noexcept { return stage_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }

 private:
  ErrorCode code_;
  std::string message_;
  std::string stage_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace mvkit
