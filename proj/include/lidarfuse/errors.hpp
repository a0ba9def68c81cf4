#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lidarfuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A geometric quantity is undefined for the given input (e.g. azimuth of a
/// point on the z-axis).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Ground estimation failed (empty grid region, degenerate regression).
class GroundFitError : public Error {
 public:
  using Error::Error;
};

/// Malformed PCD input. `offset` is the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Scene record violates the binary layout or its invariants.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration; `key` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what) : Error(what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class Stage {
  kLevelObject,
  kLevelBackground,
  kCrop,
  kPlacement,
  kResample,
  kOcclusion,
  kStore,
};

const char* stage_name(Stage stage) noexcept;

/// Failure inside scene composition, tagged with the pipeline stage.
class CompositionError : public Error {
 public:
  CompositionError(Stage stage, const std::string& what)
      : Error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}

  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

}  // namespace lidarfuse
