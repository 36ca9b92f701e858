#ifndef MCSEG_ERRORS_HPP
#define MCSEG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mcseg {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnreadableFile : Error {
  explicit UnreadableFile(const std::string& path)
      : Error("cannot read file: " + path) {}
};

struct UnsupportedFormat : Error {
  explicit UnsupportedFormat(const std::string& what)
      : Error("unsupported image format: " + what) {}
};

struct WriteFailure : Error {
  explicit WriteFailure(const std::string& path)
      : Error("cannot write file: " + path) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what)
      : Error("dimension mismatch: " + what) {}
};

struct EmptyMask : Error {
  EmptyMask() : Error("mask has no true pixels") {}
};

struct MarkerExceedsMask : Error {
  MarkerExceedsMask() : Error("marker image exceeds mask image") {}
};

struct EmptyMarkers : Error {
  EmptyMarkers() : Error("marker set is empty") {}
};

struct AllForeground : Error {
  AllForeground() : Error("mask has no false pixel") {}
};

struct NoTissue : Error {
  NoTissue() : Error("no tissue region found") {}
};

struct TooFewSamples : Error {
  TooFewSamples() : Error("too few samples for mixture fit") {}
};

struct DegenerateFit : Error {
  DegenerateFit() : Error("gaussian pair fit is degenerate") {}
};

struct TooManyLevels : Error {
  TooManyLevels() : Error("image too small for requested decomposition depth") {}
};

struct InconsistentPyramid : Error {
  explicit InconsistentPyramid(const std::string& what)
      : Error("inconsistent wavelet pyramid: " + what) {}
};

struct GainLengthMismatch : Error {
  GainLengthMismatch() : Error("gain count does not match pyramid levels") {}
};

struct NoForegroundMarkers : Error {
  NoForegroundMarkers() : Error("no foreground markers found") {}
};

struct SpecInfeasible : Error {
  explicit SpecInfeasible(const std::string& what)
      : Error("phantom spec infeasible: " + what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what)
      : Error("config error: " + what) {}
};

}  // namespace mcseg

#endif
