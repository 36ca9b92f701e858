#ifndef MCSEG_RASTER_HPP
#define MCSEG_RASTER_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mcseg/errors.hpp"

namespace mcseg {

/// Physical/source metadata carried alongside a raster.
struct ImageMeta {
  double sampling_microns = 45.0;  // physical pixel pitch
  int bit_depth_source = 8;        // 8 or 16
  std::string source_path;
};

/// 2-D grayscale image, row-major doubles, nominally in [0,1] after load.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<double> data;
  ImageMeta meta;

  Raster() = default;
  Raster(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return data.size(); }
  bool same_dims(const Raster& o) const { return width == o.width && height == o.height; }
};

/// 2-D boolean raster (masks, markers, segmentation outputs).
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false)
      : width(w), height(h), bits(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

  bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
  size_t size() const { return bits.size(); }

  size_t count() const {
    size_t n = 0;
    for (uint8_t b : bits) n += b != 0;
    return n;
  }
};

/// Uniform-bin histogram over [lo, hi].
struct Histogram {
  int bin_count = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<uint64_t> counts;
  uint64_t total = 0;

  double bin_width() const { return (hi - lo) / bin_count; }
  double bin_center(int b) const { return lo + (b + 0.5) * bin_width(); }
  double bin_upper_edge(int b) const { return lo + (b + 1) * bin_width(); }
};

/// Bin index for value v: floor(v * bin_count) clamped to the last bin,
/// so 1.0 lands in bin bin_count-1.
inline int histogram_bin(double v, int bin_count, double lo = 0.0, double hi = 1.0) {
  int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bin_count));
  if (b < 0) b = 0;
  if (b >= bin_count) b = bin_count - 1;
  return b;
}

/// Histogram of r over [0,1]; pixels where `within` is false are excluded.
inline Histogram histogram(const Raster& r, const BinaryMask* within, int bin_count) {
  if (bin_count < 2) throw Error("histogram: bin_count must be >= 2");
  if (within && (within->width != r.width || within->height != r.height))
    throw DimensionMismatch("histogram mask vs raster");
  if (within && within->count() == 0) throw EmptyMask();

  Histogram h;
  h.bin_count = bin_count;
  h.lo = 0.0;
  h.hi = 1.0;
  h.counts.assign(bin_count, 0);
  for (size_t i = 0; i < r.size(); ++i) {
    if (within && !within->bits[i]) continue;
    ++h.counts[histogram_bin(r.data[i], bin_count)];
    ++h.total;
  }
  return h;
}

inline Histogram histogram(const Raster& r, int bin_count) {
  return histogram(r, nullptr, bin_count);
}

}  // namespace mcseg

#endif
