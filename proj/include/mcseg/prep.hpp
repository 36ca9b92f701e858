#ifndef MCSEG_PREP_HPP
#define MCSEG_PREP_HPP

#include <algorithm>
#include <vector>

#include "mcseg/errors.hpp"
#include "mcseg/label.hpp"
#include "mcseg/morph.hpp"
#include "mcseg/raster.hpp"

namespace mcseg::prep {

struct UnsharpParams {
  int window_m = 11;     // odd, >= 3
  int window_n = 11;     // odd, >= 3
  double weight_k = 0.8; // K(x,y), constant over the image
};

struct MaskGenParams {
  int otsu_bins = 256;
  int close_radius = 5;
  double min_area_fraction = 0.01;
};

struct OtsuResult {
  double level = 0.0;  // upper edge of the selected bin
  int bin = 0;
  bool degenerate = false;  // all mass in a single bin
};

/// Threshold maximizing the between-class variance
/// sigma_B^2(t) = w0 w1 (mu0 - mu1)^2 over split bins [0..t] vs [t+1..].
/// Ties break toward the smallest t.
inline OtsuResult otsu_threshold(const Histogram& h) {
  if (h.total == 0) throw Error("otsu_threshold: empty histogram");

  int nonzero = 0, only_bin = 0;
  for (int b = 0; b < h.bin_count; ++b)
    if (h.counts[b] > 0) {
      ++nonzero;
      only_bin = b;
    }
  if (nonzero == 1) return {h.bin_upper_edge(only_bin), only_bin, true};

  double total = static_cast<double>(h.total);
  double sum_all = 0;
  for (int b = 0; b < h.bin_count; ++b) sum_all += h.counts[b] * h.bin_center(b);

  double w0 = 0, sum0 = 0, best = -1.0;
  int best_t = 0;
  for (int t = 0; t < h.bin_count - 1; ++t) {
    w0 += h.counts[t];
    sum0 += h.counts[t] * h.bin_center(t);
    double w1 = total - w0;
    if (w0 == 0 || w1 == 0) {
      if (best < 0) {
        best = 0;
        best_t = t;
      }
      continue;
    }
    double mu0 = sum0 / w0, mu1 = (sum_all - sum0) / w1;
    double sb = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
    if (sb > best) {
      best = sb;
      best_t = t;
    }
  }
  return {h.bin_upper_edge(best_t), best_t, false};
}

/// Otsu threshold -> largest 8-connected component -> binary closing with
/// disk(close_radius) -> hole filling. Throws NoTissue when the largest
/// component covers less than min_area_fraction of the image.
inline BinaryMask generate_breast_mask(const Raster& r, const MaskGenParams& p = {}) {
  OtsuResult otsu = otsu_threshold(histogram(r, p.otsu_bins));

  BinaryMask fg(r.width, r.height);
  for (size_t i = 0; i < r.size(); ++i) fg.bits[i] = r.data[i] > otsu.level ? 1 : 0;

  LabelMap lm = label_components(fg, morph::Connectivity(8));
  std::vector<size_t> area(lm.max_label + 1, 0);
  for (int l : lm.labels) ++area[l];
  int largest = 0;
  for (int l = 1; l <= lm.max_label; ++l)
    if (area[l] > area[largest] || largest == 0) largest = l;
  if (largest == 0 || otsu.degenerate ||
      static_cast<double>(area[largest]) < p.min_area_fraction * static_cast<double>(r.size()))
    throw NoTissue();

  Raster bin(r.width, r.height);
  for (size_t i = 0; i < bin.size(); ++i) bin.data[i] = lm.labels[i] == largest ? 1.0 : 0.0;
  bin = morph::close(bin, morph::StructuringElement::disk(p.close_radius));

  BinaryMask closed(r.width, r.height);
  for (size_t i = 0; i < bin.size(); ++i) closed.bits[i] = bin.data[i] > 0.5 ? 1 : 0;
  return morph::fill_holes(closed, morph::Connectivity(4));
}

/// w x h median filter with replicate padding. Window offsets along an
/// axis of size s run -( (s-1)/2 ) .. s/2, so a 4-wide window covers
/// {-1,0,1,2}. Even-count median takes the lower middle order statistic.
inline Raster median_filter(const Raster& r, int w, int h) {
  if (w < 1 || h < 1) throw Error("median_filter: window must be >= 1");
  Raster out(r.width, r.height);
  out.meta = r.meta;
  const int lx = -((w - 1) / 2), hx = w / 2;
  const int ly = -((h - 1) / 2), hy = h / 2;
  std::vector<double> window;
  window.reserve(static_cast<size_t>(w) * h);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      window.clear();
      for (int dy = ly; dy <= hy; ++dy)
        for (int dx = lx; dx <= hx; ++dx) {
          int nx = morph::detail::clampi(x + dx, 0, r.width - 1);
          int ny = morph::detail::clampi(y + dy, 0, r.height - 1);
          window.push_back(r.at(nx, ny));
        }
      size_t mid = (window.size() - 1) / 2;  // lower middle for even counts
      std::nth_element(window.begin(), window.begin() + mid, window.end());
      out.at(x, y) = window[mid];
    }
  return out;
}

/// Unsharp masking: out = in + K * (in - local_mean) inside the mask,
/// copied unchanged outside; local mean over the m x n window (center
/// included) with replicate padding; clamped to [0,1].
inline Raster unsharp_mask(const Raster& r, const UnsharpParams& p, const BinaryMask& within) {
  if (within.width != r.width || within.height != r.height)
    throw DimensionMismatch("unsharp_mask mask vs raster");
  if (p.window_m < 3 || p.window_n < 3 || p.window_m % 2 == 0 || p.window_n % 2 == 0)
    throw Error("unsharp_mask: window sides must be odd and >= 3");

  const int rx = p.window_m / 2, ry = p.window_n / 2;
  const double area = static_cast<double>(p.window_m) * p.window_n;
  Raster out = r;
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      if (!within.at(x, y)) continue;
      double sum = 0;
      for (int dy = -ry; dy <= ry; ++dy)
        for (int dx = -rx; dx <= rx; ++dx) {
          int nx = morph::detail::clampi(x + dx, 0, r.width - 1);
          int ny = morph::detail::clampi(y + dy, 0, r.height - 1);
          sum += r.at(nx, ny);
        }
      double v = r.at(x, y) + p.weight_k * (r.at(x, y) - sum / area);
      out.at(x, y) = std::clamp(v, 0.0, 1.0);
    }
  return out;
}

}  // namespace mcseg::prep

#endif
