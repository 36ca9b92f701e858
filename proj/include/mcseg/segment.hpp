#ifndef MCSEG_SEGMENT_HPP
#define MCSEG_SEGMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "mcseg/errors.hpp"
#include "mcseg/label.hpp"
#include "mcseg/morph.hpp"
#include "mcseg/prep.hpp"
#include "mcseg/raster.hpp"

namespace mcseg::segment {

/// Two-component Gaussian fit of an intensity histogram, c1 <= c2.
struct GaussianPairFit {
  double c1 = 0, c2 = 0;
  double sigma1 = 0, sigma2 = 0;
  double w1 = 0.5, w2 = 0.5;
  bool converged = false;
  int iterations = 0;
};

struct ThresholdFieldParams {
  int tile = 256;
  int stride = 128;
  int em_max_iter = 200;
  double em_tol = 1e-6;
  double sigma_floor = 1e-4;
  int min_tile_pixels = 1024;
  int bins = 256;
};

struct MarkerParams {
  int min_marker_area = 2;
  int otsu_bins = 256;
};

struct MarkerSet {
  BinaryMask foreground;
  BinaryMask background;
};

namespace detail {

inline double gauss_pdf(double x, double mu, double sigma) {
  double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

}  // namespace detail

/// EM fit of a two-component 1-D Gaussian mixture to binned data.
/// Initialized by splitting the samples at the histogram median.
inline GaussianPairFit fit_two_gaussians(const Histogram& h, const ThresholdFieldParams& p = {}) {
  if (h.total < static_cast<uint64_t>(p.min_tile_pixels)) throw TooFewSamples();

  int nonzero = 0;
  for (int b = 0; b < h.bin_count; ++b)
    if (h.counts[b] > 0) ++nonzero;
  if (nonzero <= 1) throw DegenerateFit();

  // median split init
  uint64_t half = h.total / 2, acc = 0;
  int median_bin = 0;
  for (int b = 0; b < h.bin_count; ++b) {
    acc += h.counts[b];
    if (acc >= half) {
      median_bin = b;
      break;
    }
  }
  auto side_stats = [&](int lo, int hi, double& mu, double& sigma) {
    double n = 0, s = 0, s2 = 0;
    for (int b = lo; b <= hi; ++b) {
      double x = h.bin_center(b), c = static_cast<double>(h.counts[b]);
      n += c;
      s += c * x;
      s2 += c * x * x;
    }
    if (n == 0) {
      mu = h.bin_center((lo + hi) / 2);
      sigma = p.sigma_floor;
      return;
    }
    mu = s / n;
    double var = s2 / n - mu * mu;
    sigma = std::max(std::sqrt(std::max(var, 0.0)), p.sigma_floor);
  };

  GaussianPairFit f;
  side_stats(0, median_bin, f.c1, f.sigma1);
  side_stats(std::min(median_bin + 1, h.bin_count - 1), h.bin_count - 1, f.c2, f.sigma2);
  f.w1 = f.w2 = 0.5;

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < p.em_max_iter; ++it) {
    double n1 = 0, n2 = 0, s1 = 0, s2 = 0, q1 = 0, q2 = 0, ll = 0;
    for (int b = 0; b < h.bin_count; ++b) {
      if (h.counts[b] == 0) continue;
      double x = h.bin_center(b), c = static_cast<double>(h.counts[b]);
      double p1 = f.w1 * detail::gauss_pdf(x, f.c1, f.sigma1);
      double p2 = f.w2 * detail::gauss_pdf(x, f.c2, f.sigma2);
      double tot = p1 + p2;
      double r1 = tot > 0 ? p1 / tot : 0.5;
      double r2 = 1.0 - r1;
      n1 += c * r1;
      n2 += c * r2;
      s1 += c * r1 * x;
      s2 += c * r2 * x;
      q1 += c * r1 * x * x;
      q2 += c * r2 * x * x;
      ll += c * std::log(std::max(tot, 1e-300));
    }
    f.iterations = it + 1;
    if (n1 <= 0 || n2 <= 0) throw DegenerateFit();
    f.c1 = s1 / n1;
    f.c2 = s2 / n2;
    f.sigma1 = std::max(std::sqrt(std::max(q1 / n1 - f.c1 * f.c1, 0.0)), p.sigma_floor);
    f.sigma2 = std::max(std::sqrt(std::max(q2 / n2 - f.c2 * f.c2, 0.0)), p.sigma_floor);
    double n = n1 + n2;
    f.w1 = n1 / n;
    f.w2 = n2 / n;
    if (std::abs(ll - prev_ll) <= p.em_tol * (1.0 + std::abs(ll))) {
      f.converged = true;
      break;
    }
    prev_ll = ll;
  }

  if (f.c1 > f.c2) {
    std::swap(f.c1, f.c2);
    std::swap(f.sigma1, f.sigma2);
    std::swap(f.w1, f.w2);
  }
  if (std::abs(f.c2 - f.c1) <= p.em_tol) throw DegenerateFit();
  return f;
}

/// Precision-weighted mean of the two component means:
/// T = (c1/s1 + c2/s2) / (1/s1 + 1/s2). Always lies in [c1, c2].
inline double threshold_from_fit(const GaussianPairFit& f) {
  double w1 = 1.0 / f.sigma1, w2 = 1.0 / f.sigma2;
  return (f.c1 * w1 + f.c2 * w2) / (w1 + w2);
}

struct AdaptiveInfo {
  bool have_global = false;
  double global_threshold = 0;
  int tiles_total = 0;
  int tiles_fitted = 0;
};

/// Tile-based adaptive thresholding: per-tile mixture fit with bilinear
/// interpolation of tile-center thresholds; degenerate tiles fall back to
/// the whole-breast global threshold. Output = (r > field) AND breast.
inline BinaryMask adaptive_threshold_segment(const Raster& r, const BinaryMask& breast,
                                             const ThresholdFieldParams& p = {},
                                             AdaptiveInfo* info = nullptr) {
  if (breast.width != r.width || breast.height != r.height)
    throw DimensionMismatch("adaptive_threshold_segment");
  size_t breast_px = breast.count();
  if (breast_px == 0) throw NoTissue();

  // global fallback threshold
  bool have_global = false;
  double global_t = 0;
  try {
    Histogram gh = histogram(r, &breast, p.bins);
    global_t = threshold_from_fit(fit_two_gaussians(gh, p));
    have_global = true;
  } catch (const TooFewSamples&) {
  } catch (const DegenerateFit&) {
  }

  // breast bounding box
  int x0 = r.width, y0 = r.height, x1 = -1, y1 = -1;
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      if (breast.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }

  // tile grid over the bounding box
  std::vector<double> cxs, cys;
  std::vector<int> txs, tys;
  for (int tx = x0; tx <= x1; tx += p.stride) {
    txs.push_back(tx);
    cxs.push_back(tx + std::min(p.tile, x1 + 1 - tx) / 2.0);
    if (tx + p.tile > x1) break;
  }
  for (int ty = y0; ty <= y1; ty += p.stride) {
    tys.push_back(ty);
    cys.push_back(ty + std::min(p.tile, y1 + 1 - ty) / 2.0);
    if (ty + p.tile > y1) break;
  }

  const int nx = static_cast<int>(txs.size()), ny = static_cast<int>(tys.size());
  std::vector<double> tile_t(static_cast<size_t>(nx) * ny, global_t);
  std::vector<uint8_t> tile_ok(static_cast<size_t>(nx) * ny, have_global ? 1 : 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int tx = txs[i], ty = tys[j];
      int tw = std::min(p.tile, x1 + 1 - tx), th = std::min(p.tile, y1 + 1 - ty);
      Histogram th_hist;
      th_hist.bin_count = p.bins;
      th_hist.counts.assign(p.bins, 0);
      for (int y = ty; y < ty + th; ++y)
        for (int x = tx; x < tx + tw; ++x) {
          if (!breast.at(x, y)) continue;
          ++th_hist.counts[histogram_bin(r.at(x, y), p.bins)];
          ++th_hist.total;
        }
      try {
        tile_t[static_cast<size_t>(j) * nx + i] =
            threshold_from_fit(fit_two_gaussians(th_hist, p));
        tile_ok[static_cast<size_t>(j) * nx + i] = 1;
      } catch (const TooFewSamples&) {
      } catch (const DegenerateFit&) {
      }
    }

  bool any_ok = false;
  int fitted = 0;
  for (uint8_t ok : tile_ok) {
    any_ok = any_ok || ok;
    fitted += ok;
  }
  if (info) {
    info->have_global = have_global;
    info->global_threshold = global_t;
    info->tiles_total = nx * ny;
    info->tiles_fitted = fitted;
  }
  BinaryMask out(r.width, r.height);
  if (!any_ok) return out;  // no usable threshold anywhere -> empty

  // bilinear interpolation of tile-center thresholds, clamped to the grid
  auto field_at = [&](double px, double py) {
    int i1 = 0;
    while (i1 + 1 < nx && cxs[i1 + 1] <= px) ++i1;
    int j1 = 0;
    while (j1 + 1 < ny && cys[j1 + 1] <= py) ++j1;
    int i2 = std::min(i1 + 1, nx - 1), j2 = std::min(j1 + 1, ny - 1);
    double fx = i2 == i1 ? 0.0 : std::clamp((px - cxs[i1]) / (cxs[i2] - cxs[i1]), 0.0, 1.0);
    double fy = j2 == j1 ? 0.0 : std::clamp((py - cys[j1]) / (cys[j2] - cys[j1]), 0.0, 1.0);
    double t11 = tile_t[static_cast<size_t>(j1) * nx + i1];
    double t21 = tile_t[static_cast<size_t>(j1) * nx + i2];
    double t12 = tile_t[static_cast<size_t>(j2) * nx + i1];
    double t22 = tile_t[static_cast<size_t>(j2) * nx + i2];
    return (1 - fy) * ((1 - fx) * t11 + fx * t21) + fy * ((1 - fx) * t12 + fx * t22);
  };

  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      if (!breast.at(x, y)) continue;
      if (r.at(x, y) > field_at(x, y)) out.set(x, y, true);
    }
  return out;
}

/// Sobel gradient magnitude with replicate padding.
inline Raster sobel_gradient(const Raster& r) {
  Raster out(r.width, r.height);
  out.meta = r.meta;
  auto px = [&](int x, int y) {
    return r.at(morph::detail::clampi(x, 0, r.width - 1),
                morph::detail::clampi(y, 0, r.height - 1));
  };
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      double gx = -px(x - 1, y - 1) + px(x + 1, y - 1) - 2 * px(x - 1, y) + 2 * px(x + 1, y) -
                  px(x - 1, y + 1) + px(x + 1, y + 1);
      double gy = -px(x - 1, y - 1) - 2 * px(x, y - 1) - px(x + 1, y - 1) + px(x - 1, y + 1) +
                  2 * px(x, y + 1) + px(x + 1, y + 1);
      out.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  return out;
}

/// Marker-controlled priority flood. Each marker component becomes a
/// distinct basin label; pixels seeing two or more labels at pop time
/// become ridge (label 0). FIFO tie-break among equal priorities with
/// frontier pixels enqueued in row-major order of their labeled sources.
inline LabelMap flood_watershed(const Raster& surface, const BinaryMask& markers,
                                morph::Connectivity conn, int* component_count = nullptr) {
  LabelMap lm = label_components(markers, conn);
  if (component_count) *component_count = lm.max_label;

  const int w = surface.width, h = surface.height;
  std::vector<std::pair<int, int>> neigh;
  for (auto [dx, dy] : morph::conn_se(conn).offsets)
    if (dx != 0 || dy != 0) neigh.emplace_back(dx, dy);

  struct Item {
    double priority;
    uint64_t seq;
    int x, y;
  };
  auto cmp = [](const Item& a, const Item& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.seq > b.seq;
  };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
  std::vector<uint8_t> decided(surface.size(), 0);
  std::vector<uint8_t> ridge(surface.size(), 0);
  auto idx = [w](int x, int y) { return static_cast<size_t>(y) * w + x; };

  uint64_t seq = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (lm.at(x, y) == 0) continue;
      decided[idx(x, y)] = 1;
      for (auto [dx, dy] : neigh) {
        int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        if (lm.at(nx, ny) == 0) pq.push({surface.at(nx, ny), seq++, nx, ny});
      }
    }

  while (!pq.empty()) {
    Item it = pq.top();
    pq.pop();
    size_t i = idx(it.x, it.y);
    if (decided[i]) continue;
    int label = 0;
    bool conflict = false;
    for (auto [dx, dy] : neigh) {
      int nx = it.x + dx, ny = it.y + dy;
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      size_t ni = idx(nx, ny);
      if (!decided[ni] || ridge[ni]) continue;
      int nl = lm.at(nx, ny);
      if (nl == 0) continue;
      if (label == 0) {
        label = nl;
      } else if (label != nl) {
        conflict = true;
      }
    }
    decided[i] = 1;
    if (conflict || label == 0) {
      ridge[i] = 1;  // stays label 0
      continue;
    }
    lm.at(it.x, it.y) = label;
    for (auto [dx, dy] : neigh) {
      int nx = it.x + dx, ny = it.y + dy;
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      if (!decided[idx(nx, ny)]) pq.push({surface.at(nx, ny), seq++, nx, ny});
    }
  }
  lm.max_label = 0;
  for (int l : lm.labels) lm.max_label = std::max(lm.max_label, l);
  return lm;
}

/// Foreground markers: regional maxima inside the breast above the masked
/// Otsu level, small components removed. Background markers: ridge lines
/// of the watershed of the distance transform away from the thresholded
/// foreground, plus everything outside the breast.
inline MarkerSet compute_markers(const Raster& r, const BinaryMask& breast,
                                 const MarkerParams& cfg = {},
                                 morph::Connectivity conn = morph::Connectivity(8)) {
  if (breast.width != r.width || breast.height != r.height)
    throw DimensionMismatch("compute_markers");

  prep::OtsuResult otsu = prep::otsu_threshold(histogram(r, &breast, cfg.otsu_bins));
  BinaryMask foregroundish(r.width, r.height);
  for (size_t i = 0; i < r.size(); ++i)
    foregroundish.bits[i] = (breast.bits[i] && r.data[i] > otsu.level) ? 1 : 0;

  BinaryMask maxima = morph::regional_maxima(r, conn);
  BinaryMask fg(r.width, r.height);
  for (size_t i = 0; i < r.size(); ++i)
    fg.bits[i] = (maxima.bits[i] && breast.bits[i] && foregroundish.bits[i]) ? 1 : 0;

  // drop components below the minimum marker area
  LabelMap lm = label_components(fg, conn);
  if (lm.max_label > 0 && cfg.min_marker_area > 1) {
    std::vector<int> area(lm.max_label + 1, 0);
    for (int l : lm.labels)
      if (l > 0) ++area[l];
    for (size_t i = 0; i < fg.size(); ++i)
      if (fg.bits[i] && area[lm.labels[i]] < cfg.min_marker_area) fg.bits[i] = 0;
  }
  if (fg.count() == 0) throw NoForegroundMarkers();

  // background markers from the distance-transform watershed
  BinaryMask not_fgish(r.width, r.height);
  for (size_t i = 0; i < r.size(); ++i) not_fgish.bits[i] = foregroundish.bits[i] ? 0 : 1;
  Raster dist = morph::distance_transform(not_fgish);
  BinaryMask dist_minima = morph::regional_minima(dist, conn);
  LabelMap basins = flood_watershed(dist, dist_minima, conn);

  BinaryMask bg(r.width, r.height);
  for (size_t i = 0; i < bg.size(); ++i) {
    bool ridge = basins.labels[i] == 0;
    bool outside = !breast.bits[i];
    bg.bits[i] = ((ridge || outside) && !fg.bits[i]) ? 1 : 0;
  }
  return {fg, bg};
}

/// Minima imposition at the marker locations, then priority flood of the
/// modified surface. Labels of basins grown from foreground markers can
/// be identified via `foreground_labels`.
inline LabelMap watershed(const Raster& gradient, const MarkerSet& markers,
                          std::vector<uint8_t>* label_is_foreground = nullptr,
                          morph::Connectivity conn = morph::Connectivity(8)) {
  if (markers.foreground.width != gradient.width ||
      markers.foreground.height != gradient.height ||
      markers.background.width != gradient.width ||
      markers.background.height != gradient.height)
    throw DimensionMismatch("watershed markers vs gradient");

  BinaryMask all(gradient.width, gradient.height);
  for (size_t i = 0; i < all.size(); ++i)
    all.bits[i] = (markers.foreground.bits[i] || markers.background.bits[i]) ? 1 : 0;
  if (all.count() == 0) throw EmptyMarkers();

  Raster imposed = morph::impose_minima(gradient, all, conn);
  LabelMap lm = flood_watershed(imposed, all, conn);

  if (label_is_foreground) {
    label_is_foreground->assign(lm.max_label + 1, 0);
    for (size_t i = 0; i < all.size(); ++i)
      if (markers.foreground.bits[i] && lm.labels[i] > 0)
        (*label_is_foreground)[lm.labels[i]] = 1;
  }
  return lm;
}

struct WatershedResult {
  BinaryMask mask;
  LabelMap labels;
  int foreground_markers = 0;
  int background_markers = 0;
};

/// Full marker-controlled pipeline: reconstruction smoothing, marker
/// computation, Sobel gradient, flood. The output mask is the union of
/// foreground-marker basins intersected with the breast; when no
/// foreground markers exist the mask is empty but the call succeeds.
inline WatershedResult watershed_segment(const Raster& r, const BinaryMask& breast,
                                         const MarkerParams& cfg = {}, int se_radius = 3,
                                         morph::Connectivity conn = morph::Connectivity(8)) {
  if (breast.width != r.width || breast.height != r.height)
    throw DimensionMismatch("watershed_segment");

  morph::StructuringElement se = morph::StructuringElement::disk(se_radius);
  Raster smooth = morph::close_by_reconstruction(morph::open_by_reconstruction(r, se, conn), se, conn);

  WatershedResult res;
  res.mask = BinaryMask(r.width, r.height);
  res.labels = LabelMap(r.width, r.height);

  MarkerSet markers;
  try {
    markers = compute_markers(smooth, breast, cfg, conn);
  } catch (const NoForegroundMarkers&) {
    return res;  // no suspicious regions
  }
  res.foreground_markers = label_components(markers.foreground, conn).max_label;
  res.background_markers = label_components(markers.background, conn).max_label;

  std::vector<uint8_t> is_fg;
  res.labels = watershed(sobel_gradient(smooth), markers, &is_fg, conn);
  for (size_t i = 0; i < res.mask.size(); ++i) {
    int l = res.labels.labels[i];
    res.mask.bits[i] = (l > 0 && is_fg[l] && breast.bits[i]) ? 1 : 0;
  }
  return res;
}

}  // namespace mcseg::segment

#endif
