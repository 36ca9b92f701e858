#ifndef MCSEG_ANALYSIS_HPP
#define MCSEG_ANALYSIS_HPP

#include <cmath>
#include <numeric>
#include <vector>

#include "mcseg/errors.hpp"
#include "mcseg/label.hpp"
#include "mcseg/raster.hpp"

namespace mcseg::analysis {

struct RegionStats {
  int label = 0;
  int area_px = 0;
  double area_mm2 = 0;
  double centroid_x = 0, centroid_y = 0;
  double mean_intensity = 0;
  int bbox_x0 = 0, bbox_y0 = 0, bbox_x1 = 0, bbox_y1 = 0;
  int cluster_id = 0;  // 0 = not part of a cluster
};

/// Per-label area, centroid, mean intensity, and bounding box.
/// area_mm2 uses the raster's sampling pitch.
inline std::vector<RegionStats> region_stats(const LabelMap& lm, const Raster& r) {
  if (lm.width != r.width || lm.height != r.height)
    throw DimensionMismatch("region_stats");
  std::vector<RegionStats> out(lm.max_label);
  std::vector<bool> seen(lm.max_label + 1, false);
  const double mm_per_px = r.meta.sampling_microns / 1000.0;
  for (int y = 0; y < lm.height; ++y)
    for (int x = 0; x < lm.width; ++x) {
      int l = lm.at(x, y);
      if (l == 0) continue;
      RegionStats& s = out[l - 1];
      if (!seen[l]) {
        seen[l] = true;
        s.label = l;
        s.bbox_x0 = s.bbox_x1 = x;
        s.bbox_y0 = s.bbox_y1 = y;
      }
      ++s.area_px;
      s.centroid_x += x;
      s.centroid_y += y;
      s.mean_intensity += r.at(x, y);
      s.bbox_x0 = std::min(s.bbox_x0, x);
      s.bbox_x1 = std::max(s.bbox_x1, x);
      s.bbox_y0 = std::min(s.bbox_y0, y);
      s.bbox_y1 = std::max(s.bbox_y1, y);
    }
  for (RegionStats& s : out) {
    if (s.area_px == 0) continue;
    s.centroid_x /= s.area_px;
    s.centroid_y /= s.area_px;
    s.mean_intensity /= s.area_px;
    s.area_mm2 = s.area_px * mm_per_px * mm_per_px;
  }
  // drop empty slots (labels are contiguous from label_components, but a
  // watershed label map may skip values)
  std::vector<RegionStats> filled;
  for (RegionStats& s : out)
    if (s.area_px > 0) filled.push_back(s);
  return filled;
}

/// Single-linkage grouping of region centroids at distance <= radius_mm.
/// Groups of fewer than 3 regions keep cluster id 0. Returns the number
/// of clusters and writes per-region ids into `stats`.
inline int cluster_regions(std::vector<RegionStats>& stats, double radius_mm,
                           double sampling_microns) {
  if (radius_mm <= 0) throw Error("cluster_regions: radius must be positive");
  const double mm_per_px = sampling_microns / 1000.0;
  const int n = static_cast<int>(stats.size());

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double dx = (stats[i].centroid_x - stats[j].centroid_x) * mm_per_px;
      double dy = (stats[i].centroid_y - stats[j].centroid_y) * mm_per_px;
      if (std::sqrt(dx * dx + dy * dy) <= radius_mm) parent[find(i)] = find(j);
    }

  std::vector<int> group_size(n, 0);
  for (int i = 0; i < n; ++i) ++group_size[find(i)];
  std::vector<int> cluster_of_root(n, 0);
  int clusters = 0;
  for (int i = 0; i < n; ++i) {
    int root = find(i);
    if (group_size[root] >= 3 && cluster_of_root[root] == 0) cluster_of_root[root] = ++clusters;
    stats[i].cluster_id = cluster_of_root[root];
  }
  return clusters;
}

/// 2|a n b| / (|a| + |b|); 1.0 when both masks are empty.
inline double dice(const BinaryMask& a, const BinaryMask& b) {
  if (a.width != b.width || a.height != b.height) throw DimensionMismatch("dice");
  size_t na = 0, nb = 0, ni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    bool ba = a.bits[i] != 0, bb = b.bits[i] != 0;
    na += ba;
    nb += bb;
    ni += ba && bb;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(ni) / static_cast<double>(na + nb);
}

}  // namespace mcseg::analysis

#endif
