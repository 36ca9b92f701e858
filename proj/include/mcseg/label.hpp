#ifndef MCSEG_LABEL_HPP
#define MCSEG_LABEL_HPP

#include <deque>
#include <utility>
#include <vector>

#include "mcseg/morph.hpp"
#include "mcseg/raster.hpp"

namespace mcseg {

/// 2-D integer raster of connected components / catchment basins.
/// Label 0 means unlabeled (background or watershed ridge).
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<int> labels;
  int max_label = 0;

  LabelMap() = default;
  LabelMap(int w, int h) : width(w), height(h), labels(static_cast<size_t>(w) * h, 0) {}

  int& at(int x, int y) { return labels[static_cast<size_t>(y) * width + x]; }
  int at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return labels.size(); }
};

/// Labels conn-connected true-components 1..N in first-encounter
/// row-major order.
inline LabelMap label_components(const BinaryMask& m, morph::Connectivity conn) {
  LabelMap lm(m.width, m.height);
  std::vector<std::pair<int, int>> neigh;
  for (auto [dx, dy] : morph::conn_se(conn).offsets)
    if (dx != 0 || dy != 0) neigh.emplace_back(dx, dy);

  std::deque<std::pair<int, int>> q;
  int next = 0;
  for (int y0 = 0; y0 < m.height; ++y0)
    for (int x0 = 0; x0 < m.width; ++x0) {
      if (!m.at(x0, y0) || lm.at(x0, y0) != 0) continue;
      ++next;
      lm.at(x0, y0) = next;
      q.emplace_back(x0, y0);
      while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop_front();
        for (auto [dx, dy] : neigh) {
          int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
          if (m.at(nx, ny) && lm.at(nx, ny) == 0) {
            lm.at(nx, ny) = next;
            q.emplace_back(nx, ny);
          }
        }
      }
    }
  lm.max_label = next;
  return lm;
}

}  // namespace mcseg

#endif
