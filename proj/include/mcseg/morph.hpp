#ifndef MCSEG_MORPH_HPP
#define MCSEG_MORPH_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <utility>
#include <vector>

#include "mcseg/errors.hpp"
#include "mcseg/raster.hpp"

namespace mcseg::morph {

/// Flat structuring element: a set of (dx,dy) offsets containing (0,0).
struct StructuringElement {
  std::vector<std::pair<int, int>> offsets;

  /// Disk of given radius: all offsets with dx^2 + dy^2 <= radius^2.
  static StructuringElement disk(int radius) {
    StructuringElement se;
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx)
        if (dx * dx + dy * dy <= radius * radius) se.offsets.emplace_back(dx, dy);
    return se;
  }

  /// w x h rectangle centered at the origin. For even sizes the extra
  /// offset goes to the positive side.
  static StructuringElement rect(int w, int h) {
    StructuringElement se;
    int lx = -((w - 1) / 2), hx = w / 2;
    int ly = -((h - 1) / 2), hy = h / 2;
    for (int dy = ly; dy <= hy; ++dy)
      for (int dx = lx; dx <= hx; ++dx) se.offsets.emplace_back(dx, dy);
    return se;
  }
};

struct Connectivity {
  int kind = 8;  // 4 or 8
  explicit Connectivity(int k = 8) : kind(k) {
    if (k != 4 && k != 8) throw Error("connectivity must be 4 or 8");
  }
};

inline StructuringElement conn_se(Connectivity conn) {
  return conn.kind == 4
             ? StructuringElement{{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}}
             : StructuringElement::rect(3, 3);
}

namespace detail {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

template <typename Op>
Raster flat_filter(const Raster& r, const StructuringElement& se, Op op, double init) {
  Raster out(r.width, r.height);
  out.meta = r.meta;
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      double v = init;
      for (auto [dx, dy] : se.offsets) {
        // replicate padding: out-of-range neighbors clamp to the border
        int nx = clampi(x + dx, 0, r.width - 1);
        int ny = clampi(y + dy, 0, r.height - 1);
        v = op(v, r.at(nx, ny));
      }
      out.at(x, y) = v;
    }
  }
  return out;
}

}  // namespace detail

inline Raster dilate(const Raster& r, const StructuringElement& se) {
  return detail::flat_filter(
      r, se, [](double a, double b) { return a > b ? a : b; },
      -std::numeric_limits<double>::infinity());
}

inline Raster erode(const Raster& r, const StructuringElement& se) {
  return detail::flat_filter(
      r, se, [](double a, double b) { return a < b ? a : b; },
      std::numeric_limits<double>::infinity());
}

inline Raster open(const Raster& r, const StructuringElement& se) {
  return dilate(erode(r, se), se);
}

inline Raster close(const Raster& r, const StructuringElement& se) {
  return erode(dilate(r, se), se);
}

/// Pointwise max(a - b, 0).
inline Raster subtract(const Raster& a, const Raster& b) {
  if (!a.same_dims(b)) throw DimensionMismatch("subtract");
  Raster out(a.width, a.height);
  out.meta = a.meta;
  for (size_t i = 0; i < a.size(); ++i) out.data[i] = std::max(a.data[i] - b.data[i], 0.0);
  return out;
}

inline Raster negate(const Raster& r) {
  Raster out = r;
  for (double& v : out.data) v = -v;
  return out;
}

/// Grayscale reconstruction by dilation of `marker` under `mask`:
/// the limit of iterating r <- min(dilate(r, conn-SE), mask) from marker.
/// Implemented with forward/backward raster scans plus a FIFO queue.
inline Raster reconstruct_by_dilation(const Raster& marker, const Raster& mask,
                                      Connectivity conn = Connectivity(8)) {
  if (!marker.same_dims(mask)) throw DimensionMismatch("reconstruct marker vs mask");
  for (size_t i = 0; i < marker.size(); ++i)
    if (marker.data[i] > mask.data[i]) throw MarkerExceedsMask();

  const int w = marker.width, h = marker.height;
  Raster r = marker;
  r.meta = mask.meta;

  // neighbor sets split by raster-scan order
  std::vector<std::pair<int, int>> nplus, nminus, nall;
  if (conn.kind == 8) {
    nplus = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}};
  } else {
    nplus = {{0, -1}, {-1, 0}};
  }
  for (auto [dx, dy] : nplus) nminus.emplace_back(-dx, -dy);
  nall = nplus;
  nall.insert(nall.end(), nminus.begin(), nminus.end());

  auto idx = [w](int x, int y) { return static_cast<size_t>(y) * w + x; };
  auto inb = [w, h](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h; };

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = r.data[idx(x, y)];
      for (auto [dx, dy] : nplus) {
        int nx = x + dx, ny = y + dy;
        if (inb(nx, ny)) v = std::max(v, r.data[idx(nx, ny)]);
      }
      r.data[idx(x, y)] = std::min(v, mask.data[idx(x, y)]);
    }

  std::deque<std::pair<int, int>> fifo;
  for (int y = h - 1; y >= 0; --y)
    for (int x = w - 1; x >= 0; --x) {
      double v = r.data[idx(x, y)];
      for (auto [dx, dy] : nminus) {
        int nx = x + dx, ny = y + dy;
        if (inb(nx, ny)) v = std::max(v, r.data[idx(nx, ny)]);
      }
      v = std::min(v, mask.data[idx(x, y)]);
      r.data[idx(x, y)] = v;
      for (auto [dx, dy] : nminus) {
        int nx = x + dx, ny = y + dy;
        if (inb(nx, ny) && r.data[idx(nx, ny)] < v && r.data[idx(nx, ny)] < mask.data[idx(nx, ny)]) {
          fifo.emplace_back(x, y);
          break;
        }
      }
    }

  while (!fifo.empty()) {
    auto [x, y] = fifo.front();
    fifo.pop_front();
    double vp = r.data[idx(x, y)];
    for (auto [dx, dy] : nall) {
      int nx = x + dx, ny = y + dy;
      if (!inb(nx, ny)) continue;
      double& vq = r.data[idx(nx, ny)];
      double mq = mask.data[idx(nx, ny)];
      if (vq < vp && vq != mq) {
        vq = std::min(vp, mq);
        fifo.emplace_back(nx, ny);
      }
    }
  }
  return r;
}

/// Erode, then reconstruct under the original: removes structures the SE
/// cannot contain while leaving surviving object shapes untouched.
inline Raster open_by_reconstruction(const Raster& r, const StructuringElement& se,
                                     Connectivity conn = Connectivity(8)) {
  return reconstruct_by_dilation(erode(r, se), r, conn);
}

/// Dual of open_by_reconstruction via negation.
inline Raster close_by_reconstruction(const Raster& r, const StructuringElement& se,
                                      Connectivity conn = Connectivity(8)) {
  return negate(open_by_reconstruction(negate(r), se, conn));
}

namespace detail {

/// Marks connected equal-value plateaus; `cmp(outside, plateau)` decides
/// whether an outside neighbor disqualifies the plateau.
template <typename Cmp>
BinaryMask regional_extrema(const Raster& r, Connectivity conn, Cmp outside_beats) {
  const int w = r.width, h = r.height;
  BinaryMask out(w, h);
  std::vector<uint8_t> visited(r.size(), 0);
  std::vector<std::pair<int, int>> neigh;
  for (auto [dx, dy] : conn_se(conn).offsets)
    if (dx != 0 || dy != 0) neigh.emplace_back(dx, dy);

  std::vector<size_t> plateau;
  std::deque<std::pair<int, int>> q;
  auto idx = [w](int x, int y) { return static_cast<size_t>(y) * w + x; };

  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      if (visited[idx(x0, y0)]) continue;
      double level = r.data[idx(x0, y0)];
      plateau.clear();
      q.clear();
      q.emplace_back(x0, y0);
      visited[idx(x0, y0)] = 1;
      bool is_extremum = true;
      while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop_front();
        plateau.push_back(idx(x, y));
        for (auto [dx, dy] : neigh) {
          int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          double nv = r.data[idx(nx, ny)];
          if (nv == level) {
            if (!visited[idx(nx, ny)]) {
              visited[idx(nx, ny)] = 1;
              q.emplace_back(nx, ny);
            }
          } else if (outside_beats(nv, level)) {
            is_extremum = false;
          }
        }
      }
      if (is_extremum)
        for (size_t i : plateau) out.bits[i] = 1;
    }
  return out;
}

}  // namespace detail

/// Connected plateaus whose every outside neighbor is strictly lower.
inline BinaryMask regional_maxima(const Raster& r, Connectivity conn = Connectivity(8)) {
  return detail::regional_extrema(r, conn, [](double nv, double level) { return nv > level; });
}

/// Connected plateaus whose every outside neighbor is strictly higher.
inline BinaryMask regional_minima(const Raster& r, Connectivity conn = Connectivity(8)) {
  return detail::regional_extrema(r, conn, [](double nv, double level) { return nv < level; });
}

/// Modifies g so that its regional minima are exactly the connected
/// components of `markers`. Sentinels: -1 on markers (below any valid
/// intensity), +2 elsewhere; delta is one 16-bit quantum.
inline Raster impose_minima(const Raster& g, const BinaryMask& markers,
                            Connectivity conn = Connectivity(8)) {
  if (markers.width != g.width || markers.height != g.height)
    throw DimensionMismatch("impose_minima markers vs raster");
  if (markers.count() == 0) throw EmptyMarkers();

  constexpr double kDelta = 1.0 / 65535.0;
  Raster sentinel(g.width, g.height);
  Raster limit(g.width, g.height);
  for (size_t i = 0; i < g.size(); ++i) {
    sentinel.data[i] = markers.bits[i] ? -1.0 : 2.0;
    limit.data[i] = std::min(g.data[i] + kDelta, sentinel.data[i]);
  }
  // reconstruction by erosion of `sentinel` over `limit`, via negation
  Raster rec = reconstruct_by_dilation(negate(sentinel), negate(limit), conn);
  Raster out = negate(rec);
  out.meta = g.meta;
  return out;
}

/// Background components not 4/8-connected to the image border become
/// foreground.
inline BinaryMask fill_holes(const BinaryMask& m, Connectivity conn = Connectivity(4)) {
  const int w = m.width, h = m.height;
  std::vector<uint8_t> outside(m.size(), 0);
  std::deque<std::pair<int, int>> q;
  auto idx = [w](int x, int y) { return static_cast<size_t>(y) * w + x; };
  auto push = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    size_t i = idx(x, y);
    if (!m.bits[i] && !outside[i]) {
      outside[i] = 1;
      q.emplace_back(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    push(x, 0);
    push(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    push(0, y);
    push(w - 1, y);
  }
  std::vector<std::pair<int, int>> neigh;
  for (auto [dx, dy] : conn_se(conn).offsets)
    if (dx != 0 || dy != 0) neigh.emplace_back(dx, dy);
  while (!q.empty()) {
    auto [x, y] = q.front();
    q.pop_front();
    for (auto [dx, dy] : neigh) push(x + dx, y + dy);
  }
  BinaryMask out(w, h);
  for (size_t i = 0; i < m.size(); ++i) out.bits[i] = (m.bits[i] || !outside[i]) ? 1 : 0;
  return out;
}

namespace detail {

// 1-D squared-distance transform (lower envelope of parabolas),
// Felzenszwalb & Huttenlocher. f may contain +inf but not only +inf.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    double s = -kInf;
    while (k >= 0) {
      s = ((f[q] + q * static_cast<double>(q)) - (f[v[k]] + v[k] * static_cast<double>(v[k]))) /
          (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    if (k < 0) s = -kInf;
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = q - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

/// Exact Euclidean distance (in pixels) from each pixel to the nearest
/// false pixel; zero on false pixels.
inline Raster distance_transform(const BinaryMask& m) {
  const int w = m.width, h = m.height;
  bool any_false = false;
  for (uint8_t b : m.bits)
    if (!b) {
      any_false = true;
      break;
    }
  if (!any_false) throw AllForeground();

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Raster sq(w, h);

  // row pass: linear two-scan distance to the nearest false pixel in the
  // same row (inf if the row is all-true), then squared
  for (int y = 0; y < h; ++y) {
    double dist = kInf;
    for (int x = 0; x < w; ++x) {
      dist = m.at(x, y) ? dist + 1 : 0;
      sq.at(x, y) = dist;
    }
    dist = kInf;
    for (int x = w - 1; x >= 0; --x) {
      dist = m.at(x, y) ? dist + 1 : 0;
      sq.at(x, y) = std::min(sq.at(x, y), dist);
    }
    for (int x = 0; x < w; ++x) {
      double v = sq.at(x, y);
      sq.at(x, y) = v == kInf ? kInf : v * v;
    }
  }

  // column pass: parabola envelope over the squared row distances
  std::vector<double> f(h), d(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = sq.at(x, y);
    detail::edt_1d(f, d, h);
    for (int y = 0; y < h; ++y) sq.at(x, y) = d[y];
  }
  for (double& v : sq.data) v = std::sqrt(v);
  return sq;
}

}  // namespace mcseg::morph

#endif
