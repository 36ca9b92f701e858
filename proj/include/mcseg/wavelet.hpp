#ifndef MCSEG_WAVELET_HPP
#define MCSEG_WAVELET_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "mcseg/errors.hpp"
#include "mcseg/raster.hpp"

namespace mcseg::wavelet {

/// Orthonormal Daubechies scaling filter with 8 vanishing moments
/// (16 taps). sum = sqrt(2), sum of squares = 1.
inline constexpr std::array<double, 16> kDb8Lo = {
    -0.00011747678412476953, 0.00067544940645056937, -0.00039174037337694705,
    -0.00487035299345157431, 0.00874609404740577672,  0.01398102791739828165,
    -0.04408825393079475151, -0.01736930100180754617, 0.12874742662047845886,
    0.00047248457391328277,  -0.28401554296154692652, -0.01582910525634930567,
    0.58535468365420671277,  0.67563073629728980681,  0.31287159091429997066,
    0.05441584224310400996};

/// Quadrature mirror high-pass: g[m] = (-1)^m h[L-1-m].
inline std::array<double, 16> db8_hi() {
  std::array<double, 16> g{};
  for (int m = 0; m < 16; ++m) g[m] = (m % 2 == 0 ? 1.0 : -1.0) * kDb8Lo[15 - m];
  return g;
}

struct DetailBands {
  Raster horizontal;  // rows low-pass, columns high-pass
  Raster vertical;    // rows high-pass, columns low-pass
  Raster diagonal;    // high-pass both ways
};

struct WaveletPyramid {
  int levels = 0;
  Raster approx;                    // band at the coarsest level
  std::vector<DetailBands> details; // index 0 = level 1 (finest)
  int original_width = 0;
  int original_height = 0;
};

struct EnhanceGains {
  std::vector<double> detail;  // per-level multipliers, index 0 = level 1
  double approx_gain = 1.0;

  static EnhanceGains defaults(int levels = 5) {
    EnhanceGains g;
    g.detail.assign(levels, 1.0);
    // amplify the finest scales where MC-sized structure lives
    for (int j = 0; j < std::min(levels, 3); ++j) g.detail[j] = 1.5;
    return g;
  }
};

namespace detail {

/// One analysis step on a periodic signal of even length n:
/// a[k] = sum_m h[m] x[(2k+m) mod n], d[k] likewise with the high-pass.
inline void analyze_periodic(const std::vector<double>& x, std::vector<double>& a,
                             std::vector<double>& d) {
  const int n = static_cast<int>(x.size());
  const int half = n / 2;
  auto g = db8_hi();
  a.assign(half, 0.0);
  d.assign(half, 0.0);
  for (int k = 0; k < half; ++k) {
    double sa = 0, sd = 0;
    for (int m = 0; m < 16; ++m) {
      double v = x[(2 * k + m) % n];
      sa += kDb8Lo[m] * v;
      sd += g[m] * v;
    }
    a[k] = sa;
    d[k] = sd;
  }
}

/// Inverse of analyze_periodic.
inline void synthesize_periodic(const std::vector<double>& a, const std::vector<double>& d,
                                std::vector<double>& x) {
  const int half = static_cast<int>(a.size());
  const int n = 2 * half;
  auto g = db8_hi();
  x.assign(n, 0.0);
  for (int k = 0; k < half; ++k)
    for (int m = 0; m < 16; ++m) x[(2 * k + m) % n] += kDb8Lo[m] * a[k] + g[m] * d[k];
}

/// Symmetric (half-sample, zero-order) extension of length `target`.
inline std::vector<double> pad_symmetric(const std::vector<double>& x, int target) {
  std::vector<double> out = x;
  out.reserve(target);
  const int n = static_cast<int>(x.size());
  int i = n - 1;
  int dir = -1;
  while (static_cast<int>(out.size()) < target) {
    out.push_back(x[i]);
    if (n > 1) {
      if (i + dir < 0 || i + dir >= n) dir = -dir;
      i += dir;
    }
  }
  return out;
}

/// One 2-D decomposition level on an even-dimensioned image.
inline void analyze2d(const Raster& in, Raster& ll, Raster& lh, Raster& hl, Raster& hh) {
  const int w = in.width, h = in.height;
  const int hw = w / 2, hh2 = h / 2;
  // rows first
  Raster rowlo(hw, h), rowhi(hw, h);
  std::vector<double> line(w), a, d;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) line[x] = in.at(x, y);
    analyze_periodic(line, a, d);
    for (int x = 0; x < hw; ++x) {
      rowlo.at(x, y) = a[x];
      rowhi.at(x, y) = d[x];
    }
  }
  // columns
  ll = Raster(hw, hh2);
  lh = Raster(hw, hh2);
  hl = Raster(hw, hh2);
  hh = Raster(hw, hh2);
  std::vector<double> col(h);
  for (int x = 0; x < hw; ++x) {
    for (int y = 0; y < h; ++y) col[y] = rowlo.at(x, y);
    analyze_periodic(col, a, d);
    for (int y = 0; y < hh2; ++y) {
      ll.at(x, y) = a[y];
      lh.at(x, y) = d[y];  // horizontal detail
    }
    for (int y = 0; y < h; ++y) col[y] = rowhi.at(x, y);
    analyze_periodic(col, a, d);
    for (int y = 0; y < hh2; ++y) {
      hl.at(x, y) = a[y];  // vertical detail
      hh.at(x, y) = d[y];
    }
  }
}

inline Raster synthesize2d(const Raster& ll, const Raster& lh, const Raster& hl,
                           const Raster& hh) {
  const int hw = ll.width, hh2 = ll.height;
  const int w = 2 * hw, h = 2 * hh2;
  Raster rowlo(hw, h), rowhi(hw, h);
  std::vector<double> a(hh2), d(hh2), col;
  for (int x = 0; x < hw; ++x) {
    for (int y = 0; y < hh2; ++y) {
      a[y] = ll.at(x, y);
      d[y] = lh.at(x, y);
    }
    synthesize_periodic(a, d, col);
    for (int y = 0; y < h; ++y) rowlo.at(x, y) = col[y];
    for (int y = 0; y < hh2; ++y) {
      a[y] = hl.at(x, y);
      d[y] = hh.at(x, y);
    }
    synthesize_periodic(a, d, col);
    for (int y = 0; y < h; ++y) rowhi.at(x, y) = col[y];
  }
  Raster out(w, h);
  std::vector<double> ar(hw), dr(hw), line;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < hw; ++x) {
      ar[x] = rowlo.at(x, y);
      dr[x] = rowhi.at(x, y);
    }
    synthesize_periodic(ar, dr, line);
    for (int x = 0; x < w; ++x) out.at(x, y) = line[x];
  }
  return out;
}

inline int round_up(int v, int multiple) { return ((v + multiple - 1) / multiple) * multiple; }

}  // namespace detail

/// Separable periodized db8 decomposition. The image is symmetrically
/// padded to dimensions divisible by 2^levels first; padding is cropped
/// again by dwt2_inverse.
inline WaveletPyramid dwt2_forward(const Raster& r, int levels) {
  if (levels < 1) throw Error("dwt2_forward: levels must be >= 1");
  if (r.width < 1 || r.height < 1) throw Error("dwt2_forward: empty image");

  const int mult = 1 << levels;
  const int pw = detail::round_up(r.width, mult);
  const int ph = detail::round_up(r.height, mult);
  for (int j = 1; j <= levels; ++j) {
    if (pw >> (j - 1) < 16 || ph >> (j - 1) < 16) throw TooManyLevels();
  }

  // pad rows then columns by symmetric extension
  Raster padded(pw, ph);
  {
    std::vector<double> line;
    Raster wide(pw, r.height);
    for (int y = 0; y < r.height; ++y) {
      std::vector<double> row(r.width);
      for (int x = 0; x < r.width; ++x) row[x] = r.at(x, y);
      line = detail::pad_symmetric(row, pw);
      for (int x = 0; x < pw; ++x) wide.at(x, y) = line[x];
    }
    for (int x = 0; x < pw; ++x) {
      std::vector<double> col(r.height);
      for (int y = 0; y < r.height; ++y) col[y] = wide.at(x, y);
      line = detail::pad_symmetric(col, ph);
      for (int y = 0; y < ph; ++y) padded.at(x, y) = line[y];
    }
  }

  WaveletPyramid p;
  p.levels = levels;
  p.original_width = r.width;
  p.original_height = r.height;
  p.details.resize(levels);
  Raster cur = std::move(padded);
  for (int j = 0; j < levels; ++j) {
    Raster ll, lh, hl, hh;
    detail::analyze2d(cur, ll, lh, hl, hh);
    p.details[j].horizontal = std::move(lh);
    p.details[j].vertical = std::move(hl);
    p.details[j].diagonal = std::move(hh);
    cur = std::move(ll);
  }
  p.approx = std::move(cur);
  return p;
}

inline void check_pyramid(const WaveletPyramid& p) {
  if (p.levels < 1 || static_cast<int>(p.details.size()) != p.levels)
    throw InconsistentPyramid("level count");
  int w = p.approx.width, h = p.approx.height;
  for (int j = p.levels - 1; j >= 0; --j) {
    const DetailBands& db = p.details[j];
    if (db.horizontal.width != w || db.horizontal.height != h ||
        db.vertical.width != w || db.vertical.height != h ||
        db.diagonal.width != w || db.diagonal.height != h)
      throw InconsistentPyramid("band dimensions");
    w *= 2;
    h *= 2;
  }
  if (p.original_width > w || p.original_height > h)
    throw InconsistentPyramid("original dims exceed padded dims");
}

inline Raster dwt2_inverse(const WaveletPyramid& p) {
  check_pyramid(p);
  Raster cur = p.approx;
  for (int j = p.levels - 1; j >= 0; --j)
    cur = detail::synthesize2d(cur, p.details[j].horizontal, p.details[j].vertical,
                               p.details[j].diagonal);
  Raster out(p.original_width, p.original_height);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = cur.at(x, y);
  return out;
}

/// Multiplies each detail band at level j by g.detail[j-1] and the
/// approximation band by g.approx_gain.
inline WaveletPyramid enhance_details(const WaveletPyramid& p, const EnhanceGains& g) {
  if (static_cast<int>(g.detail.size()) != p.levels) throw GainLengthMismatch();
  WaveletPyramid out = p;
  for (int j = 0; j < p.levels; ++j) {
    for (double& v : out.details[j].horizontal.data) v *= g.detail[j];
    for (double& v : out.details[j].vertical.data) v *= g.detail[j];
    for (double& v : out.details[j].diagonal.data) v *= g.detail[j];
  }
  for (double& v : out.approx.data) v *= g.approx_gain;
  return out;
}

/// Five-level decompose -> per-level detail gain -> inverse -> clamp to
/// [0,1]; pixels outside the mask are restored from the input.
inline Raster wavelet_enhance(const Raster& r, const BinaryMask& within, const EnhanceGains& g,
                              int levels = 5) {
  if (within.width != r.width || within.height != r.height)
    throw DimensionMismatch("wavelet_enhance mask vs raster");
  WaveletPyramid p = dwt2_forward(r, levels);
  p = enhance_details(p, g);
  Raster out = dwt2_inverse(p);
  out.meta = r.meta;
  for (size_t i = 0; i < out.size(); ++i) {
    if (!within.bits[i]) {
      out.data[i] = r.data[i];
    } else {
      out.data[i] = std::clamp(out.data[i], 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace mcseg::wavelet

#endif
