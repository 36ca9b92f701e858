#ifndef MCSEG_PHANTOM_HPP
#define MCSEG_PHANTOM_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mcseg/errors.hpp"
#include "mcseg/raster.hpp"

namespace mcseg::phantom {

struct PhantomSpec {
  int width = 512;
  int height = 512;
  int blob_count = 10;
  double blob_sigma_min = 1.0;   // px
  double blob_sigma_max = 3.0;   // px
  double contrast_min = 0.10;    // peak height above local background
  double contrast_max = 0.25;
  double noise_sigma = 0.01;
  double salt_pepper_fraction = 0.001;
  double background_lo = 0.3;
  double background_hi = 0.6;
  double film_level = 0.05;  // dark field outside the simulated breast
};

struct Phantom {
  Raster image;
  BinaryMask ground_truth;  // pixels within 2 sigma of each blob center
  std::vector<double> blob_x, blob_y, blob_sigma, blob_contrast;
};

/// Seed-reproducible synthetic test image shaped like a CC-view film:
/// dark field, a half-elliptic tissue region carrying a smooth
/// low-frequency background, Gaussian texture noise, sparse
/// salt-and-pepper, and planted bright Gaussian blobs (all inside the
/// tissue) with known ground truth.
inline Phantom generate_phantom(uint64_t seed, const PhantomSpec& spec = {}) {
  if (spec.width < 128 || spec.height < 128)
    throw Error("generate_phantom: dims must be at least 128x128");

  std::mt19937_64 rng(seed);
  const int w = spec.width, h = spec.height;
  Phantom ph;
  ph.image = Raster(w, h);
  ph.image.meta.sampling_microns = 45.0;
  ph.ground_truth = BinaryMask(w, h);

  // half-elliptic tissue region anchored at the left edge, CC-view style
  const double ax = 0.78 * w, by = 0.42 * h, cy0 = h / 2.0;
  auto ellipse = [&](double x, double y) {
    double ex = x / ax, ey = (y - cy0) / by;
    return ex * ex + ey * ey;
  };

  // smooth tissue background: a few very wide Gaussians, rescaled into range
  Raster bg(w, h);
  std::uniform_real_distribution<double> ux(0, w), uy(0, h), ua(-1.0, 1.0);
  std::uniform_real_distribution<double> us(std::min(w, h) / 8.0, std::min(w, h) / 2.0);
  const int lumps = 24;
  for (int k = 0; k < lumps; ++k) {
    double cx = ux(rng), cy = uy(rng), amp = ua(rng), sig = us(rng);
    double inv = 1.0 / (2.0 * sig * sig);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double dx = x - cx, dy = y - cy;
        bg.at(x, y) += amp * std::exp(-(dx * dx + dy * dy) * inv);
      }
  }
  // normalize the lump field to a controlled spread around mid-range,
  // clipped into [background_lo, background_hi]
  double mean = 0;
  for (double v : bg.data) mean += v;
  mean /= static_cast<double>(bg.size());
  double var = 0;
  for (double v : bg.data) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / static_cast<double>(bg.size()));
  if (sd <= 0) sd = 1.0;
  const double mid = 0.5 * (spec.background_lo + spec.background_hi);
  const double scale = (spec.background_hi - spec.background_lo) / 12.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      ph.image.at(x, y) =
          ellipse(x, y) <= 1.0
              ? std::clamp(mid + (bg.at(x, y) - mean) / sd * scale, spec.background_lo,
                           spec.background_hi)
              : spec.film_level;

  // plant blobs inside the tissue, keeping centers apart
  std::uniform_real_distribution<double> usig(spec.blob_sigma_min, spec.blob_sigma_max);
  std::uniform_real_distribution<double> ucon(spec.contrast_min, spec.contrast_max);
  const int margin = static_cast<int>(std::ceil(4 * spec.blob_sigma_max)) + 2;
  std::uniform_real_distribution<double> upx(margin, w - margin), upy(margin, h - margin);
  const int max_attempts = 1000 * std::max(spec.blob_count, 1);
  int attempts = 0;
  while (static_cast<int>(ph.blob_x.size()) < spec.blob_count) {
    if (++attempts > max_attempts)
      throw SpecInfeasible("cannot place blobs without overlap");
    double cx = upx(rng), cy = upy(rng);
    double sig = usig(rng), con = ucon(rng);
    if (ellipse(cx, cy) > 0.8) continue;  // stay well inside the tissue
    bool clash = false;
    for (size_t k = 0; k < ph.blob_x.size(); ++k) {
      double dx = cx - ph.blob_x[k], dy = cy - ph.blob_y[k];
      double mindist = 3.0 * (sig + ph.blob_sigma[k]);
      if (dx * dx + dy * dy < mindist * mindist) clash = true;
    }
    if (clash) continue;
    ph.blob_x.push_back(cx);
    ph.blob_y.push_back(cy);
    ph.blob_sigma.push_back(sig);
    ph.blob_contrast.push_back(con);

    double inv = 1.0 / (2.0 * sig * sig);
    int r = static_cast<int>(std::ceil(4 * sig));
    for (int y = std::max(0, static_cast<int>(cy) - r);
         y <= std::min(h - 1, static_cast<int>(cy) + r); ++y)
      for (int x = std::max(0, static_cast<int>(cx) - r);
           x <= std::min(w - 1, static_cast<int>(cx) + r); ++x) {
        double dx = x - cx, dy = y - cy;
        double d2 = dx * dx + dy * dy;
        ph.image.at(x, y) += con * std::exp(-d2 * inv);
        if (d2 <= 4.0 * sig * sig) ph.ground_truth.set(x, y, true);
      }
  }

  // texture noise + salt-and-pepper
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  for (double& v : ph.image.data) v += noise(rng);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (double& v : ph.image.data) {
    if (u01(rng) < spec.salt_pepper_fraction) v = u01(rng) < 0.5 ? 0.0 : 1.0;
  }
  for (double& v : ph.image.data) v = std::clamp(v, 0.0, 1.0);
  return ph;
}

}  // namespace mcseg::phantom

#endif
