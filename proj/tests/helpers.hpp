#ifndef MCSEG_TEST_HELPERS_HPP
#define MCSEG_TEST_HELPERS_HPP

#include <random>

#include "mcseg/raster.hpp"

namespace testutil {

inline mcseg::Raster random_raster(std::mt19937_64& rng, int w, int h, double lo = 0.0,
                                   double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  mcseg::Raster r(w, h);
  for (double& v : r.data) v = u(rng);
  return r;
}

inline mcseg::BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double p_true = 0.5) {
  std::bernoulli_distribution b(p_true);
  mcseg::BinaryMask m(w, h);
  for (auto& bit : m.bits) bit = b(rng) ? 1 : 0;
  return m;
}

/// Raster with values quantized to integers 0..levels-1.
inline mcseg::Raster random_quantized(std::mt19937_64& rng, int w, int h, int levels) {
  std::uniform_int_distribution<int> u(0, levels - 1);
  mcseg::Raster r(w, h);
  for (double& v : r.data) v = static_cast<double>(u(rng));
  return r;
}

}  // namespace testutil

#endif
