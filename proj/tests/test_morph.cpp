#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "mcseg/label.hpp"
#include "mcseg/morph.hpp"

using namespace mcseg;
using namespace mcseg::morph;

namespace {

// brute-force neighborhood max/min with replicate padding
Raster brute_dilate(const Raster& r, const StructuringElement& se) {
  Raster out(r.width, r.height);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      double v = -1e300;
      for (auto [dx, dy] : se.offsets) {
        int nx = std::clamp(x + dx, 0, r.width - 1);
        int ny = std::clamp(y + dy, 0, r.height - 1);
        v = std::max(v, r.at(nx, ny));
      }
      out.at(x, y) = v;
    }
  return out;
}

// naive reconstruction: iterate r <- min(dilate(r), mask) to fixpoint
Raster naive_reconstruct(const Raster& marker, const Raster& mask, Connectivity conn) {
  Raster r = marker;
  StructuringElement se = conn_se(conn);
  while (true) {
    Raster next = brute_dilate(r, se);
    bool changed = false;
    for (size_t i = 0; i < next.size(); ++i) {
      next.data[i] = std::min(next.data[i], mask.data[i]);
      if (next.data[i] != r.data[i]) changed = true;
    }
    r = std::move(next);
    if (!changed) break;
  }
  return r;
}

// clamp marker under mask so reconstruction preconditions hold
Raster clamp_under(const Raster& marker, const Raster& mask) {
  Raster m = marker;
  for (size_t i = 0; i < m.size(); ++i) m.data[i] = std::min(m.data[i], mask.data[i]);
  return m;
}

}  // namespace

TEST_CASE("dilate basics") {
  Raster c(5, 5, 0.3);
  Raster d = dilate(c, StructuringElement::rect(3, 3));
  for (double v : d.data) CHECK(v == 0.3);

  Raster imp(5, 5, 0.0);
  imp.at(2, 2) = 1.0;
  d = dilate(imp, StructuringElement::rect(3, 3));
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x)
      CHECK(d.at(x, y) == ((std::abs(x - 2) <= 1 && std::abs(y - 2) <= 1) ? 1.0 : 0.0));
}

TEST_CASE("dilate matches brute-force oracle") {
  std::mt19937_64 rng(1);
  StructuringElement se = StructuringElement::disk(2);
  for (int t = 0; t < 20; ++t) {
    Raster r = testutil::random_raster(rng, 8, 8);
    Raster a = dilate(r, se), b = brute_dilate(r, se);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a.data[i] == b.data[i]);
  }
}

TEST_CASE("erode basics and duality") {
  Raster ones(5, 5, 1.0);
  ones.at(2, 2) = 0.0;
  Raster e = erode(ones, StructuringElement::rect(3, 3));
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x)
      CHECK(e.at(x, y) == ((std::abs(x - 2) <= 1 && std::abs(y - 2) <= 1) ? 0.0 : 1.0));

  std::mt19937_64 rng(2);
  for (auto& se : {StructuringElement::rect(3, 3), StructuringElement::disk(2)}) {
    for (int t = 0; t < 50; ++t) {
      Raster r = testutil::random_raster(rng, 7, 9);
      Raster lhs = erode(r, se);
      Raster comp = r;
      for (double& v : comp.data) v = 1.0 - v;
      Raster rhs = dilate(comp, se);
      for (size_t i = 0; i < lhs.size(); ++i)
        CHECK(std::abs(lhs.data[i] - (1.0 - rhs.data[i])) < 1e-12);
    }
  }
}

TEST_CASE("open and close") {
  Raster c(4, 4, 0.7);
  Raster o = open(c, StructuringElement::rect(3, 3));
  for (double v : o.data) CHECK(v == 0.7);

  Raster peak(6, 6, 0.0);
  peak.at(3, 3) = 1.0;
  o = open(peak, StructuringElement::rect(3, 3));
  for (double v : o.data) CHECK(v == 0.0);

  std::mt19937_64 rng(3);
  StructuringElement se = StructuringElement::disk(1);
  for (int t = 0; t < 50; ++t) {
    Raster r = testutil::random_raster(rng, 8, 8);
    Raster lo = open(r, se), hi = close(r, se);
    for (size_t i = 0; i < r.size(); ++i) {
      CHECK(lo.data[i] <= r.data[i]);
      CHECK(r.data[i] <= hi.data[i]);
    }
  }
}

TEST_CASE("subtract clamps at zero") {
  Raster a(2, 1), b(2, 1);
  a.data = {0.3, 0.8};
  b.data = {0.5, 0.3};
  Raster d = subtract(a, b);
  CHECK(d.data[0] == 0.0);
  CHECK(d.data[1] == doctest::Approx(0.5));
  Raster same = subtract(a, a);
  for (double v : same.data) CHECK(v == 0.0);
  CHECK_THROWS_AS(subtract(a, Raster(3, 1)), DimensionMismatch);
}

TEST_CASE("reconstruction: fixpoint, plateaus, preconditions") {
  Raster mask(8, 8, 0.0);
  // plateau A at 0.9, plateau B at 0.7
  for (int y = 1; y <= 3; ++y)
    for (int x = 1; x <= 3; ++x) mask.at(x, y) = 0.9;
  for (int y = 5; y <= 6; ++y)
    for (int x = 5; x <= 6; ++x) mask.at(x, y) = 0.7;

  SUBCASE("marker = mask is already the fixpoint") {
    Raster r = reconstruct_by_dilation(mask, mask);
    for (size_t i = 0; i < r.size(); ++i) CHECK(r.data[i] == mask.data[i]);
  }

  SUBCASE("single-pixel marker recovers its plateau only") {
    Raster marker(8, 8, 0.0);
    marker.at(2, 2) = 0.9;
    Raster r = reconstruct_by_dilation(marker, mask);
    Raster expect = naive_reconstruct(marker, mask, Connectivity(8));
    for (size_t i = 0; i < r.size(); ++i) CHECK(r.data[i] == expect.data[i]);
    CHECK(r.at(1, 1) == 0.9);
    CHECK(r.at(5, 5) == 0.0);  // B suppressed
  }

  SUBCASE("marker above mask rejected") {
    Raster marker(8, 8, 1.0);
    CHECK_THROWS_AS(reconstruct_by_dilation(marker, mask), MarkerExceedsMask);
    CHECK_THROWS_AS(reconstruct_by_dilation(Raster(4, 4), mask), DimensionMismatch);
  }
}

TEST_CASE("reconstruction equals naive fixpoint on random pairs") {
  std::mt19937_64 rng(4);
  for (int conn : {4, 8}) {
    for (int t = 0; t < 30; ++t) {
      Raster mask = testutil::random_raster(rng, 16, 16);
      Raster marker = clamp_under(testutil::random_raster(rng, 16, 16), mask);
      Raster fast = reconstruct_by_dilation(marker, mask, Connectivity(conn));
      Raster slow = naive_reconstruct(marker, mask, Connectivity(conn));
      for (size_t i = 0; i < fast.size(); ++i) CHECK(fast.data[i] == slow.data[i]);
    }
  }
}

TEST_CASE("reconstruction is increasing, anti-extensive, idempotent") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    Raster mask = testutil::random_raster(rng, 10, 10);
    Raster m1 = clamp_under(testutil::random_raster(rng, 10, 10), mask);
    Raster m2 = m1;
    for (size_t i = 0; i < m2.size(); ++i)
      m2.data[i] = std::min(mask.data[i], m2.data[i] + 0.1);
    Raster r1 = reconstruct_by_dilation(m1, mask);
    Raster r2 = reconstruct_by_dilation(m2, mask);
    Raster r11 = reconstruct_by_dilation(r1, mask);
    for (size_t i = 0; i < r1.size(); ++i) {
      CHECK(r1.data[i] <= r2.data[i]);      // increasing
      CHECK(r1.data[i] <= mask.data[i]);    // anti-extensive wrt mask
      CHECK(r11.data[i] == r1.data[i]);     // idempotent
    }
  }
}

TEST_CASE("open/close by reconstruction") {
  StructuringElement se = StructuringElement::rect(3, 3);

  Raster c(6, 6, 0.4);
  Raster o = open_by_reconstruction(c, se);
  for (double v : o.data) CHECK(v == 0.4);

  // blob larger than SE plus an isolated speck: blob kept exactly,
  // speck removed; plain opening would shave the blob corners
  Raster img(16, 16, 0.1);
  for (int y = 2; y <= 8; ++y)
    for (int x = 2; x <= 8; ++x) img.at(x, y) = 0.8;
  img.at(13, 13) = 0.9;
  Raster obr = open_by_reconstruction(img, se);
  Raster expect = naive_reconstruct(erode(img, se), img, Connectivity(8));
  for (size_t i = 0; i < obr.size(); ++i) CHECK(obr.data[i] == expect.data[i]);
  CHECK(obr.at(2, 2) == 0.8);
  CHECK(obr.at(13, 13) == 0.1);

  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    Raster r = testutil::random_raster(rng, 10, 10);
    Raster once_o = open_by_reconstruction(r, se);
    Raster twice_o = open_by_reconstruction(once_o, se);
    Raster once_c = close_by_reconstruction(r, se);
    Raster twice_c = close_by_reconstruction(once_c, se);
    Raster plain = open(r, se);
    for (size_t i = 0; i < r.size(); ++i) {
      CHECK(once_o.data[i] == twice_o.data[i]);   // idempotent
      CHECK(once_c.data[i] == twice_c.data[i]);
      CHECK(once_o.data[i] <= r.data[i]);
      CHECK(once_c.data[i] >= r.data[i]);
      CHECK(once_o.data[i] >= plain.data[i]);     // >= standard opening
    }
  }
}

TEST_CASE("regional maxima") {
  Raster peak(5, 5, 0.1);
  peak.at(2, 2) = 0.9;
  BinaryMask m = regional_maxima(peak);
  CHECK(m.count() == 1);
  CHECK(m.at(2, 2));

  Raster c(4, 4, 0.5);
  m = regional_maxima(c);
  CHECK(m.count() == 16);  // one global plateau

  // exhaustive plateau oracle on random quantized rasters
  std::mt19937_64 rng(7);
  for (int conn : {4, 8}) {
    for (int t = 0; t < 30; ++t) {
      Raster r = testutil::random_quantized(rng, 8, 8, 4);
      BinaryMask got = regional_maxima(r, Connectivity(conn));
      // oracle: a pixel is a regional max iff its plateau (flood of equal
      // values) has no strictly-greater neighbor
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          // BFS plateau
          std::vector<std::pair<int, int>> stack{{x, y}};
          std::vector<uint8_t> seen(64, 0);
          seen[y * 8 + x] = 1;
          bool beaten = false;
          while (!stack.empty()) {
            auto [cx, cy] = stack.back();
            stack.pop_back();
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                if (conn == 4 && dx != 0 && dy != 0) continue;
                int nx = cx + dx, ny = cy + dy;
                if (nx < 0 || ny < 0 || nx >= 8 || ny >= 8) continue;
                if (r.at(nx, ny) == r.at(x, y)) {
                  if (!seen[ny * 8 + nx]) {
                    seen[ny * 8 + nx] = 1;
                    stack.emplace_back(nx, ny);
                  }
                } else if (r.at(nx, ny) > r.at(x, y)) {
                  beaten = true;
                }
              }
          }
          CHECK(got.at(x, y) == !beaten);
        }
    }
  }
}

TEST_CASE("impose_minima pins regional minima to the markers") {
  Raster c(6, 6, 0.5);
  BinaryMask all(6, 6, true);
  Raster r = impose_minima(c, all);
  double v0 = r.data[0];
  for (double v : r.data) CHECK(v == v0);  // constant minimum image

  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    Raster g = testutil::random_raster(rng, 10, 10);
    BinaryMask markers = testutil::random_mask(rng, 10, 10, 0.08);
    if (markers.count() == 0) {
      CHECK_THROWS_AS(impose_minima(g, markers), EmptyMarkers);
      continue;
    }
    Raster imp = impose_minima(g, markers);
    BinaryMask minima = regional_minima(imp);
    for (size_t i = 0; i < minima.size(); ++i) CHECK(minima.bits[i] == markers.bits[i]);
  }
}

TEST_CASE("fill_holes") {
  BinaryMask rect(8, 8);
  for (int y = 2; y <= 5; ++y)
    for (int x = 2; x <= 5; ++x) rect.set(x, y, true);
  BinaryMask f = fill_holes(rect);
  for (size_t i = 0; i < f.size(); ++i) CHECK(f.bits[i] == rect.bits[i]);

  BinaryMask ring = rect;
  ring.set(3, 3, false);
  ring.set(4, 3, false);
  ring.set(3, 4, false);
  ring.set(4, 4, false);
  f = fill_holes(ring);
  for (size_t i = 0; i < f.size(); ++i) CHECK(f.bits[i] == rect.bits[i]);

  // flood-from-border oracle
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    BinaryMask m = testutil::random_mask(rng, 10, 10, 0.55);
    BinaryMask got = fill_holes(m, Connectivity(4));
    // oracle: BFS false pixels from the border
    std::vector<uint8_t> outside(100, 0);
    std::vector<std::pair<int, int>> stack;
    auto push = [&](int x, int y) {
      if (x < 0 || y < 0 || x >= 10 || y >= 10) return;
      if (!m.at(x, y) && !outside[y * 10 + x]) {
        outside[y * 10 + x] = 1;
        stack.emplace_back(x, y);
      }
    };
    for (int i = 0; i < 10; ++i) {
      push(i, 0);
      push(i, 9);
      push(0, i);
      push(9, i);
    }
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      push(x + 1, y);
      push(x - 1, y);
      push(x, y + 1);
      push(x, y - 1);
    }
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 10; ++x)
        CHECK(got.at(x, y) == (m.at(x, y) || !outside[y * 10 + x]));
  }
}

TEST_CASE("distance transform") {
  BinaryMask none(4, 4, false);
  Raster d = distance_transform(none);
  for (double v : d.data) CHECK(v == 0.0);

  BinaryMask m(3, 3, true);
  m.set(0, 0, false);
  d = distance_transform(m);
  CHECK(d.at(0, 0) == 0.0);
  CHECK(d.at(1, 0) == 1.0);
  CHECK(d.at(2, 0) == 2.0);
  CHECK(d.at(0, 1) == 1.0);
  CHECK(d.at(1, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(d.at(2, 1) == doctest::Approx(std::sqrt(5.0)));
  CHECK(d.at(0, 2) == 2.0);
  CHECK(d.at(1, 2) == doctest::Approx(std::sqrt(5.0)));
  CHECK(d.at(2, 2) == doctest::Approx(std::sqrt(8.0)));

  CHECK_THROWS_AS(distance_transform(BinaryMask(2, 2, true)), AllForeground);

  // exhaustive nearest-false oracle
  std::mt19937_64 rng(10);
  for (int t = 0; t < 50; ++t) {
    BinaryMask r = testutil::random_mask(rng, 12, 12, 0.7);
    bool any_false = false;
    for (auto b : r.bits) any_false |= !b;
    if (!any_false) continue;
    Raster got = distance_transform(r);
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 12; ++x) {
        double best = 1e300;
        for (int yy = 0; yy < 12; ++yy)
          for (int xx = 0; xx < 12; ++xx)
            if (!r.at(xx, yy))
              best = std::min(best, std::hypot(x - xx, y - yy));
        CHECK(got.at(x, y) == doctest::Approx(best).epsilon(1e-12));
      }
  }
}
