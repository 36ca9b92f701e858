#include <doctest.h>

#include <deque>
#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "mcseg/analysis.hpp"
#include "mcseg/config.hpp"
#include "mcseg/label.hpp"
#include "mcseg/phantom.hpp"

using namespace mcseg;
using namespace mcseg::analysis;

namespace {

// independent flood-fill component count
int count_components(const BinaryMask& m, int conn) {
  std::vector<uint8_t> seen(m.size(), 0);
  int count = 0;
  for (int y0 = 0; y0 < m.height; ++y0)
    for (int x0 = 0; x0 < m.width; ++x0) {
      if (!m.at(x0, y0) || seen[y0 * m.width + x0]) continue;
      ++count;
      std::deque<std::pair<int, int>> q{{x0, y0}};
      seen[y0 * m.width + x0] = 1;
      while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (conn == 4 && dx != 0 && dy != 0) continue;
            int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
            if (m.at(nx, ny) && !seen[ny * m.width + nx]) {
              seen[ny * m.width + nx] = 1;
              q.emplace_back(nx, ny);
            }
          }
      }
    }
  return count;
}

}  // namespace

TEST_CASE("label_components") {
  BinaryMask blob(6, 6);
  for (int y = 1; y <= 3; ++y)
    for (int x = 1; x <= 3; ++x) blob.set(x, y, true);
  CHECK(label_components(blob, morph::Connectivity(8)).max_label == 1);

  BinaryMask diag(4, 4);
  diag.set(1, 1, true);
  diag.set(2, 2, true);
  CHECK(label_components(diag, morph::Connectivity(8)).max_label == 1);
  CHECK(label_components(diag, morph::Connectivity(4)).max_label == 2);

  std::mt19937_64 rng(51);
  for (int t = 0; t < 200; ++t) {
    BinaryMask m = testutil::random_mask(rng, 12, 12, 0.4);
    for (int conn : {4, 8})
      CHECK(label_components(m, morph::Connectivity(conn)).max_label ==
            count_components(m, conn));
  }
}

TEST_CASE("region stats") {
  Raster r(8, 8, 0.5);
  r.meta.sampling_microns = 50.0;
  BinaryMask m(8, 8);
  m.set(2, 2, true);
  m.set(3, 2, true);
  m.set(2, 3, true);
  m.set(3, 3, true);
  LabelMap lm = label_components(m, morph::Connectivity(8));
  auto stats = region_stats(lm, r);
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].area_px == 4);
  CHECK(stats[0].area_mm2 == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(stats[0].centroid_x == doctest::Approx(2.5));
  CHECK(stats[0].centroid_y == doctest::Approx(2.5));
  CHECK(stats[0].mean_intensity == doctest::Approx(0.5));

  CHECK(region_stats(LabelMap(8, 8), r).empty());
  CHECK_THROWS_AS(region_stats(LabelMap(4, 4), r), DimensionMismatch);
}

TEST_CASE("cluster_regions single linkage with minimum size 3") {
  auto region_at = [](double x, double y) {
    RegionStats s;
    s.centroid_x = x;
    s.centroid_y = y;
    s.area_px = 1;
    return s;
  };
  const double um = 1000.0;  // 1 mm per pixel for easy arithmetic

  std::vector<RegionStats> tri{region_at(0, 0), region_at(2, 0), region_at(0, 2)};
  CHECK(cluster_regions(tri, 5.0, um) == 1);
  for (auto& s : tri) CHECK(s.cluster_id == 1);

  std::vector<RegionStats> pair{region_at(0, 0), region_at(1, 0)};
  CHECK(cluster_regions(pair, 5.0, um) == 0);
  for (auto& s : pair) CHECK(s.cluster_id == 0);

  // chain A-B-C with |AB|,|BC| <= r < |AC|
  std::vector<RegionStats> chain{region_at(0, 0), region_at(4, 0), region_at(8, 0)};
  CHECK(cluster_regions(chain, 5.0, um) == 1);
  for (auto& s : chain) CHECK(s.cluster_id == 1);
}

TEST_CASE("dice") {
  BinaryMask a(4, 4), b(4, 4);
  a.set(0, 0, true);
  a.set(1, 0, true);
  b = a;
  CHECK(dice(a, b) == 1.0);

  BinaryMask c(4, 4);
  c.set(3, 3, true);
  CHECK(dice(a, c) == 0.0);

  BinaryMask d(4, 4), e(4, 4);
  for (int i = 0; i < 4; ++i) d.set(i, 0, true);
  for (int i = 0; i < 4; ++i) e.set(i, i < 2 ? 0 : 1, true);
  CHECK(dice(d, e) == doctest::Approx(0.5));

  CHECK(dice(BinaryMask(4, 4), BinaryMask(4, 4)) == 1.0);
  CHECK_THROWS_AS(dice(a, BinaryMask(3, 3)), DimensionMismatch);

  std::mt19937_64 rng(52);
  for (int t = 0; t < 50; ++t) {
    BinaryMask x = testutil::random_mask(rng, 10, 10);
    BinaryMask y = testutil::random_mask(rng, 10, 10);
    CHECK(dice(x, y) == dice(y, x));
  }
}

TEST_CASE("phantom generation") {
  phantom::PhantomSpec spec;
  spec.width = 128;
  spec.height = 128;
  spec.blob_count = 5;

  phantom::Phantom a = phantom::generate_phantom(99, spec);
  phantom::Phantom b = phantom::generate_phantom(99, spec);
  CHECK(a.image.data == b.image.data);  // seeded determinism
  CHECK(a.ground_truth.bits == b.ground_truth.bits);

  spec.blob_count = 0;
  phantom::Phantom empty = phantom::generate_phantom(7, spec);
  CHECK(empty.ground_truth.count() == 0);

  // planted peaks exceed the local background by the configured contrast
  spec.blob_count = 5;
  spec.noise_sigma = 0.0;
  spec.salt_pepper_fraction = 0.0;
  phantom::Phantom clean = phantom::generate_phantom(99, spec);
  phantom::PhantomSpec bg_only = spec;
  bg_only.blob_count = 0;
  phantom::Phantom base = phantom::generate_phantom(99, bg_only);
  for (size_t k = 0; k < clean.blob_x.size(); ++k) {
    int cx = static_cast<int>(clean.blob_x[k]), cy = static_cast<int>(clean.blob_y[k]);
    double contrast = clean.image.at(cx, cy) - base.image.at(cx, cy);
    // at worst half a pixel off the true center with sigma = 1
    CHECK(contrast >= spec.contrast_min * std::exp(-0.25));
  }

  spec.width = 100;
  CHECK_THROWS(phantom::generate_phantom(1, spec));
}

TEST_CASE("config parsing") {
  auto path = std::filesystem::temp_directory_path() / "mcseg_cfg.txt";
  {
    std::ofstream out(path);
    out << "# comment\n"
        << "method = watershed\n"
        << "median_w = 3\n"
        << "gain_1 = 2.5\n"
        << "cluster_radius_mm = 4.0\n";
  }
  PipelineConfig c = load_config(path.string());
  CHECK(c.method == Method::watershed);
  CHECK(c.median_w == 3);
  CHECK(c.gains.detail[0] == 2.5);
  CHECK(c.cluster_radius_mm == 4.0);

  {
    std::ofstream out(path);
    out << "not_a_key = 1\n";
  }
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);

  {
    std::ofstream out(path);
    out << "stride = 512\ntile = 128\n";
  }
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);

  CHECK_THROWS_AS(load_config("/nonexistent/cfg.txt"), ConfigError);
}
