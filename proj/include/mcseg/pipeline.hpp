#ifndef MCSEG_PIPELINE_HPP
#define MCSEG_PIPELINE_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mcseg/analysis.hpp"
#include "mcseg/config.hpp"
#include "mcseg/image_io.hpp"
#include "mcseg/label.hpp"
#include "mcseg/prep.hpp"
#include "mcseg/segment.hpp"
#include "mcseg/wavelet.hpp"

namespace mcseg::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

struct MethodReport {
  std::string method;
  int region_count = 0;
  int cluster_count = 0;
  std::vector<analysis::RegionStats> regions;
  // adaptive
  std::optional<double> global_threshold;
  int tiles_fitted = 0, tiles_total = 0;
  // watershed
  int foreground_markers = 0, background_markers = 0;
  double segment_ms = 0;
  std::optional<double> dice;
};

struct ImageReport {
  std::string path;
  std::string status = "ok";  // "ok" or an error message
  size_t breast_area_px = 0;
  double preprocess_ms = 0;
  std::vector<MethodReport> methods;
};

struct RunOptions {
  PipelineConfig config;
  std::vector<std::string> inputs;
  std::string ground_truth_dir;  // empty = no scoring
  std::string out_dir;
  int jobs = 0;  // 0 = hardware concurrency
};

struct RunResult {
  std::vector<ImageReport> images;
  int ok_count = 0;
  int failed_count = 0;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline std::optional<std::string> find_ground_truth(const std::string& gt_dir,
                                                    const std::string& image_path) {
  if (gt_dir.empty()) return std::nullopt;
  std::string stem = fs::path(image_path).stem().string();
  for (const std::string& cand :
       {stem + "_gt.png", stem + ".png", stem + "_gt.pgm", stem + ".pgm"}) {
    fs::path p = fs::path(gt_dir) / cand;
    if (fs::exists(p)) return p.string();
  }
  return std::nullopt;
}

inline void score_and_describe(MethodReport& mr, const BinaryMask& mask, const Raster& base,
                               const PipelineConfig& cfg, const BinaryMask* gt) {
  LabelMap lm = label_components(mask, morph::Connectivity(8));
  mr.regions = analysis::region_stats(lm, base);
  mr.region_count = static_cast<int>(mr.regions.size());
  mr.cluster_count =
      analysis::cluster_regions(mr.regions, cfg.cluster_radius_mm, base.meta.sampling_microns);
  if (gt) mr.dice = analysis::dice(mask, *gt);
}

inline ImageReport process_one(const std::string& path, const RunOptions& opt) {
  const PipelineConfig& cfg = opt.config;
  ImageReport rep;
  rep.path = path;
  try {
    auto t0 = std::chrono::steady_clock::now();
    Raster original = io::load_image(path);
    BinaryMask breast = prep::generate_breast_mask(original, cfg.maskgen);
    rep.breast_area_px = breast.count();
    Raster work = prep::median_filter(original, cfg.median_w, cfg.median_h);
    work = prep::unsharp_mask(work, cfg.unsharp, breast);
    work = wavelet::wavelet_enhance(work, breast, cfg.gains, cfg.wavelet_levels);
    rep.preprocess_ms = ms_since(t0);

    std::optional<BinaryMask> gt;
    if (auto gt_path = find_ground_truth(opt.ground_truth_dir, path)) {
      Raster g = io::load_image(*gt_path);
      if (g.width != original.width || g.height != original.height)
        throw DimensionMismatch("ground truth vs image: " + *gt_path);
      BinaryMask m(g.width, g.height);
      for (size_t i = 0; i < g.size(); ++i) m.bits[i] = g.data[i] > 0.5 ? 1 : 0;
      gt = std::move(m);
    }

    std::string stem = fs::path(path).stem().string();
    fs::path out = opt.out_dir;

    if (cfg.method == Method::adaptive || cfg.method == Method::both) {
      MethodReport mr;
      mr.method = "adaptive";
      auto ts = std::chrono::steady_clock::now();
      segment::AdaptiveInfo info;
      BinaryMask mask = segment::adaptive_threshold_segment(work, breast, cfg.threshold, &info);
      mr.segment_ms = ms_since(ts);
      if (info.have_global) mr.global_threshold = info.global_threshold;
      mr.tiles_fitted = info.tiles_fitted;
      mr.tiles_total = info.tiles_total;
      score_and_describe(mr, mask, original, cfg, gt ? &*gt : nullptr);
      io::save_mask(mask, (out / (stem + "_adaptive_mask.png")).string());
      io::save_overlay(original, mask, (out / (stem + "_adaptive_overlay.png")).string());
      rep.methods.push_back(std::move(mr));
    }

    if (cfg.method == Method::watershed || cfg.method == Method::both) {
      MethodReport mr;
      mr.method = "watershed";
      auto ts = std::chrono::steady_clock::now();
      segment::WatershedResult ws =
          segment::watershed_segment(work, breast, cfg.marker, cfg.se_radius);
      mr.segment_ms = ms_since(ts);
      mr.foreground_markers = ws.foreground_markers;
      mr.background_markers = ws.background_markers;
      score_and_describe(mr, ws.mask, original, cfg, gt ? &*gt : nullptr);
      io::save_mask(ws.mask, (out / (stem + "_watershed_mask.png")).string());
      io::save_overlay(original, ws.mask, (out / (stem + "_watershed_overlay.png")).string());
      // ridge overlay for inspection
      BinaryMask ridges(ws.labels.width, ws.labels.height);
      if (ws.foreground_markers > 0)
        for (size_t i = 0; i < ridges.size(); ++i)
          ridges.bits[i] = ws.labels.labels[i] == 0 ? 1 : 0;
      io::save_overlay(original, ridges, (out / (stem + "_watershed_ridges.png")).string());
      rep.methods.push_back(std::move(mr));
    }
  } catch (const std::exception& e) {
    rep.status = e.what();
  }
  return rep;
}

inline json region_to_json(const analysis::RegionStats& s) {
  return json{{"label", s.label},
              {"area_px", s.area_px},
              {"area_mm2", s.area_mm2},
              {"centroid", {s.centroid_x, s.centroid_y}},
              {"mean_intensity", s.mean_intensity},
              {"bbox", {s.bbox_x0, s.bbox_y0, s.bbox_x1, s.bbox_y1}},
              {"cluster_id", s.cluster_id}};
}

inline json config_to_json(const PipelineConfig& c) {
  json g = json::array();
  for (double v : c.gains.detail) g.push_back(v);
  return json{{"method", method_name(c.method)},
              {"median_w", c.median_w},
              {"median_h", c.median_h},
              {"unsharp_window_m", c.unsharp.window_m},
              {"unsharp_window_n", c.unsharp.window_n},
              {"unsharp_k", c.unsharp.weight_k},
              {"otsu_bins", c.maskgen.otsu_bins},
              {"close_radius", c.maskgen.close_radius},
              {"min_area_fraction", c.maskgen.min_area_fraction},
              {"wavelet_levels", c.wavelet_levels},
              {"gains", g},
              {"approx_gain", c.gains.approx_gain},
              {"tile", c.threshold.tile},
              {"stride", c.threshold.stride},
              {"em_max_iter", c.threshold.em_max_iter},
              {"em_tol", c.threshold.em_tol},
              {"sigma_floor", c.threshold.sigma_floor},
              {"min_tile_pixels", c.threshold.min_tile_pixels},
              {"histogram_bins", c.threshold.bins},
              {"min_marker_area", c.marker.min_marker_area},
              {"marker_otsu_bins", c.marker.otsu_bins},
              {"se_radius", c.se_radius},
              {"cluster_radius_mm", c.cluster_radius_mm},
              {"seed", c.seed}};
}

}  // namespace detail

/// Builds report.json content from run results.
inline json build_report(const RunOptions& opt, const RunResult& res) {
  json images = json::array();
  for (const ImageReport& ir : res.images) {
    json methods = json::array();
    for (const MethodReport& mr : ir.methods) {
      json regions = json::array();
      for (const auto& s : mr.regions) regions.push_back(detail::region_to_json(s));
      json m{{"method", mr.method},
             {"region_count", mr.region_count},
             {"cluster_count", mr.cluster_count},
             {"regions", regions},
             {"wall_time_ms", {{"preprocess", ir.preprocess_ms}, {"segment", mr.segment_ms}}}};
      if (mr.method == "adaptive") {
        m["tiles_total"] = mr.tiles_total;
        m["tiles_fitted"] = mr.tiles_fitted;
        if (mr.global_threshold) m["global_threshold"] = *mr.global_threshold;
      } else {
        m["foreground_markers"] = mr.foreground_markers;
        m["background_markers"] = mr.background_markers;
      }
      if (mr.dice) m["dice"] = *mr.dice;
      methods.push_back(std::move(m));
    }
    images.push_back(json{{"path", ir.path},
                          {"status", ir.status},
                          {"breast_area_px", ir.breast_area_px},
                          {"methods", methods}});
  }

  // cross-method comparison
  json winners = json::array();
  std::map<std::string, std::vector<double>> times;
  for (const ImageReport& ir : res.images) {
    std::optional<double> da, dw;
    for (const MethodReport& mr : ir.methods) {
      times[mr.method].push_back(mr.segment_ms);
      if (mr.method == "adaptive") da = mr.dice;
      if (mr.method == "watershed") dw = mr.dice;
    }
    json w;
    w["path"] = ir.path;
    if (da && dw) {
      w["winner"] = *dw >= *da ? "watershed" : "adaptive";
      w["adaptive_dice"] = *da;
      w["watershed_dice"] = *dw;
    } else {
      w["winner"] = nullptr;
    }
    winners.push_back(std::move(w));
  }
  json med;
  for (auto& [name, v] : times) {
    if (v.empty()) continue;
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    double m = s.size() % 2 ? s[s.size() / 2] : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]);
    med[name] = m;
  }

  return json{{"version", 1},
              {"config_echo", detail::config_to_json(opt.config)},
              {"images", images},
              {"comparison",
               {{"dice_winner_per_image", winners}, {"median_wall_time_per_method", med}}}};
}

/// Batch-runs the pipeline over all inputs with a worker pool and writes
/// report.json plus per-image artifacts into out_dir. Per-image failures
/// are recorded in the report and do not abort the batch.
inline RunResult run_pipeline(const RunOptions& opt) {
  if (opt.inputs.empty()) throw ConfigError("no input images");
  validate_config(opt.config);
  fs::create_directories(opt.out_dir);

  RunResult res;
  res.images.resize(opt.inputs.size());

  int jobs = opt.jobs > 0 ? opt.jobs
                          : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<int>(jobs, static_cast<int>(opt.inputs.size()));

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= opt.inputs.size()) break;
      res.images[i] = detail::process_one(opt.inputs[i], opt);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const ImageReport& ir : res.images)
    (ir.status == "ok" ? res.ok_count : res.failed_count)++;

  std::ofstream out(fs::path(opt.out_dir) / "report.json");
  if (!out) throw WriteFailure((fs::path(opt.out_dir) / "report.json").string());
  out << build_report(opt, res).dump(2) << "\n";
  return res;
}

}  // namespace mcseg::pipeline

#endif
