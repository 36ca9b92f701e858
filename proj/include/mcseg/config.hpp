#ifndef MCSEG_CONFIG_HPP
#define MCSEG_CONFIG_HPP

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "mcseg/errors.hpp"
#include "mcseg/prep.hpp"
#include "mcseg/segment.hpp"
#include "mcseg/wavelet.hpp"

namespace mcseg {

enum class Method { adaptive, watershed, both };

inline Method parse_method(const std::string& s) {
  if (s == "adaptive") return Method::adaptive;
  if (s == "watershed") return Method::watershed;
  if (s == "both") return Method::both;
  throw ConfigError("unknown method: " + s);
}

inline const char* method_name(Method m) {
  switch (m) {
    case Method::adaptive: return "adaptive";
    case Method::watershed: return "watershed";
    default: return "both";
  }
}

/// All pipeline knobs, with defaults. Mirrors the flat key-value config
/// file one field per key.
struct PipelineConfig {
  Method method = Method::both;
  int median_w = 4, median_h = 4;
  prep::UnsharpParams unsharp;
  prep::MaskGenParams maskgen;
  wavelet::EnhanceGains gains = wavelet::EnhanceGains::defaults(5);
  int wavelet_levels = 5;
  segment::ThresholdFieldParams threshold;
  segment::MarkerParams marker;
  int se_radius = 3;  // disk SE for reconstruction smoothing
  double cluster_radius_mm = 5.0;
  uint64_t seed = 0;  // phantom generation only
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  }
}

inline int to_int(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  int i = static_cast<int>(d);
  if (i != d) throw ConfigError("expected integer for " + key + ": '" + v + "'");
  return i;
}

}  // namespace detail

/// Applies one key-value pair. Unknown keys are errors.
inline void apply_config_key(PipelineConfig& c, const std::string& key, const std::string& val) {
  using detail::to_double;
  using detail::to_int;
  if (key == "method") c.method = parse_method(val);
  else if (key == "median_w") c.median_w = to_int(key, val);
  else if (key == "median_h") c.median_h = to_int(key, val);
  else if (key == "unsharp_window_m") c.unsharp.window_m = to_int(key, val);
  else if (key == "unsharp_window_n") c.unsharp.window_n = to_int(key, val);
  else if (key == "unsharp_k") c.unsharp.weight_k = to_double(key, val);
  else if (key == "otsu_bins") c.maskgen.otsu_bins = to_int(key, val);
  else if (key == "close_radius") c.maskgen.close_radius = to_int(key, val);
  else if (key == "min_area_fraction") c.maskgen.min_area_fraction = to_double(key, val);
  else if (key == "wavelet_levels") c.wavelet_levels = to_int(key, val);
  else if (key == "approx_gain") c.gains.approx_gain = to_double(key, val);
  else if (key.rfind("gain_", 0) == 0) {
    int level = to_int(key, key.substr(5));
    if (level < 1 || level > static_cast<int>(c.gains.detail.size()))
      throw ConfigError("gain level out of range: " + key);
    c.gains.detail[level - 1] = to_double(key, val);
  }
  else if (key == "tile") c.threshold.tile = to_int(key, val);
  else if (key == "stride") c.threshold.stride = to_int(key, val);
  else if (key == "em_max_iter") c.threshold.em_max_iter = to_int(key, val);
  else if (key == "em_tol") c.threshold.em_tol = to_double(key, val);
  else if (key == "sigma_floor") c.threshold.sigma_floor = to_double(key, val);
  else if (key == "min_tile_pixels") c.threshold.min_tile_pixels = to_int(key, val);
  else if (key == "histogram_bins") c.threshold.bins = to_int(key, val);
  else if (key == "min_marker_area") c.marker.min_marker_area = to_int(key, val);
  else if (key == "marker_otsu_bins") c.marker.otsu_bins = to_int(key, val);
  else if (key == "se_radius") c.se_radius = to_int(key, val);
  else if (key == "cluster_radius_mm") c.cluster_radius_mm = to_double(key, val);
  else if (key == "seed") c.seed = static_cast<uint64_t>(to_int(key, val));
  else throw ConfigError("unknown key: " + key);
}

inline void validate_config(const PipelineConfig& c) {
  if (c.median_w < 1 || c.median_h < 1) throw ConfigError("median window must be >= 1");
  if (c.unsharp.window_m < 3 || c.unsharp.window_m % 2 == 0 || c.unsharp.window_n < 3 ||
      c.unsharp.window_n % 2 == 0)
    throw ConfigError("unsharp windows must be odd and >= 3");
  if (c.unsharp.weight_k < 0) throw ConfigError("unsharp_k must be >= 0");
  if (c.maskgen.otsu_bins < 2 || c.maskgen.close_radius < 0) throw ConfigError("bad maskgen");
  if (c.maskgen.min_area_fraction <= 0 || c.maskgen.min_area_fraction >= 1)
    throw ConfigError("min_area_fraction must be in (0,1)");
  if (c.threshold.stride > c.threshold.tile || c.threshold.stride < 1)
    throw ConfigError("stride must be in [1, tile]");
  if (c.threshold.em_max_iter < 1 || c.threshold.em_tol <= 0 || c.threshold.sigma_floor <= 0 ||
      c.threshold.min_tile_pixels < 1 || c.threshold.bins < 2)
    throw ConfigError("bad threshold params");
  for (double g : c.gains.detail)
    if (!(g >= 0) || !std::isfinite(g)) throw ConfigError("gains must be finite and >= 0");
  if (c.wavelet_levels < 1 ||
      c.wavelet_levels != static_cast<int>(c.gains.detail.size()))
    throw ConfigError("wavelet_levels must match gain count");
  if (c.se_radius < 1) throw ConfigError("se_radius must be >= 1");
  if (c.cluster_radius_mm <= 0) throw ConfigError("cluster_radius_mm must be > 0");
}

/// Flat key = value config file; '#' starts a comment.
inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  PipelineConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string& s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    };
    trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    trim(key);
    trim(val);
    apply_config_key(c, key, val);
  }
  validate_config(c);
  return c;
}

}  // namespace mcseg

#endif
