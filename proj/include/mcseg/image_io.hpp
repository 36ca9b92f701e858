#ifndef MCSEG_IMAGE_IO_HPP
#define MCSEG_IMAGE_IO_HPP

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mcseg/errors.hpp"
#include "mcseg/raster.hpp"

namespace mcseg::io {

namespace detail {

struct FileCloser {
  FILE* f = nullptr;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

// Reads a sidecar "<path>.meta" key-value file, if present, for the
// physical sampling pitch. Unknown keys are ignored here (the sidecar
// is informational, not the pipeline config).
inline void read_sidecar_meta(const std::string& path, ImageMeta& meta) {
  std::ifstream in(path + ".meta");
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    };
    trim(key);
    trim(val);
    if (key == "sampling_microns") {
      double v = std::stod(val);
      if (v > 0) meta.sampling_microns = v;
    }
  }
}

// Skips PGM whitespace/comments and parses one unsigned integer.
inline int pgm_int(std::istream& in) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) throw UnsupportedFormat("malformed PGM header");
  int v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    c = in.get();
  }
  return v;
}

inline Raster load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFile(path);
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5')
    throw UnsupportedFormat("not a binary (P5) PGM: " + path);
  int w = pgm_int(in);
  int h = pgm_int(in);
  int maxval = pgm_int(in);
  if (w < 1 || h < 1) throw UnsupportedFormat("bad PGM dimensions");
  if (maxval != 255 && maxval != 65535)
    throw UnsupportedFormat("PGM maxval must be 255 or 65535");

  Raster r(w, h);
  r.meta.bit_depth_source = maxval == 255 ? 8 : 16;
  r.meta.source_path = path;
  const size_t n = r.size();
  if (maxval == 255) {
    std::vector<uint8_t> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (!in) throw UnreadableFile(path);
    for (size_t i = 0; i < n; ++i) r.data[i] = buf[i] / 255.0;
  } else {
    std::vector<uint8_t> buf(n * 2);  // big-endian per PGM spec
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 2));
    if (!in) throw UnreadableFile(path);
    for (size_t i = 0; i < n; ++i) {
      uint16_t v = static_cast<uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
      r.data[i] = v / 65535.0;
    }
  }
  return r;
}

inline Raster load_png(const std::string& path) {
  FileCloser fc;
  fc.f = std::fopen(path.c_str(), "rb");
  if (!fc.f) throw UnreadableFile(path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnreadableFile(path);
  }
  std::vector<std::vector<uint8_t>> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnreadableFile(path + " (libpng error)");
  }
  png_init_io(png, fc.f);
  png_read_info(png, info);

  int w = static_cast<int>(png_get_image_width(png, info));
  int h = static_cast<int>(png_get_image_height(png, info));
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);

  if (color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnsupportedFormat("PNG must be single-channel grayscale: " + path);
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  if (depth != 8 && depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnsupportedFormat("PNG bit depth must be 8 or 16: " + path);
  }

  size_t rowbytes = png_get_rowbytes(png, info);
  rows.assign(h, std::vector<uint8_t>(rowbytes));
  std::vector<png_bytep> rowptrs(h);
  for (int y = 0; y < h; ++y) rowptrs[y] = rows[y].data();
  png_read_image(png, rowptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Raster r(w, h);
  r.meta.bit_depth_source = depth;
  r.meta.source_path = path;
  for (int y = 0; y < h; ++y) {
    const uint8_t* row = rows[y].data();
    for (int x = 0; x < w; ++x) {
      if (depth == 8) {
        r.at(x, y) = row[x] / 255.0;
      } else {
        uint16_t v = static_cast<uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);  // PNG is big-endian
        r.at(x, y) = v / 65535.0;
      }
    }
  }
  return r;
}

inline void write_png(const std::string& path, int w, int h, int channels,
                      const std::vector<uint8_t>& pixels) {
  FileCloser fc;
  fc.f = std::fopen(path.c_str(), "wb");
  if (!fc.f) throw WriteFailure(path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw WriteFailure(path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw WriteFailure(path + " (libpng error)");
  }
  png_init_io(png, fc.f);
  png_set_IHDR(png, info, w, h, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rowptrs(h);
  for (int y = 0; y < h; ++y)
    rowptrs[y] = const_cast<png_bytep>(pixels.data() + static_cast<size_t>(y) * w * channels);
  png_write_image(png, rowptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

/// Loads an 8/16-bit single-channel PGM (P5) or grayscale PNG, scaling
/// intensities to [0,1] by 2^depth - 1. Sampling pitch comes from a
/// "<path>.meta" sidecar when present, else defaults to 45 um.
inline Raster load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw UnreadableFile(path);
  unsigned char sig[2] = {0, 0};
  probe.read(reinterpret_cast<char*>(sig), 2);
  probe.close();

  Raster r;
  if (sig[0] == 'P' && sig[1] == '5') {
    r = detail::load_pgm(path);
  } else if (sig[0] == 0x89 && sig[1] == 'P') {
    r = detail::load_png(path);
  } else {
    throw UnsupportedFormat("not a PGM (P5) or PNG file: " + path);
  }
  detail::read_sidecar_meta(path, r.meta);
  return r;
}

/// Writes a mask as an 8-bit grayscale PNG, true -> 255, false -> 0.
inline void save_mask(const BinaryMask& mask, const std::string& path) {
  std::vector<uint8_t> px(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) px[i] = mask.bits[i] ? 255 : 0;
  detail::write_png(path, mask.width, mask.height, 1, px);
}

/// True where a mask pixel touches (8-adjacency) a non-mask pixel;
/// pixels beyond the border count as non-mask.
inline BinaryMask mask_boundary(const BinaryMask& mask) {
  BinaryMask b(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      bool edge = false;
      for (int dy = -1; dy <= 1 && !edge; ++dy) {
        for (int dx = -1; dx <= 1 && !edge; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height || !mask.at(nx, ny))
            edge = true;
        }
      }
      if (edge) b.set(x, y, true);
    }
  }
  return b;
}

/// Writes base as gray RGB with mask-boundary pixels painted pure red.
inline void save_overlay(const Raster& base, const BinaryMask& mask, const std::string& path) {
  if (base.width != mask.width || base.height != mask.height)
    throw DimensionMismatch("save_overlay base vs mask");
  BinaryMask edge = mask_boundary(mask);
  std::vector<uint8_t> px(base.size() * 3);
  for (size_t i = 0; i < base.size(); ++i) {
    double v = base.data[i];
    if (v < 0) v = 0;
    if (v > 1) v = 1;
    uint8_t g = static_cast<uint8_t>(v * 255.0 + 0.5);
    if (edge.bits[i]) {
      px[3 * i] = 255;
      px[3 * i + 1] = 0;
      px[3 * i + 2] = 0;
    } else {
      px[3 * i] = px[3 * i + 1] = px[3 * i + 2] = g;
    }
  }
  detail::write_png(path, base.width, base.height, 3, px);
}

/// Writes a raster as a 16-bit binary PGM (values clamped to [0,1]).
inline void save_pgm16(const Raster& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WriteFailure(path);
  out << "P5\n" << r.width << " " << r.height << "\n65535\n";
  std::vector<uint8_t> buf(r.size() * 2);
  for (size_t i = 0; i < r.size(); ++i) {
    double v = r.data[i];
    if (v < 0) v = 0;
    if (v > 1) v = 1;
    uint16_t q = static_cast<uint16_t>(v * 65535.0 + 0.5);
    buf[2 * i] = static_cast<uint8_t>(q >> 8);
    buf[2 * i + 1] = static_cast<uint8_t>(q & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw WriteFailure(path);
}

}  // namespace mcseg::io

#endif
