#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace camo {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

// Row-major 8-bit color raster, (0,0) top-left, u right, v down.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  ColorImage() = default;
  ColorImage(int w, int h, Rgb fill = Rgb{})
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  Rgb& at(int u, int v) { return pixels[static_cast<std::size_t>(v) * width + u]; }
  const Rgb& at(int u, int v) const {
    return pixels[static_cast<std::size_t>(v) * width + u];
  }
};

// Depth raster in meters; a non-finite or non-positive value means invalid.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;

  DepthMap() = default;
  DepthMap(int w, int h, double fill = 0.0)
      : width(w), height(h), depth(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int u, int v) {
    return depth[static_cast<std::size_t>(v) * width + u];
  }
  double at(int u, int v) const {
    return depth[static_cast<std::size_t>(v) * width + u];
  }
};

// Binary PPM (P6), maxval 255.
void save_ppm(const ColorImage& img, const std::string& path);
ColorImage load_ppm(const std::string& path);

// Binary PGM (P5), 16-bit big-endian, millimeters, 0 = invalid. Values
// above 65.535 m saturate.
void save_pgm16(const DepthMap& depth, const std::string& path);
DepthMap load_pgm16(const std::string& path);

// Bilinear interpolation at (u, v) in pixel-center coordinates, each channel
// independently, rounded to nearest. Coordinates are clamped to the valid
// interpolation rectangle [0, width-1] x [0, height-1] first.
Rgb bilinear_sample(const ColorImage& img, double u, double v);

// Mean |a - b| over all pixels and channels (8-bit scale). Sizes must match.
double mean_absolute_error(const ColorImage& a, const ColorImage& b);

// Peak signal-to-noise ratio against peak 255; +inf for identical images.
double psnr(const ColorImage& a, const ColorImage& b);

}  // namespace camo
