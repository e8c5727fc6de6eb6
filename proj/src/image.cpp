#include "camo/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "camo/errors.hpp"

namespace camo {
namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw FileError("netpbm: unexpected end of header");
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    break;
  }
  in >> tok;
  if (tok.empty()) throw FileError("netpbm: unexpected end of header");
  return tok;
}

int parse_dim(const std::string& tok, const char* what) {
  int value = 0;
  try {
    value = std::stoi(tok);
  } catch (const std::exception&) {
    throw FileError(std::string("netpbm: bad ") + what + " '" + tok + "'");
  }
  if (value < 1) throw FileError(std::string("netpbm: bad ") + what);
  return value;
}

}  // namespace

void save_ppm(const ColorImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("save_ppm: cannot open " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size() * 3));
  if (!out) throw FileError("save_ppm: write failed for " + path);
}

ColorImage load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("load_ppm: cannot open " + path);
  if (next_token(in) != "P6") throw FileError("load_ppm: not a P6 file");
  const int w = parse_dim(next_token(in), "width");
  const int h = parse_dim(next_token(in), "height");
  if (parse_dim(next_token(in), "maxval") != 255) {
    throw FileError("load_ppm: only maxval 255 supported");
  }
  in.get();  // single whitespace after maxval
  ColorImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size() * 3));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size() * 3)) {
    throw FileError("load_ppm: truncated pixel data in " + path);
  }
  return img;
}

void save_pgm16(const DepthMap& depth, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("save_pgm16: cannot open " + path);
  out << "P5\n" << depth.width << " " << depth.height << "\n65535\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(depth.width) * 2);
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const double d = depth.at(u, v);
      std::uint16_t mm = 0;
      if (std::isfinite(d) && d > 0.0) {
        const double scaled = std::round(d * 1000.0);
        mm = static_cast<std::uint16_t>(std::clamp(scaled, 1.0, 65535.0));
      }
      row[static_cast<std::size_t>(u) * 2] = static_cast<unsigned char>(mm >> 8);
      row[static_cast<std::size_t>(u) * 2 + 1] =
          static_cast<unsigned char>(mm & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw FileError("save_pgm16: write failed for " + path);
}

DepthMap load_pgm16(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("load_pgm16: cannot open " + path);
  if (next_token(in) != "P5") throw FileError("load_pgm16: not a P5 file");
  const int w = parse_dim(next_token(in), "width");
  const int h = parse_dim(next_token(in), "height");
  if (parse_dim(next_token(in), "maxval") != 65535) {
    throw FileError("load_pgm16: only maxval 65535 supported");
  }
  in.get();
  DepthMap depth(w, h);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 2);
  for (int v = 0; v < h; ++v) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(row.size())) {
      throw FileError("load_pgm16: truncated pixel data in " + path);
    }
    for (int u = 0; u < w; ++u) {
      const unsigned hi = row[static_cast<std::size_t>(u) * 2];
      const unsigned lo = row[static_cast<std::size_t>(u) * 2 + 1];
      depth.at(u, v) = static_cast<double>((hi << 8) | lo) / 1000.0;
    }
  }
  return depth;
}

namespace {

void check_same_size(const ColorImage& a, const ColorImage& b,
                     const char* what) {
  if (a.width != b.width || a.height != b.height || a.pixels.empty()) {
    throw std::invalid_argument(std::string(what) +
                                ": images must share a nonzero size");
  }
}

}  // namespace

double mean_absolute_error(const ColorImage& a, const ColorImage& b) {
  check_same_size(a, b, "mean_absolute_error");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    sum += std::abs(static_cast<int>(a.pixels[i].r) - b.pixels[i].r);
    sum += std::abs(static_cast<int>(a.pixels[i].g) - b.pixels[i].g);
    sum += std::abs(static_cast<int>(a.pixels[i].b) - b.pixels[i].b);
  }
  return sum / (3.0 * static_cast<double>(a.pixels.size()));
}

double psnr(const ColorImage& a, const ColorImage& b) {
  check_same_size(a, b, "psnr");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double dr = static_cast<int>(a.pixels[i].r) - b.pixels[i].r;
    const double dg = static_cast<int>(a.pixels[i].g) - b.pixels[i].g;
    const double db = static_cast<int>(a.pixels[i].b) - b.pixels[i].b;
    sq += dr * dr + dg * dg + db * db;
  }
  const double mse = sq / (3.0 * static_cast<double>(a.pixels.size()));
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

Rgb bilinear_sample(const ColorImage& img, double u, double v) {
  u = std::clamp(u, 0.0, static_cast<double>(img.width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(img.height - 1));
  const int u0 = std::min(static_cast<int>(u), img.width - 2 >= 0 ? img.width - 2 : 0);
  const int v0 = std::min(static_cast<int>(v), img.height - 2 >= 0 ? img.height - 2 : 0);
  const int u1 = std::min(u0 + 1, img.width - 1);
  const int v1 = std::min(v0 + 1, img.height - 1);
  const double fu = u - u0;
  const double fv = v - v0;
  const Rgb& p00 = img.at(u0, v0);
  const Rgb& p10 = img.at(u1, v0);
  const Rgb& p01 = img.at(u0, v1);
  const Rgb& p11 = img.at(u1, v1);
  auto mix = [&](std::uint8_t c00, std::uint8_t c10, std::uint8_t c01,
                 std::uint8_t c11) {
    const double top = c00 + fu * (c10 - c00);
    const double bot = c01 + fu * (c11 - c01);
    return static_cast<std::uint8_t>(std::lround(top + fv * (bot - top)));
  };
  return Rgb{mix(p00.r, p10.r, p01.r, p11.r), mix(p00.g, p10.g, p01.g, p11.g),
             mix(p00.b, p10.b, p01.b, p11.b)};
}

}  // namespace camo
