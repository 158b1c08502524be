// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#include "lineread/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lineread/errors.hpp"

namespace lineread {

namespace {

int read_pnm_token(std::istream& is) {
  // Skips whitespace and '#' comments.
  for (;;) {
    int c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (std::isspace(c)) {
      is.get();
    } else {
      break;
    }
  }
  int v = -1;
  is >> v;
  return v;
}

}  // namespace

LineImage read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open image: " + path);
  std::string magic(2, '\0');
  is.read(magic.data(), 2);
  if (magic != "P5") throw DataError("not a binary PGM (P5): " + path);
  const int w = read_pnm_token(is);
  const int h = read_pnm_token(is);
  const int maxval = read_pnm_token(is);
  if (w <= 0 || h <= 0 || maxval != 255)
    throw DataError("unsupported PGM header in " + path);
  is.get();  // single whitespace after maxval
  LineImage img;
  img.width = static_cast<size_t>(w);
  img.height = static_cast<size_t>(h);
  img.pixels.resize(img.width * img.height);
  is.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!is) throw DataError("truncated PGM payload in " + path);
  return img;
}

void write_pgm(const std::string& path, const LineImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write image: " + path);
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
}

LineImage resize_to_height(const LineImage& img, size_t height) {
  if (img.height == 0 || img.width == 0) throw DataError("resize: empty image");
  if (img.height == height) return img;
  const double scale = static_cast<double>(height) / static_cast<double>(img.height);
  const size_t width =
      std::max<size_t>(1, static_cast<size_t>(std::lround(img.width * scale)));
  LineImage out = LineImage::blank(height, width);
  out.text = img.text;
  const double sy = static_cast<double>(img.height) / static_cast<double>(height);
  const double sx = static_cast<double>(img.width) / static_cast<double>(width);
  for (size_t y = 0; y < height; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const long y0 = static_cast<long>(std::floor(fy));
    const double wy = fy - y0;
    for (size_t x = 0; x < width; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const long x0 = static_cast<long>(std::floor(fx));
      const double wx = fx - x0;
      auto sample = [&](long yy, long xx) -> double {
        yy = std::clamp<long>(yy, 0, static_cast<long>(img.height) - 1);
        xx = std::clamp<long>(xx, 0, static_cast<long>(img.width) - 1);
        return img.pixels[static_cast<size_t>(yy) * img.width + static_cast<size_t>(xx)];
      };
      const double v = (1 - wy) * ((1 - wx) * sample(y0, x0) + wx * sample(y0, x0 + 1)) +
                       wy * ((1 - wx) * sample(y0 + 1, x0) + wx * sample(y0 + 1, x0 + 1));
      out.at(y, x) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

LineImage preprocess(const LineImage& img, size_t pad_width) {
  if (img.height == 0 || img.width == 0) throw DataError("preprocess: empty image");
  LineImage scaled = img.height == static_cast<size_t>(kLineHeight)
                         ? img
                         : resize_to_height(img, kLineHeight);
  if (scaled.width > pad_width)
    throw DataError("preprocess: scaled width " + std::to_string(scaled.width) +
                    " exceeds pad target " + std::to_string(pad_width));
  if (scaled.width == pad_width) return scaled;
  LineImage out = LineImage::blank(kLineHeight, pad_width);
  out.text = scaled.text;
  for (size_t y = 0; y < scaled.height; ++y)
    std::copy(scaled.pixels.begin() + y * scaled.width,
              scaled.pixels.begin() + (y + 1) * scaled.width,
              out.pixels.begin() + y * pad_width);
  return out;
}

template <typename T>
Tensor<T> image_to_tensor(const LineImage& img) {
  std::vector<T> data(img.pixels.size());
  for (size_t i = 0; i < data.size(); ++i)
    data[i] = static_cast<T>(img.pixels[i]) / T(255);
  return Tensor<T>::from(Shape{1, img.height, img.width}, std::move(data));
}

template Tensor<float> image_to_tensor<float>(const LineImage&);
template Tensor<double> image_to_tensor<double>(const LineImage&);

}  // namespace lineread
