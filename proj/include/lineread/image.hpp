// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lineread/tensor.hpp"

namespace lineread {

constexpr int kLineHeight = 64;     // canonical text-line height after preprocessing
constexpr uint8_t kBlankPixel = 255;  // white background, dark ink

// Grayscale text-line raster with optional ground truth transcription.
struct LineImage {
  size_t height = 0;
  size_t width = 0;
  std::vector<uint8_t> pixels;  // row-major, height*width
  std::optional<std::string> text;

  uint8_t at(size_t y, size_t x) const { return pixels[y * width + x]; }
  uint8_t& at(size_t y, size_t x) { return pixels[y * width + x]; }

  static LineImage blank(size_t height, size_t width, uint8_t fill = kBlankPixel) {
    LineImage img;
    img.height = height;
    img.width = width;
    img.pixels.assign(height * width, fill);
    return img;
  }
};

// Binary PGM (P5, maxval 255).
LineImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const LineImage& img);

// Rescale to height 64 preserving aspect ratio, then right-pad with blank
// pixels to pad_width. Raises DataError if the scaled width exceeds pad_width.
// Fixed point of itself: preprocessing an already-preprocessed image with the
// same pad_width is the identity.
LineImage preprocess(const LineImage& img, size_t pad_width);

// Scale to the given height preserving aspect ratio (bilinear). No padding.
LineImage resize_to_height(const LineImage& img, size_t height);

// Image pixels as a [1 x h x w] tensor scaled to [0, 1] (pixel / 255).
template <typename T>
Tensor<T> image_to_tensor(const LineImage& img);

}  // namespace lineread
