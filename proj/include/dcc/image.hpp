#pragma once

#include <string>
#include <vector>

#include "dcc/tensor.hpp"

namespace dcc {

// RGB raster, values in [0,1], row-major (y, x, channel).
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> px;  // height*width*3

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), px(static_cast<std::size_t>(h) * w * 3, fill) {}

  double& at(int y, int x, int c) {
    return px[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  double at(int y, int x, int c) const {
    return px[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  // Snap every value to the k/255 grid; makes 8-bit file round trips exact.
  void quantize();
};

// P6 binary PPM, 8-bit.
void save_ppm(const Image& img, const std::string& path);
Image load_ppm(const std::string& path);

// 8-bit RGB PNG via libpng.
void save_png(const Image& img, const std::string& path);
Image load_png(const std::string& path);

// Dispatch on extension (.ppm / .png).
Image load_image(const std::string& path);

// Nearest-neighbour resize to side x side.
Image resize_nearest(const Image& img, int side);

// 3 x H x W tensor in [0,1].
Tensor image_to_tensor(const Image& img);

}  // namespace dcc
