#pragma once

#include <cstddef>
#include <vector>

#include "lrvq/error.hpp"

namespace lrvq {

/// H x W x C tensor of unit-interval intensities, channel-major then
/// row-major.
struct ImageTensor {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  ImageTensor() = default;
  ImageTensor(std::size_t h, std::size_t w, std::size_t c)
      : height(h), width(w), channels(c), data(h * w * c, 0.0) {}

  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * height + y) * width + x];
  }
  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * height + y) * width + x];
  }

  bool sameShape(const ImageTensor& o) const noexcept {
    return height == o.height && width == o.width && channels == o.channels;
  }

  bool operator==(const ImageTensor&) const = default;
};

}  // namespace lrvq
