#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lrvq/image.hpp"

namespace lrvq {

enum class PnmFormat : std::uint8_t { P5, P6 };

/// Parses binary PGM (P5, 1 channel) or PPM (P6, 3 channels) at maxval 255.
ImageTensor loadImage(std::span<const std::uint8_t> bytes);

/// Writes P5/P6 at maxval 255. Values are clamped to [0,1], scaled by 255
/// and rounded half away from zero.
std::vector<std::uint8_t> saveImage(const ImageTensor& img, PnmFormat format);

/// Picks P5 for 1 channel, P6 for 3.
std::vector<std::uint8_t> saveImage(const ImageTensor& img);

ImageTensor loadImageFile(const std::string& path);
void saveImageFile(const ImageTensor& img, const std::string& path);

}  // namespace lrvq
