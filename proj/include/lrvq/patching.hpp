#pragma once

#include "lrvq/image.hpp"
#include "lrvq/matrix.hpp"

namespace lrvq {

/// Non-overlapping tiling of an image into P x P per-channel matrices.
/// Images whose dimensions are not multiples of P are edge-replicate padded
/// on the bottom/right before tiling; the original dimensions are kept so
/// assembly can crop back.
struct PatchGrid {
  std::size_t patchSize = 0;
  std::size_t gridRows = 0;
  std::size_t gridCols = 0;
  std::size_t originalHeight = 0;
  std::size_t originalWidth = 0;
  std::size_t channels = 0;
  // patches[channel][gridRow * gridCols + gridCol]
  std::vector<std::vector<Matrix>> patches;
};

PatchGrid extractPatches(const ImageTensor& img, std::size_t patchSize);

/// Inverse of extractPatches up to the crop back to the original dims;
/// output clamped to [0,1].
ImageTensor assemblePatches(const PatchGrid& grid);

inline std::size_t patchGridRows(std::size_t height, std::size_t p) {
  return (height + p - 1) / p;
}
inline std::size_t patchGridCols(std::size_t width, std::size_t p) {
  return (width + p - 1) / p;
}

}  // namespace lrvq
