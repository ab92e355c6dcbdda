#include "lrvq/patching.hpp"

#include <algorithm>

namespace lrvq {

PatchGrid extractPatches(const ImageTensor& img, std::size_t patchSize) {
  if (patchSize == 0)
    throw Error(ErrorCode::InvalidInput, "patch size must be >= 1");
  if (img.height == 0 || img.width == 0 || img.channels == 0)
    throw Error(ErrorCode::InvalidInput, "cannot patch an empty image");
  if (patchSize > std::max(img.height, img.width))
    throw Error(ErrorCode::InvalidInput,
                "patch size exceeds both image dimensions");

  PatchGrid grid;
  grid.patchSize = patchSize;
  grid.gridRows = patchGridRows(img.height, patchSize);
  grid.gridCols = patchGridCols(img.width, patchSize);
  grid.originalHeight = img.height;
  grid.originalWidth = img.width;
  grid.channels = img.channels;
  grid.patches.resize(img.channels);

  for (std::size_t c = 0; c < img.channels; ++c) {
    grid.patches[c].reserve(grid.gridRows * grid.gridCols);
    for (std::size_t gr = 0; gr < grid.gridRows; ++gr) {
      for (std::size_t gc = 0; gc < grid.gridCols; ++gc) {
        Matrix patch(patchSize, patchSize);
        for (std::size_t y = 0; y < patchSize; ++y) {
          const std::size_t sy = std::min(gr * patchSize + y, img.height - 1);
          for (std::size_t x = 0; x < patchSize; ++x) {
            const std::size_t sx = std::min(gc * patchSize + x, img.width - 1);
            patch(y, x) = img.at(c, sy, sx);
          }
        }
        grid.patches[c].push_back(std::move(patch));
      }
    }
  }
  return grid;
}

ImageTensor assemblePatches(const PatchGrid& grid) {
  const std::size_t p = grid.patchSize;
  if (p == 0 || grid.channels == 0 ||
      grid.patches.size() != grid.channels ||
      grid.gridRows * p < grid.originalHeight ||
      grid.gridCols * p < grid.originalWidth ||
      grid.gridRows != patchGridRows(grid.originalHeight, p) ||
      grid.gridCols != patchGridCols(grid.originalWidth, p))
    throw Error(ErrorCode::InvalidInput, "inconsistent patch grid metadata");
  for (const auto& chan : grid.patches) {
    if (chan.size() != grid.gridRows * grid.gridCols)
      throw Error(ErrorCode::InvalidInput, "patch count mismatch");
    for (const Matrix& m : chan)
      if (m.rows() != p || m.cols() != p)
        throw Error(ErrorCode::InvalidInput, "patch shape mismatch");
  }

  ImageTensor out(grid.originalHeight, grid.originalWidth, grid.channels);
  for (std::size_t c = 0; c < grid.channels; ++c) {
    for (std::size_t gr = 0; gr < grid.gridRows; ++gr) {
      const std::size_t yEnd = std::min(grid.originalHeight, (gr + 1) * p);
      for (std::size_t gc = 0; gc < grid.gridCols; ++gc) {
        const Matrix& patch = grid.patches[c][gr * grid.gridCols + gc];
        const std::size_t xEnd = std::min(grid.originalWidth, (gc + 1) * p);
        for (std::size_t y = gr * p; y < yEnd; ++y) {
          for (std::size_t x = gc * p; x < xEnd; ++x) {
            out.at(c, y, x) =
                std::clamp(patch(y - gr * p, x - gc * p), 0.0, 1.0);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace lrvq
