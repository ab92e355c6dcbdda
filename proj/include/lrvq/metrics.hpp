#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lrvq/codec.hpp"
#include "lrvq/image.hpp"

namespace lrvq {

double mse(const ImageTensor& a, const ImageTensor& b);

/// (1/N) * (sum |a-b|^p)^(1/p). Note this divides the norm by the element
/// count rather than averaging inside the root, so p=2 is not RMSE; see
/// mse() for the squared-error metric.
double pnormError(const ImageTensor& a, const ImageTensor& b, double p);

/// 10*log10(1/mse) against peak 1.0; +inf for identical inputs.
double psnr(const ImageTensor& a, const ImageTensor& b);

/// Decoder cost model: every rank-1 component costs P multiplies to scale
/// the left direction plus P^2 for the outer-product accumulation.
std::uint64_t lowrankDecoderMacs(const CodecConfig& cfg, std::size_t gridRows,
                                 std::size_t gridCols, std::size_t channels);

struct ConvLayerSpec {
  std::size_t outHeight = 1;
  std::size_t outWidth = 1;
  std::size_t inChannels = 1;
  std::size_t outChannels = 1;
  std::size_t kernelSize = 1;
};

std::uint64_t convDecoderMacs(std::span<const ConvLayerSpec> layers);

double computeBpp(std::size_t streamBytes, std::size_t originalHeight,
                  std::size_t originalWidth);

struct RateDistortionPoint {
  std::size_t patchSize = 0;
  std::size_t rank = 0;
  std::size_t iterations = 0;
  std::size_t codebookSize = 0;
  CombineMode combine = CombineMode::Sum;
  LoopMode loop = LoopMode::Closed;
  std::string image;
  double bpp = 0.0;
  double mse = 0.0;
  double psnr = 0.0;
  double pnorm2 = 0.0;
  std::uint64_t decoderMacs = 0;
};

}  // namespace lrvq
