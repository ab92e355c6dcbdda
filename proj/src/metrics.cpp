#include "lrvq/metrics.hpp"

#include <cmath>
#include <limits>

namespace lrvq {

double mse(const ImageTensor& a, const ImageTensor& b) {
  if (!a.sameShape(b))
    throw Error(ErrorCode::InvalidInput, "mse shape mismatch");
  if (a.data.empty()) throw Error(ErrorCode::InvalidInput, "empty image");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return s / static_cast<double>(a.data.size());
}

double pnormError(const ImageTensor& a, const ImageTensor& b, double p) {
  if (!a.sameShape(b))
    throw Error(ErrorCode::InvalidInput, "pnorm shape mismatch");
  if (p < 1.0) throw Error(ErrorCode::InvalidInput, "p must be >= 1");
  if (a.data.empty()) throw Error(ErrorCode::InvalidInput, "empty image");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    s += std::pow(std::abs(a.data[i] - b.data[i]), p);
  return std::pow(s, 1.0 / p) / static_cast<double>(a.data.size());
}

double psnr(const ImageTensor& a, const ImageTensor& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

std::uint64_t lowrankDecoderMacs(const CodecConfig& cfg, std::size_t gridRows,
                                 std::size_t gridCols, std::size_t channels) {
  const std::uint64_t p = cfg.patchSize;
  return std::uint64_t{gridRows} * gridCols * channels * cfg.iterations *
         cfg.rank * (p * p + p);
}

std::uint64_t convDecoderMacs(std::span<const ConvLayerSpec> layers) {
  if (layers.empty())
    throw Error(ErrorCode::InvalidInput, "empty conv layer list");
  std::uint64_t total = 0;
  for (const ConvLayerSpec& l : layers) {
    if (l.outHeight < 1 || l.outWidth < 1 || l.inChannels < 1 ||
        l.outChannels < 1 || l.kernelSize < 1)
      throw Error(ErrorCode::InvalidInput, "conv layer fields must be >= 1");
    total += std::uint64_t{l.outHeight} * l.outWidth * l.outChannels *
             l.inChannels * l.kernelSize * l.kernelSize;
  }
  return total;
}

double computeBpp(std::size_t streamBytes, std::size_t originalHeight,
                  std::size_t originalWidth) {
  if (originalHeight == 0 || originalWidth == 0)
    throw Error(ErrorCode::InvalidInput, "zero-area image");
  return 8.0 * static_cast<double>(streamBytes) /
         static_cast<double>(originalHeight * originalWidth);
}

}  // namespace lrvq
