#include "lrvq/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "lrvq/imageio.hpp"

namespace lrvq {

ImageTensor synthesizeImage(std::uint64_t seed, std::size_t index,
                            std::size_t height, std::size_t width,
                            std::size_t channels) {
  if (height == 0 || width == 0 || channels == 0)
    throw Error(ErrorCode::InvalidInput, "empty image dimensions");

  SplitMix64 rng{seed ^ ((index + 1) * 0x9E3779B97F4A7C15ULL)};
  ImageTensor img(height, width, channels);

  struct Wave {
    double amp, fx, fy, phase;
  };
  constexpr double kTwoPi = 2.0 * M_PI;

  for (std::size_t c = 0; c < channels; ++c) {
    const std::size_t nWaves = 3 + rng.next() % 3;
    Wave waves[5];
    for (std::size_t k = 0; k < nWaves; ++k) {
      waves[k].amp = 0.2 + 0.8 * rng.u01();
      waves[k].fx = static_cast<double>(1 + rng.next() % 4);
      waves[k].fy = static_cast<double>(1 + rng.next() % 4);
      waves[k].phase = kTwoPi * rng.u01();
    }
    const double gx = -1.0 + 2.0 * rng.u01();
    const double gy = -1.0 + 2.0 * rng.u01();

    double vmin = 0.0, vmax = 0.0;
    bool first = true;
    for (std::size_t y = 0; y < height; ++y) {
      const double yh = static_cast<double>(y) / static_cast<double>(height);
      for (std::size_t x = 0; x < width; ++x) {
        const double xw = static_cast<double>(x) / static_cast<double>(width);
        double v = 0.0;
        for (std::size_t k = 0; k < nWaves; ++k)
          v += waves[k].amp *
               std::sin(kTwoPi * (waves[k].fx * xw + waves[k].fy * yh) +
                        waves[k].phase);
        v += gx * xw;
        v += gy * yh;
        img.at(c, y, x) = v;
        if (first || v < vmin) vmin = v;
        if (first || v > vmax) vmax = v;
        first = false;
      }
    }
    if (vmax - vmin < 1e-12) {
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) img.at(c, y, x) = 0.5;
    } else {
      const double d = vmax - vmin;
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
          img.at(c, y, x) = (img.at(c, y, x) - vmin) / d;
    }
  }
  return img;
}

void generateCorpus(const std::string& dir, std::uint64_t seed,
                    std::size_t count, std::size_t offset, std::size_t height,
                    std::size_t width, std::size_t channels) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir);
  const char* ext = channels == 3 ? "ppm" : "pgm";
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t index = offset + i;
    char name[32];
    std::snprintf(name, sizeof name, "img%03zu.%s", index, ext);
    saveImageFile(synthesizeImage(seed, index, height, width, channels),
                  dir + "/" + name);
  }
}

}  // namespace lrvq
