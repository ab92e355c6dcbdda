#include "lrvq/imageio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace lrvq {
namespace {

bool isPnmSpace(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Skips whitespace and '#' comment lines between header tokens.
std::size_t skipSeparators(std::span<const std::uint8_t> b, std::size_t pos) {
  while (pos < b.size()) {
    if (isPnmSpace(b[pos])) {
      ++pos;
    } else if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  return pos;
}

std::size_t parseUint(std::span<const std::uint8_t> b, std::size_t pos,
                      std::size_t& out) {
  if (pos >= b.size() || b[pos] < '0' || b[pos] > '9')
    throw Error(ErrorCode::CorruptFile, "malformed pnm header token");
  std::size_t v = 0;
  while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
    v = v * 10 + (b[pos] - '0');
    if (v > 1'000'000'000)
      throw Error(ErrorCode::CorruptFile, "pnm header value out of range");
    ++pos;
  }
  out = v;
  return pos;
}

std::uint8_t quantize8(double v) {
  if (v < 0.0) v = 0.0;
  if (v > 1.0) v = 1.0;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

}  // namespace

ImageTensor loadImage(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' ||
      (bytes[1] != '5' && bytes[1] != '6'))
    throw Error(ErrorCode::UnsupportedFormat, "not a binary PGM/PPM file");
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;

  std::size_t pos = 2;
  std::size_t width = 0, height = 0, maxval = 0;
  pos = skipSeparators(bytes, pos);
  pos = parseUint(bytes, pos, width);
  pos = skipSeparators(bytes, pos);
  pos = parseUint(bytes, pos, height);
  pos = skipSeparators(bytes, pos);
  pos = parseUint(bytes, pos, maxval);
  if (maxval != 255)
    throw Error(ErrorCode::UnsupportedDepth, "only maxval 255 is supported");
  if (width == 0 || height == 0)
    throw Error(ErrorCode::CorruptFile, "zero image dimension");
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size() || !isPnmSpace(bytes[pos]))
    throw Error(ErrorCode::CorruptFile, "missing raster separator");
  ++pos;

  const std::size_t pixels = width * height;
  if (bytes.size() - pos < pixels * channels)
    throw Error(ErrorCode::CorruptFile, "truncated pixel data");

  ImageTensor img(height, width, channels);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        img.at(c, y, x) = bytes[pos + (y * width + x) * channels + c] / 255.0;
      }
    }
  }
  return img;
}

std::vector<std::uint8_t> saveImage(const ImageTensor& img, PnmFormat format) {
  const std::size_t wantChannels = format == PnmFormat::P5 ? 1 : 3;
  if (img.channels != wantChannels)
    throw Error(ErrorCode::InvalidInput,
                "channel count does not match pnm format");
  if (img.height == 0 || img.width == 0)
    throw Error(ErrorCode::InvalidInput, "cannot save empty image");

  char header[64];
  const int n = std::snprintf(header, sizeof header, "P%c\n%zu %zu\n255\n",
                              format == PnmFormat::P5 ? '5' : '6', img.width,
                              img.height);
  std::vector<std::uint8_t> out(header, header + n);
  out.reserve(n + img.height * img.width * img.channels);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < img.channels; ++c)
        out.push_back(quantize8(img.at(c, y, x)));
  return out;
}

std::vector<std::uint8_t> saveImage(const ImageTensor& img) {
  if (img.channels == 1) return saveImage(img, PnmFormat::P5);
  if (img.channels == 3) return saveImage(img, PnmFormat::P6);
  throw Error(ErrorCode::InvalidInput,
              "only 1- or 3-channel images map to PGM/PPM");
}

ImageTensor loadImageFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return loadImage(bytes);
}

void saveImageFile(const ImageTensor& img, const std::string& path) {
  const std::vector<std::uint8_t> bytes = saveImage(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

}  // namespace lrvq
