#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrvq/error.hpp"

namespace lrvq {

/// Big-endian bit packer: most significant bit first within the stream,
/// final byte zero-padded.
class BitWriter {
 public:
  void writeBits(std::uint32_t value, unsigned bits) {
    for (unsigned i = bits; i-- > 0;) {
      const bool bit = (value >> i) & 1u;
      if (bitPos_ == 0) bytes_.push_back(0);
      if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> bitPos_);
      bitPos_ = (bitPos_ + 1) & 7;
    }
  }

  std::size_t bitCount() const noexcept {
    return bytes_.size() * 8 - (bitPos_ == 0 ? 0 : 8 - bitPos_);
  }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  unsigned bitPos_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t readBits(unsigned bits) {
    std::uint32_t v = 0;
    for (unsigned i = 0; i < bits; ++i) {
      const std::size_t byte = pos_ >> 3;
      if (byte >= bytes_.size())
        throw Error(ErrorCode::CorruptStream, "bitstream exhausted");
      const bool bit = (bytes_[byte] >> (7 - (pos_ & 7))) & 1u;
      v = (v << 1) | (bit ? 1u : 0u);
      ++pos_;
    }
    return v;
  }

  std::size_t bitsRead() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace lrvq
