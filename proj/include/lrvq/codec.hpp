#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lrvq/image.hpp"
#include "lrvq/lowrank.hpp"
#include "lrvq/vq.hpp"

namespace lrvq {

struct CodecConfig {
  std::size_t patchSize = 8;
  std::size_t rank = 2;
  std::size_t iterations = 2;
  std::size_t codebookSize = 256;
  CombineMode combine = CombineMode::Sum;
  LoopMode loop = LoopMode::Closed;
  std::optional<GainRange> gainRange;  // populated at encode
  // Diagnostic: factors stay exact doubles and can never be serialized.
  bool quantizationBypass = false;
};

/// How the per-patch loops run. Results are identical either way; the
/// serial path is the reference the parallel one is tested against.
enum class ExecutionPolicy { Serial, Parallel };

constexpr std::size_t kStreamHeaderBytes = 27;
constexpr std::uint8_t kStreamVersion = 1;

/// Header + one QuantizedComponent per (patch, channel, iteration, rank
/// component), patches in row-major grid order.
struct EncodedStream {
  std::uint16_t originalHeight = 0;
  std::uint16_t originalWidth = 0;
  std::uint8_t channels = 0;
  std::uint8_t patchSize = 0;
  std::uint8_t rank = 0;
  std::uint8_t iterations = 0;
  std::uint16_t codebookSize = 0;
  CombineMode combine = CombineMode::Sum;
  LoopMode loop = LoopMode::Closed;
  GainRange gainRange;
  std::uint32_t codebookHash = 0;
  std::vector<QuantizedComponent> components;

  std::size_t gridRows() const;
  std::size_t gridCols() const;
  std::size_t componentCount() const;  // patches * C * I * R
  std::size_t payloadBits() const;
  std::size_t serializedBytes() const;

  bool operator==(const EncodedStream&) const = default;
};

/// Smallest b with 2^b >= k.
unsigned indexBitWidth(std::size_t k);

EncodedStream encode(const ImageTensor& img, const CodecConfig& cfg,
                     const Codebook& cb,
                     ExecutionPolicy policy = ExecutionPolicy::Parallel);

struct DecodeStats {
  std::uint64_t multiplies = 0;
};

ImageTensor decode(const EncodedStream& stream, const Codebook& cb,
                   DecodeStats* stats = nullptr,
                   ExecutionPolicy policy = ExecutionPolicy::Parallel);

/// Diagnostic path: per-patch exact (unquantized) decomposition and
/// reassembly, no codebook involved. Never produces a stream.
ImageTensor reconstructBypass(const ImageTensor& img, const CodecConfig& cfg,
                              ExecutionPolicy policy = ExecutionPolicy::Parallel);

std::vector<std::uint8_t> serialize(const EncodedStream& stream);
EncodedStream deserialize(std::span<const std::uint8_t> bytes);

}  // namespace lrvq
