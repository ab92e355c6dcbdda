#include "lrvq/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "lrvq/bitstream.hpp"
#include "lrvq/patching.hpp"

namespace lrvq {
namespace {

constexpr char kStreamMagic[4] = {'L', 'R', 'V', 'Q'};

void pushBe16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v >> 8);
  out.push_back(v & 0xFF);
}

void pushBe32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(v >> 24);
  out.push_back((v >> 16) & 0xFF);
  out.push_back((v >> 8) & 0xFF);
  out.push_back(v & 0xFF);
}

std::uint32_t floatBitsBe(float f) {
  std::uint32_t b;
  std::memcpy(&b, &f, 4);
  return b;
}

void validateConfig(const CodecConfig& cfg, const Codebook& cb) {
  if (cfg.patchSize < 1 || cfg.patchSize > 255)
    throw Error(ErrorCode::InvalidConfig, "patch size must be in [1,255]");
  if (cfg.rank < 1 || cfg.rank > cfg.patchSize)
    throw Error(ErrorCode::InvalidConfig, "rank must be in [1, patchSize]");
  if (cfg.iterations < 1 || cfg.iterations > 255)
    throw Error(ErrorCode::InvalidConfig, "iterations must be in [1,255]");
  if (cb.dimension() != cfg.patchSize)
    throw Error(ErrorCode::InvalidConfig,
                "codebook dimension does not match patch size");
  if (cb.size() != cfg.codebookSize)
    throw Error(ErrorCode::InvalidConfig,
                "codebook size does not match config");
  if (cfg.codebookSize > 0xFFFF)
    throw Error(ErrorCode::InvalidConfig, "codebook size exceeds u16");
}

struct PatchJob {
  const Matrix* patch;
  std::size_t slot;  // (cell * channels + channel)
};

std::vector<PatchJob> flattenJobs(const PatchGrid& grid) {
  std::vector<PatchJob> jobs;
  jobs.reserve(grid.gridRows * grid.gridCols * grid.channels);
  const std::size_t cells = grid.gridRows * grid.gridCols;
  for (std::size_t cell = 0; cell < cells; ++cell)
    for (std::size_t c = 0; c < grid.channels; ++c)
      jobs.push_back({&grid.patches[c][cell], cell * grid.channels + c});
  return jobs;
}

}  // namespace

std::size_t EncodedStream::gridRows() const {
  return patchGridRows(originalHeight, patchSize);
}
std::size_t EncodedStream::gridCols() const {
  return patchGridCols(originalWidth, patchSize);
}
std::size_t EncodedStream::componentCount() const {
  return gridRows() * gridCols() * channels * iterations * rank;
}
std::size_t EncodedStream::payloadBits() const {
  return componentCount() * (2 * indexBitWidth(codebookSize) + 8);
}
std::size_t EncodedStream::serializedBytes() const {
  return kStreamHeaderBytes + (payloadBits() + 7) / 8;
}

unsigned indexBitWidth(std::size_t k) {
  unsigned bits = 1;
  while ((std::size_t{1} << bits) < k) ++bits;
  return bits;
}

EncodedStream encode(const ImageTensor& img, const CodecConfig& cfg,
                     const Codebook& cb, ExecutionPolicy policy) {
  if (cfg.quantizationBypass)
    throw Error(ErrorCode::InvalidConfig,
                "quantization bypass is diagnostic only and cannot be "
                "serialized; use reconstructBypass");
  validateConfig(cfg, cb);
  if (img.height < 1 || img.width < 1 || img.channels < 1)
    throw Error(ErrorCode::InvalidInput, "empty image");
  if (img.height > 0xFFFF || img.width > 0xFFFF)
    throw Error(ErrorCode::InvalidConfig, "image dimensions exceed u16");
  if (img.channels > 15)
    throw Error(ErrorCode::InvalidConfig, "stream supports at most 15 channels");

  const PatchGrid grid = extractPatches(img, cfg.patchSize);
  const std::vector<PatchJob> jobs = flattenJobs(grid);
  const std::size_t perSlot = cfg.iterations * cfg.rank;

  DecompositionConfig dcfg{cfg.rank, cfg.iterations, cfg.combine, cfg.loop};

  // Pass 1: observe gains with direction quantization but exact gains.
  GainRange range;
  if (cfg.gainRange) {
    range = *cfg.gainRange;
    if (!(range.minAbsGain > 0.0) || range.minAbsGain > range.maxAbsGain)
      throw Error(ErrorCode::InvalidConfig, "invalid gain range");
  } else {
    const CodebookQuantizer probe(cb, std::nullopt);
    std::vector<double> slotMin(jobs.size(), 0.0);
    std::vector<double> slotMax(jobs.size(), -1.0);
    const auto observe = [&](std::size_t j) {
      const DecompositionTrace trace =
          decomposeWithTrace(*jobs[j].patch, dcfg, &probe);
      double lo = 0.0, hi = -1.0;
      for (const RankRFactors& f : trace.sequence.perIteration) {
        for (double g : f.gains) {
          const double mag = std::abs(g);
          if (mag == 0.0) continue;
          if (hi < 0.0 || mag < lo) lo = mag;
          if (mag > hi) hi = mag;
        }
      }
      slotMin[j] = lo;
      slotMax[j] = hi;
    };
    if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(static)
      for (long j = 0; j < static_cast<long>(jobs.size()); ++j)
        observe(static_cast<std::size_t>(j));
    } else {
      for (std::size_t j = 0; j < jobs.size(); ++j) observe(j);
    }
    double lo = 0.0, hi = -1.0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (slotMax[j] < 0.0) continue;
      if (hi < 0.0 || slotMin[j] < lo) lo = slotMin[j];
      if (slotMax[j] > hi) hi = slotMax[j];
    }
    range = hi < 0.0 ? GainRange{1.0, 1.0} : GainRange{lo, hi};
  }

  // Pass 2: full quantization against the fixed range.
  const CodebookQuantizer quantizer(cb, range);
  std::vector<std::vector<QuantizedComponent>> slots(jobs.size());
  const auto encodeSlot = [&](std::size_t j) {
    DecompositionTrace trace = decomposeWithTrace(*jobs[j].patch, dcfg, &quantizer);
    slots[jobs[j].slot] = std::move(trace.codes);
  };
  if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(static)
    for (long j = 0; j < static_cast<long>(jobs.size()); ++j)
      encodeSlot(static_cast<std::size_t>(j));
  } else {
    for (std::size_t j = 0; j < jobs.size(); ++j) encodeSlot(j);
  }

  EncodedStream stream;
  stream.originalHeight = static_cast<std::uint16_t>(img.height);
  stream.originalWidth = static_cast<std::uint16_t>(img.width);
  stream.channels = static_cast<std::uint8_t>(img.channels);
  stream.patchSize = static_cast<std::uint8_t>(cfg.patchSize);
  stream.rank = static_cast<std::uint8_t>(cfg.rank);
  stream.iterations = static_cast<std::uint8_t>(cfg.iterations);
  stream.codebookSize = static_cast<std::uint16_t>(cfg.codebookSize);
  stream.combine = cfg.combine;
  stream.loop = cfg.loop;
  stream.gainRange = range;
  stream.codebookHash = cb.contentHash();
  stream.components.reserve(jobs.size() * perSlot);
  for (const auto& slot : slots)
    stream.components.insert(stream.components.end(), slot.begin(), slot.end());
  return stream;
}

ImageTensor decode(const EncodedStream& stream, const Codebook& cb,
                   DecodeStats* stats, ExecutionPolicy policy) {
  if (stream.codebookHash != cb.contentHash())
    throw Error(ErrorCode::CodebookMismatch,
                "stream was encoded with a different codebook");
  if (cb.dimension() != stream.patchSize || cb.size() != stream.codebookSize)
    throw Error(ErrorCode::CodebookMismatch,
                "codebook shape does not match stream header");
  if (stream.components.size() != stream.componentCount())
    throw Error(ErrorCode::CorruptStream, "component count mismatch");

  const std::size_t p = stream.patchSize;
  const std::size_t cells = stream.gridRows() * stream.gridCols();
  const std::size_t slotCount = cells * stream.channels;
  const std::size_t perSlot = std::size_t{stream.iterations} * stream.rank;

  PatchGrid grid;
  grid.patchSize = p;
  grid.gridRows = stream.gridRows();
  grid.gridCols = stream.gridCols();
  grid.originalHeight = stream.originalHeight;
  grid.originalWidth = stream.originalWidth;
  grid.channels = stream.channels;
  grid.patches.assign(stream.channels, std::vector<Matrix>(cells));

  const double scale =
      stream.combine == CombineMode::Average
          ? 1.0 / static_cast<double>(stream.iterations)
          : 1.0;

  std::vector<std::uint64_t> slotMacs(slotCount, 0);
  const auto decodeSlot = [&](std::size_t slot) {
    const std::size_t cell = slot / stream.channels;
    const std::size_t c = slot % stream.channels;
    Matrix patch(p, p);
    std::vector<double> scaled(p);
    std::uint64_t macs = 0;
    const QuantizedComponent* comp = stream.components.data() + slot * perSlot;
    for (std::size_t t = 0; t < perSlot; ++t) {
      const double gain = dequantizeGain(comp[t].gainCode, stream.gainRange);
      const auto left = cb.codeword(comp[t].leftIndex);
      const auto right = cb.codeword(comp[t].rightIndex);
      // P multiplies to scale the left direction, P^2 to accumulate the
      // outer product; the counter is the analytic decoder cost.
      for (std::size_t i = 0; i < p; ++i) scaled[i] = gain * left[i];
      for (std::size_t i = 0; i < p; ++i) {
        double* row = patch.data().data() + i * p;
        for (std::size_t j = 0; j < p; ++j) row[j] += scaled[i] * right[j];
      }
      macs += p * p + p;
    }
    if (scale != 1.0)
      for (double& v : patch.data()) v *= scale;
    grid.patches[c][cell] = std::move(patch);
    slotMacs[slot] = macs;
  };

  if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(static)
    for (long s = 0; s < static_cast<long>(slotCount); ++s)
      decodeSlot(static_cast<std::size_t>(s));
  } else {
    for (std::size_t s = 0; s < slotCount; ++s) decodeSlot(s);
  }

  if (stats) {
    stats->multiplies = 0;
    for (std::uint64_t m : slotMacs) stats->multiplies += m;
  }
  return assemblePatches(grid);
}

ImageTensor reconstructBypass(const ImageTensor& img, const CodecConfig& cfg,
                              ExecutionPolicy policy) {
  if (img.height < 1 || img.width < 1 || img.channels < 1)
    throw Error(ErrorCode::InvalidInput, "empty image");
  if (cfg.rank < 1 || cfg.rank > cfg.patchSize)
    throw Error(ErrorCode::InvalidConfig, "rank must be in [1, patchSize]");
  if (cfg.iterations < 1)
    throw Error(ErrorCode::InvalidConfig, "iterations must be >= 1");

  PatchGrid grid = extractPatches(img, cfg.patchSize);
  DecompositionConfig dcfg{cfg.rank, cfg.iterations, cfg.combine, cfg.loop};
  const std::size_t cells = grid.gridRows * grid.gridCols;
  const std::size_t slotCount = cells * grid.channels;

  const auto reconstructSlot = [&](std::size_t slot) {
    const std::size_t cell = slot / grid.channels;
    const std::size_t c = slot % grid.channels;
    grid.patches[c][cell] =
        combine(decomposeIterative(grid.patches[c][cell], dcfg), cfg.combine);
  };
  if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(static)
    for (long s = 0; s < static_cast<long>(slotCount); ++s)
      reconstructSlot(static_cast<std::size_t>(s));
  } else {
    for (std::size_t s = 0; s < slotCount; ++s) reconstructSlot(s);
  }
  return assemblePatches(grid);
}

std::vector<std::uint8_t> serialize(const EncodedStream& stream) {
  if (stream.components.size() != stream.componentCount())
    throw Error(ErrorCode::InvalidInput, "component count mismatch");
  if (stream.channels < 1 || stream.channels > 15 || stream.patchSize < 1 ||
      stream.rank < 1 || stream.rank > stream.patchSize ||
      stream.iterations < 1 || stream.codebookSize < 2 ||
      stream.originalHeight < 1 || stream.originalWidth < 1)
    throw Error(ErrorCode::InvalidInput, "invalid stream header fields");

  std::vector<std::uint8_t> out;
  out.reserve(stream.serializedBytes());
  out.insert(out.end(), kStreamMagic, kStreamMagic + 4);
  out.push_back(kStreamVersion);
  pushBe16(out, stream.originalHeight);
  pushBe16(out, stream.originalWidth);
  out.push_back(stream.patchSize);
  out.push_back(stream.rank);
  out.push_back(stream.iterations);
  pushBe16(out, stream.codebookSize);
  const std::uint8_t flags =
      static_cast<std::uint8_t>((stream.channels << 4) |
                                (stream.loop == LoopMode::Open ? 2 : 0) |
                                (stream.combine == CombineMode::Average ? 1 : 0));
  out.push_back(flags);
  pushBe32(out, floatBitsBe(static_cast<float>(stream.gainRange.minAbsGain)));
  pushBe32(out, floatBitsBe(static_cast<float>(stream.gainRange.maxAbsGain)));
  pushBe32(out, stream.codebookHash);

  const unsigned idxBits = indexBitWidth(stream.codebookSize);
  BitWriter writer;
  for (const QuantizedComponent& c : stream.components) {
    writer.writeBits(c.leftIndex, idxBits);
    writer.writeBits(c.rightIndex, idxBits);
    writer.writeBits(c.gainCode, 8);
  }
  const std::vector<std::uint8_t> payload = writer.take();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

EncodedStream deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kStreamHeaderBytes ||
      std::memcmp(bytes.data(), kStreamMagic, 4) != 0)
    throw Error(ErrorCode::CorruptStream, "not an encoded stream");
  if (bytes[4] != kStreamVersion)
    throw Error(ErrorCode::UnsupportedVersion, "unknown stream version");

  EncodedStream s;
  s.originalHeight = static_cast<std::uint16_t>((bytes[5] << 8) | bytes[6]);
  s.originalWidth = static_cast<std::uint16_t>((bytes[7] << 8) | bytes[8]);
  s.patchSize = bytes[9];
  s.rank = bytes[10];
  s.iterations = bytes[11];
  s.codebookSize = static_cast<std::uint16_t>((bytes[12] << 8) | bytes[13]);
  const std::uint8_t flags = bytes[14];
  s.channels = flags >> 4;
  s.combine = (flags & 1) ? CombineMode::Average : CombineMode::Sum;
  s.loop = (flags & 2) ? LoopMode::Open : LoopMode::Closed;
  if (flags & 0x0C)
    throw Error(ErrorCode::CorruptStream, "reserved flag bits set");

  auto readF32 = [&](std::size_t off) {
    const std::uint32_t b = (std::uint32_t(bytes[off]) << 24) |
                            (std::uint32_t(bytes[off + 1]) << 16) |
                            (std::uint32_t(bytes[off + 2]) << 8) |
                            std::uint32_t(bytes[off + 3]);
    float f;
    std::memcpy(&f, &b, 4);
    return static_cast<double>(f);
  };
  s.gainRange.minAbsGain = readF32(15);
  s.gainRange.maxAbsGain = readF32(19);
  s.codebookHash = (std::uint32_t(bytes[23]) << 24) |
                   (std::uint32_t(bytes[24]) << 16) |
                   (std::uint32_t(bytes[25]) << 8) | std::uint32_t(bytes[26]);

  if (s.originalHeight < 1 || s.originalWidth < 1 || s.channels < 1 ||
      s.patchSize < 1 || s.rank < 1 || s.rank > s.patchSize ||
      s.iterations < 1 || s.codebookSize < 2)
    throw Error(ErrorCode::CorruptStream, "invalid stream header fields");
  if (s.patchSize > std::max(s.originalHeight, s.originalWidth))
    throw Error(ErrorCode::CorruptStream, "patch size exceeds image");
  if (!std::isfinite(s.gainRange.minAbsGain) ||
      !std::isfinite(s.gainRange.maxAbsGain) ||
      !(s.gainRange.minAbsGain > 0.0) ||
      s.gainRange.minAbsGain > s.gainRange.maxAbsGain)
    throw Error(ErrorCode::CorruptStream, "invalid gain range");

  const std::size_t expectBytes = (s.payloadBits() + 7) / 8;
  if (bytes.size() - kStreamHeaderBytes != expectBytes)
    throw Error(ErrorCode::CorruptStream,
                bytes.size() - kStreamHeaderBytes < expectBytes
                    ? "truncated payload"
                    : "payload longer than header implies");

  const unsigned idxBits = indexBitWidth(s.codebookSize);
  BitReader reader(bytes.subspan(kStreamHeaderBytes));
  const std::size_t n = s.componentCount();
  s.components.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    QuantizedComponent& c = s.components[i];
    c.leftIndex = static_cast<std::uint16_t>(reader.readBits(idxBits));
    c.rightIndex = static_cast<std::uint16_t>(reader.readBits(idxBits));
    c.gainCode = static_cast<std::uint8_t>(reader.readBits(8));
    if (c.leftIndex >= s.codebookSize || c.rightIndex >= s.codebookSize)
      throw Error(ErrorCode::CorruptStream, "codeword index out of range");
  }
  // Padding bits must be zero so re-serialization is byte-identical.
  const std::size_t used = reader.bitsRead();
  for (std::size_t b = used; b < expectBytes * 8; ++b)
    if (reader.readBits(1) != 0)
      throw Error(ErrorCode::CorruptStream, "nonzero padding bits");
  return s;
}

}  // namespace lrvq
