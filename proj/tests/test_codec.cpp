#include <cmath>

#include "doctest.h"
#include "lrvq/codec.hpp"
#include "lrvq/imageio.hpp"
#include "lrvq/metrics.hpp"
#include "lrvq/patching.hpp"
#include "lrvq/pipeline.hpp"
#include "lrvq/synthetic.hpp"
#include "oracles.hpp"

using namespace lrvq;

namespace {

// 8-bit-quantized synthetic image, i.e. what the pipeline actually sees.
ImageTensor quantizedImage(std::uint64_t seed, std::size_t index,
                           std::size_t size) {
  return loadImage(saveImage(synthesizeImage(seed, index, size, size, 1)));
}

Codebook trainedCodebook(std::size_t p, std::size_t r, std::size_t i,
                         std::size_t k) {
  std::vector<CorpusImage> corpus;
  for (std::size_t idx = 0; idx < 6; ++idx)
    corpus.push_back({"c", quantizedImage(1, idx, 32)});
  return trainCodebook(harvestDirections(corpus, p, r, i), k, 2);
}

EncodedStream randomStream(SplitMix64& rng) {
  EncodedStream s;
  s.patchSize = static_cast<std::uint8_t>(1 + rng.next() % 12);
  s.originalHeight = static_cast<std::uint16_t>(
      s.patchSize + rng.next() % (3 * s.patchSize));
  s.originalWidth = static_cast<std::uint16_t>(
      s.patchSize + rng.next() % (3 * s.patchSize));
  s.channels = static_cast<std::uint8_t>(1 + rng.next() % 4);
  s.rank = static_cast<std::uint8_t>(1 + rng.next() % s.patchSize);
  s.iterations = static_cast<std::uint8_t>(1 + rng.next() % 3);
  s.codebookSize = static_cast<std::uint16_t>(2 + rng.next() % 300);
  s.combine = rng.next() % 2 ? CombineMode::Average : CombineMode::Sum;
  s.loop = rng.next() % 2 ? LoopMode::Open : LoopMode::Closed;
  s.gainRange = {0.5 + rng.u01(), 2.0 + rng.u01() * 10.0};
  s.codebookHash = static_cast<std::uint32_t>(rng.next());
  s.components.resize(s.componentCount());
  for (QuantizedComponent& c : s.components) {
    c.leftIndex = static_cast<std::uint16_t>(rng.next() % s.codebookSize);
    c.rightIndex = static_cast<std::uint16_t>(rng.next() % s.codebookSize);
    c.gainCode = static_cast<std::uint8_t>(rng.next() % 256);
  }
  return s;
}

}  // namespace

TEST_SUITE("codec") {

TEST_CASE("bypass full-rank path is exact") {
  const ImageTensor img = quantizedImage(3, 0, 64);
  CodecConfig cfg;
  cfg.patchSize = 8;
  cfg.rank = 8;
  cfg.iterations = 1;
  cfg.combine = CombineMode::Sum;
  const ImageTensor recon = reconstructBypass(img, cfg);
  CHECK(mse(img, recon) < 1e-12);
}

TEST_CASE("bypass cannot be serialized") {
  const Codebook cb = trainedCodebook(8, 2, 2, 32);
  CodecConfig cfg;
  cfg.patchSize = 8;
  cfg.rank = 2;
  cfg.iterations = 2;
  cfg.codebookSize = 32;
  cfg.quantizationBypass = true;
  try {
    encode(quantizedImage(3, 1, 16), cfg, cb);
    FAIL("expected invalid-config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
}

TEST_CASE("payload size formula") {
  const Codebook cb = trainedCodebook(8, 2, 2, 256);
  CodecConfig cfg;
  cfg.patchSize = 8;
  cfg.rank = 2;
  cfg.iterations = 2;
  cfg.codebookSize = 256;
  const ImageTensor img = quantizedImage(4, 0, 16);
  const EncodedStream stream = encode(img, cfg, cb);
  CHECK(stream.payloadBits() == 384);  // 4 patches * 2 * 2 * (2*8+8)
  const auto bytes = serialize(stream);
  CHECK(bytes.size() == kStreamHeaderBytes + 384 / 8);
  CHECK(bytes.size() == stream.serializedBytes());
}

TEST_CASE("decoder multiply counter matches the analytic model") {
  const Codebook cb = trainedCodebook(8, 2, 2, 256);
  CodecConfig cfg;
  cfg.patchSize = 8;
  cfg.rank = 2;
  cfg.iterations = 2;
  cfg.codebookSize = 256;
  const ImageTensor img = quantizedImage(5, 0, 64);
  const EncodedStream stream = encode(img, cfg, cb);
  DecodeStats stats;
  decode(stream, cb, &stats);
  CHECK(stats.multiplies == 18432);
  CHECK(stats.multiplies == lowrankDecoderMacs(cfg, 8, 8, 1));
}

TEST_CASE("serialize/deserialize round trip on random streams") {
  SplitMix64 rng{606};
  for (int t = 0; t < 100; ++t) {
    const EncodedStream s = randomStream(rng);
    const auto bytes = serialize(s);
    const EncodedStream back = deserialize(bytes);
    CHECK(back == s);
    CHECK(serialize(back) == bytes);
  }
}

TEST_CASE("single-patch stream length") {
  SplitMix64 rng{707};
  EncodedStream s;
  s.patchSize = 8;
  s.originalHeight = 8;
  s.originalWidth = 8;
  s.channels = 1;
  s.rank = 1;
  s.iterations = 1;
  s.codebookSize = 2;
  s.gainRange = {1.0, 1.0};
  s.components.resize(1);
  const auto bytes = serialize(s);
  // One component: 2*1 + 8 = 10 bits -> 2 payload bytes.
  CHECK(bytes.size() == kStreamHeaderBytes + 2);
  CHECK(deserialize(bytes) == s);
}

TEST_CASE("every payload bit matters") {
  SplitMix64 rng{808};
  EncodedStream s;
  s.patchSize = 4;
  s.originalHeight = 12;  // 3 patches -> 36 payload bits -> 4 padding bits
  s.originalWidth = 4;
  s.channels = 1;
  s.rank = 1;
  s.iterations = 1;
  s.codebookSize = 4;
  s.gainRange = {0.5, 2.0};
  s.components.resize(3);
  for (QuantizedComponent& c : s.components) {
    c.leftIndex = static_cast<std::uint16_t>(rng.next() % 4);
    c.rightIndex = static_cast<std::uint16_t>(rng.next() % 4);
    c.gainCode = static_cast<std::uint8_t>(rng.next() % 256);
  }
  const auto bytes = serialize(s);
  const std::size_t payloadBits = s.payloadBits();  // 24 bits, 3 bytes
  REQUIRE(bytes.size() == kStreamHeaderBytes + (payloadBits + 7) / 8);
  for (std::size_t bit = 0; bit < payloadBits; ++bit) {
    auto flipped = bytes;
    flipped[kStreamHeaderBytes + bit / 8] ^=
        static_cast<std::uint8_t>(0x80 >> (bit % 8));
    const EncodedStream back = deserialize(flipped);
    std::size_t diffs = 0;
    for (std::size_t i = 0; i < s.components.size(); ++i)
      if (!(back.components[i] == s.components[i])) ++diffs;
    CHECK(diffs == 1);
  }
  // Padding bits, if any, must stay zero.
  for (std::size_t bit = payloadBits; bit < (bytes.size() - kStreamHeaderBytes) * 8;
       ++bit) {
    auto flipped = bytes;
    flipped[kStreamHeaderBytes + bit / 8] ^=
        static_cast<std::uint8_t>(0x80 >> (bit % 8));
    CHECK_THROWS_AS(deserialize(flipped), Error);
  }
}

TEST_CASE("decode validates codebook, version and payload") {
  const Codebook cb = trainedCodebook(8, 1, 1, 16);
  CodecConfig cfg;
  cfg.patchSize = 8;
  cfg.rank = 1;
  cfg.iterations = 1;
  cfg.codebookSize = 16;
  const ImageTensor img = quantizedImage(6, 0, 16);
  const EncodedStream stream = encode(img, cfg, cb);
  const auto bytes = serialize(stream);

  const Codebook other = trainedCodebook(8, 1, 1, 16 + 16);
  EncodedStream tampered = stream;
  tampered.codebookSize = static_cast<std::uint16_t>(other.size());
  try {
    decode(tampered, other);
    FAIL("expected codebook mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CodebookMismatch);
  }

  auto truncated = bytes;
  truncated.pop_back();
  try {
    deserialize(truncated);
    FAIL("expected corrupt stream");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CorruptStream);
  }

  auto badVersion = bytes;
  badVersion[4] = 2;
  try {
    deserialize(badVersion);
    FAIL("expected unsupported version");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedVersion);
  }

  auto badMagic = bytes;
  badMagic[0] = 'x';
  CHECK_THROWS_AS(deserialize(badMagic), Error);
}

TEST_CASE("all-zero gain codes decode to a zero image") {
  const Codebook cb = trainedCodebook(4, 1, 1, 16);
  CodecConfig cfg;
  cfg.patchSize = 4;
  cfg.rank = 1;
  cfg.iterations = 1;
  cfg.codebookSize = 16;
  EncodedStream stream = encode(quantizedImage(7, 0, 8), cfg, cb);
  for (QuantizedComponent& c : stream.components) c.gainCode = 0;
  const ImageTensor out = decode(stream, cb);
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("header layout is pinned") {
  const Codebook cb = trainedCodebook(8, 2, 2, 256);
  CodecConfig cfg;
  cfg.patchSize = 8;
  cfg.rank = 2;
  cfg.iterations = 2;
  cfg.codebookSize = 256;
  const ImageTensor img = quantizedImage(8, 0, 16);
  const auto bytes = serialize(encode(img, cfg, cb));
  CHECK(bytes[0] == 'L');
  CHECK(bytes[1] == 'R');
  CHECK(bytes[2] == 'V');
  CHECK(bytes[3] == 'Q');
  CHECK(bytes[4] == 1);                      // version
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 16);                     // height, big-endian
  CHECK(bytes[7] == 0);
  CHECK(bytes[8] == 16);                     // width
  CHECK(bytes[9] == 8);                      // patch size
  CHECK(bytes[10] == 2);                     // rank
  CHECK(bytes[11] == 2);                     // iterations
  CHECK(bytes[12] == 1);
  CHECK(bytes[13] == 0);                     // K = 256, big-endian
  CHECK(bytes[14] == 0x10);                  // 1 channel, sum, closed
}

TEST_CASE("average mode scales the decoded patch") {
  std::vector<std::vector<double>> dirs = {{1.0, 0.0}, {0.0, 1.0}};
  const Codebook cb = Codebook::fromDirections(2, 0, dirs);
  EncodedStream s;
  s.patchSize = 2;
  s.originalHeight = 2;
  s.originalWidth = 2;
  s.channels = 1;
  s.rank = 1;
  s.iterations = 2;
  s.codebookSize = 2;
  s.combine = CombineMode::Average;
  s.gainRange = {0.5, 0.5};
  s.codebookHash = cb.contentHash();
  s.components = {{0, 1, 1}, {0, 1, 0}};  // 0.5 * e0 e1^T, then zero
  const ImageTensor out = decode(s, cb);
  CHECK(out.at(0, 0, 1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(out.at(0, 0, 0) == 0.0);
  CHECK(out.at(0, 1, 0) == 0.0);
  CHECK(out.at(0, 1, 1) == 0.0);
}

TEST_CASE("closed loop beats open loop on synthetic images") {
  const Codebook cb = trainedCodebook(8, 2, 2, 64);
  for (std::size_t idx = 0; idx < 4; ++idx) {
    const ImageTensor img = quantizedImage(11, 10 + idx, 32);
    CodecConfig cfg;
    cfg.patchSize = 8;
    cfg.rank = 2;
    cfg.iterations = 2;
    cfg.codebookSize = 64;
    cfg.loop = LoopMode::Closed;
    const double closed = mse(img, decode(encode(img, cfg, cb), cb));
    cfg.loop = LoopMode::Open;
    const double open = mse(img, decode(encode(img, cfg, cb), cb));
    CHECK(closed <= open + 1e-12);
  }
}

TEST_CASE("decoded error respects the rank floor") {
  const Codebook cb = trainedCodebook(8, 2, 2, 64);
  const ImageTensor img = quantizedImage(12, 20, 32);
  CodecConfig cfg;
  cfg.patchSize = 8;
  cfg.rank = 2;
  cfg.iterations = 2;
  cfg.codebookSize = 64;
  const double decoded = mse(img, decode(encode(img, cfg, cb), cb));

  const PatchGrid grid = extractPatches(img, 8);
  double floorSq = 0.0;
  for (const Matrix& patch : grid.patches[0]) {
    const double e = oracle::truncationError(patch, 4);
    floorSq += e * e;
  }
  const double floorMse = floorSq / static_cast<double>(img.data.size());
  CHECK(decoded >= floorMse - (1e-9 + 1e-6 * floorMse));
}

TEST_CASE("serial and parallel policies produce identical bytes") {
  const Codebook cb = trainedCodebook(8, 2, 2, 64);
  CodecConfig cfg;
  cfg.patchSize = 8;
  cfg.rank = 2;
  cfg.iterations = 2;
  cfg.codebookSize = 64;
  const ImageTensor img = quantizedImage(13, 2, 48);
  const EncodedStream a = encode(img, cfg, cb, ExecutionPolicy::Serial);
  const EncodedStream b = encode(img, cfg, cb, ExecutionPolicy::Parallel);
  CHECK(a == b);
  CHECK(serialize(a) == serialize(b));
  DecodeStats sa, sb;
  const ImageTensor da = decode(a, cb, &sa, ExecutionPolicy::Serial);
  const ImageTensor db = decode(a, cb, &sb, ExecutionPolicy::Parallel);
  CHECK(da == db);
  CHECK(sa.multiplies == sb.multiplies);
}

TEST_CASE("encode validates its inputs") {
  const Codebook cb = trainedCodebook(8, 2, 2, 64);
  CodecConfig cfg;
  cfg.patchSize = 4;  // codebook is dimension 8
  cfg.rank = 2;
  cfg.iterations = 2;
  cfg.codebookSize = 64;
  try {
    encode(quantizedImage(14, 0, 16), cfg, cb);
    FAIL("expected invalid-config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
  cfg.patchSize = 8;
  cfg.codebookSize = 32;
  CHECK_THROWS_AS(encode(quantizedImage(14, 0, 16), cfg, cb), Error);
  cfg.codebookSize = 64;
  CHECK_THROWS_AS(encode(ImageTensor{}, cfg, cb), Error);
  cfg.rank = 9;
  CHECK_THROWS_AS(encode(quantizedImage(14, 0, 16), cfg, cb), Error);
}

TEST_CASE("encode is deterministic") {
  const Codebook cb = trainedCodebook(8, 2, 2, 64);
  CodecConfig cfg;
  cfg.patchSize = 8;
  cfg.rank = 2;
  cfg.iterations = 2;
  cfg.codebookSize = 64;
  const ImageTensor img = quantizedImage(15, 5, 32);
  CHECK(serialize(encode(img, cfg, cb)) == serialize(encode(img, cfg, cb)));
}

}  // TEST_SUITE
