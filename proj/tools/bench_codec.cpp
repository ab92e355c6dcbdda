// Compares the serial reference kernels against the OpenMP ones and checks
// they produce identical bytes.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "lrvq/codec.hpp"
#include "lrvq/pipeline.hpp"
#include "lrvq/synthetic.hpp"

using namespace lrvq;

namespace {

template <typename F>
double timeIt(F&& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  const std::size_t size = 256;
  const ImageTensor img = synthesizeImage(7, 0, size, size, 1);

  // Small self-trained codebook; the benchmark measures kernels, not rate.
  std::vector<CorpusImage> corpus;
  for (std::size_t i = 1; i <= 4; ++i)
    corpus.push_back({"bench", synthesizeImage(7, i, 64, 64, 1)});
  CodecConfig cfg;
  cfg.patchSize = 8;
  cfg.rank = 2;
  cfg.iterations = 2;
  cfg.codebookSize = 64;
  const Codebook cb =
      trainCodebook(harvestDirections(corpus, cfg.patchSize, cfg.rank,
                                      cfg.iterations),
                    cfg.codebookSize, 7);

  std::printf("image %zux%zu, P=%zu R=%zu I=%zu K=%zu, omp max threads %d\n",
              size, size, cfg.patchSize, cfg.rank, cfg.iterations,
              cfg.codebookSize, omp_get_max_threads());

  EncodedStream serialStream, parallelStream;
  const double tEncSerial = timeIt(
      [&] { serialStream = encode(img, cfg, cb, ExecutionPolicy::Serial); }, 3);
  const double tEncParallel = timeIt(
      [&] { parallelStream = encode(img, cfg, cb, ExecutionPolicy::Parallel); },
      3);
  const bool encMatch = serialize(serialStream) == serialize(parallelStream);

  ImageTensor serialImg, parallelImg;
  const double tDecSerial = timeIt(
      [&] { serialImg = decode(serialStream, cb, nullptr,
                               ExecutionPolicy::Serial); },
      20);
  const double tDecParallel = timeIt(
      [&] { parallelImg = decode(serialStream, cb, nullptr,
                                 ExecutionPolicy::Parallel); },
      20);
  const bool decMatch = serialImg == parallelImg;

  const double mpix = static_cast<double>(size * size) / 1e6;
  std::printf("encode  serial   %8.3f ms  (%.2f MPix/s)\n", tEncSerial * 1e3,
              mpix / tEncSerial);
  std::printf("encode  parallel %8.3f ms  (%.2f MPix/s)  speedup %.2fx  %s\n",
              tEncParallel * 1e3, mpix / tEncParallel,
              tEncSerial / tEncParallel, encMatch ? "bit-exact" : "MISMATCH");
  std::printf("decode  serial   %8.3f ms  (%.2f MPix/s)\n", tDecSerial * 1e3,
              mpix / tDecSerial);
  std::printf("decode  parallel %8.3f ms  (%.2f MPix/s)  speedup %.2fx  %s\n",
              tDecParallel * 1e3, mpix / tDecParallel,
              tDecSerial / tDecParallel, decMatch ? "bit-exact" : "MISMATCH");

  return encMatch && decMatch ? 0 : 1;
}
