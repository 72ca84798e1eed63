// Serial vs OpenMP timing for the pipeline's data-parallel kernels:
// mock translation, embedding + cosine scoring, and chrF.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "m3pipe/backends.hpp"
#include "m3pipe/curation.hpp"
#include "m3pipe/parallel.hpp"
#include "m3pipe/qa.hpp"
#include "m3pipe/hash.hpp"

using namespace m3pipe;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::string> synthetic_texts(std::size_t n) {
  static const char* kWords[] = {"river", "mountain", "painting", "circuit", "molecule",
                                 "harvest", "library", "granite", "syntax", "compass"};
  SplitMix64 rng(7);
  std::vector<std::string> texts(n);
  for (std::string& t : texts) {
    int words = 8 + static_cast<int>(rng.next() % 24);
    for (int w = 0; w < words; ++w) {
      if (w > 0) t.push_back(' ');
      t += kWords[rng.next() % 10];
    }
  }
  return texts;
}

template <class Fn>
double timed(Fn&& fn) {
  auto start = std::chrono::steady_clock::now();
  fn();
  return seconds_since(start);
}

void report(const char* kernel, double serial_s, double parallel_s, std::size_t n) {
  std::printf("%-18s %10zu items   serial %8.3fs   openmp %8.3fs   speedup %.2fx\n", kernel, n,
              serial_s, parallel_s, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 200000;
  int threads = 0;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--records" && i + 1 < argc) n = std::stoull(argv[++i]);
    if (arg == "--threads" && i + 1 < argc) threads = std::stoi(argv[++i]);
  }
#if defined(_OPENMP)
  if (threads == 0) threads = omp_get_max_threads();
#else
  if (threads == 0) threads = 1;
#endif
  std::printf("kernel benchmark: %zu records, %d threads\n", n, threads);

  std::vector<std::string> texts = synthetic_texts(n);

  auto translate_kernel = [&](ExecMode mode) {
    std::vector<std::string> out(texts.size());
    for_each_index(mode, texts.size(), threads, [&](std::size_t i) {
      out[i] = mock_translate_text(texts[i], Lang::en, Lang::zh);
    });
    return out;
  };
  double t_serial = timed([&] { translate_kernel(ExecMode::serial); });
  double t_parallel = timed([&] { translate_kernel(ExecMode::openmp); });
  report("mock-translate", t_serial, t_parallel, n);

  auto score_kernel = [&](ExecMode mode) {
    std::vector<double> scores(texts.size());
    for_each_index(mode, texts.size(), threads, [&](std::size_t i) {
      std::vector<double> a = mock_embed_vector(texts[i], EmbedKind::text);
      std::vector<double> b = mock_embed_vector("img-" + std::to_string(i), EmbedKind::image);
      scores[i] = cosine(a, b);
    });
    return scores;
  };
  double s_serial = timed([&] { score_kernel(ExecMode::serial); });
  double s_parallel = timed([&] { score_kernel(ExecMode::openmp); });
  report("embed+cosine", s_serial, s_parallel, n);

  std::size_t pairs = n / 4;
  auto chrf_kernel = [&](ExecMode mode) {
    std::vector<double> scores(pairs);
    for_each_index(mode, pairs, threads, [&](std::size_t i) {
      scores[i] = chrf(texts[i], texts[(i + 1) % texts.size()]);
    });
    return scores;
  };
  double c_serial = timed([&] { chrf_kernel(ExecMode::serial); });
  double c_parallel = timed([&] { chrf_kernel(ExecMode::openmp); });
  report("chrf", c_serial, c_parallel, pairs);
  return 0;
}
