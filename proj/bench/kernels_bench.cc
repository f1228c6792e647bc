/*
 * Copyright 2026 The jtsne Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Serial versus OpenMP kernels. Run with --benchmark_filter to pick a family;
// pairs share a name and differ in the /serial or /omp suffix.

#include <gmpxx.h>
#include <omp.h>

#include <cstdlib>
#include <random>
#include <vector>

#include "benchmark/benchmark.h"
#include "jtsne/ahe/paillier.h"
#include "jtsne/kernels/crypto.h"
#include "jtsne/kernels/density.h"
#include "jtsne/kernels/distance.h"
#include "jtsne/kernels/gradient.h"

namespace jtsne {
namespace {

const ahe::KeyPair& Keys() {
  static const ahe::KeyPair* keys = [] {
    auto k = ahe::GenerateKeyPair(1024);
    if (!k.ok()) std::abort();
    return new ahe::KeyPair(*std::move(k));
  }();
  return *keys;
}

RealMatrix RandomReal(size_t rows, size_t cols, uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  RealMatrix m(rows, cols);
  for (double& v : m.data()) v = g(rng);
  return m;
}

std::vector<mpz_class> RandomPlaintexts(size_t n) {
  std::mt19937_64 rng(3);
  std::vector<mpz_class> out(n);
  for (auto& v : out) v = static_cast<unsigned long>(rng() >> 16);
  return out;
}

template <bool kSerial>
void BM_EncryptAll(benchmark::State& state) {
  const auto pts = RandomPlaintexts(state.range(0));
  for (auto _ : state) {
    auto c = kSerial ? kernels::serial::EncryptAll(Keys().public_key, pts, 1)
                     : kernels::EncryptAll(Keys().public_key, pts, 1);
    benchmark::DoNotOptimize(c);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool kSerial>
void BM_DecryptAll(benchmark::State& state) {
  const auto pts = RandomPlaintexts(state.range(0));
  const auto cts = *kernels::EncryptAll(Keys().public_key, pts, 1);
  for (auto _ : state) {
    auto m = kSerial ? kernels::serial::DecryptAll(Keys().private_key, cts)
                     : kernels::DecryptAll(Keys().private_key, cts);
    benchmark::DoNotOptimize(m);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool kSerial>
void BM_IntegerDistances(benchmark::State& state) {
  const size_t n = state.range(0);
  Matrix<mpz_class> x(n, 9);
  std::mt19937_64 rng(5);
  for (auto& v : x.data()) v = static_cast<long>(rng() >> 40) - (1L << 23);
  for (auto _ : state) {
    auto d = kSerial ? kernels::serial::SquaredDistances(x) : kernels::SquaredDistances(x);
    benchmark::DoNotOptimize(d);
  }
}

template <bool kSerial>
void BM_RealDistances(benchmark::State& state) {
  const RealMatrix x = RandomReal(state.range(0), 9, 7);
  for (auto _ : state) {
    auto d = kSerial ? kernels::serial::SquaredDistances(x) : kernels::SquaredDistances(x);
    benchmark::DoNotOptimize(d);
  }
}

template <bool kSerial>
void BM_GradientStep(benchmark::State& state) {
  const size_t n = state.range(0);
  const RealMatrix y = RandomReal(n, 2, 11, 1e-2);
  RealMatrix p = RandomReal(n, n, 13);
  for (double& v : p.data()) v = std::abs(v) / static_cast<double>(n * n);
  for (auto _ : state) {
    if constexpr (kSerial) {
      const auto k = kernels::serial::ComputeStudentKernel(y);
      benchmark::DoNotOptimize(kernels::serial::KlGradient(p, 1.0, k, y));
    } else {
      const auto k = kernels::ComputeStudentKernel(y);
      benchmark::DoNotOptimize(kernels::KlGradient(p, 1.0, k, y));
    }
  }
}

template <bool kSerial>
void BM_DensityRaster(benchmark::State& state) {
  const size_t n = state.range(0);
  const RealMatrix rows = RandomReal(n, 256, 17);
  const RealMatrix cols = RandomReal(n, 256, 19);
  for (auto _ : state) {
    RealMatrix raster(256, 256);
    if constexpr (kSerial) {
      kernels::serial::AccumulateSeparable(rows, cols, &raster);
    } else {
      kernels::AccumulateSeparable(rows, cols, &raster);
    }
    benchmark::DoNotOptimize(raster);
  }
}

#define JTSNE_PAIR(fn, ...)                                          \
  BENCHMARK(fn<true>)->Name(#fn "/serial")->__VA_ARGS__;             \
  BENCHMARK(fn<false>)->Name(#fn "/omp")->__VA_ARGS__

JTSNE_PAIR(BM_EncryptAll, Arg(256)->Unit(benchmark::kMillisecond));
JTSNE_PAIR(BM_DecryptAll, Arg(256)->Unit(benchmark::kMillisecond));
JTSNE_PAIR(BM_IntegerDistances, Arg(128)->Arg(546)->Unit(benchmark::kMillisecond));
JTSNE_PAIR(BM_RealDistances, Arg(546)->Arg(2048)->Unit(benchmark::kMillisecond));
JTSNE_PAIR(BM_GradientStep, Arg(546)->Arg(2048)->Unit(benchmark::kMillisecond));
JTSNE_PAIR(BM_DensityRaster, Arg(546)->Unit(benchmark::kMillisecond));

}  // namespace
}  // namespace jtsne

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
