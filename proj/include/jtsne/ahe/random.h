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

#ifndef JTSNE_AHE_RANDOM_H_
#define JTSNE_AHE_RANDOM_H_

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace jtsne::ahe {

// Fills `n` bytes from the OpenSSL CSPRNG. Aborts if the generator fails.
std::string SecureRandomBytes(size_t n);

// Uniform integer in [0, bound) from the CSPRNG. `bound` must be positive.
mpz_class SecureRandomBelow(const mpz_class& bound);

// Uniform random integer with exactly `bits` bits (top bit set).
mpz_class SecureRandomBits(int bits);

// UniformRandomBitGenerator used for protocol noise and permutations.
// Seeded instances are deterministic (test/audit mode only); unseeded
// instances draw from the CSPRNG.
class NoiseRng {
 public:
  using result_type = uint64_t;

  explicit NoiseRng(std::optional<uint64_t> seed = std::nullopt);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  bool deterministic() const { return engine_.has_value(); }

  // Uniform integer in [0, bound) by rejection; `bound` must be positive.
  mpz_class Below(const mpz_class& bound);

 private:
  std::optional<std::mt19937_64> engine_;
  std::string buffer_;
  size_t offset_ = 0;
};

}  // namespace jtsne::ahe

#endif  // JTSNE_AHE_RANDOM_H_
