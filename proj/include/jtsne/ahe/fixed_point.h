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

#ifndef JTSNE_AHE_FIXED_POINT_H_
#define JTSNE_AHE_FIXED_POINT_H_

#include <gmpxx.h>

#include "absl/status/statusor.h"

namespace jtsne::ahe {

inline constexpr int kDefaultScaleBits = 24;

// Maps reals into the Paillier plaintext ring Z_n with scale F = 2^scale_bits.
// A value at level L is stored as round(x * F^L); negative values live at
// n - |v|. Raw coordinates and entry noise are level 1; squared distances,
// products and row noise are level 2.
class FixedPointCodec {
 public:
  static absl::StatusOr<FixedPointCodec> Create(int scale_bits,
                                                mpz_class modulus);

  int scale_bits() const { return scale_bits_; }
  const mpz_class& modulus() const { return modulus_; }
  // F^level
  mpz_class Scale(int level) const;

  // round(x * F^level) as a signed integer. Fails for non-finite input or
  // when |result| reaches n / 2.
  absl::StatusOr<mpz_class> ToScaled(double x, int level) const;
  // Signed integer -> ring element. Requires |v| <= (n - 1) / 2.
  absl::StatusOr<mpz_class> ToRing(const mpz_class& signed_value) const;
  // Ring element -> signed integer in [-(n-1)/2, (n-1)/2].
  mpz_class ToSigned(const mpz_class& ring_value) const;

  absl::StatusOr<mpz_class> Encode(double x, int level) const;
  double Decode(const mpz_class& ring_value, int level) const;
  // Signed scaled integer -> real.
  double ScaledToReal(const mpz_class& signed_value, int level) const;

 private:
  FixedPointCodec(int scale_bits, mpz_class modulus);

  int scale_bits_;
  mpz_class modulus_;
  mpz_class half_;
};

}  // namespace jtsne::ahe

#endif  // JTSNE_AHE_FIXED_POINT_H_
