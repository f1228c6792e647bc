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

#include "jtsne/ahe/fixed_point.h"

#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "jtsne/common/status_macros.h"

namespace jtsne::ahe {

FixedPointCodec::FixedPointCodec(int scale_bits, mpz_class modulus)
    : scale_bits_(scale_bits),
      modulus_(std::move(modulus)),
      half_((modulus_ - 1) / 2) {}

absl::StatusOr<FixedPointCodec> FixedPointCodec::Create(int scale_bits,
                                                        mpz_class modulus) {
  if (scale_bits < 1 || scale_bits > 60) {
    return absl::InvalidArgumentError(
        absl::StrCat("scale_bits must be in [1, 60], got ", scale_bits));
  }
  if (modulus <= 2) {
    return absl::InvalidArgumentError("plaintext modulus too small");
  }
  return FixedPointCodec(scale_bits, std::move(modulus));
}

mpz_class FixedPointCodec::Scale(int level) const {
  mpz_class f;
  mpz_ui_pow_ui(f.get_mpz_t(), 2, static_cast<unsigned long>(scale_bits_ * level));
  return f;
}

absl::StatusOr<mpz_class> FixedPointCodec::ToScaled(double x, int level) const {
  if (!std::isfinite(x)) {
    return absl::InvalidArgumentError("cannot encode a non-finite value");
  }
  const double scaled = std::nearbyint(std::ldexp(x, scale_bits_ * level));
  if (!std::isfinite(scaled)) {
    return absl::OutOfRangeError("value overflows the fixed-point range");
  }
  mpz_class v(scaled);
  if (abs(v) > half_) {
    return absl::OutOfRangeError(
        absl::StrCat("|", x, " * F^", level, "| exceeds n/2"));
  }
  return v;
}

absl::StatusOr<mpz_class> FixedPointCodec::ToRing(
    const mpz_class& signed_value) const {
  if (abs(signed_value) > half_) {
    return absl::OutOfRangeError("signed value exceeds n/2");
  }
  if (signed_value < 0) return modulus_ + signed_value;
  return signed_value;
}

mpz_class FixedPointCodec::ToSigned(const mpz_class& ring_value) const {
  if (ring_value > half_) return ring_value - modulus_;
  return ring_value;
}

absl::StatusOr<mpz_class> FixedPointCodec::Encode(double x, int level) const {
  JTSNE_ASSIGN_OR_RETURN(mpz_class scaled, ToScaled(x, level));
  return ToRing(scaled);
}

double FixedPointCodec::Decode(const mpz_class& ring_value, int level) const {
  return ScaledToReal(ToSigned(ring_value), level);
}

double FixedPointCodec::ScaledToReal(const mpz_class& signed_value,
                                     int level) const {
  long exponent = 0;
  const double mantissa = mpz_get_d_2exp(&exponent, signed_value.get_mpz_t());
  return std::ldexp(mantissa,
                    static_cast<int>(exponent) - scale_bits_ * level);
}

}  // namespace jtsne::ahe
