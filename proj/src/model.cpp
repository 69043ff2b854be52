// Copyright 2026 The superpose Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "superpose/model.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "superpose/error.hpp"

namespace superpose {

double nats_to_bits(double nats) { return nats / std::numbers::ln2; }
double bits_to_nats(double bits) { return bits * std::numbers::ln2; }

double ChannelParams::capacity_bits() const {
  return nats_to_bits(capacity_nats);
}

double CodeParams::rate_bits() const { return nats_to_bits(rate); }

ChannelParams derive_channel(double snr) {
  if (!(snr > 0.0) || !std::isfinite(snr))
    throw DomainError("derive_channel: snr must be a positive finite number");
  ChannelParams c;
  c.power = snr;
  c.noise_variance = 1.0;
  c.snr = snr;
  c.capacity_nats = 0.5 * std::log1p(snr);
  c.nu = snr / (1.0 + snr);
  c.r0_threshold_rate = 0.5 * c.nu;
  c.c0 = c.capacity_nats;
  return c;
}

CodeParams make_code(std::uint64_t L, std::uint64_t M, double rate_nats) {
  if (L < 1) throw DomainError("make_code: L must be at least 1");
  if (M < 2 || !std::has_single_bit(M))
    throw DomainError("make_code: M must be a power of two, at least 2");
  if (!(rate_nats > 0.0) || !std::isfinite(rate_nats))
    throw DomainError("make_code: rate must be positive");
  if (L > std::numeric_limits<std::uint64_t>::max() / M)
    throw DomainError("make_code: L*M overflows");
  CodeParams p;
  p.L = L;
  p.M = M;
  p.N = L * M;
  p.log2_M = static_cast<unsigned>(std::countr_zero(M));
  p.K = L * p.log2_M;
  p.requested_rate = rate_nats;
  const double ln_m = p.log2_M * std::numbers::ln2;
  const double n_real = static_cast<double>(L) * ln_m / rate_nats;
  // Guard against n_real landing a hair above an integer through rounding.
  double n_ceil = std::ceil(n_real);
  if (n_ceil - n_real > 1.0 - 1e-12 * n_real) n_ceil -= 1.0;
  if (n_ceil < 1.0) n_ceil = 1.0;
  if (n_ceil > 9.0e15) throw DomainError("make_code: codelength too large");
  p.n = static_cast<std::uint64_t>(n_ceil);
  p.rate = static_cast<double>(L) * ln_m / static_cast<double>(p.n);
  return p;
}

double c_tilde(const ChannelParams& channel, std::uint64_t L) {
  if (L < 1) throw DomainError("c_tilde: L must be at least 1");
  const double l = static_cast<double>(L);
  return -0.5 * l * std::expm1(-2.0 * channel.capacity_nats / l);
}

}  // namespace superpose
