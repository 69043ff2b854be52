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

#pragma once

#include <cstdint>

namespace superpose {

// Standard normal density, distribution and upper tail.
double normal_pdf(double x);
double normal_cdf(double x);
double normal_sf(double x);

// log of the upper tail, finite for arbitrarily large x.
double log_normal_sf(double x);

// Inverse of normal_cdf to full double precision. p must lie in (0, 1).
double normal_quantile(double p);

// Rational approximation of the normal quantile (relative error ~1e-9),
// used on the sampling path where the refinement step is not worth its cost.
double normal_quantile_fast(double p);

// Mean and variance of a chi random variable with d degrees of freedom.
double chi_mean(double d);
double chi_variance(double d);

// D(rho) = rho ln rho - (rho - 1).
double poisson_divergence(double rho);

// Counter-based generator: every (stream, index) pair maps to an
// independent 64-bit word, so any entry can be regenerated on its own.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z);
  static CounterRng derive(std::uint64_t master, std::uint64_t tag,
                           std::uint64_t a = 0, std::uint64_t b = 0);

  // A single stream with its seed resolved once, for hot loops.
  class Stream {
   public:
    explicit Stream(std::uint64_t seed) : seed_(seed) {}
    std::uint64_t bits(std::uint64_t index) const {
      return mix(seed_ + (index + 1) * 0x9e3779b97f4a7c15ULL);
    }
    double uniform(std::uint64_t index) const {
      return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
    }
    double normal(std::uint64_t index) const {
      return normal_quantile_fast(uniform(index));
    }

   private:
    std::uint64_t seed_;
  };

  Stream stream(std::uint64_t id) const;

  std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const;
  // Uniform on the open interval (0, 1).
  double uniform(std::uint64_t stream, std::uint64_t index) const;
  double normal(std::uint64_t stream, std::uint64_t index) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

// Tags separating the random streams drawn from one master seed.
namespace stream_tag {
inline constexpr std::uint64_t dictionary = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t message = 3;
inline constexpr std::uint64_t deferred_projection = 4;
inline constexpr std::uint64_t deferred_complement = 5;
inline constexpr std::uint64_t trial = 6;
inline constexpr std::uint64_t outer_message = 7;
}  // namespace stream_tag

}  // namespace superpose
