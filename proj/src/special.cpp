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

#include "superpose/special.hpp"

#include <cmath>
#include <numbers>

#include "superpose/error.hpp"

namespace superpose {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_normal_sf(double x) {
  if (x < 30.0) return std::log(normal_sf(x));
  const double r = 1.0 / (x * x);
  const double series =
      1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(series);
}

// Acklam's rational approximation.
double normal_quantile_fast(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("normal_quantile: probability must lie in (0, 1)");
  double x = normal_quantile_fast(p);
  // One Halley step.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double chi_mean(double d) {
  if (!(d > 0.0)) throw DomainError("chi_mean: degrees of freedom must be > 0");
  return std::numbers::sqrt2 *
         std::exp(std::lgamma(0.5 * (d + 1.0)) - std::lgamma(0.5 * d));
}

double chi_variance(double d) {
  const double m = chi_mean(d);
  return d - m * m;
}

double poisson_divergence(double rho) {
  if (!(rho > 0.0)) throw DomainError("poisson_divergence: rho must be > 0");
  return rho * std::log(rho) - (rho - 1.0);
}

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng CounterRng::derive(std::uint64_t master, std::uint64_t tag,
                              std::uint64_t a, std::uint64_t b) {
  std::uint64_t k = mix(master + 0x9e3779b97f4a7c15ULL);
  k = mix(k ^ (tag + 0x632be59bd9b4e019ULL));
  k = mix(k ^ (a + 0x85157af5ULL * 0x100000001ULL));
  k = mix(k ^ (b + 0xd6e8feb86659fd93ULL));
  return CounterRng(k);
}

// Each stream is a SplitMix64 sequence evaluated at position `index`.
CounterRng::Stream CounterRng::stream(std::uint64_t id) const {
  return Stream(mix(key_ ^ mix(id + 0x2545f4914f6cdd1dULL)));
}

std::uint64_t CounterRng::bits(std::uint64_t stream_id,
                               std::uint64_t index) const {
  return stream(stream_id).bits(index);
}

double CounterRng::uniform(std::uint64_t stream_id, std::uint64_t index) const {
  return stream(stream_id).uniform(index);
}

double CounterRng::normal(std::uint64_t stream_id, std::uint64_t index) const {
  return stream(stream_id).normal(index);
}

}  // namespace superpose
