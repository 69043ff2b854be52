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

// Real AWGN channel normalized to noise variance 1 and power snr.
// Rates are in nats throughout; bits appear only at I/O boundaries.
struct ChannelParams {
  double power = 0.0;
  double noise_variance = 1.0;
  double snr = 0.0;
  double capacity_nats = 0.0;
  double nu = 0.0;  // P / (P + sigma^2)
  double r0_threshold_rate = 0.0;
  double c0 = 0.0;  // constant of the nearby measure, equal to capacity_nats

  double capacity_bits() const;
};

struct CodeParams {
  std::uint64_t L = 0;
  std::uint64_t M = 0;
  std::uint64_t N = 0;
  double requested_rate = 0.0;  // nats
  double rate = 0.0;            // realized L ln M / n, nats
  std::uint64_t n = 0;
  std::uint64_t K = 0;  // input bits
  unsigned log2_M = 0;

  double rate_bits() const;
  // Section (1-based) of a 1-based column index.
  std::uint64_t section(std::uint64_t column) const { return 1 + (column - 1) / M; }
};

ChannelParams derive_channel(double snr);

// n = ceil(L ln M / R); the realized rate is reported back.
CodeParams make_code(std::uint64_t L, std::uint64_t M, double rate_nats);

// (L/2)(1 - e^{-2C/L}).
double c_tilde(const ChannelParams& channel, std::uint64_t L);

double nats_to_bits(double nats);
double bits_to_nats(double bits);

}  // namespace superpose
