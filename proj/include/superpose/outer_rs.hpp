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
#include <span>
#include <vector>

namespace superpose {

using gf_elem = std::uint32_t;

// GF(2^b) for 1 <= b <= 16 via log/antilog tables.
class GaloisField {
 public:
  explicit GaloisField(unsigned b);

  unsigned bits() const { return b_; }
  std::uint32_t order() const { return size_; }  // 2^b
  gf_elem add(gf_elem x, gf_elem y) const { return x ^ y; }
  gf_elem mul(gf_elem x, gf_elem y) const;
  gf_elem div(gf_elem x, gf_elem y) const;
  gf_elem inv(gf_elem x) const;
  gf_elem alpha_pow(std::int64_t e) const;  // alpha^e, any integer e

 private:
  unsigned b_;
  std::uint32_t size_;
  std::vector<gf_elem> exp_;
  std::vector<std::uint32_t> log_;
};

// Shortened Reed-Solomon code of length n <= 2^b - 1 and dimension k with
// generator prod_{i=0}^{d-2} (x - alpha^i).
class RsCode {
 public:
  RsCode(unsigned b, std::uint64_t n, std::uint64_t k);

  const GaloisField& field() const { return gf_; }
  std::uint64_t n() const { return n_; }
  std::uint64_t k() const { return k_; }
  std::uint64_t distance() const { return n_ - k_ + 1; }
  double rate() const { return static_cast<double>(k_) / static_cast<double>(n_); }
  const std::vector<gf_elem>& generator() const { return gen_; }

 private:
  GaloisField gf_;
  std::uint64_t n_, k_;
  std::vector<gf_elem> gen_;  // lowest degree first, monic
};

// Systematic: the first k symbols of the codeword are the message.
std::vector<gf_elem> rs_encode(std::span<const gf_elem> message, const RsCode& code);

struct RsDecodeResult {
  bool ok = false;
  std::vector<gf_elem> message;
  std::vector<gf_elem> codeword;
  std::uint64_t errors = 0;
  std::uint64_t erasures = 0;
};

// Errors-and-erasures decoding; succeeds whenever 2e + s <= d - 1.
// Failures beyond that are reported through `ok`, never thrown.
RsDecodeResult rs_decode(std::span<const gf_elem> received,
                         std::span<const std::uint8_t> erased, const RsCode& code);

struct CompositeRate {
  std::uint64_t k_rs = 0;
  double delta = 0.0;       // 1 - k_rs / L, smallest achievable >= delta_mis
  double outer_rate = 0.0;  // k_rs / L
  double total_rate = 0.0;  // outer_rate * R_inner
};

CompositeRate composite_rate(double inner_rate, double delta_mis, std::uint64_t L);

}  // namespace superpose
