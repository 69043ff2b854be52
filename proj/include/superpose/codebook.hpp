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
#include <string>
#include <string_view>
#include <vector>

#include "superpose/model.hpp"
#include "superpose/special.hpp"

namespace superpose {

enum class AllocationKind { constant, exponential, leveled };

std::string to_string(AllocationKind kind);
AllocationKind allocation_kind_from_string(std::string_view name);

struct PowerAllocation {
  AllocationKind kind = AllocationKind::constant;
  std::vector<double> power;    // P_(l), sums to P
  std::vector<double> weights;  // pi_(l) = P_(l) / P, sums to 1
  double l_pi = 0.0;            // 1 / min pi
  // 1 / max pi. This is the effective number of sections in the weighted
  // Bernoulli tail bounds and the largest pacing overshoot.
  double effective_sections = 0.0;
  double leveling_u = 0.0;
  double gamma = 0.0;

  std::uint64_t L() const { return weights.size(); }
  double min_weight() const { return 1.0 / l_pi; }
  double max_weight() const { return 1.0 / effective_sections; }
};

// Unnormalized section profiles, with l = 1..L:
//   constant     1
//   exponential  exp(-2 C (l-1) / L)
//   leveled      max(exp(-2 gamma (l-1) / L), u), 0 <= gamma <= C
PowerAllocation make_power_allocation(AllocationKind kind,
                                      const ChannelParams& channel,
                                      std::uint64_t L, double u = 0.0,
                                      double gamma = 0.0);

// n x N matrix of i.i.d. N(0,1) entries stored column-major. Entry (i, j)
// depends only on (seed, i, j), so any column can be regenerated alone.
class Dictionary {
 public:
  Dictionary(const CodeParams& code, std::uint64_t seed);

  std::uint64_t rows() const { return n_; }
  std::uint64_t cols() const { return N_; }
  std::uint64_t section_size() const { return M_; }
  std::uint64_t seed() const { return seed_; }
  // 1-based section of a 1-based column.
  std::uint64_t section(std::uint64_t column) const { return 1 + (column - 1) / M_; }

  std::span<const double> column(std::uint64_t j) const {
    return {data_.data() + j * n_, n_};
  }
  double at(std::uint64_t i, std::uint64_t j) const { return data_[j * n_ + i]; }

  static double entry(std::uint64_t seed, std::uint64_t i, std::uint64_t j);
  static void fill_column(std::uint64_t seed, std::uint64_t j,
                          std::span<double> out);

 private:
  std::uint64_t n_, N_, M_, seed_;
  std::vector<double> data_;
};

Dictionary generate_dictionary(const CodeParams& code, std::uint64_t seed);

// Binary export: uint32 n, uint32 N (little endian), then n*N float64
// little endian in row-major order.
void export_dictionary(const Dictionary& dict, const std::string& path);

// Selected index within each section, zero-based.
struct CoefficientVector {
  std::vector<std::uint64_t> index;

  std::uint64_t column(std::uint64_t section, std::uint64_t M) const {
    return section * M + index[section];
  }
};

// Bits are 0/1 bytes; each log2(M)-bit substring is read big-endian.
CoefficientVector encode(std::span<const std::uint8_t> bits,
                         const CodeParams& code);
std::vector<std::uint8_t> decode_bits(const CoefficientVector& beta,
                                      const CodeParams& code);
std::vector<std::uint8_t> bits_from_string(std::string_view s);
std::string bits_to_string(std::span<const std::uint8_t> bits);

// Codeword X beta.
std::vector<double> codeword(const Dictionary& dict,
                             const CoefficientVector& beta,
                             const PowerAllocation& alloc);

// Y = X beta + eps, eps i.i.d. N(0, sigma^2) drawn from noise_seed.
std::vector<double> transmit(const Dictionary& dict,
                             const CoefficientVector& beta,
                             const PowerAllocation& alloc,
                             const ChannelParams& channel,
                             std::uint64_t noise_seed);

void add_noise(std::span<double> y, const ChannelParams& channel,
               std::uint64_t noise_seed);

// Uniformly random message drawn from seed.
CoefficientVector random_message(const CodeParams& code, std::uint64_t seed);

}  // namespace superpose
