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

#include "superpose/codebook.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <new>

#include "superpose/error.hpp"

namespace superpose {

std::string to_string(AllocationKind kind) {
  switch (kind) {
    case AllocationKind::constant: return "constant";
    case AllocationKind::exponential: return "exponential";
    case AllocationKind::leveled: return "leveled";
  }
  return "unknown";
}

AllocationKind allocation_kind_from_string(std::string_view name) {
  if (name == "constant") return AllocationKind::constant;
  if (name == "exponential") return AllocationKind::exponential;
  if (name == "leveled") return AllocationKind::leveled;
  throw DomainError("unknown power allocation kind '" + std::string(name) + "'");
}

PowerAllocation make_power_allocation(AllocationKind kind,
                                      const ChannelParams& channel,
                                      std::uint64_t L, double u, double gamma) {
  if (L < 1) throw DomainError("make_power_allocation: L must be at least 1");
  PowerAllocation a;
  a.kind = kind;
  std::vector<double> profile(L, 1.0);
  const double l = static_cast<double>(L);
  switch (kind) {
    case AllocationKind::constant:
      break;
    case AllocationKind::exponential:
      for (std::uint64_t i = 0; i < L; ++i)
        profile[i] = std::exp(-2.0 * channel.capacity_nats * i / l);
      break;
    case AllocationKind::leveled:
      if (!(gamma >= 0.0) || gamma > channel.capacity_nats * (1.0 + 1e-12))
        throw DomainError("make_power_allocation: gamma must lie in [0, C]");
      if (!(u >= 0.0) || !std::isfinite(u))
        throw DomainError("make_power_allocation: u must be non-negative");
      a.leveling_u = u;
      a.gamma = gamma;
      for (std::uint64_t i = 0; i < L; ++i)
        profile[i] = std::max(std::exp(-2.0 * gamma * i / l), u);
      break;
  }
  double total = 0.0;
  for (double v : profile) total += v;
  a.weights.resize(L);
  a.power.resize(L);
  for (std::uint64_t i = 0; i < L; ++i) {
    a.weights[i] = profile[i] / total;
    a.power[i] = channel.power * a.weights[i];
  }
  if (kind == AllocationKind::constant) {
    std::fill(a.weights.begin(), a.weights.end(), 1.0 / l);
    std::fill(a.power.begin(), a.power.end(), channel.power / l);
  }
  const auto [lo, hi] = std::minmax_element(a.weights.begin(), a.weights.end());
  a.l_pi = 1.0 / *lo;
  a.effective_sections = 1.0 / *hi;
  if (kind == AllocationKind::constant) a.l_pi = a.effective_sections = l;
  return a;
}

double Dictionary::entry(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  return CounterRng::derive(seed, stream_tag::dictionary).stream(j).normal(i);
}

void Dictionary::fill_column(std::uint64_t seed, std::uint64_t j,
                             std::span<double> out) {
  const auto s = CounterRng::derive(seed, stream_tag::dictionary).stream(j);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.normal(i);
}

Dictionary::Dictionary(const CodeParams& code, std::uint64_t seed)
    : n_(code.n), N_(code.N), M_(code.M), seed_(seed) {
  constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 29;  // 4 GiB
  if (n_ != 0 && N_ > kMaxEntries / n_)
    throw ResourceError("generate_dictionary: " + std::to_string(n_) + " x " +
                        std::to_string(N_) + " exceeds the memory budget");
  try {
    data_.resize(n_ * N_);
  } catch (const std::bad_alloc&) {
    throw ResourceError("generate_dictionary: allocation failed");
  }
  for (std::uint64_t j = 0; j < N_; ++j)
    fill_column(seed, j, {data_.data() + j * n_, n_});
}

Dictionary generate_dictionary(const CodeParams& code, std::uint64_t seed) {
  return Dictionary(code, seed);
}

namespace {

template <class T>
void put_le(std::ofstream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(buf, buf + sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

}  // namespace

void export_dictionary(const Dictionary& dict, const std::string& path) {
  if (dict.rows() > 0xffffffffULL || dict.cols() > 0xffffffffULL)
    throw DomainError("export_dictionary: dimensions exceed 32 bits");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("export_dictionary: cannot open " + path);
  put_le(out, static_cast<std::uint32_t>(dict.rows()));
  put_le(out, static_cast<std::uint32_t>(dict.cols()));
  for (std::uint64_t i = 0; i < dict.rows(); ++i)
    for (std::uint64_t j = 0; j < dict.cols(); ++j) put_le(out, dict.at(i, j));
  if (!out) throw IoError("export_dictionary: write failed for " + path);
}

CoefficientVector encode(std::span<const std::uint8_t> bits,
                         const CodeParams& code) {
  if (bits.size() != code.K)
    throw DomainError("encode: expected " + std::to_string(code.K) +
                      " bits, got " + std::to_string(bits.size()));
  CoefficientVector beta;
  beta.index.resize(code.L);
  std::size_t pos = 0;
  for (std::uint64_t l = 0; l < code.L; ++l) {
    std::uint64_t v = 0;
    for (unsigned b = 0; b < code.log2_M; ++b) {
      if (bits[pos] > 1) throw DomainError("encode: bits must be 0 or 1");
      v = (v << 1) | bits[pos++];
    }
    beta.index[l] = v;
  }
  return beta;
}

std::vector<std::uint8_t> decode_bits(const CoefficientVector& beta,
                                      const CodeParams& code) {
  if (beta.index.size() != code.L)
    throw DomainError("decode_bits: coefficient vector has wrong length");
  std::vector<std::uint8_t> bits;
  bits.reserve(code.K);
  for (std::uint64_t v : beta.index) {
    if (v >= code.M) throw DomainError("decode_bits: index out of range");
    for (int b = static_cast<int>(code.log2_M) - 1; b >= 0; --b)
      bits.push_back(static_cast<std::uint8_t>((v >> b) & 1u));
  }
  return bits;
}

std::vector<std::uint8_t> bits_from_string(std::string_view s) {
  std::vector<std::uint8_t> bits;
  for (char c : s) {
    if (c != '0' && c != '1')
      throw DomainError("bit strings may only contain '0' and '1'");
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return bits;
}

std::string bits_to_string(std::span<const std::uint8_t> bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

std::vector<double> codeword(const Dictionary& dict,
                             const CoefficientVector& beta,
                             const PowerAllocation& alloc) {
  if (beta.index.size() != alloc.L() ||
      alloc.L() * dict.section_size() != dict.cols())
    throw DomainError("codeword: dimensions are inconsistent");
  std::vector<double> c(dict.rows(), 0.0);
  for (std::uint64_t l = 0; l < alloc.L(); ++l) {
    const double amp = std::sqrt(alloc.power[l]);
    const auto x = dict.column(beta.column(l, dict.section_size()));
    for (std::uint64_t i = 0; i < c.size(); ++i) c[i] += amp * x[i];
  }
  return c;
}

void add_noise(std::span<double> y, const ChannelParams& channel,
               std::uint64_t noise_seed) {
  const double sigma = std::sqrt(channel.noise_variance);
  const auto s = CounterRng::derive(noise_seed, stream_tag::noise).stream(0);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += sigma * s.normal(i);
}

std::vector<double> transmit(const Dictionary& dict,
                             const CoefficientVector& beta,
                             const PowerAllocation& alloc,
                             const ChannelParams& channel,
                             std::uint64_t noise_seed) {
  auto y = codeword(dict, beta, alloc);
  add_noise(y, channel, noise_seed);
  return y;
}

CoefficientVector random_message(const CodeParams& code, std::uint64_t seed) {
  const auto s = CounterRng::derive(seed, stream_tag::message).stream(0);
  CoefficientVector beta;
  beta.index.resize(code.L);
  for (std::uint64_t l = 0; l < code.L; ++l)
    beta.index[l] = s.bits(l) & (code.M - 1);
  return beta;
}

}  // namespace superpose
