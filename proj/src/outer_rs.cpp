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

#include "superpose/outer_rs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superpose/error.hpp"

namespace superpose {

namespace {

constexpr std::uint32_t kPrimitive[17] = {
    0,      0x3,    0x7,    0xB,    0x13,   0x25,   0x43,   0x89,   0x11D,
    0x211,  0x409,  0x805,  0x1053, 0x201B, 0x4443, 0x8003, 0x1100B};

using Poly = std::vector<gf_elem>;  // lowest degree first

gf_elem poly_eval(const GaloisField& gf, const Poly& p, gf_elem x) {
  gf_elem y = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) y = gf.add(gf.mul(y, x), *it);
  return y;
}

Poly poly_mul(const GaloisField& gf, const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] ^= gf.mul(a[i], b[j]);
  return c;
}

}  // namespace

GaloisField::GaloisField(unsigned b) : b_(b) {
  if (b < 1 || b > 16) throw DomainError("GaloisField: b must lie in [1, 16]");
  size_ = 1u << b;
  const std::uint32_t q = size_ - 1;
  exp_.assign(2 * static_cast<std::size_t>(q) + 1, 0);
  log_.assign(size_, 0);
  std::uint32_t x = 1;
  for (std::uint32_t i = 0; i < q; ++i) {
    if (i > 0 && x == 1) throw DomainError("GaloisField: polynomial is not primitive");
    exp_[i] = x;
    log_[x] = i;
    x <<= 1;
    if (x & size_) x ^= kPrimitive[b];
  }
  for (std::uint32_t i = q; i < exp_.size(); ++i) exp_[i] = exp_[i - q];
}

gf_elem GaloisField::mul(gf_elem x, gf_elem y) const {
  if (x == 0 || y == 0) return 0;
  return exp_[log_[x] + log_[y]];
}

gf_elem GaloisField::inv(gf_elem x) const {
  if (x == 0) throw DomainError("GaloisField: zero has no inverse");
  const std::uint32_t q = size_ - 1;
  return exp_[(q - log_[x]) % q];
}

gf_elem GaloisField::div(gf_elem x, gf_elem y) const { return mul(x, inv(y)); }

gf_elem GaloisField::alpha_pow(std::int64_t e) const {
  const std::int64_t q = size_ - 1;
  return exp_[static_cast<std::size_t>(((e % q) + q) % q)];
}

RsCode::RsCode(unsigned b, std::uint64_t n, std::uint64_t k) : gf_(b), n_(n), k_(k) {
  if (n < 1 || n > gf_.order() - 1)
    throw DomainError("RsCode: length " + std::to_string(n) + " needs 1 <= n <= 2^b - 1 = " +
                      std::to_string(gf_.order() - 1));
  if (k < 1 || k > n) throw DomainError("RsCode: dimension must lie in [1, n]");
  gen_ = {1};
  for (std::uint64_t i = 0; i + 1 < distance(); ++i)
    gen_ = poly_mul(gf_, gen_, {gf_.alpha_pow(static_cast<std::int64_t>(i)), 1});
}

std::vector<gf_elem> rs_encode(std::span<const gf_elem> message, const RsCode& code) {
  const auto& gf = code.field();
  if (message.size() != code.k())
    throw DomainError("rs_encode: message must have k symbols");
  for (auto v : message)
    if (v >= gf.order()) throw DomainError("rs_encode: symbol outside the field");
  const std::uint64_t p = code.n() - code.k();
  // Codeword index i carries the coefficient of x^{n-1-i}. The parity is
  // m(x) x^p mod g(x), computed by long division.
  std::vector<gf_elem> rem(p, 0);  // rem[j] is the coefficient of x^{p-1-j}
  const auto& g = code.generator();
  for (gf_elem m : message) {
    const gf_elem fb = gf.add(m, p ? rem[0] : 0);
    for (std::uint64_t j = 0; j + 1 < p; ++j)
      rem[j] = gf.add(rem[j + 1], gf.mul(fb, g[p - 1 - j]));
    if (p) rem[p - 1] = gf.mul(fb, g[0]);
  }
  std::vector<gf_elem> c(message.begin(), message.end());
  c.insert(c.end(), rem.begin(), rem.end());
  return c;
}

RsDecodeResult rs_decode(std::span<const gf_elem> received,
                         std::span<const std::uint8_t> erased, const RsCode& code) {
  const auto& gf = code.field();
  const std::uint64_t n = code.n();
  const std::uint64_t two_t = code.distance() - 1;
  if (received.size() != n || erased.size() != n)
    throw DomainError("rs_decode: received word must have n symbols");
  RsDecodeResult res;
  std::vector<gf_elem> r(received.begin(), received.end());
  std::vector<std::uint64_t> erasure_pos;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (r[i] >= gf.order()) throw DomainError("rs_decode: symbol outside the field");
    if (erased[i]) {
      erasure_pos.push_back(i);
      r[i] = 0;
    }
  }
  const std::uint64_t s = erasure_pos.size();
  res.erasures = s;
  if (s > two_t) return res;
  const auto locator = [&](std::uint64_t i) {
    return gf.alpha_pow(static_cast<std::int64_t>(n - 1 - i));
  };

  Poly synd(two_t, 0);
  bool clean = true;
  for (std::uint64_t j = 0; j < two_t; ++j) {
    gf_elem v = 0;
    const gf_elem a = gf.alpha_pow(static_cast<std::int64_t>(j));
    for (std::uint64_t i = 0; i < n; ++i) v = gf.add(gf.mul(v, a), r[i]);
    synd[j] = v;
    clean = clean && v == 0;
  }
  if (clean) {
    res.ok = true;
    res.codeword = r;
    res.message.assign(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(code.k()));
    return res;
  }

  // Berlekamp-Massey started from the erasure locator.
  Poly gamma{1};
  for (auto i : erasure_pos) gamma = poly_mul(gf, gamma, {1, locator(i)});
  Poly lambda = gamma, B = gamma;
  std::uint64_t L = s;
  for (std::uint64_t rr = s + 1; rr <= two_t; ++rr) {
    gf_elem delta = 0;
    for (std::uint64_t j = 0; j < lambda.size() && j < rr; ++j)
      delta = gf.add(delta, gf.mul(lambda[j], synd[rr - 1 - j]));
    Poly xB(B.size() + 1, 0);
    std::copy(B.begin(), B.end(), xB.begin() + 1);
    if (delta == 0) {
      B = std::move(xB);
      continue;
    }
    Poly next(std::max(lambda.size(), xB.size()), 0);
    for (std::size_t j = 0; j < lambda.size(); ++j) next[j] = lambda[j];
    for (std::size_t j = 0; j < xB.size(); ++j) next[j] = gf.add(next[j], gf.mul(delta, xB[j]));
    if (2 * L <= rr + s - 1) {
      const gf_elem dinv = gf.inv(delta);
      B.assign(lambda.size(), 0);
      for (std::size_t j = 0; j < lambda.size(); ++j) B[j] = gf.mul(dinv, lambda[j]);
      L = rr + s - L;
    } else {
      B = std::move(xB);
    }
    lambda = std::move(next);
  }
  while (lambda.size() > 1 && lambda.back() == 0) lambda.pop_back();
  const std::uint64_t deg = lambda.size() - 1;
  if (deg != L || L < s || 2 * (L - s) + s > two_t) return res;

  Poly omega = poly_mul(gf, synd, lambda);
  omega.resize(two_t);
  Poly dlambda(lambda.size() > 1 ? lambda.size() - 1 : 1, 0);
  for (std::size_t j = 1; j < lambda.size(); j += 2) dlambda[j - 1] = lambda[j];

  std::uint64_t roots = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const gf_elem X = locator(i);
    const gf_elem xinv = gf.inv(X);
    if (poly_eval(gf, lambda, xinv) != 0) continue;
    ++roots;
    const gf_elem den = poly_eval(gf, dlambda, xinv);
    if (den == 0) return res;
    const gf_elem e = gf.div(gf.mul(X, poly_eval(gf, omega, xinv)), den);
    if (e != 0 && !erased[i]) ++res.errors;
    r[i] = gf.add(r[i], e);
  }
  if (roots != deg) return res;
  for (std::uint64_t j = 0; j < two_t; ++j) {
    gf_elem v = 0;
    const gf_elem a = gf.alpha_pow(static_cast<std::int64_t>(j));
    for (std::uint64_t i = 0; i < n; ++i) v = gf.add(gf.mul(v, a), r[i]);
    if (v != 0) return res;
  }
  res.ok = true;
  res.codeword = r;
  res.message.assign(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(code.k()));
  return res;
}

CompositeRate composite_rate(double inner_rate, double delta_mis, std::uint64_t L) {
  if (!(delta_mis >= 0.0 && delta_mis < 1.0))
    throw DomainError("composite_rate: delta_mis must lie in [0, 1)");
  if (L < 1) throw DomainError("composite_rate: L must be at least 1");
  CompositeRate c;
  const double l = static_cast<double>(L);
  c.k_rs = static_cast<std::uint64_t>(std::floor(l * (1.0 - delta_mis) + 1e-9));
  c.outer_rate = static_cast<double>(c.k_rs) / l;
  c.delta = 1.0 - c.outer_rate;
  c.total_rate = c.outer_rate * inner_rate;
  return c;
}

}  // namespace superpose
