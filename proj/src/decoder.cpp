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

#include "superpose/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "superpose/error.hpp"

namespace superpose {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double degenerate_tolerance(std::uint64_t n) {
  return 1e-10 * std::sqrt(static_cast<double>(n));
}

}  // namespace

double DecoderSchedule::lambda(std::uint64_t k_prime, std::uint64_t k) const {
  if (k_prime < 1 || k_prime > k || k > s.size())
    throw DomainError("lambda: indices out of range");
  return std::sqrt(w[k_prime - 1] / s[k - 1]);
}

std::string to_string(SectionStatus s) {
  switch (s) {
    case SectionStatus::correct: return "correct";
    case SectionStatus::error: return "error";
    case SectionStatus::erasure_multiple: return "erasure-multiple";
    case SectionStatus::erasure_none: return "erasure-none";
  }
  return "unknown";
}

std::string to_string(StopReason s) {
  switch (s) {
    case StopReason::all_decoded: return "all-decoded";
    case StopReason::no_candidates: return "no-candidates";
    case StopReason::max_steps: return "max-steps";
    case StopReason::degenerate: return "degenerate";
  }
  return "unknown";
}

void ExplicitColumns::project(std::span<const double> dir,
                              std::span<const std::uint8_t> active,
                              std::span<double> out) {
  for (std::uint64_t j = 0; j < dict_.cols(); ++j)
    if (active[j]) out[j] = dot(dict_.column(j), dir);
}

void ExplicitColumns::materialize(std::uint64_t j, std::span<double> out) {
  const auto c = dict_.column(j);
  std::copy(c.begin(), c.end(), out.begin());
}

DeferredColumns::DeferredColumns(const CodeParams& code,
                                 const CoefficientVector& beta,
                                 std::uint64_t dict_seed,
                                 std::uint64_t sample_seed)
    : n_(code.n),
      N_(code.N),
      M_(code.M),
      sent_slot_(beta.index),
      proj_rng_(CounterRng::derive(sample_seed, stream_tag::deferred_projection)),
      comp_rng_(CounterRng::derive(sample_seed, stream_tag::deferred_complement)) {
  if (beta.index.size() != code.L)
    throw DomainError("DeferredColumns: coefficient vector has wrong length");
  sent_.resize(code.L * n_);
  for (std::uint64_t l = 0; l < code.L; ++l)
    Dictionary::fill_column(dict_seed, beta.column(l, M_),
                            {sent_.data() + l * n_, n_});
}

void DeferredColumns::project(std::span<const double> dir,
                              std::span<const std::uint8_t> active,
                              std::span<double> out) {
  directions_.emplace_back(dir.begin(), dir.end());
  const auto s = proj_rng_.stream(directions_.size());
  for (std::uint64_t j = 0; j < N_; ++j) {
    if (!active[j]) continue;
    if (is_sent(j))
      out[j] = dot({sent_.data() + (j / M_) * n_, n_}, dir);
    else
      out[j] = s.normal(j);
  }
}

void DeferredColumns::materialize(std::uint64_t j, std::span<double> out) {
  if (is_sent(j)) {
    const double* c = sent_.data() + (j / M_) * n_;
    std::copy(c, c + n_, out.begin());
    return;
  }
  const auto w = comp_rng_.stream(j);
  for (std::uint64_t i = 0; i < n_; ++i) out[i] = w.normal(i);
  // Replace the components along past directions by the projections the
  // decoder already observed.
  for (std::size_t t = 0; t < directions_.size(); ++t) {
    const auto& e = directions_[t];
    const double shift = proj_rng_.stream(t + 1).normal(j) - dot(e, out);
    for (std::uint64_t i = 0; i < n_; ++i) out[i] += shift * e[i];
  }
}

std::vector<double> DeferredColumns::received(const PowerAllocation& alloc,
                                              const ChannelParams& channel,
                                              std::uint64_t noise_seed,
                                              bool noisy) const {
  std::vector<double> y(n_, 0.0);
  for (std::uint64_t l = 0; l < alloc.L(); ++l) {
    const double amp = std::sqrt(alloc.power[l]);
    const double* c = sent_.data() + l * n_;
    for (std::uint64_t i = 0; i < n_; ++i) y[i] += amp * c[i];
  }
  if (noisy) add_noise(y, channel, noise_seed);
  return y;
}

std::vector<double> first_step_statistics(const Dictionary& dict,
                                          std::span<const double> y) {
  if (y.size() != dict.rows())
    throw DomainError("first_step_statistics: Y has wrong length");
  const double ny = norm(y);
  if (!(ny > 0.0)) throw DomainError("first_step_statistics: Y is zero");
  std::vector<double> z(dict.cols());
  for (std::uint64_t j = 0; j < dict.cols(); ++j)
    z[j] = dot(dict.column(j), y) / ny;
  return z;
}

std::vector<double> orthogonal_component(
    const std::vector<std::vector<double>>& basis, std::span<const double> f) {
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = -f[i];
  // Two passes of classical Gram-Schmidt keep the basis orthogonal to
  // working precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& e : basis) {
      const double ne = norm(e);
      const double c = dot(e, g) / (ne * ne);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= c * e[i];
    }
  }
  if (norm(g) <= degenerate_tolerance(f.size())) return {};
  return g;
}

std::vector<double> combined_statistic(std::span<const double> prev,
                                       std::span<const double> z,
                                       double lambda_kk) {
  if (!(lambda_kk > 0.0 && lambda_kk <= 1.0))
    throw DomainError("combined_statistic: lambda must lie in (0, 1]");
  if (prev.size() != z.size())
    throw DomainError("combined_statistic: length mismatch");
  const double keep = std::sqrt(std::max(0.0, 1.0 - lambda_kk * lambda_kk));
  std::vector<double> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    out[j] = keep * prev[j] + lambda_kk * z[j];
  return out;
}

std::vector<std::uint64_t> pace_select(std::span<const std::uint64_t> candidates,
                                       std::span<const double> zcomb,
                                       const PowerAllocation& alloc,
                                       std::uint64_t M, double target,
                                       double size_prev) {
  std::vector<std::uint64_t> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    if (zcomb[a] != zcomb[b]) return zcomb[a] > zcomb[b];
    return a < b;
  });
  constexpr double kSlack = 1e-12;
  std::vector<std::uint64_t> chosen;
  double size = size_prev;
  for (std::uint64_t j : order) {
    const double pi = alloc.weights[j / M];
    if (size + pi > target + kSlack) break;
    size += pi;
    chosen.push_back(j);
  }
  return chosen;
}

namespace {

template <class Source>
DecodeOutcome run_adaptive(Source& src, std::span<const double> y,
                           const DecoderSchedule& schedule,
                           const PowerAllocation& alloc) {
  const std::uint64_t n = src.rows();
  const std::uint64_t N = src.cols();
  const std::uint64_t L = alloc.L();
  if (y.size() != n || L == 0 || N % L != 0)
    throw DomainError("adaptive_decode: dimensions are inconsistent");
  if (schedule.m == 0 || schedule.q1.size() < schedule.m ||
      schedule.lambda_kk.size() < schedule.m)
    throw DomainError("adaptive_decode: schedule is incomplete");
  const std::uint64_t M = N / L;

  DecodeOutcome out;
  std::vector<std::uint8_t> active(N, 1);
  std::vector<double> z(N, 0.0), zcomb(N, 0.0);
  std::vector<std::vector<double>> basis;
  std::vector<double> f(n), col(n);
  double size = 0.0;
  std::uint64_t decoded = 0;

  const double ny = norm(y);
  if (ny <= degenerate_tolerance(n))
    throw DomainError("adaptive_decode: received vector is zero");

  for (std::uint64_t k = 1; k <= schedule.m; ++k) {
    std::vector<double> g;
    if (k == 1) {
      g.assign(y.begin(), y.end());
    } else if (!out.dec.back().empty()) {
      std::fill(f.begin(), f.end(), 0.0);
      for (std::uint64_t j : out.dec.back()) {
        src.materialize(j, col);
        const double amp = std::sqrt(alloc.power[j / M]);
        for (std::uint64_t i = 0; i < n; ++i) f[i] += amp * col[i];
        out.work += n;
      }
      g = orthogonal_component(basis, f);
      out.work += 2 * n * basis.size();
      if (g.empty()) {
        out.stop = StopReason::degenerate;
        break;
      }
    }
    // When the previous step selected nothing there is no new fit, so the
    // combined statistics carry over and only the pacing target advances.
    if (!g.empty()) {
      const double ng = norm(g);
      for (double& v : g) v /= ng;
      std::uint64_t live = 0;
      for (auto a : active) live += a;
      src.project(g, active, z);
      out.work += n * live;
      const double lam = k == 1 ? 1.0 : schedule.lambda_kk[k - 1];
      const double keep = std::sqrt(std::max(0.0, 1.0 - lam * lam));
      for (std::uint64_t j = 0; j < N; ++j)
        if (active[j]) zcomb[j] = k == 1 ? z[j] : keep * zcomb[j] + lam * z[j];
      basis.push_back(std::move(g));
    }

    std::vector<std::uint64_t> candidates;
    for (std::uint64_t j = 0; j < N; ++j)
      if (active[j] && zcomb[j] >= schedule.tau) candidates.push_back(j);

    StepTrace t;
    t.step = k;
    t.candidates = candidates.size();
    if (candidates.empty()) {
      t.size1k = size;
      out.trace.push_back(t);
      out.dec.emplace_back();
      out.steps_used = k;
      out.stop = StopReason::no_candidates;
      break;
    }
    auto chosen = pace_select(candidates, zcomb, alloc, M, schedule.q1[k - 1], size);
    for (std::uint64_t j : chosen) {
      active[j] = 0;
      size += alloc.weights[j / M];
    }
    decoded += chosen.size();
    t.size1k = size;
    t.selected = chosen.size();
    out.trace.push_back(t);
    out.dec.push_back(std::move(chosen));
    out.steps_used = k;
    if (decoded >= L) {
      out.stop = StopReason::all_decoded;
      break;
    }
    if (k == schedule.m) out.stop = StopReason::max_steps;
  }
  return out;
}

}  // namespace

DecodeOutcome adaptive_decode(const Dictionary& dict, std::span<const double> y,
                              const DecoderSchedule& schedule,
                              const PowerAllocation& alloc) {
  ExplicitColumns src(dict);
  return run_adaptive(src, y, schedule, alloc);
}

DecodeOutcome adaptive_decode(DeferredColumns& source, std::span<const double> y,
                              const DecoderSchedule& schedule,
                              const PowerAllocation& alloc) {
  return run_adaptive(source, y, schedule, alloc);
}

DecodeOutcome residual_decode(const Dictionary& dict, std::span<const double> y,
                              double tau, std::uint64_t m,
                              const PowerAllocation& alloc) {
  const std::uint64_t n = dict.rows(), N = dict.cols(), L = alloc.L();
  if (m < 1) throw DomainError("residual_decode: m must be at least 1");
  if (y.size() != n || N != L * dict.section_size())
    throw DomainError("residual_decode: dimensions are inconsistent");
  const std::uint64_t M = dict.section_size();
  DecodeOutcome out;
  std::vector<std::uint8_t> active(N, 1);
  std::vector<double> r(y.begin(), y.end());
  std::uint64_t decoded = 0;
  double size = 0.0;
  for (std::uint64_t k = 1; k <= m; ++k) {
    const double nr = norm(r);
    if (nr <= degenerate_tolerance(n)) {
      out.stop = StopReason::degenerate;
      break;
    }
    std::vector<std::uint64_t> chosen;
    std::uint64_t live = 0;
    for (std::uint64_t j = 0; j < N; ++j) {
      if (!active[j]) continue;
      ++live;
      if (dot(dict.column(j), r) / nr >= tau) chosen.push_back(j);
    }
    out.work += n * live;
    StepTrace t;
    t.step = k;
    t.candidates = chosen.size();
    t.selected = chosen.size();
    out.steps_used = k;
    if (chosen.empty()) {
      t.size1k = size;
      out.trace.push_back(t);
      out.dec.emplace_back();
      out.stop = StopReason::no_candidates;
      break;
    }
    for (std::uint64_t j : chosen) {
      active[j] = 0;
      size += alloc.weights[j / M];
      const double amp = std::sqrt(alloc.power[j / M]);
      const auto x = dict.column(j);
      for (std::uint64_t i = 0; i < n; ++i) r[i] -= amp * x[i];
      out.work += n;
    }
    decoded += chosen.size();
    t.size1k = size;
    out.trace.push_back(t);
    out.dec.push_back(std::move(chosen));
    if (decoded >= L) {
      out.stop = StopReason::all_decoded;
      break;
    }
    if (k == m) out.stop = StopReason::max_steps;
  }
  return out;
}

void tally_mistakes(DecodeOutcome& out, const CoefficientVector& truth,
                    const PowerAllocation& alloc, std::uint64_t M) {
  const std::uint64_t L = alloc.L();
  if (truth.index.size() != L)
    throw DomainError("tally_mistakes: truth has wrong length");
  std::vector<std::uint64_t> count(L, 0);
  std::vector<std::int64_t> last(L, -1);
  out.q_hat.assign(out.dec.size(), 0.0);
  out.f_hat.assign(out.dec.size(), 0.0);
  for (std::size_t k = 0; k < out.dec.size(); ++k) {
    for (std::uint64_t j : out.dec[k]) {
      const std::uint64_t l = j / M;
      ++count[l];
      last[l] = static_cast<std::int64_t>(j % M);
      if (j % M == truth.index[l])
        out.q_hat[k] += alloc.weights[l];
      else
        out.f_hat[k] += alloc.weights[l];
    }
    if (k < out.trace.size()) {
      out.trace[k].q_hat = out.q_hat[k];
      out.trace[k].f_hat = out.f_hat[k];
    }
  }
  out.status.assign(L, SectionStatus::erasure_none);
  out.decided.assign(L, -1);
  out.errors = out.erasures = 0;
  for (std::uint64_t l = 0; l < L; ++l) {
    if (count[l] == 0) {
      out.status[l] = SectionStatus::erasure_none;
      ++out.erasures;
    } else if (count[l] >= 2) {
      out.status[l] = SectionStatus::erasure_multiple;
      ++out.erasures;
    } else {
      out.decided[l] = last[l];
      if (static_cast<std::uint64_t>(last[l]) == truth.index[l]) {
        out.status[l] = SectionStatus::correct;
      } else {
        out.status[l] = SectionStatus::error;
        ++out.errors;
      }
    }
  }
  const double l = static_cast<double>(L);
  out.delta_err = out.errors / l;
  out.delta_erase = out.erasures / l;
  out.delta_mis = 2.0 * out.delta_err + out.delta_erase;
  const double sq = std::accumulate(out.q_hat.begin(), out.q_hat.end(), 0.0);
  const double sf = std::accumulate(out.f_hat.begin(), out.f_hat.end(), 0.0);
  out.delta_wght = (1.0 - sq) + sf;
}

std::string trace_csv(const DecodeOutcome& outcome) {
  std::ostringstream os;
  os.precision(17);
  os << "step,size1k,qhat,fhat,candidates\n";
  for (const auto& t : outcome.trace)
    os << t.step << ',' << t.size1k << ',' << t.q_hat << ',' << t.f_hat << ','
       << t.candidates << '\n';
  return os.str();
}

}  // namespace superpose
