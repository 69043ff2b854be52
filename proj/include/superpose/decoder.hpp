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
#include <vector>

#include "superpose/codebook.hpp"
#include "superpose/model.hpp"
#include "superpose/special.hpp"

namespace superpose {

// Per-step plan consumed by the adaptive decoder. Index k-1 holds step k.
struct DecoderSchedule {
  double tau = 0.0;     // threshold sqrt(2 ln M) + a
  std::uint64_t m = 0;  // maximum number of steps
  std::vector<double> q1;         // pacing targets q_{1,k}
  std::vector<double> q;          // increments q_k
  std::vector<double> q_adj;      // q_k / (1 + f / q_k)
  std::vector<double> x;          // x_k = sum of q_adj up to k
  std::vector<double> s;          // s_k = 1 / (1 - x_{k-1} nu)
  std::vector<double> w;          // w_k = s_k - s_{k-1}, w_1 = 1
  std::vector<double> lambda_kk;  // sqrt(w_k / s_k)

  double f = 0.0;       // false-alarm budget rho * f_star
  double f_star = 0.0;  // (M - 1) * upper normal tail at tau
  double eta = 0.0;
  double rho = 1.0;
  double h = 0.0;
  double slack = 0.0;  // pacing overshoot allowance, the largest weight

  // lambda_{k',k} = sqrt(w_{k'} / s_k), both 1-based.
  double lambda(std::uint64_t k_prime, std::uint64_t k) const;
};

enum class SectionStatus { correct, error, erasure_multiple, erasure_none };
enum class StopReason { all_decoded, no_candidates, max_steps, degenerate };

std::string to_string(SectionStatus s);
std::string to_string(StopReason s);

struct StepTrace {
  std::uint64_t step = 0;
  double size1k = 0.0;
  double q_hat = 0.0;
  double f_hat = 0.0;
  std::uint64_t candidates = 0;
  std::uint64_t selected = 0;
};

struct DecodeOutcome {
  std::vector<SectionStatus> status;
  // Index within the section when exactly one term was selected, else -1.
  std::vector<std::int64_t> decided;
  std::vector<std::vector<std::uint64_t>> dec;  // columns chosen per step
  std::uint64_t errors = 0;
  std::uint64_t erasures = 0;
  double delta_err = 0.0;
  double delta_erase = 0.0;
  double delta_mis = 0.0;
  std::vector<double> q_hat;
  std::vector<double> f_hat;
  double delta_wght = 0.0;
  std::uint64_t steps_used = 0;
  StopReason stop = StopReason::max_steps;
  std::vector<StepTrace> trace;
  std::uint64_t work = 0;  // multiply-adds spent on inner products and fits
};

// Source of dictionary columns for the decoder. `project` receives the
// successive orthonormal directions G_k / |G_k| and fills out[j] = <X_j, e>
// for every active column j; `materialize` returns the full column X_j.
class ExplicitColumns {
 public:
  explicit ExplicitColumns(const Dictionary& dict) : dict_(dict) {}
  std::uint64_t rows() const { return dict_.rows(); }
  std::uint64_t cols() const { return dict_.cols(); }
  void project(std::span<const double> dir, std::span<const std::uint8_t> active,
               std::span<double> out);
  void materialize(std::uint64_t j, std::span<double> out);

 private:
  const Dictionary& dict_;
};

// Exact-in-distribution stand-in for a fresh Gaussian dictionary that never
// stores the unsent columns. Sent columns are explicit. An unsent column is
// independent of everything the decoder has seen except its own projections,
// so each projection onto a new orthonormal direction is a fresh N(0,1);
// when such a column is selected it is materialized as the sum of its past
// projections plus an independent Gaussian in the orthogonal complement.
class DeferredColumns {
 public:
  DeferredColumns(const CodeParams& code, const CoefficientVector& beta,
                  std::uint64_t dict_seed, std::uint64_t sample_seed);
  std::uint64_t rows() const { return n_; }
  std::uint64_t cols() const { return N_; }
  void project(std::span<const double> dir, std::span<const std::uint8_t> active,
               std::span<double> out);
  void materialize(std::uint64_t j, std::span<double> out);

  // X beta, plus noise unless `noisy` is false.
  std::vector<double> received(const PowerAllocation& alloc,
                               const ChannelParams& channel,
                               std::uint64_t noise_seed, bool noisy = true) const;

 private:
  bool is_sent(std::uint64_t j) const { return sent_slot_[j / M_] == j % M_; }

  std::uint64_t n_, N_, M_;
  std::vector<std::uint64_t> sent_slot_;
  std::vector<double> sent_;  // L x n, section-major
  std::vector<std::vector<double>> directions_;
  CounterRng proj_rng_, comp_rng_;
};

// Z_{1,j} = <X_j, Y> / |Y|.
std::vector<double> first_step_statistics(const Dictionary& dict,
                                          std::span<const double> y);

// -F minus its projections on the prior basis. Returns an empty vector when
// the component is degenerate (norm below 1e-10 sqrt(n)).
std::vector<double> orthogonal_component(
    const std::vector<std::vector<double>>& basis, std::span<const double> f);

// sqrt(1 - lambda^2) prev + lambda z.
std::vector<double> combined_statistic(std::span<const double> prev,
                                       std::span<const double> z,
                                       double lambda_kk);

// Candidates are taken in descending statistic order (ties: lower column
// first) while the accumulated weight stays within the target; selection
// stops at the first candidate that would overshoot.
std::vector<std::uint64_t> pace_select(std::span<const std::uint64_t> candidates,
                                       std::span<const double> zcomb,
                                       const PowerAllocation& alloc,
                                       std::uint64_t M, double target,
                                       double size_prev);

DecodeOutcome adaptive_decode(const Dictionary& dict, std::span<const double> y,
                              const DecoderSchedule& schedule,
                              const PowerAllocation& alloc);
DecodeOutcome adaptive_decode(DeferredColumns& source, std::span<const double> y,
                              const DecoderSchedule& schedule,
                              const PowerAllocation& alloc);

// Reference decoder: thresholds <X_j, R_k> / |R_k| on the residual,
// accepts everything above tau, no pacing.
DecodeOutcome residual_decode(const Dictionary& dict, std::span<const double> y,
                              double tau, std::uint64_t m,
                              const PowerAllocation& alloc);

// Fills the tally fields of an outcome from its decoded sets.
void tally_mistakes(DecodeOutcome& outcome, const CoefficientVector& truth,
                    const PowerAllocation& alloc, std::uint64_t M);

// CSV with columns step,size1k,qhat,fhat,candidates.
std::string trace_csv(const DecodeOutcome& outcome);

}  // namespace superpose
