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
#include <optional>
#include <span>
#include <vector>

#include "superpose/codebook.hpp"
#include "superpose/decoder.hpp"
#include "superpose/model.hpp"

namespace superpose {

struct ThresholdParams {
  double a = 0.0;
  double tau = 0.0;      // sqrt(2 ln M) + a
  double delta_a = 0.0;  // a / sqrt(2 ln M)
};

ThresholdParams make_threshold(std::uint64_t M, double a);

// Everything the detection curve depends on.
struct CurveConfig {
  ChannelParams channel;
  PowerAllocation alloc;
  std::uint64_t M = 0;
  double rate = 0.0;  // nats
  double a = 0.0;
  double h = 0.0;
};

struct ShiftTerms {
  std::vector<double> c_jr;   // n pi_l nu, per section
  std::vector<double> c_jrh;  // (1 - h) c_jr
};

// Uses the real-valued n = L ln M / R, so the constant allocation gives
// exactly (R0 / R) 2 ln M.
ShiftTerms shift_terms(const ChannelParams& channel, const PowerAllocation& alloc,
                       double rate, double h, std::uint64_t M);

// g_L(x) = sum_l pi_l Phi(mu_l(x)), mu_l(x) = sqrt(C_{l,R,h} / (1 - x nu)) - tau.
// Sections sharing a weight are evaluated once.
class GCurve {
 public:
  explicit GCurve(const CurveConfig& cfg);

  double operator()(double x) const { return weighted(x); }
  double weighted(double x) const;
  // (1/L) sum_l Phi(mu_l(x)): expected fraction of sections detected.
  double unweighted(double x) const;
  double tau() const { return tau_; }
  double nu() const { return nu_; }
  std::uint64_t sections() const { return L_; }

 private:
  struct Group {
    double weight;  // total weight of the group
    double count;
    double root_shift;
  };
  double scale(double x) const;

  std::vector<Group> groups_;
  double tau_, nu_;
  std::uint64_t L_;
};

double g_L(double x, const CurveConfig& cfg);

// Integral approximation for the exponential allocation, evaluated by
// adaptive quadrature over z; uses C' = C_tilde (1 - h).
double g_integral(double x, const CurveConfig& cfg);
// Its derivative in integral form, (R/C') int_{z_x}^{z_max} (1+d_a+z/s)^2 phi.
double g_integral_derivative(double x, const CurveConfig& cfg);

struct GLow {
  double value = 0.0;
  double z_x = 0.0;
  double derivative = 0.0;
  double r = 0.0;        // R = C' / [(1+d_a)^2 (1 + r/ln M)]
  double delta_r = 0.0;  // (r - r0) / (ln M + r)
};

GLow g_low(double x, const CurveConfig& cfg);

struct GapResult {
  double gap = 0.0;
  double x_r = 0.0;
  double r0 = 0.0;
  double r1 = 0.0;
};

GapResult gap_and_xr(const ChannelParams& channel, std::uint64_t M, double r,
                     double a);

struct AccumulativeCheck {
  bool ok = false;
  double min_margin = 0.0;  // min over the grid of g(x) - x
  double worst_x = 0.0;
  std::uint64_t grid_points = 0;
};

// Samples g(x) - x >= gap on a uniform grid over [0, x_r].
template <class G>
AccumulativeCheck check_accumulative(const G& g, double x_r, double gap,
                                     std::uint64_t grid = 201) {
  AccumulativeCheck c;
  c.grid_points = grid;
  if (!(x_r >= 0.0)) {
    c.ok = false;
    c.min_margin = -1.0;
    return c;
  }
  c.min_margin = 1e300;
  for (std::uint64_t i = 0; i < grid; ++i) {
    const double x = x_r * static_cast<double>(i) / static_cast<double>(grid - 1);
    const double margin = g(x) - x;
    if (margin < c.min_margin) {
      c.min_margin = margin;
      c.worst_x = x;
    }
  }
  c.ok = c.min_margin >= gap;
  return c;
}

struct FStar {
  double exact = 0.0;
  double log_exact = 0.0;
  double bound = 0.0;
};

FStar f_star(double tau, std::uint64_t M);

enum class StopRule {
  // until_xr: stop at the first k with x_{k-1} > x_r, preconditions checked.
  until_xr,
  // Keep stepping while the next target rises by at least 2f + slack.
  greedy,
};

struct ScheduleOptions {
  double eta = 0.0;
  double rho = 1.0;
  double slack = 0.0;  // largest section weight; 0 in the large-L idealization
  StopRule rule = StopRule::greedy;
  double x_r = 0.0;  // until_xr only
  double gap = 0.0;  // until_xr only
  std::uint64_t max_steps = 400;
};

DecoderSchedule build_schedule(const GCurve& g, std::uint64_t M, double h,
                               const ScheduleOptions& opt);
DecoderSchedule build_schedule(const CurveConfig& cfg, const ScheduleOptions& opt);

struct Theorem1 {
  double total = 0.0;
  double term_eta = 0.0;
  double term_rho = 0.0;
  double term_h = 0.0;
  double log_total = 0.0;
};

// m e^{-2 L eta^2 + m c0} + m e^{-L f D(rho)/rho} + m e^{-(n-m+1) h^2/2},
// with L the effective section count of the weighted tail bounds.
Theorem1 theorem1_bound(double effective_sections, double eta, double rho,
                        double f, std::uint64_t m, double n, double h, double c0);

struct MistakeBound {
  double delta_wght = 0.0;
  double delta_mis = 0.0;
};

// delta_wght = (1 - x_r) - (gap - eta)/2, delta_mis = snr/(2C) delta_wght.
MistakeBound delta_mis_bound(double x_r, double gap, double eta,
                             const ChannelParams& channel);
// Same with an explicit conversion factor (L_pi / L for a general allocation).
MistakeBound delta_mis_bound(double x_r, double gap, double eta, double factor);

struct ParameterSelection {
  double a = 0.0;
  double a_closed_form = 0.0;
  double a_tilde = 0.0;
  double delta_a = 0.0;
  double f_star = 0.0;
  double gap = 0.0;
  double r0 = 0.0;
  double r1 = 0.0;
  double r_star = 0.0;
  double c_star = 0.0;  // nats
  double drop_star = 0.0;         // C / C* - 1
  double drop_star_approx = 0.0;  // presentation approximation
  int iterations = 0;
};

ParameterSelection select_parameters(const ChannelParams& channel, std::uint64_t M);

struct RateBoundReport {
  double snr = 0.0;
  std::uint64_t M = 0;
  std::uint64_t L = 0;
  double kappa = 0.0;
  double rate = 0.0;  // nats
  double c_star = 0.0;
  double drop_star = 0.0;
  double Delta_star = 0.0;
  double gap = 0.0;
  double x_r = 0.0;
  double r = 0.0;
  double r0 = 0.0;
  double r1 = 0.0;
  double a = 0.0;
  double eta = 0.0;
  double rho = 0.0;
  double h = 0.0;
  double f = 0.0;
  double f_star = 0.0;
  double epsilon_L = 0.0;
  double effective_sections = 0.0;
  std::uint64_t m = 0;
  double n = 0.0;
  double delta_wght = 0.0;
  double delta_mis = 0.0;      // direct evaluation
  double delta_mis_eq8 = 0.0;  // (3 kappa + 5)/(8 C ln M) + delta_M/(2C)
  double delta_M = 0.0;
  Theorem1 p_e;                // direct three-term evaluation
  double p_e_explicit = 0.0;   // kappa_1 exp(-kappa_2 L min{...})
  double kappa1 = 0.0, kappa2 = 0.0, kappa3 = 0.0, kappa4 = 0.0;
};

RateBoundReport proposition1_report(const ChannelParams& channel, std::uint64_t M,
                                    std::uint64_t L, double kappa);

struct BernoulliTail {
  double mean = 0.0;         // r* = sum alpha_j r_j
  double n_alpha = 0.0;      // 1 / max alpha
  double lower_bound = 1.0;  // P(r_hat < t) <= e^{-N D(t||r*)} when t < r*
  double upper_bound = 1.0;  // P(r_hat > t) <= e^{-N D(t||r*)} when t > r*
};

BernoulliTail bernoulli_tail(std::span<const double> alpha,
                             std::span<const double> r, double threshold);

// Bernoulli relative entropy D(p || q).
double bernoulli_divergence(double p, double q);

struct EntropyChain {
  double d_ber = 0.0;
  double d_poi = 0.0;
  double hellinger = 0.0;  // 2 (sqrt p - sqrt p*)^2
  double quadratic = 0.0;  // (p - p*)^2 / (2p)
};

EntropyChain entropy_chain(double p, double p_star);

// Design search over (a, u, gamma) for a given code. Finite mode chooses
// eta, rho and h so that the three-term bound meets pe_target; large-L mode
// idealizes eta = h = 0 and rho = 1 but keeps the pacing slack of the code.
enum class BoundMode { finite, large_L };

struct DesignPoint {
  AllocationKind kind = AllocationKind::leveled;
  double a = 0.0;
  double u = 0.0;
  double gamma = 0.0;
};

struct DesignEvaluation {
  DesignPoint point;
  bool feasible = false;
  DecoderSchedule schedule;
  double f_star = 0.0;
  Theorem1 p_e;
  double detection_weighted = 0.0;    // g_L(x_{m-1})
  double detection_unweighted = 0.0;  // (1/L) sum Phi(mu_l(x_{m-1}))
  double failed_detection = 0.0;      // 1 - detection_unweighted
  double false_alarm = 0.0;           // m f
  double objective = 0.0;             // failed_detection + false_alarm
  double delta_wght = 0.0;  // 1 - q_{1,m} + 2 m f + m slack
  double delta_mis = 0.0;   // (L_pi / L) delta_wght
  double l_pi = 0.0;
  double effective_sections = 0.0;
};

// User-fixed eta, rho and h. With these the design is feasible whenever a
// schedule exists; p_e is reported but not constrained.
struct FixedTargets {
  double eta = 0.0;
  double rho = 1.0;
  double h = 0.0;
};

struct DesignOptions {
  BoundMode mode = BoundMode::finite;
  double pe_target = 1e-3;
  // Share of pe_target given to the eta term, the rho term, the h term.
  double share_eta = 1.0 / 3.0;
  double share_rho = 1.0 / 3.0;
  std::uint64_t max_steps = 400;
  // When set, replaces the pe_target-driven choice of eta, rho and h.
  std::optional<FixedTargets> fixed;
};

DesignEvaluation evaluate_design(const ChannelParams& channel,
                                 const CodeParams& code, const DesignPoint& p,
                                 const DesignOptions& opt,
                                 std::uint64_t curve_sections = 0);

DesignEvaluation evaluate_design(const ChannelParams& channel,
                                 const CodeParams& code, const DesignPoint& p,
                                 const FixedTargets& targets,
                                 std::uint64_t max_steps = 400);

struct SearchGrid {
  std::vector<AllocationKind> kinds{AllocationKind::leveled};
  std::uint64_t points = 20;  // per axis on the coarse level
  double a_min = 0.0;
  double a_max = 3.0;
  int refinements = 2;
  // Sections used for the detection curve while searching (0 = all). The
  // winner is always re-evaluated with every section.
  std::uint64_t surrogate_sections = 0;
};

struct SearchResult {
  DesignEvaluation best;
  std::uint64_t evaluations = 0;
  std::uint64_t grid_points = 0;
};

SearchResult search_design(const ChannelParams& channel, const CodeParams& code,
                           const DesignOptions& opt, const SearchGrid& grid);

}  // namespace superpose
