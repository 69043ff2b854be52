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

#include "superpose/analysis.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "superpose/error.hpp"
#include "superpose/special.hpp"

namespace superpose {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_m(std::uint64_t M) { return std::log(static_cast<double>(M)); }

double safe_exp(double v) { return v > 709.0 ? kInf : std::exp(v); }

void check_x(double x, double nu) {
  if (!(x >= -1e-12 && x <= 1.0 + 1e-12) || x * nu >= 1.0)
    throw DomainError("detection curve: x must lie in [0, 1] with x nu < 1");
}

double integrate(const auto& f, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, lo, hi, 20, 1e-14);
}

struct IntegralSetup {
  double nu, s, a, delta_a, c_prime, rate, u_x;
};

IntegralSetup integral_setup(double x, const CurveConfig& cfg) {
  if (cfg.alloc.kind != AllocationKind::exponential)
    throw DomainError("integral approximation requires the exponential allocation");
  check_x(x, cfg.channel.nu);
  IntegralSetup st;
  st.nu = cfg.channel.nu;
  st.s = std::sqrt(2.0 * log_m(cfg.M));
  st.a = cfg.a;
  st.delta_a = cfg.a / st.s;
  st.c_prime = c_tilde(cfg.channel, cfg.alloc.L()) * (1.0 - cfg.h);
  st.rate = cfg.rate;
  st.u_x = 1.0 - x * st.nu;
  return st;
}

// mu(x, u) = (sqrt(u / u_x) - 1) sqrt(2 ln M) - a.
double mu_of(const IntegralSetup& st, double u) {
  return (std::sqrt(u / st.u_x) - 1.0) * st.s - st.a;
}

}  // namespace

ThresholdParams make_threshold(std::uint64_t M, double a) {
  if (M < 2) throw DomainError("threshold: M must be at least 2");
  ThresholdParams t;
  const double s = std::sqrt(2.0 * log_m(M));
  t.a = a;
  t.tau = s + a;
  t.delta_a = a / s;
  if (!(t.tau > 0.0)) throw DomainError("threshold: tau must be positive");
  return t;
}

ShiftTerms shift_terms(const ChannelParams& channel, const PowerAllocation& alloc,
                       double rate, double h, std::uint64_t M) {
  if (!(rate > 0.0)) throw DomainError("shift_terms: rate must be positive");
  const double n_real = static_cast<double>(alloc.L()) * log_m(M) / rate;
  ShiftTerms st;
  st.c_jr.resize(alloc.L());
  st.c_jrh.resize(alloc.L());
  for (std::size_t l = 0; l < alloc.L(); ++l) {
    st.c_jr[l] = n_real * alloc.weights[l] * channel.nu;
    st.c_jrh[l] = (1.0 - h) * st.c_jr[l];
  }
  return st;
}

GCurve::GCurve(const CurveConfig& cfg)
    : tau_(make_threshold(cfg.M, cfg.a).tau), nu_(cfg.channel.nu), L_(cfg.alloc.L()) {
  const auto st = shift_terms(cfg.channel, cfg.alloc, cfg.rate, cfg.h, cfg.M);
  for (std::size_t l = 0; l < L_; ++l) {
    const double w = cfg.alloc.weights[l];
    const double root = std::sqrt(st.c_jrh[l]);
    if (!groups_.empty() && groups_.back().root_shift == root) {
      groups_.back().weight += w;
      groups_.back().count += 1.0;
    } else {
      groups_.push_back({w, 1.0, root});
    }
  }
}

double GCurve::scale(double x) const {
  check_x(x, nu_);
  return 1.0 / std::sqrt(1.0 - std::max(x, 0.0) * nu_);
}

double GCurve::weighted(double x) const {
  const double c = scale(x);
  double sum = 0.0;
  for (const auto& g : groups_) sum += g.weight * normal_cdf(g.root_shift * c - tau_);
  return sum;
}

double GCurve::unweighted(double x) const {
  const double c = scale(x);
  double sum = 0.0;
  for (const auto& g : groups_) sum += g.count * normal_cdf(g.root_shift * c - tau_);
  return sum / static_cast<double>(L_);
}

double g_L(double x, const CurveConfig& cfg) { return GCurve(cfg)(x); }

double g_integral(double x, const CurveConfig& cfg) {
  const auto st = integral_setup(x, cfg);
  const double z_low = mu_of(st, (1.0 - st.nu) * st.c_prime / st.rate);
  const double z_max = mu_of(st, st.c_prime / st.rate);
  const double k = st.u_x * st.rate / st.c_prime;
  const auto f = [&](double z) {
    const double t = 1.0 + (z + st.a) / st.s;
    return (1.0 - k * t * t) * normal_pdf(z);
  };
  return normal_cdf(z_low) + integrate(f, z_low, z_max) / st.nu;
}

double g_integral_derivative(double x, const CurveConfig& cfg) {
  const auto st = integral_setup(x, cfg);
  const double z_low = mu_of(st, (1.0 - st.nu) * st.c_prime / st.rate);
  const double z_max = mu_of(st, st.c_prime / st.rate);
  const auto f = [&](double z) {
    const double t = 1.0 + st.delta_a + z / st.s;
    return t * t * normal_pdf(z);
  };
  return st.rate / st.c_prime * integrate(f, z_low, z_max);
}

GLow g_low(double x, const CurveConfig& cfg) {
  const auto st = integral_setup(x, cfg);
  const double lm = log_m(cfg.M);
  const double one_a = 1.0 + st.delta_a;
  GLow out;
  out.r = lm * (st.c_prime / (st.rate * one_a * one_a) - 1.0);
  const double r0 = 1.0 / (2.0 * one_a * one_a);
  out.delta_r = (out.r - r0) / (lm + out.r);
  const double z = (std::sqrt((1.0 - st.nu) * st.c_prime / st.rate) / std::sqrt(st.u_x) -
                    one_a) * st.s;
  out.z_x = z;
  const double rc = st.rate / st.c_prime;
  const double ratio = st.u_x / st.nu;
  const double Phi = normal_cdf(z), Q = normal_sf(z), phi = normal_pdf(z);
  out.value = Phi + (x + out.delta_r * ratio) * Q -
              2.0 * one_a * rc * ratio * phi / st.s - rc * ratio * z * phi / (st.s * st.s);
  out.derivative =
      rc * (one_a * one_a * Q + 2.0 * one_a * phi / st.s + (Q + z * phi) / (st.s * st.s));
  return out;
}

GapResult gap_and_xr(const ChannelParams& channel, std::uint64_t M, double r, double a) {
  const auto th = make_threshold(M, a);
  const double lm = log_m(M);
  GapResult g;
  const double one_a = 1.0 + th.delta_a;
  g.r0 = 1.0 / (2.0 * one_a * one_a);
  g.r1 = 0.5 * g.r0 + std::sqrt(lm) / (std::sqrt(std::numbers::pi) * one_a);
  if (!(r > g.r1))
    throw InfeasibleError("gap_and_xr: r = " + std::to_string(r) +
                          " does not exceed r1 = " + std::to_string(g.r1));
  g.x_r = 1.0 - r / (channel.snr * lm);
  g.gap = (r - g.r1) / (channel.snr * lm);
  return g;
}

FStar f_star(double tau, std::uint64_t M) {
  if (!(tau > 0.0)) throw DomainError("f_star: tau must be positive");
  if (M < 2) throw DomainError("f_star: M must be at least 2");
  FStar f;
  f.log_exact = std::log(static_cast<double>(M - 1)) + log_normal_sf(tau);
  f.exact = std::exp(f.log_exact);
  const double s = std::sqrt(2.0 * log_m(M));
  const double a = tau - s;
  f.bound = std::exp(-a * s - 0.5 * a * a) / ((s + a) * std::sqrt(2.0 * std::numbers::pi));
  return f;
}

DecoderSchedule build_schedule(const GCurve& g, std::uint64_t M, double h,
                               const ScheduleOptions& opt) {
  DecoderSchedule sc;
  sc.tau = g.tau();
  sc.f_star = f_star(sc.tau, M).exact;
  sc.rho = opt.rho;
  sc.f = opt.rho * sc.f_star;
  sc.eta = opt.eta;
  sc.h = h;
  sc.slack = opt.slack;
  const double nu = g.nu();
  const double f = sc.f;
  std::uint64_t cap = opt.max_steps;

  if (opt.rule == StopRule::until_xr) {
    const double ge = opt.gap - opt.eta;
    if (!(ge > 0.0))
      throw InfeasibleError("build_schedule: gap - eta = " + std::to_string(ge) +
                            " is not positive");
    const double allowed = ge * ge / 8.0 - opt.slack / 2.0;
    if (f > allowed)
      throw InfeasibleError("build_schedule: false-alarm budget f = " + std::to_string(f) +
                            " exceeds (gap-eta)^2/8 - 1/(2 L_pi) = " +
                            std::to_string(allowed));
    const auto acc = check_accumulative(g, opt.x_r, opt.gap);
    if (!acc.ok)
      throw InfeasibleError("build_schedule: detection curve not accumulative, margin " +
                            std::to_string(acc.min_margin) + " at x = " +
                            std::to_string(acc.worst_x) + " is below gap " +
                            std::to_string(opt.gap));
    cap = static_cast<std::uint64_t>(std::ceil(2.0 / ge));
  }

  double x_prev = 0.0, q1_prev = 0.0, s_prev = 0.0;
  bool reached = false;
  for (std::uint64_t k = 1; k <= cap; ++k) {
    const double q1 = g(x_prev) - opt.eta;
    const double inc = q1 - q1_prev;
    if (opt.rule == StopRule::greedy && k > 1 && inc < 2.0 * f + opt.slack) break;
    const double q = inc - opt.slack - f;
    if (!(q > 0.0)) {
      if (opt.rule == StopRule::until_xr)
        throw InfeasibleError("build_schedule: detection increment vanished at step " +
                              std::to_string(k));
      break;
    }
    const double q_adj = q / (1.0 + f / q);
    const double s = 1.0 / (1.0 - x_prev * nu);
    const double w = s - s_prev;
    sc.q1.push_back(q1);
    sc.q.push_back(q);
    sc.q_adj.push_back(q_adj);
    sc.s.push_back(s);
    sc.w.push_back(w);
    sc.lambda_kk.push_back(std::sqrt(w / s));
    // The until_xr rule stops at the first k whose x_{k-1} exceeds x_r.
    reached = opt.rule == StopRule::until_xr && x_prev > opt.x_r;
    x_prev += q_adj;
    sc.x.push_back(x_prev);
    q1_prev = q1;
    s_prev = s;
    if (reached) break;
  }
  sc.m = sc.q1.size();
  if (sc.m == 0)
    throw InfeasibleError("build_schedule: first detection target is not positive");
  if (opt.rule == StopRule::until_xr && !reached)
    throw InfeasibleError("build_schedule: step bound reached before x exceeded x_r");
  return sc;
}

DecoderSchedule build_schedule(const CurveConfig& cfg, const ScheduleOptions& opt) {
  return build_schedule(GCurve(cfg), cfg.M, cfg.h, opt);
}

Theorem1 theorem1_bound(double effective_sections, double eta, double rho, double f,
                        std::uint64_t m, double n, double h, double c0) {
  if (m < 1) throw DomainError("theorem1_bound: m must be at least 1");
  const double md = static_cast<double>(m);
  const double lm = std::log(md);
  const double l_eta = lm - 2.0 * effective_sections * eta * eta + md * c0;
  // The false-alarm tail bound needs f above its mean, i.e. rho > 1.
  const double l_rho = rho > 1.0
                           ? lm - effective_sections * f * poisson_divergence(rho) / rho
                           : lm;
  const double l_h = lm - (n - md + 1.0) * h * h / 2.0;
  Theorem1 t;
  t.term_eta = safe_exp(l_eta);
  t.term_rho = safe_exp(l_rho);
  t.term_h = safe_exp(l_h);
  t.total = t.term_eta + t.term_rho + t.term_h;
  const double mx = std::max({l_eta, l_rho, l_h});
  t.log_total = mx + std::log(std::exp(l_eta - mx) + std::exp(l_rho - mx) +
                              std::exp(l_h - mx));
  return t;
}

MistakeBound delta_mis_bound(double x_r, double gap, double eta, double factor) {
  if (!(gap >= eta)) throw DomainError("delta_mis_bound: gap must exceed eta");
  MistakeBound b;
  b.delta_wght = (1.0 - x_r) - (gap - eta) / 2.0;
  b.delta_mis = factor * b.delta_wght;
  return b;
}

MistakeBound delta_mis_bound(double x_r, double gap, double eta,
                             const ChannelParams& channel) {
  return delta_mis_bound(x_r, gap, eta, channel.snr / (2.0 * channel.capacity_nats));
}

ParameterSelection select_parameters(const ChannelParams& channel, std::uint64_t M) {
  if (M < 4) throw DomainError("select_parameters: M must be at least 4");
  const double lm = log_m(M);
  const double s = std::sqrt(2.0 * lm);
  const double C = channel.capacity_nats;
  const double omega1 = 1.0 + 1.0 / C;
  ParameterSelection p;
  // a sqrt(2 ln M) = ln[1 / (f* sqrt(2 pi) sqrt(2 ln M))] with f* = gap^2/8,
  // where gap follows from r* - r1, which in turn depends on a through r1.
  double a = 0.0;
  for (int it = 1; it <= 1000; ++it) {
    const double one_a = 1.0 + a / s;
    const double r0 = 1.0 / (2.0 * one_a * one_a);
    const double r1 = 0.5 * r0 + std::sqrt(lm) / (std::sqrt(std::numbers::pi) * one_a);
    const double r_star = r1 + 2.0 / omega1;
    const double gap = (r_star - r1) / (channel.snr * lm);
    const double fs = gap * gap / 8.0;
    const double next = std::log(1.0 / (fs * std::sqrt(2.0 * std::numbers::pi) * s)) / s;
    p.iterations = it;
    p.gap = gap;
    p.f_star = fs;
    if (std::abs(next - a) <= 1e-10) {
      a = next;
      break;
    }
    a = next;
    if (it == 1000) throw NumericalError("select_parameters: fixed point did not converge");
  }
  p.a = a;
  p.delta_a = a / s;
  const double one_a = 1.0 + p.delta_a;
  p.r0 = 1.0 / (2.0 * one_a * one_a);
  p.r1 = 0.5 * p.r0 + std::sqrt(lm) / (std::sqrt(std::numbers::pi) * one_a);
  p.r_star = p.r1 + 2.0 / omega1;
  p.a_tilde =
      2.0 * std::log(channel.snr * omega1 / std::pow(std::numbers::pi, 0.25)) / s;
  p.a_closed_form = 1.5 * std::log(lm) / s + p.a_tilde;
  p.c_star = C / (one_a * one_a * (1.0 + p.r_star / lm));
  p.drop_star = C / p.c_star - 1.0;
  p.drop_star_approx =
      (3.0 * std::log(lm) + 4.0 * std::log(omega1 * channel.snr) + 4.0 / omega1 - 2.0) /
          (2.0 * lm) +
      1.0 / std::sqrt(std::numbers::pi * lm);
  return p;
}

RateBoundReport proposition1_report(const ChannelParams& channel, std::uint64_t M,
                                    std::uint64_t L, double kappa) {
  if (!(kappa >= 0.0)) throw DomainError("proposition1_report: kappa must be >= 0");
  if (L < 1) throw DomainError("proposition1_report: L must be at least 1");
  const auto sel = select_parameters(channel, M);
  const double lm = log_m(M);
  const double C = channel.capacity_nats;
  const double snr = channel.snr;
  const double omega = (1.0 + 1.0 / C) / 2.0;
  RateBoundReport rep;
  rep.snr = snr;
  rep.M = M;
  rep.L = L;
  rep.kappa = kappa;
  rep.c_star = sel.c_star;
  rep.drop_star = sel.drop_star;
  rep.a = sel.a;
  rep.r0 = sel.r0;
  rep.r1 = sel.r1;
  rep.r = sel.r_star + kappa;
  rep.rate = sel.c_star / (1.0 + kappa / lm);
  rep.Delta_star = (sel.c_star - rep.rate) / sel.c_star;
  rep.gap = (rep.r - sel.r1) / (snr * lm);
  rep.x_r = 1.0 - rep.r / (snr * lm);
  rep.eta = 0.5 * kappa / (snr * lm);
  rep.h = kappa / std::pow(2.0 * lm, 1.5);
  // Largest weight of the exponential allocation is 2 C_tilde / (L nu).
  rep.effective_sections =
      static_cast<double>(L) * channel.nu / (2.0 * c_tilde(channel, L));
  rep.epsilon_L = std::pow(2.0 * omega * snr * lm, 2) / rep.effective_sections;
  rep.rho = std::pow(1.0 + kappa * omega / 2.0, 2) - rep.epsilon_L;
  rep.f_star = sel.f_star;
  rep.f = rep.rho * rep.f_star;
  rep.m = static_cast<std::uint64_t>(std::ceil(2.0 / (rep.gap - rep.eta)));
  rep.n = static_cast<double>(L) * lm / rep.rate;
  const auto mb = delta_mis_bound(rep.x_r, rep.gap, rep.eta, channel);
  rep.delta_wght = mb.delta_wght;
  rep.delta_mis = mb.delta_mis;
  rep.delta_M = 1.0 / std::sqrt(std::numbers::pi * lm);
  rep.delta_mis_eq8 = (3.0 * kappa + 5.0) / (8.0 * C * lm) + rep.delta_M / (2.0 * C);
  rep.p_e = theorem1_bound(rep.effective_sections, rep.eta, rep.rho, rep.f, rep.m, rep.n,
                           rep.h, channel.c0);
  const double md = static_cast<double>(rep.m);
  rep.kappa1 = 3.0 * md * safe_exp(md * std::max(channel.c0, 0.5));
  rep.kappa2 = channel.nu / (2.0 * C);
  rep.kappa3 = std::min(1.0 / (32.0 * snr * snr), 1.0 / (16.0 * sel.c_star));
  rep.kappa4 = 1.0 / (8.0 * (1.0 + 1.0 / C) * snr * snr * lm);
  const double d = rep.Delta_star;
  rep.p_e_explicit = rep.kappa1 * std::exp(-rep.kappa2 * static_cast<double>(L) *
                                           std::min(rep.kappa3 * d * d, rep.kappa4 * d));
  return rep;
}

double bernoulli_divergence(double p, double q) {
  const auto term = [](double a, double b) {
    if (a == 0.0) return 0.0;
    if (b == 0.0) return kInf;
    return a * std::log(a / b);
  };
  return term(p, q) + term(1.0 - p, 1.0 - q);
}

BernoulliTail bernoulli_tail(std::span<const double> alpha, std::span<const double> r,
                             double threshold) {
  if (alpha.size() != r.size() || alpha.empty())
    throw DomainError("bernoulli_tail: weights and probabilities must match");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw DomainError("bernoulli_tail: threshold must lie in (0, 1)");
  double sum = 0.0, mx = 0.0, mean = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (!(alpha[j] >= 0.0) || !(r[j] >= 0.0 && r[j] <= 1.0))
      throw DomainError("bernoulli_tail: invalid weight or probability");
    sum += alpha[j];
    mx = std::max(mx, alpha[j]);
    mean += alpha[j] * r[j];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("bernoulli_tail: weights must sum to 1");
  BernoulliTail t;
  t.mean = mean;
  t.n_alpha = 1.0 / mx;
  const double bound = std::exp(-t.n_alpha * bernoulli_divergence(threshold, mean));
  if (threshold < mean) t.lower_bound = bound;
  if (threshold > mean) t.upper_bound = bound;
  return t;
}

EntropyChain entropy_chain(double p, double p_star) {
  if (!(p_star > 0.0 && p_star <= p && p < 1.0))
    throw DomainError("entropy_chain: requires 0 < p* <= p < 1");
  EntropyChain e;
  e.d_ber = bernoulli_divergence(p, p_star);
  e.d_poi = p * std::log(p / p_star) + p_star - p;
  const double d = std::sqrt(p) - std::sqrt(p_star);
  e.hellinger = 2.0 * d * d;
  e.quadratic = (p - p_star) * (p - p_star) / (2.0 * p);
  return e;
}

namespace {

// Smallest f >= f* with f* D(f/f*) = target, i.e. f ln(f/f*) - f + f* = target.
double false_alarm_budget(double log_fstar, double target) {
  const double fstar = std::exp(log_fstar);
  const auto excess = [&](double log_f) {
    const double f = std::exp(log_f);
    return f * (log_f - log_fstar) - f + fstar - target;
  };
  double lo = log_fstar, hi = std::max(log_fstar, -700.0) + 1.0;
  while (excess(hi) < 0.0) {
    lo = hi;
    hi += 1.0;
    if (hi > 5.0) return kInf;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::exp(hi);
}

void fill_metrics(DesignEvaluation& ev, const GCurve& g, std::uint64_t L) {
  const auto& sc = ev.schedule;
  const std::uint64_t m = sc.m;
  const double x_last = m >= 2 ? sc.x[m - 2] : 0.0;
  ev.detection_weighted = g.weighted(x_last);
  ev.detection_unweighted = g.unweighted(x_last);
  ev.failed_detection = 1.0 - ev.detection_unweighted;
  ev.false_alarm = static_cast<double>(m) * sc.f;
  ev.objective = ev.failed_detection + ev.false_alarm;
  ev.delta_wght = 1.0 - sc.q1[m - 1] + 2.0 * m * sc.f + m * sc.slack;
  ev.delta_mis = ev.l_pi / static_cast<double>(L) * ev.delta_wght;
}

}  // namespace

DesignEvaluation evaluate_design(const ChannelParams& channel, const CodeParams& code,
                                 const DesignPoint& p, const DesignOptions& opt,
                                 std::uint64_t curve_sections) {
  if (opt.fixed) {
    try {
      return evaluate_design(channel, code, p, *opt.fixed, opt.max_steps);
    } catch (const InfeasibleError&) {
      DesignEvaluation ev;
      ev.point = p;
      ev.objective = kInf;
      return ev;
    }
  }
  DesignEvaluation ev;
  ev.point = p;
  ev.objective = kInf;
  const auto alloc = make_power_allocation(p.kind, channel, code.L, p.u, p.gamma);
  ev.l_pi = alloc.l_pi;
  ev.effective_sections = alloc.effective_sections;
  const std::uint64_t Lc =
      curve_sections == 0 ? code.L : std::min<std::uint64_t>(curve_sections, code.L);
  CurveConfig cfg{channel,
                  Lc == code.L ? alloc
                               : make_power_allocation(p.kind, channel, Lc, p.u, p.gamma),
                  code.M, code.rate, p.a, 0.0};
  const auto th = make_threshold(code.M, p.a);
  const auto fs = f_star(th.tau, code.M);
  ev.f_star = fs.exact;

  ScheduleOptions so;
  so.rule = StopRule::greedy;
  so.max_steps = opt.max_steps;
  if (opt.mode == BoundMode::large_L) {
    so.eta = 0.0;
    so.rho = 1.0;
    // The overshoot allowance is a property of the code, not a fluctuation
    // margin, so it stays; it vanishes as L grows.
    so.slack = 1.0 / alloc.effective_sections;
    const GCurve g(cfg);
    try {
      ev.schedule = build_schedule(g, code.M, 0.0, so);
    } catch (const InfeasibleError&) {
      return ev;
    }
    ev.feasible = true;
    // With no fluctuation margins the bound is at least m; report it anyway.
    ev.p_e = theorem1_bound(alloc.effective_sections, 0.0, 1.0, ev.schedule.f, ev.schedule.m,
                            static_cast<double>(code.n), 0.0, channel.c0);
    fill_metrics(ev, g, code.L);
    return ev;
  }

  const double neff = alloc.effective_sections;
  const double n = static_cast<double>(code.n);
  const double b1 = opt.share_eta * opt.pe_target;
  const double b2 = opt.share_rho * opt.pe_target;
  const double b3 = (1.0 - opt.share_eta - opt.share_rho) * opt.pe_target;
  if (!(b1 > 0.0 && b2 > 0.0 && b3 > 0.0))
    throw DomainError("evaluate_design: error budget shares must be positive");
  std::uint64_t m_guess = 8;
  for (int iter = 0; iter < 40; ++iter) {
    const double md = static_cast<double>(m_guess);
    so.eta = std::sqrt((md * channel.c0 + std::log(md / b1)) / (2.0 * neff));
    const double f = false_alarm_budget(fs.log_exact, std::log(md / b2) / neff);
    if (!std::isfinite(f) || n - md + 1.0 <= 0.0) return ev;
    so.rho = fs.exact > 0.0 ? f / fs.exact : kInf;
    if (!std::isfinite(so.rho)) return ev;
    const double h = std::sqrt(2.0 * std::log(md / b3) / (n - md + 1.0));
    if (!(h < 1.0)) return ev;
    cfg.h = h;
    so.slack = 1.0 / neff;
    const GCurve g(cfg);
    try {
      ev.schedule = build_schedule(g, code.M, h, so);
    } catch (const InfeasibleError&) {
      return ev;
    }
    if (ev.schedule.m <= m_guess) {
      ev.p_e = theorem1_bound(neff, so.eta, so.rho, ev.schedule.f, ev.schedule.m, n, h,
                              channel.c0);
      ev.feasible = ev.p_e.total <= opt.pe_target * (1.0 + 1e-9);
      fill_metrics(ev, g, code.L);
      if (!ev.feasible) ev.objective = kInf;
      return ev;
    }
    m_guess = ev.schedule.m;
  }
  return ev;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::uint64_t n) {
  std::vector<double> v;
  if (n <= 1 || hi <= lo) return {lo};
  for (std::uint64_t i = 0; i < n; ++i)
    v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

}  // namespace

DesignEvaluation evaluate_design(const ChannelParams& channel, const CodeParams& code,
                                 const DesignPoint& p, const FixedTargets& t,
                                 std::uint64_t max_steps) {
  if (!(t.eta >= 0.0) || !(t.rho > 0.0) || !(t.h >= 0.0 && t.h < 1.0))
    throw DomainError("evaluate_design: need eta >= 0, rho > 0 and 0 <= h < 1");
  DesignEvaluation ev;
  ev.point = p;
  ev.objective = kInf;
  const auto alloc = make_power_allocation(p.kind, channel, code.L, p.u, p.gamma);
  ev.l_pi = alloc.l_pi;
  ev.effective_sections = alloc.effective_sections;
  const CurveConfig cfg{channel, alloc, code.M, code.rate, p.a, t.h};
  ev.f_star = f_star(make_threshold(code.M, p.a).tau, code.M).exact;
  ScheduleOptions so;
  so.rule = StopRule::greedy;
  so.max_steps = max_steps;
  so.eta = t.eta;
  so.rho = t.rho;
  so.slack = 1.0 / alloc.effective_sections;
  const GCurve g(cfg);
  ev.schedule = build_schedule(g, code.M, t.h, so);
  ev.feasible = true;
  ev.p_e = theorem1_bound(alloc.effective_sections, t.eta, t.rho, ev.schedule.f,
                          ev.schedule.m, static_cast<double>(code.n), t.h, channel.c0);
  fill_metrics(ev, g, code.L);
  return ev;
}

SearchResult search_design(const ChannelParams& channel, const CodeParams& code,
                           const DesignOptions& opt, const SearchGrid& grid) {
  if (grid.points < 2) throw DomainError("search_design: need at least 2 grid points");
  SearchResult res;
  res.best.objective = kInf;
  const double C = channel.capacity_nats;
  const auto consider = [&](const DesignPoint& p, DesignEvaluation& best) {
    ++res.evaluations;
    auto ev = evaluate_design(channel, code, p, opt, grid.surrogate_sections);
    if (ev.feasible && ev.objective < best.objective) best = std::move(ev);
  };

  for (AllocationKind kind : grid.kinds) {
    const bool leveled = kind == AllocationKind::leveled;
    double a_lo = grid.a_min, a_hi = grid.a_max;
    double u_lo = 0.0, u_hi = leveled ? 1.0 : 0.0;
    double g_lo = 0.0, g_hi = leveled ? C : 0.0;
    std::uint64_t pts = grid.points;
    DesignEvaluation best;
    best.objective = kInf;
    for (int level = 0; level <= grid.refinements; ++level) {
      const auto as = linspace(a_lo, a_hi, pts);
      const auto us = linspace(u_lo, u_hi, leveled ? pts : 1);
      const auto gs = linspace(g_lo, g_hi, leveled ? pts : 1);
      res.grid_points += as.size() * us.size() * gs.size();
      for (double a : as)
        for (double u : us)
          for (double gm : gs) consider({kind, a, u, gm}, best);
      if (!std::isfinite(best.objective)) break;
      // Zoom to one coarse spacing around the incumbent.
      const auto zoom = [&](double& lo, double& hi, double c, double floor_lo,
                            double ceil_hi) {
        const double span = (hi - lo) / static_cast<double>(pts - 1);
        lo = std::max(floor_lo, c - span);
        hi = std::min(ceil_hi, c + span);
      };
      zoom(a_lo, a_hi, best.point.a, grid.a_min, grid.a_max);
      if (leveled) {
        zoom(u_lo, u_hi, best.point.u, 0.0, 1.0);
        zoom(g_lo, g_hi, best.point.gamma, 0.0, C);
      }
      pts = 5;
    }
    if (best.objective < res.best.objective) res.best = std::move(best);
  }
  if (std::isfinite(res.best.objective) && grid.surrogate_sections != 0 &&
      grid.surrogate_sections < code.L)
    res.best = evaluate_design(channel, code, res.best.point, opt, 0);
  return res;
}

}  // namespace superpose
