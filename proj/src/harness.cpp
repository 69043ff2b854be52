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

#include "superpose/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "superpose/error.hpp"
#include "superpose/outer_rs.hpp"
#include "superpose/special.hpp"

namespace superpose {

using nlohmann::json;

namespace {

template <class E>
E enum_from(const json& j, const char* key,
            std::initializer_list<std::pair<const char*, E>> table) {
  const auto s = j.get<std::string>();
  for (const auto& [name, v] : table)
    if (s == name) return v;
  throw DomainError(std::string("config: unknown value '") + s + "' for " + key);
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (j.is_string() && j.get<std::string>() == "auto") return std::nullopt;
  if (!j.is_number()) throw DomainError(std::string("config: ") + key + " must be a number or \"auto\"");
  return j.get<double>();
}

const char* to_cstr(RateUnit u) {
  switch (u) {
    case RateUnit::nats: return "nats";
    case RateUnit::bits: return "bits";
    case RateUnit::capacity: return "capacity";
  }
  return "?";
}

const char* to_cstr(BoundMode m) { return m == BoundMode::finite ? "finite" : "large_L"; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

json evaluation_json(const DesignEvaluation& ev) {
  const auto& sc = ev.schedule;
  json j{{"allocation", to_string(ev.point.kind)},
         {"a", ev.point.a},
         {"u", ev.point.u},
         {"gamma", ev.point.gamma},
         {"feasible", ev.feasible},
         {"steps", sc.m},
         {"tau", sc.tau},
         {"f_star", ev.f_star},
         {"f", sc.f},
         {"eta", sc.eta},
         {"rho", sc.rho},
         {"h", sc.h},
         {"slack", sc.slack},
         {"detection_weighted", ev.detection_weighted},
         {"detection_unweighted", ev.detection_unweighted},
         {"failed_detection", ev.failed_detection},
         {"false_alarm", ev.false_alarm},
         {"objective", std::isfinite(ev.objective) ? json(ev.objective) : json(nullptr)},
         {"delta_wght", ev.delta_wght},
         {"delta_mis", ev.delta_mis},
         {"l_pi", ev.l_pi},
         {"effective_sections", ev.effective_sections},
         {"q1", sc.q1}};
  j["p_e"] = {{"total", ev.p_e.total},
              {"eta_term", ev.p_e.term_eta},
              {"rho_term", ev.p_e.term_rho},
              {"h_term", ev.p_e.term_h},
              {"log_total", ev.p_e.log_total}};
  return j;
}

json design_to_json(const Design& d) {
  return {{"snr", d.channel.snr},
          {"capacity_nats", d.channel.capacity_nats},
          {"capacity_bits", d.channel.capacity_bits()},
          {"L", d.code.L},
          {"M", d.code.M},
          {"n", d.code.n},
          {"rate_nats", d.code.rate},
          {"rate_bits", d.code.rate_bits()},
          {"ratio_to_capacity", d.code.rate / d.channel.capacity_nats},
          {"grid_points", d.grid_points},
          {"evaluations", d.evaluations},
          {"design", evaluation_json(d.eval)},
          {"diagnostics", d.diagnostics}};
}

void add_failure_diagnostics(Design& d, const ExperimentConfig& cfg) {
  const double C = d.channel.capacity_nats;
  if (d.code.rate >= C)
    d.diagnostics.push_back("rate " + fmt(d.code.rate) + " nats exceeds capacity " +
                            fmt(C) + " nats: gap C - R = " + fmt(C - d.code.rate) +
                            " is not positive");
  const auto& ev = d.eval;
  if (ev.schedule.m == 0)
    d.diagnostics.push_back("no decoding schedule: the first detection target is not "
                            "positive or the steps never settle");
  else if (cfg.mode == BoundMode::finite && ev.p_e.total > cfg.pe_target)
    d.diagnostics.push_back("error bound " + fmt(ev.p_e.total) + " exceeds target " +
                            fmt(cfg.pe_target));
  if (d.diagnostics.empty()) d.diagnostics.push_back("no feasible design found");
}

Design base_design(const ExperimentConfig& cfg) {
  Design d;
  d.channel = derive_channel(cfg.snr);
  d.code = make_code(cfg.sections(), cfg.M, rate_in_nats(cfg, d.channel));
  return d;
}

Design evaluate(const ExperimentConfig& cfg) {
  validate(cfg);
  Design d = base_design(cfg);
  DesignOptions opt;
  opt.mode = cfg.mode;
  opt.pe_target = cfg.pe_target;
  if (cfg.eta && cfg.rho && cfg.h) opt.fixed = FixedTargets{*cfg.eta, *cfg.rho, *cfg.h};
  if (cfg.threshold == ThresholdChoice::grid) {
    SearchGrid g = cfg.grid;
    g.kinds = {cfg.allocation};
    auto res = search_design(d.channel, d.code, opt, g);
    d.eval = std::move(res.best);
    d.grid_points = res.grid_points;
    d.evaluations = res.evaluations;
    if (!d.eval.feasible) {
      // Keep a representative evaluation for the diagnostics.
      DesignPoint p{cfg.allocation, select_parameters(d.channel, cfg.M).a, cfg.u,
                    cfg.gamma};
      d.eval = evaluate_design(d.channel, d.code, p, opt);
      d.eval.feasible = false;
    }
  } else {
    DesignPoint p{cfg.allocation, cfg.a, cfg.u, cfg.gamma};
    if (cfg.threshold == ThresholdChoice::recipe) p.a = select_parameters(d.channel, cfg.M).a;
    d.evaluations = 1;
    if (cfg.eta && cfg.rho && cfg.h) {
      try {
        d.eval = evaluate_design(d.channel, d.code, p,
                                 FixedTargets{*cfg.eta, *cfg.rho, *cfg.h});
      } catch (const InfeasibleError& e) {
        d.eval.point = p;
        d.diagnostics.push_back(e.what());
      }
    } else {
      d.eval = evaluate_design(d.channel, d.code, p, opt);
    }
  }
  d.alloc = make_power_allocation(d.eval.point.kind, d.channel, d.code.L, d.eval.point.u,
                                  d.eval.point.gamma);
  // Past capacity no schedule is meaningful, whatever the mode admits.
  if (d.code.rate >= d.channel.capacity_nats) d.eval.feasible = false;
  if (!d.eval.feasible) add_failure_diagnostics(d, cfg);
  return d;
}

double wilson_half(double p, double n, double z, double& centre) {
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  centre = (p + z2 / (2.0 * n)) / denom;
  return z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
}

}  // namespace

std::string to_string(EnvelopeMode m) {
  switch (m) {
    case EnvelopeMode::bounds: return "bounds";
    case EnvelopeMode::simulation: return "simulation";
    case EnvelopeMode::large_L: return "large_L";
  }
  return "?";
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw DomainError("config: top level must be an object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "snr") c.snr = v.get<double>();
      else if (key == "M") c.M = v.get<std::uint64_t>();
      else if (key == "L") c.L = v.get<std::uint64_t>();
      else if (key == "rate") c.rate = v.get<double>();
      else if (key == "rate_unit")
        c.rate_unit = enum_from<RateUnit>(v, "rate_unit", {{"nats", RateUnit::nats},
                                                           {"bits", RateUnit::bits},
                                                           {"capacity", RateUnit::capacity}});
      else if (key == "allocation") c.allocation = allocation_kind_from_string(v.get<std::string>());
      else if (key == "u") c.u = v.get<double>();
      else if (key == "gamma") c.gamma = v.get<double>();
      else if (key == "a") {
        if (v.is_number()) {
          c.threshold = ThresholdChoice::value;
          c.a = v.get<double>();
        } else {
          c.threshold = enum_from<ThresholdChoice>(
              v, "a", {{"auto", ThresholdChoice::recipe}, {"grid", ThresholdChoice::grid}});
        }
      } else if (key == "eta") c.eta = optional_number(v, "eta");
      else if (key == "rho") c.rho = optional_number(v, "rho");
      else if (key == "h") c.h = optional_number(v, "h");
      else if (key == "mode")
        c.mode = enum_from<BoundMode>(v, "mode", {{"finite", BoundMode::finite},
                                                  {"large_L", BoundMode::large_L}});
      else if (key == "pe_target") c.pe_target = v.get<double>();
      else if (key == "grid") {
        for (const auto& [gk, gv] : v.items()) {
          if (gk == "points") c.grid.points = gv.get<std::uint64_t>();
          else if (gk == "refinements") c.grid.refinements = gv.get<int>();
          else if (gk == "a_min") c.grid.a_min = gv.get<double>();
          else if (gk == "a_max") c.grid.a_max = gv.get<double>();
          else if (gk == "surrogate_sections") c.grid.surrogate_sections = gv.get<std::uint64_t>();
          else throw DomainError("config: unknown grid key '" + gk + "'");
        }
      } else if (key == "trials") c.trials = v.get<std::uint64_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "engine")
        c.engine = enum_from<Engine>(v, "engine", {{"deferred", Engine::deferred},
                                                   {"explicit", Engine::explicit_dictionary}});
      else if (key == "noiseless") c.noiseless = v.get<bool>();
      else if (key == "mistake_target") c.mistake_target = optional_number(v, "mistake_target");
      else if (key == "threads") c.threads = v.get<std::uint64_t>();
      else if (key == "outer") c.outer = v.get<bool>();
      else if (key == "outer_delta") c.outer_delta = optional_number(v, "outer_delta");
      else if (key == "envelope_M") c.envelope_M = v.get<std::vector<std::uint64_t>>();
      else if (key == "envelope_mode")
        c.envelope_mode = enum_from<EnvelopeMode>(
            v, "envelope_mode", {{"bounds", EnvelopeMode::bounds},
                                 {"simulation", EnvelopeMode::simulation},
                                 {"large_L", EnvelopeMode::large_L}});
      else if (key == "envelope_target") c.envelope_target = v.get<double>();
      else if (key == "max_failures") c.max_failures = v.get<std::uint64_t>();
      else if (key == "resolution") c.resolution = v.get<double>();
      else if (key == "message") c.message = v.get<std::string>();
      else if (key == "outputs") {
        for (const auto& [ok, ov] : v.items()) {
          const auto path = ov.get<std::string>();
          if (ok == "trials_csv") c.outputs.trials_csv = path;
          else if (ok == "schedule_csv") c.outputs.schedule_csv = path;
          else if (ok == "envelope_csv") c.outputs.envelope_csv = path;
          else if (ok == "trace_csv") c.outputs.trace_csv = path;
          else if (ok == "summary_json") c.outputs.summary_json = path;
          else throw DomainError("config: unknown outputs key '" + ok + "'");
        }
      } else {
        throw DomainError("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: wrong value type: ") + e.what());
  }
  validate(c);
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json("auto"); };
  json j{{"snr", c.snr},
         {"M", c.M},
         {"L", c.L},
         {"rate", c.rate},
         {"rate_unit", to_cstr(c.rate_unit)},
         {"allocation", to_string(c.allocation)},
         {"u", c.u},
         {"gamma", c.gamma},
         {"eta", opt(c.eta)},
         {"rho", opt(c.rho)},
         {"h", opt(c.h)},
         {"mode", to_cstr(c.mode)},
         {"pe_target", c.pe_target},
         {"grid",
          {{"points", c.grid.points},
           {"refinements", c.grid.refinements},
           {"a_min", c.grid.a_min},
           {"a_max", c.grid.a_max},
           {"surrogate_sections", c.grid.surrogate_sections}}},
         {"trials", c.trials},
         {"seed", c.seed},
         {"engine", c.engine == Engine::deferred ? "deferred" : "explicit"},
         {"noiseless", c.noiseless},
         {"mistake_target", opt(c.mistake_target)},
         {"threads", c.threads},
         {"outer", c.outer},
         {"outer_delta", opt(c.outer_delta)},
         {"envelope_M", c.envelope_M},
         {"envelope_mode", to_string(c.envelope_mode)},
         {"envelope_target", c.envelope_target},
         {"max_failures", c.max_failures},
         {"resolution", c.resolution},
         {"message", c.message},
         {"outputs",
          {{"trials_csv", c.outputs.trials_csv},
           {"schedule_csv", c.outputs.schedule_csv},
           {"envelope_csv", c.outputs.envelope_csv},
           {"trace_csv", c.outputs.trace_csv},
           {"summary_json", c.outputs.summary_json}}}};
  switch (c.threshold) {
    case ThresholdChoice::value: j["a"] = c.a; break;
    case ThresholdChoice::recipe: j["a"] = "auto"; break;
    case ThresholdChoice::grid: j["a"] = "grid"; break;
  }
  return j.dump(2);
}

void validate(const ExperimentConfig& c) {
  const auto fail = [](const std::string& m) { throw DomainError("config: " + m); };
  if (!(c.snr > 0.0) || !std::isfinite(c.snr)) fail("snr must be positive");
  if (c.M < 2 || (c.M & (c.M - 1)) != 0) fail("M must be a power of two, at least 2");
  if (!(c.rate > 0.0) || !std::isfinite(c.rate)) fail("rate must be positive");
  if (c.rate_unit == RateUnit::capacity && !(c.rate < 1.0))
    fail("rate as a fraction of capacity must be below 1");
  if (c.u < 0.0) fail("u must be non-negative");
  if (c.gamma < 0.0) fail("gamma must be non-negative");
  if (c.trials < 1) fail("trials must be at least 1");
  if (!(c.pe_target > 0.0)) fail("pe_target must be positive");
  if (static_cast<bool>(c.eta) != static_cast<bool>(c.rho) ||
      static_cast<bool>(c.eta) != static_cast<bool>(c.h))
    fail("eta, rho and h must be given together or all left automatic");
  if (c.eta && (*c.eta < 0.0 || !(*c.rho > 0.0) || *c.h < 0.0 || !(*c.h < 1.0)))
    fail("need eta >= 0, rho > 0 and 0 <= h < 1");
  if (c.grid.points < 2) fail("grid.points must be at least 2");
  if (c.grid.refinements < 0) fail("grid.refinements must be non-negative");
  if (!(c.grid.a_max >= c.grid.a_min)) fail("grid.a_max must not be below grid.a_min");
  if (c.mistake_target && !(*c.mistake_target >= 0.0)) fail("mistake_target must be non-negative");
  if (c.outer_delta && !(*c.outer_delta >= 0.0 && *c.outer_delta < 1.0))
    fail("outer_delta must lie in [0, 1)");
  if (c.outer && c.sections() > c.M - 1)
    fail("the outer code needs L <= M - 1 (one field symbol per section)");
  if (!(c.envelope_target > 0.0 && c.envelope_target < 1.0))
    fail("envelope_target must lie in (0, 1)");
  if (!(c.resolution > 0.0)) fail("resolution must be positive");
  for (auto m : c.envelope_M)
    if (m < 2 || (m & (m - 1)) != 0) fail("envelope_M entries must be powers of two");
}

double rate_in_nats(const ExperimentConfig& cfg, const ChannelParams& channel) {
  switch (cfg.rate_unit) {
    case RateUnit::nats: return cfg.rate;
    case RateUnit::bits: return bits_to_nats(cfg.rate);
    case RateUnit::capacity: return cfg.rate * channel.capacity_nats;
  }
  return cfg.rate;
}

std::uint64_t worker_count(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("SUPERPOSE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::uint64_t>(v);
  }
  if (cfg.threads > 0) return cfg.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

Design evaluate_bounds(const ExperimentConfig& cfg) { return evaluate(cfg); }

Design resolve_design(const ExperimentConfig& cfg) {
  Design d = evaluate(cfg);
  if (!d.eval.feasible || d.eval.schedule.m == 0) {
    std::string msg = "infeasible design";
    for (const auto& s : d.diagnostics) msg += "; " + s;
    throw InfeasibleError(msg);
  }
  return d;
}

std::string schedule_csv(const DecoderSchedule& sc) {
  std::ostringstream os;
  os.precision(12);
  os << "k,q1k,qk,lambda_kk,wk,sk\n";
  for (std::uint64_t k = 0; k < sc.m; ++k)
    os << k + 1 << ',' << sc.q1[k] << ',' << sc.q[k] << ',' << sc.lambda_kk[k] << ','
       << sc.w[k] << ',' << sc.s[k] << '\n';
  return os.str();
}

TrialRecord run_trial(const ExperimentConfig& cfg, const Design& d, std::uint64_t trial,
                      double threshold, DecodeOutcome* keep) {
  (void)threshold;
  const auto& code = d.code;
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = CounterRng::derive(cfg.seed, stream_tag::trial, trial).key();
  const std::uint64_t dict_seed = rec.seed;
  const std::uint64_t msg_seed = CounterRng::derive(rec.seed, stream_tag::message).key();
  const std::uint64_t noise_seed = CounterRng::derive(rec.seed, stream_tag::noise).key();
  const std::uint64_t sample_seed =
      CounterRng::derive(rec.seed, stream_tag::deferred_projection).key();

  CoefficientVector beta;
  std::vector<gf_elem> outer_msg;
  std::optional<RsCode> rs;
  if (cfg.outer) {
    const double delta = cfg.outer_delta ? *cfg.outer_delta : d.eval.delta_mis;
    if (!(delta >= 0.0 && delta < 1.0))
      throw DomainError("outer code: delta_mis " + fmt(delta) + " leaves no redundancy budget");
    const auto cr = composite_rate(code.rate, delta, code.L);
    if (cr.k_rs == 0) throw DomainError("outer code: dimension would be zero");
    rs.emplace(code.log2_M, code.L, cr.k_rs);
    const auto st = CounterRng::derive(rec.seed, stream_tag::outer_message).stream(0);
    outer_msg.resize(cr.k_rs);
    for (std::uint64_t i = 0; i < cr.k_rs; ++i)
      outer_msg[i] = static_cast<gf_elem>(st.bits(i) & (code.M - 1));
    const auto cw = rs_encode(outer_msg, *rs);
    beta.index.assign(cw.begin(), cw.end());
  } else {
    beta = random_message(code, msg_seed);
  }

  DecodeOutcome out;
  if (cfg.engine == Engine::explicit_dictionary) {
    const auto dict = generate_dictionary(code, dict_seed);
    auto y = codeword(dict, beta, d.alloc);
    if (!cfg.noiseless) add_noise(y, d.channel, noise_seed);
    out = adaptive_decode(dict, y, d.eval.schedule, d.alloc);
  } else {
    DeferredColumns src(code, beta, dict_seed, sample_seed);
    const auto y = src.received(d.alloc, d.channel, noise_seed, !cfg.noiseless);
    out = adaptive_decode(src, y, d.eval.schedule, d.alloc);
  }
  tally_mistakes(out, beta, d.alloc, code.M);
  rec.delta_mis = out.delta_mis;
  rec.delta_err = out.delta_err;
  rec.delta_erase = out.delta_erase;
  rec.steps = out.steps_used;
  rec.q_hat = out.q_hat;
  rec.f_hat = out.f_hat;
  rec.work = out.work;

  if (rs) {
    std::vector<gf_elem> received(code.L, 0);
    std::vector<std::uint8_t> erased(code.L, 0);
    for (std::uint64_t l = 0; l < code.L; ++l) {
      if (out.decided[l] >= 0) received[l] = static_cast<gf_elem>(out.decided[l]);
      else erased[l] = 1;
    }
    const auto res = rs_decode(received, erased, *rs);
    rec.composite_ok = res.ok && res.message == outer_msg ? 1 : 0;
  }
  if (keep) *keep = std::move(out);
  return rec;
}

MonteCarloSummary summarize(const std::vector<TrialRecord>& records, double threshold) {
  MonteCarloSummary s;
  s.threshold = threshold;
  s.trials = records.size();
  if (records.empty()) return s;
  double sum = 0.0, steps = 0.0;
  for (const auto& r : records) {
    sum += r.delta_mis;
    steps += static_cast<double>(r.steps);
    s.max_delta_mis = std::max(s.max_delta_mis, r.delta_mis);
    if (r.delta_mis > threshold) ++s.exceedances;
    if (r.composite_ok >= 0) {
      ++s.composite_trials;
      if (r.composite_ok == 0) ++s.composite_failures;
    }
    s.total_work += r.work;
  }
  const double n = static_cast<double>(s.trials);
  s.mean_delta_mis = sum / n;
  s.mean_steps = steps / n;
  const double p = static_cast<double>(s.exceedances) / n;
  s.exceedance_rate = p;
  s.standard_error = std::sqrt(p * (1.0 - p) / n);
  double centre = 0.0;
  const double half = wilson_half(p, n, 1.959963984540054, centre);
  s.ci_low = std::max(0.0, centre - half);
  s.ci_high = std::min(1.0, centre + half);
  return s;
}

MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg, const Design& design,
                                 const MonteCarloOptions& opt) {
  validate(cfg);
  if (design.eval.schedule.m == 0) throw InfeasibleError("run_monte_carlo: empty schedule");
  const double threshold = cfg.mistake_target ? *cfg.mistake_target : design.eval.delta_mis;
  std::vector<std::optional<TrialRecord>> slots(cfg.trials);
  std::atomic<std::uint64_t> next{0}, exceed{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::uint64_t t = next.fetch_add(1);
      if (t >= cfg.trials) return;
      try {
        auto rec = run_trial(cfg, design, t, threshold);
        if (rec.delta_mis > threshold) {
          const auto e = exceed.fetch_add(1) + 1;
          if (opt.stop_after_exceedances > 0 && e > opt.stop_after_exceedances) stop = true;
        }
        slots[t] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };
  const auto workers = std::min<std::uint64_t>(worker_count(cfg), cfg.trials);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::uint64_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  MonteCarloResult res;
  res.design = design;
  for (auto& s : slots)
    if (s) res.records.push_back(std::move(*s));
  res.summary = summarize(res.records, threshold);
  res.summary.stopped_early = res.records.size() < cfg.trials;
  return res;
}

MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg) {
  return run_monte_carlo(cfg, resolve_design(cfg));
}

std::string trials_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os.precision(17);
  os << "trial,seed,delta_mis,delta_err,delta_erase,steps,composite_ok\n";
  for (const auto& r : records) {
    os << r.trial << ',' << r.seed << ',' << r.delta_mis << ',' << r.delta_err << ','
       << r.delta_erase << ',' << r.steps << ',';
    if (r.composite_ok < 0) os << "na";
    else os << r.composite_ok;
    os << '\n';
  }
  return os.str();
}

std::vector<EnvelopePoint> envelope_search(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.envelope_M.empty()) throw DomainError("config: envelope_M is empty");
  const auto channel = derive_channel(cfg.snr);
  const double C = channel.capacity_nats;
  std::vector<EnvelopePoint> points;
  for (std::uint64_t M : cfg.envelope_M) {
    const std::uint64_t L = cfg.L == 0 ? M : cfg.L;
    EnvelopePoint best;
    best.M = M;
    best.mode = cfg.envelope_mode;
    const auto feasible = [&](double R, EnvelopePoint& out) {
      ExperimentConfig c = cfg;
      c.M = M;
      c.L = L;
      c.rate = R;
      c.rate_unit = RateUnit::nats;
      c.mode = cfg.envelope_mode == EnvelopeMode::bounds ? BoundMode::finite
                                                         : BoundMode::large_L;
      Design d = evaluate(c);
      if (!d.eval.feasible || d.eval.schedule.m == 0) return false;
      out.rate_nats = d.code.rate;
      out.point = d.eval.point;
      out.delta_mis = d.eval.delta_mis;
      if (cfg.envelope_mode != EnvelopeMode::simulation)
        return d.eval.delta_mis <= cfg.envelope_target;
      c.mistake_target = cfg.envelope_target;
      c.outer = false;
      MonteCarloOptions mo;
      mo.stop_after_exceedances = cfg.max_failures;
      const auto mc = run_monte_carlo(c, d, mo);
      out.failures = mc.summary.exceedances;
      out.trials = mc.summary.trials;
      return mc.summary.exceedances <= cfg.max_failures;
    };
    double lo = 0.0, hi = C;
    EnvelopePoint cand;
    if (cfg.envelope_mode == EnvelopeMode::simulation) {
      // The design picked at each rate changes with the rate, so the pass
      // region need not be an interval. Take the largest passing rate on a
      // grid scanned from the top, then bisect inside that cell only.
      const double step = std::max(cfg.resolution, C / 100.0);
      lo = hi = 0.0;
      for (double R = C - step; R > 0.5 * step; R -= step) {
        cand = EnvelopePoint{};
        if (feasible(R, cand)) {
          cand.M = M;
          cand.mode = cfg.envelope_mode;
          best = cand;
          lo = R;
          hi = R + step;
          break;
        }
      }
    }
    while (hi - lo > cfg.resolution) {
      const double mid = 0.5 * (lo + hi);
      cand = EnvelopePoint{};
      if (feasible(mid, cand)) {
        lo = mid;
        cand.M = M;
        cand.mode = cfg.envelope_mode;
        best = cand;
      } else {
        hi = mid;
      }
    }
    best.rate_bits = nats_to_bits(best.rate_nats);
    best.ratio_to_capacity = best.rate_nats / C;
    points.push_back(best);
  }
  return points;
}

std::string envelope_csv(const std::vector<EnvelopePoint>& points) {
  std::ostringstream os;
  os.precision(12);
  os << "M,rate_nats,rate_bits,ratio_to_capacity,mode\n";
  for (const auto& p : points)
    os << p.M << ',' << p.rate_nats << ',' << p.rate_bits << ',' << p.ratio_to_capacity
       << ',' << to_string(p.mode) << '\n';
  return os.str();
}

DemoResult run_demo(const ExperimentConfig& cfg) {
  DemoResult r;
  r.design = resolve_design(cfg);
  const auto& code = r.design.code;
  if (!cfg.message.empty()) {
    r.sent_bits = bits_from_string(cfg.message);
    r.truth = encode(r.sent_bits, code);
  } else {
    r.truth = random_message(code, CounterRng::derive(cfg.seed, stream_tag::message).key());
    r.sent_bits = decode_bits(r.truth, code);
  }
  const std::uint64_t noise_seed = CounterRng::derive(cfg.seed, stream_tag::noise).key();
  if (cfg.engine == Engine::explicit_dictionary) {
    const auto dict = generate_dictionary(code, cfg.seed);
    auto y = codeword(dict, r.truth, r.design.alloc);
    if (!cfg.noiseless) add_noise(y, r.design.channel, noise_seed);
    r.outcome = adaptive_decode(dict, y, r.design.eval.schedule, r.design.alloc);
  } else {
    DeferredColumns src(code, r.truth, cfg.seed,
                        CounterRng::derive(cfg.seed, stream_tag::deferred_projection).key());
    const auto y = src.received(r.design.alloc, r.design.channel, noise_seed, !cfg.noiseless);
    r.outcome = adaptive_decode(src, y, r.design.eval.schedule, r.design.alloc);
  }
  tally_mistakes(r.outcome, r.truth, r.design.alloc, code.M);
  CoefficientVector dec;
  dec.index.resize(code.L);
  for (std::uint64_t l = 0; l < code.L; ++l)
    dec.index[l] = r.outcome.decided[l] >= 0 ? static_cast<std::uint64_t>(r.outcome.decided[l]) : 0;
  r.decoded_bits = decode_bits(dec, code);
  return r;
}

std::string design_json(const Design& d) { return design_to_json(d).dump(2); }

std::string monte_carlo_json(const MonteCarloResult& r) {
  const auto& s = r.summary;
  json j = design_to_json(r.design);
  j["summary"] = {{"trials", s.trials},
                  {"threshold", s.threshold},
                  {"exceedances", s.exceedances},
                  {"exceedance_rate", s.exceedance_rate},
                  {"standard_error", s.standard_error},
                  {"ci95", {s.ci_low, s.ci_high}},
                  {"p_e_bound", r.design.eval.p_e.total},
                  {"mean_delta_mis", s.mean_delta_mis},
                  {"max_delta_mis", s.max_delta_mis},
                  {"mean_steps", s.mean_steps},
                  {"composite_trials", s.composite_trials},
                  {"composite_failures", s.composite_failures},
                  {"total_work", s.total_work},
                  {"stopped_early", s.stopped_early}};
  return j.dump(2);
}

std::string envelope_json(const std::vector<EnvelopePoint>& points) {
  json arr = json::array();
  for (const auto& p : points)
    arr.push_back({{"M", p.M},
                   {"rate_nats", p.rate_nats},
                   {"rate_bits", p.rate_bits},
                   {"ratio_to_capacity", p.ratio_to_capacity},
                   {"mode", to_string(p.mode)},
                   {"allocation", to_string(p.point.kind)},
                   {"a", p.point.a},
                   {"u", p.point.u},
                   {"gamma", p.point.gamma},
                   {"delta_mis", p.delta_mis},
                   {"failures", p.failures},
                   {"trials", p.trials}});
  return json{{"envelope", arr}}.dump(2);
}

std::string demo_json(const DemoResult& r) {
  json j = design_to_json(r.design);
  const auto& o = r.outcome;
  std::vector<std::string> status;
  for (auto s : o.status) status.push_back(to_string(s));
  j["decode"] = {{"sent_bits", bits_to_string(r.sent_bits)},
                 {"decoded_bits", bits_to_string(r.decoded_bits)},
                 {"exact", r.sent_bits == r.decoded_bits && o.delta_mis == 0.0},
                 {"delta_mis", o.delta_mis},
                 {"delta_err", o.delta_err},
                 {"delta_erase", o.delta_erase},
                 {"steps_used", o.steps_used},
                 {"stop", to_string(o.stop)},
                 {"q_hat", o.q_hat},
                 {"f_hat", o.f_hat},
                 {"section_status", status}};
  j["trace"] = json::array();
  for (const auto& t : o.trace)
    j["trace"].push_back({{"step", t.step},
                          {"size1k", t.size1k},
                          {"qhat", t.q_hat},
                          {"fhat", t.f_hat},
                          {"candidates", t.candidates},
                          {"selected", t.selected}});
  return j.dump(2);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f.flush()) throw IoError("write to '" + path + "' failed");
}

}  // namespace superpose
