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


#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "superpose/error.hpp"
#include "superpose/harness.hpp"

using namespace superpose;
using nlohmann::json;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.snr = 7.0;
  c.M = 16;
  c.L = 16;
  c.rate = 0.4;
  c.rate_unit = RateUnit::capacity;
  c.mode = BoundMode::large_L;
  c.grid.points = 4;
  c.grid.refinements = 1;
  c.trials = 40;
  c.seed = 9;
  c.threads = 1;
  return c;
}

// At this rate the detection curve is 1 to double precision from the first
// step, so a noiseless channel must decode exactly.
ExperimentConfig noiseless_config() {
  auto c = small_config();
  c.snr = 15.0;
  c.rate = 0.01;
  c.rate_unit = RateUnit::nats;
  c.noiseless = true;
  c.trials = 10;
  return c;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(R"({
    "snr": 15, "M": 256, "L": 200, "rate": 1.2, "rate_unit": "bits",
    "allocation": "exponential", "a": 1.25, "eta": 0.01, "rho": 2, "h": 0.05,
    "mode": "large_L", "pe_target": 0.01,
    "grid": {"points": 7, "refinements": 3, "a_min": 0.5, "a_max": 2.5,
             "surrogate_sections": 128},
    "trials": 12, "seed": 5, "engine": "explicit", "noiseless": true,
    "mistake_target": 0.1, "threads": 2, "outer": true, "outer_delta": 0.2,
    "envelope_M": [16, 32], "envelope_mode": "simulation", "envelope_target": 0.05,
    "max_failures": 3, "resolution": 0.01, "message": "0110",
    "outputs": {"trials_csv": "t.csv", "summary_json": "s.json"}
  })");
  CHECK(c.snr == 15.0);
  CHECK(c.M == 256);
  CHECK(c.sections() == 200);
  CHECK(c.rate_unit == RateUnit::bits);
  CHECK(c.allocation == AllocationKind::exponential);
  CHECK(c.threshold == ThresholdChoice::value);
  CHECK(c.a == 1.25);
  CHECK(c.eta.value() == 0.01);
  CHECK(c.rho.value() == 2.0);
  CHECK(c.h.value() == 0.05);
  CHECK(c.mode == BoundMode::large_L);
  CHECK(c.grid.points == 7);
  CHECK(c.grid.refinements == 3);
  CHECK(c.grid.surrogate_sections == 128);
  CHECK(c.engine == Engine::explicit_dictionary);
  CHECK(c.noiseless);
  CHECK(c.mistake_target.value() == 0.1);
  CHECK(c.outer);
  CHECK(c.outer_delta.value() == 0.2);
  CHECK(c.envelope_M == std::vector<std::uint64_t>{16, 32});
  CHECK(c.envelope_mode == EnvelopeMode::simulation);
  CHECK(c.max_failures == 3);
  CHECK(c.message == "0110");
  CHECK(c.outputs.trials_csv == "t.csv");
  CHECK(c.outputs.summary_json == "s.json");

  // Serialization round trip.
  const auto again = parse_config(config_to_json(c));
  CHECK(json::parse(config_to_json(again)) == json::parse(config_to_json(c)));

  CHECK(parse_config(R"({"a": "auto"})").threshold == ThresholdChoice::recipe);
  CHECK(parse_config(R"({"a": "grid"})").threshold == ThresholdChoice::grid);
  CHECK(parse_config("{}").trials == ExperimentConfig{}.trials);
  const auto autos = parse_config(R"({"eta": "auto", "rho": "auto", "h": "auto"})");
  CHECK_FALSE(autos.eta.has_value());
  CHECK_FALSE(autos.rho.has_value());
  CHECK_FALSE(autos.h.has_value());
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{not json"), DomainError);
  CHECK_THROWS_AS(parse_config(R"({"snr": "high"})"), DomainError);
  CHECK_THROWS_AS(parse_config(R"({"unknown_key": 1})"), DomainError);
  CHECK_THROWS_AS(parse_config(R"({"rate_unit": "furlongs"})"), DomainError);
  CHECK_THROWS_AS(parse_config(R"({"allocation": "random"})"), DomainError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), DomainError);
  CHECK_THROWS_AS(validate(parse_config(R"({"eta": 0.1})")), DomainError);
  auto c = small_config();
  c.trials = 0;
  CHECK_THROWS_AS(validate(c), DomainError);
  c = small_config();
  c.M = 12;
  CHECK_THROWS_AS(validate(c), DomainError);
  c = small_config();
  c.snr = -1.0;
  CHECK_THROWS_AS(validate(c), DomainError);
  c = small_config();
  c.L = 0;
  c.outer = true;
  CHECK_THROWS_AS(validate(c), DomainError);
  c = small_config();
  c.envelope_target = 1.5;
  CHECK_THROWS_AS(validate(c), DomainError);
}

TEST_CASE("rate units") {
  auto c = small_config();
  const auto ch = derive_channel(7.0);
  c.rate = 0.5;
  c.rate_unit = RateUnit::capacity;
  CHECK(rate_in_nats(c, ch) == doctest::Approx(0.5 * ch.capacity_nats));
  c.rate_unit = RateUnit::bits;
  CHECK(rate_in_nats(c, ch) == doctest::Approx(0.5 * std::log(2.0)));
  c.rate_unit = RateUnit::nats;
  CHECK(rate_in_nats(c, ch) == 0.5);
}

TEST_CASE("worker count honours the environment") {
  auto c = small_config();
  c.threads = 3;
  unsetenv("SUPERPOSE_THREADS");
  CHECK(worker_count(c) == 3);
  setenv("SUPERPOSE_THREADS", "5", 1);
  CHECK(worker_count(c) == 5);
  setenv("SUPERPOSE_THREADS", "junk", 1);
  CHECK(worker_count(c) == 3);
  unsetenv("SUPERPOSE_THREADS");
}

TEST_CASE("bounds evaluation") {
  auto c = small_config();
  c.M = 64;
  c.L = 64;
  const auto d = evaluate_bounds(c);
  REQUIRE(d.eval.feasible);
  const auto& s = d.eval.schedule;
  CHECK(s.m >= 1);
  // Large-L designs drop the fluctuation margins, so the bound is vacuous.
  CHECK(d.eval.p_e.total >= 1.0);
  const auto rows = parse_csv(schedule_csv(s));
  REQUIRE(rows.size() == s.m + 1);
  CHECK(rows[0] == std::vector<std::string>{"k", "q1k", "qk", "lambda_kk", "wk", "sk"});
  for (std::uint64_t k = 1; k <= s.m; ++k)
    CHECK(std::stod(rows[k][1]) == doctest::Approx(s.q1[k - 1]).epsilon(1e-10));
  const auto j = json::parse(design_json(d));
  CHECK(j.contains("design"));
  CHECK(j["design"]["steps"] == s.m);

  c.rate = 1.2;
  c.rate_unit = RateUnit::nats;
  const auto bad = evaluate_bounds(c);
  CHECK_FALSE(bad.eval.feasible);
  REQUIRE_FALSE(bad.diagnostics.empty());
  CHECK(bad.diagnostics[0].find("gap") != std::string::npos);
  CHECK_THROWS_AS(resolve_design(c), InfeasibleError);
}

TEST_CASE("noiseless trials decode exactly") {
  for (auto engine : {Engine::deferred, Engine::explicit_dictionary}) {
    auto c = noiseless_config();
    c.engine = engine;
    const auto r = run_monte_carlo(c);
    REQUIRE(r.records.size() == 10);
    for (const auto& t : r.records) CHECK(t.delta_mis == 0.0);
    CHECK(r.summary.exceedances == 0);
  }
}

TEST_CASE("monte carlo determinism across runs and worker counts") {
  auto c = small_config();
  const auto a = run_monte_carlo(c);
  const auto b = run_monte_carlo(c);
  CHECK(trials_csv(a.records) == trials_csv(b.records));
  c.threads = 3;
  const auto t3 = run_monte_carlo(c);
  CHECK(trials_csv(a.records) == trials_csv(t3.records));
  c.seed = 10;
  const auto other = run_monte_carlo(c);
  CHECK(trials_csv(a.records) != trials_csv(other.records));
  // A trial is reproducible alone from the master seed and its index.
  const auto single = run_trial(c, other.design, 7, other.summary.threshold);
  CHECK(single.delta_mis == other.records[7].delta_mis);
  CHECK(single.seed == other.records[7].seed);
}

TEST_CASE("summary is recomputable from the trial CSV") {
  auto c = small_config();
  c.trials = 200;
  c.threads = 2;
  const auto r = run_monte_carlo(c);
  const auto rows = parse_csv(trials_csv(r.records));
  REQUIRE(rows.size() == 201);
  CHECK(rows[0] == std::vector<std::string>{"trial", "seed", "delta_mis", "delta_err",
                                            "delta_erase", "steps", "composite_ok"});
  double sum = 0.0, mx = 0.0, steps = 0.0;
  std::uint64_t exceed = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stoull(rows[i][0]) == i - 1);
    const double dm = std::stod(rows[i][2]);
    CHECK(dm == doctest::Approx(2.0 * std::stod(rows[i][3]) + std::stod(rows[i][4])));
    sum += dm;
    mx = std::max(mx, dm);
    steps += std::stod(rows[i][5]);
    if (dm > r.summary.threshold) ++exceed;
    CHECK(rows[i][6] == "na");
  }
  const auto& s = r.summary;
  CHECK(s.trials == 200);
  CHECK(s.exceedances == exceed);
  CHECK(s.mean_delta_mis == doctest::Approx(sum / 200).epsilon(1e-12));
  CHECK(s.max_delta_mis == mx);
  CHECK(s.mean_steps == doctest::Approx(steps / 200));
  const double p = static_cast<double>(exceed) / 200;
  CHECK(s.exceedance_rate == doctest::Approx(p));
  CHECK(s.standard_error == doctest::Approx(std::sqrt(p * (1 - p) / 200)));
  CHECK(s.ci_low <= p);
  CHECK(s.ci_high >= p);
  const auto j = json::parse(monte_carlo_json(r));
  CHECK(j["summary"]["exceedances"] == exceed);
}

TEST_CASE("outer code composes with the inner decoder") {
  auto c = small_config();
  c.L = 15;
  c.outer = true;
  c.outer_delta = 0.8;
  c.trials = 100;
  const auto r = run_monte_carlo(c);
  std::uint64_t covered = 0;
  for (const auto& t : r.records) {
    CHECK(t.composite_ok >= 0);
    if (t.delta_mis <= 0.8) {
      ++covered;
      CHECK(t.composite_ok == 1);
    }
  }
  CHECK(covered > 50);
  CHECK(r.summary.composite_trials == 100);
}

TEST_CASE("decoder work follows n L M m") {
  // work / (n N steps) stays within a factor 2 as each dimension doubles.
  auto base = small_config();
  base.trials = 20;
  base.rate = 0.3;
  const auto ratio = [](const ExperimentConfig& c) {
    const auto r = run_monte_carlo(c);
    double total = 0.0;
    for (const auto& t : r.records)
      total += static_cast<double>(t.work) /
               (static_cast<double>(r.design.code.n) * static_cast<double>(r.design.code.N) *
                static_cast<double>(t.steps));
    return total / static_cast<double>(r.records.size());
  };
  const double r0 = ratio(base);
  auto cl = base;
  cl.L = 32;
  auto cm = base;
  cm.M = 32;
  auto cn = base;
  cn.rate = 0.15;
  for (const auto& c : {cl, cm, cn}) {
    const double r1 = ratio(c);
    CHECK(r1 / r0 < 2.0);
    CHECK(r0 / r1 < 2.0);
  }
}

TEST_CASE("envelope search") {
  auto c = small_config();
  c.L = 0;
  c.envelope_M = {16, 64, 256};
  c.envelope_mode = EnvelopeMode::large_L;
  c.resolution = 5e-3;
  const auto pts = envelope_search(c);
  REQUIRE(pts.size() == 3);
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].rate_nats >= pts[i - 1].rate_nats);
  for (const auto& p : pts) {
    CHECK(p.rate_nats > 0.0);
    CHECK(p.ratio_to_capacity < 1.0);
    CHECK(p.rate_bits == doctest::Approx(nats_to_bits(p.rate_nats)));
  }
  const auto rows = parse_csv(envelope_csv(pts));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] ==
        std::vector<std::string>{"M", "rate_nats", "rate_bits", "ratio_to_capacity", "mode"});
  CHECK(rows[1][4] == "large_L");
  c.envelope_M.clear();
  CHECK_THROWS_AS(envelope_search(c), DomainError);
}

TEST_CASE("simulation envelope is the top passing rate of the scan") {
  auto c = small_config();
  c.envelope_M = {16};
  c.envelope_mode = EnvelopeMode::simulation;
  c.envelope_target = 0.2;
  c.max_failures = 2;
  c.resolution = 5e-3;
  const auto p = envelope_search(c).at(0);
  REQUIRE(p.rate_nats > 0.0);
  CHECK(p.failures <= 2);

  const double C = derive_channel(c.snr).capacity_nats;
  const auto passes = [&](double R) {
    auto d = c;
    d.rate = R;
    d.rate_unit = RateUnit::nats;
    d.mistake_target = c.envelope_target;
    const Design design = evaluate_bounds(d);
    if (!design.eval.feasible || design.eval.schedule.m == 0) return false;
    MonteCarloOptions mo;
    mo.stop_after_exceedances = c.max_failures;
    return run_monte_carlo(d, design, mo).summary.exceedances <= c.max_failures;
  };
  CHECK(passes(p.rate_nats));
  // The reported rate lies in the cell above the first passing grid rate.
  // Rates are nominal on the grid; the report carries the integer-n rate.
  const double step = C / 100.0;
  double first = 0.0;
  for (double R = C - step; R > 0.5 * step; R -= step)
    if (passes(R)) {
      first = R;
      break;
    }
  REQUIRE(first > 0.0);
  auto d = c;
  d.rate = first;
  d.rate_unit = RateUnit::nats;
  CHECK(p.rate_nats >= evaluate_bounds(d).code.rate - 1e-12);
  CHECK(p.rate_nats < first + step);
}

TEST_CASE("demo round trip") {
  auto c = noiseless_config();
  c.message = "0110100111000101";  // 4 bits per section, L = 4
  c.L = 4;
  const auto d = run_demo(c);
  CHECK(bits_to_string(d.sent_bits) == c.message);
  CHECK(d.decoded_bits == d.sent_bits);
  CHECK(d.outcome.delta_mis == 0.0);
  const auto j = json::parse(demo_json(d));
  CHECK(j.contains("trace"));
  c.message = "011";
  CHECK_THROWS_AS(run_demo(c), DomainError);
}

TEST_CASE("output files") {
  const std::string dir = (std::filesystem::temp_directory_path() / "superpose_harness_out").string();
  std::filesystem::create_directories(dir);
  write_text_file(dir + "/x.txt", "hello\n");
  std::ifstream in(dir + "/x.txt");
  std::string s;
  std::getline(in, s);
  CHECK(s == "hello");
  CHECK_THROWS_AS(write_text_file("/nonexistent_dir/for/sure/x.txt", "x"), IoError);
}
