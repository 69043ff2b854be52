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
#include <string>
#include <string_view>
#include <vector>

#include "superpose/analysis.hpp"
#include "superpose/codebook.hpp"
#include "superpose/decoder.hpp"
#include "superpose/model.hpp"

namespace superpose {

enum class RateUnit { nats, bits, capacity };
enum class Engine { deferred, explicit_dictionary };
// How the threshold a is chosen: given value, the closed-form recipe, or a
// grid search over (a, u, gamma).
enum class ThresholdChoice { value, recipe, grid };
enum class EnvelopeMode { bounds, simulation, large_L };

std::string to_string(EnvelopeMode m);

struct OutputPaths {
  std::string trials_csv;
  std::string schedule_csv;
  std::string envelope_csv;
  std::string trace_csv;
  std::string summary_json;
};

struct ExperimentConfig {
  double snr = 7.0;
  std::uint64_t M = 512;
  std::uint64_t L = 100;  // 0 means L = M
  double rate = 0.5;
  RateUnit rate_unit = RateUnit::capacity;

  AllocationKind allocation = AllocationKind::leveled;
  double u = 0.0;
  double gamma = 0.0;
  ThresholdChoice threshold = ThresholdChoice::grid;
  double a = 0.0;

  // Unset values are chosen so the three-term bound meets pe_target.
  std::optional<double> eta, rho, h;
  BoundMode mode = BoundMode::finite;
  double pe_target = 1e-3;
  SearchGrid grid;

  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  Engine engine = Engine::deferred;
  bool noiseless = false;
  // Section mistake level whose exceedance is counted; defaults to the
  // design's delta_mis.
  std::optional<double> mistake_target;
  std::uint64_t threads = 0;  // 0: hardware concurrency

  bool outer = false;
  std::optional<double> outer_delta;  // defaults to the design's delta_mis

  std::vector<std::uint64_t> envelope_M;
  EnvelopeMode envelope_mode = EnvelopeMode::large_L;
  double envelope_target = 0.1;
  std::uint64_t max_failures = 10;
  double resolution = 1e-3;  // nats

  std::string message;  // demo input bits; random when empty
  OutputPaths outputs;

  std::uint64_t sections() const { return L == 0 ? M : L; }
};

// Parses and validates a JSON object; unknown keys are rejected.
// Throws DomainError on any problem.
ExperimentConfig parse_config(std::string_view json_text);
std::string config_to_json(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

double rate_in_nats(const ExperimentConfig& cfg, const ChannelParams& channel);
std::uint64_t worker_count(const ExperimentConfig& cfg);

struct Design {
  ChannelParams channel;
  CodeParams code;
  PowerAllocation alloc;
  DesignEvaluation eval;
  std::uint64_t grid_points = 0;
  std::uint64_t evaluations = 0;
  std::vector<std::string> diagnostics;
};

// Resolves threshold, allocation and schedule. Throws InfeasibleError,
// with the failed precondition in the message, when no schedule exists.
Design resolve_design(const ExperimentConfig& cfg);

// Like resolve_design but keeps infeasible outcomes with diagnostics.
Design evaluate_bounds(const ExperimentConfig& cfg);

std::string schedule_csv(const DecoderSchedule& sc);

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  double delta_mis = 0.0;
  double delta_err = 0.0;
  double delta_erase = 0.0;
  std::uint64_t steps = 0;
  std::vector<double> q_hat;
  std::vector<double> f_hat;
  int composite_ok = -1;  // -1 when no outer code is used
  std::uint64_t work = 0;
};

struct MonteCarloSummary {
  std::uint64_t trials = 0;
  double threshold = 0.0;
  std::uint64_t exceedances = 0;
  double exceedance_rate = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;  // Wilson 95%
  double ci_high = 0.0;
  double mean_delta_mis = 0.0;
  double max_delta_mis = 0.0;
  double mean_steps = 0.0;
  std::uint64_t composite_trials = 0;
  std::uint64_t composite_failures = 0;
  std::uint64_t total_work = 0;
  bool stopped_early = false;
};

MonteCarloSummary summarize(const std::vector<TrialRecord>& records, double threshold);

struct MonteCarloResult {
  Design design;
  std::vector<TrialRecord> records;
  MonteCarloSummary summary;
};

struct MonteCarloOptions {
  // Stop once more than this many trials exceed the threshold (0: never).
  std::uint64_t stop_after_exceedances = 0;
};

TrialRecord run_trial(const ExperimentConfig& cfg, const Design& design,
                      std::uint64_t trial, double threshold,
                      DecodeOutcome* outcome = nullptr);
MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg, const Design& design,
                                 const MonteCarloOptions& opt = {});
MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg);

std::string trials_csv(const std::vector<TrialRecord>& records);

struct EnvelopePoint {
  std::uint64_t M = 0;
  double rate_nats = 0.0;
  double rate_bits = 0.0;
  double ratio_to_capacity = 0.0;
  EnvelopeMode mode = EnvelopeMode::large_L;
  DesignPoint point;
  double delta_mis = 0.0;
  std::uint64_t failures = 0;  // simulation mode
  std::uint64_t trials = 0;
};

// Largest rate per M meeting the target, by bisection over R.
std::vector<EnvelopePoint> envelope_search(const ExperimentConfig& cfg);
std::string envelope_csv(const std::vector<EnvelopePoint>& points);

struct DemoResult {
  Design design;
  CoefficientVector truth;
  DecodeOutcome outcome;
  std::vector<std::uint8_t> sent_bits;
  std::vector<std::uint8_t> decoded_bits;  // erased sections read as zero
};

DemoResult run_demo(const ExperimentConfig& cfg);

std::string design_json(const Design& d);
std::string monte_carlo_json(const MonteCarloResult& r);
std::string envelope_json(const std::vector<EnvelopePoint>& points);
std::string demo_json(const DemoResult& r);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace superpose
