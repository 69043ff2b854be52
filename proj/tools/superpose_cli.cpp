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

// Command-line front end. Flags mirror the experiment fields; a --config
// JSON file overrides them. Exit codes: 0 success, 2 invalid config,
// 3 infeasible schedule, 4 I/O failure, 1 anything else.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "superpose/superpose.h"

namespace {

using nlohmann::json;

int exit_code(sp_status s) {
  switch (s) {
    case SP_OK: return 0;
    case SP_INVALID_CONFIG:
    case SP_INVALID_ARGUMENT: return 2;
    case SP_INFEASIBLE: return 3;
    case SP_IO: return 4;
    default: return 1;
  }
}

// "auto"/"grid" stay strings, anything numeric becomes a number.
json number_or_word(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() && *end == '\0') return v;
  return s;
}

struct Flags {
  std::vector<std::pair<std::string, CLI::Option*>> numbers, integers, words, mixed;
  CLI::Option* noiseless = nullptr;
  CLI::Option* outer = nullptr;
  CLI::Option* envelope_M = nullptr;
  std::vector<std::pair<std::string, CLI::Option*>> outputs;
  std::vector<std::pair<std::string, CLI::Option*>> grid;
};

struct Values {
  double snr, rate, u, gamma, pe_target, a_min, a_max, envelope_target, resolution;
  std::uint64_t M, L, trials, seed, threads, max_failures, points, surrogate;
  int refinements;
  std::string rate_unit, allocation, mode, engine, envelope_mode, message;
  std::string a, eta, rho, h, mistake_target, outer_delta;
  std::string trials_csv, schedule_csv, envelope_csv, trace_csv, summary_json;
  std::vector<std::uint64_t> envelope_M;
  std::string config;
};

void add_flags(CLI::App* sub, Values& v, Flags& f) {
  const auto num = [&](const char* name, double& dst, const char* help) {
    f.numbers.emplace_back(name, sub->add_option(std::string("--") + name, dst, help));
  };
  const auto integer = [&](const char* name, std::uint64_t& dst, const char* help) {
    f.integers.emplace_back(name, sub->add_option(std::string("--") + name, dst, help));
  };
  const auto word = [&](const char* name, std::string& dst, const char* help) {
    f.words.emplace_back(name, sub->add_option(std::string("--") + name, dst, help));
  };
  const auto mixed = [&](const char* name, std::string& dst, const char* help) {
    f.mixed.emplace_back(name, sub->add_option(std::string("--") + name, dst, help));
  };
  num("snr", v.snr, "signal-to-noise ratio P/sigma^2");
  integer("M", v.M, "section size (power of two)");
  integer("L", v.L, "number of sections (0: L = M)");
  num("rate", v.rate, "code rate, unit given by --rate_unit");
  word("rate_unit", v.rate_unit, "nats | bits | capacity");
  word("allocation", v.allocation, "constant | exponential | leveled");
  num("u", v.u, "leveling floor of the leveled allocation");
  num("gamma", v.gamma, "decay of the leveled allocation, 0 <= gamma <= C");
  mixed("a", v.a, "threshold offset: number | auto | grid");
  mixed("eta", v.eta, "detection slack: number | auto");
  mixed("rho", v.rho, "false-alarm factor: number | auto");
  mixed("h", v.h, "norm slack: number | auto");
  word("mode", v.mode, "finite | large_L");
  num("pe_target", v.pe_target, "target for the error probability bound");
  integer("trials", v.trials, "Monte Carlo trials");
  integer("seed", v.seed, "master seed");
  word("engine", v.engine, "deferred | explicit");
  mixed("mistake_target", v.mistake_target, "counted section mistake level: number | auto");
  integer("threads", v.threads, "worker threads (SUPERPOSE_THREADS overrides)");
  mixed("outer_delta", v.outer_delta, "outer code redundancy: number | auto");
  word("envelope_mode", v.envelope_mode, "bounds | simulation | large_L");
  num("envelope_target", v.envelope_target, "section error target of the envelope");
  integer("max_failures", v.max_failures, "allowed failing replicates in simulation mode");
  num("resolution", v.resolution, "rate bisection resolution in nats");
  word("message", v.message, "demo message as a 0/1 string");
  f.noiseless = sub->add_flag("--noiseless", "transmit without noise");
  f.outer = sub->add_flag("--outer", "wrap the inner code in a Reed-Solomon outer code");
  f.envelope_M = sub->add_option("--envelope_M", v.envelope_M, "section sizes to sweep");
  f.grid.emplace_back("points", sub->add_option("--grid_points", v.points, "grid points per axis"));
  f.grid.emplace_back("refinements", sub->add_option("--grid_refinements", v.refinements,
                                                     "zoom levels after the coarse grid"));
  f.grid.emplace_back("a_min", sub->add_option("--grid_a_min", v.a_min, "smallest a searched"));
  f.grid.emplace_back("a_max", sub->add_option("--grid_a_max", v.a_max, "largest a searched"));
  f.grid.emplace_back("surrogate_sections",
                      sub->add_option("--grid_surrogate_sections", v.surrogate,
                                      "sections of the search-time detection curve"));
  const auto out = [&](const char* name, std::string& dst, const char* help) {
    f.outputs.emplace_back(name, sub->add_option(std::string("--") + name, dst, help));
  };
  out("trials_csv", v.trials_csv, "per-trial CSV path");
  out("schedule_csv", v.schedule_csv, "schedule CSV path");
  out("envelope_csv", v.envelope_csv, "envelope CSV path");
  out("trace_csv", v.trace_csv, "per-step trace CSV path");
  out("summary_json", v.summary_json, "JSON summary path (default: stdout only)");
  sub->add_option("--config", v.config, "JSON experiment file; overrides flags");
}

json flags_to_json(const Values& v, const Flags& f) {
  json j = json::object();
  const auto present = [](CLI::Option* o) { return o && o->count() > 0; };
  for (const auto& [name, o] : f.numbers)
    if (present(o)) j[name] = number_or_word(o->as<std::string>());
  for (const auto& [name, o] : f.integers)
    if (present(o)) j[name] = o->as<std::uint64_t>();
  for (const auto& [name, o] : f.words)
    if (present(o)) j[name] = o->as<std::string>();
  for (const auto& [name, o] : f.mixed)
    if (present(o)) j[name] = number_or_word(o->as<std::string>());
  if (present(f.noiseless)) j["noiseless"] = true;
  if (present(f.outer)) j["outer"] = true;
  if (present(f.envelope_M)) j["envelope_M"] = v.envelope_M;
  for (const auto& [name, o] : f.grid)
    if (present(o)) j["grid"][name] = number_or_word(o->as<std::string>());
  for (const auto& [name, o] : f.outputs)
    if (present(o)) j["outputs"][name] = o->as<std::string>();
  return j;
}

int run(const std::string& command, const json& cfg) {
  sp_experiment* exp = nullptr;
  sp_status s = sp_experiment_create(cfg.dump().c_str(), &exp);
  if (s != SP_OK) {
    std::cerr << "error: " << sp_last_error() << '\n';
    return exit_code(s);
  }
  sp_report* rep = nullptr;
  if (command == "bounds") s = sp_run_bounds(exp, &rep);
  else if (command == "simulate") s = sp_run_simulate(exp, &rep);
  else if (command == "envelope") s = sp_run_envelope(exp, &rep);
  else s = sp_run_demo(exp, &rep);
  const std::string err = sp_last_error();
  if (rep) {
    std::cout << sp_report_json(rep) << '\n';
    const sp_status w = sp_report_write(rep);
    if (w != SP_OK && s == SP_OK) {
      s = w;
      std::cerr << "error: " << sp_last_error() << '\n';
    }
  }
  if (s != SP_OK && !err.empty()) std::cerr << "error: " << err << '\n';
  sp_report_free(rep);
  sp_experiment_free(exp);
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse superposition codes: bounds, simulation and envelopes"};
  app.require_subcommand(1);
  const char* commands[][2] = {
      {"bounds", "evaluate the reliability bounds and the decoding schedule"},
      {"simulate", "Monte Carlo simulation of the adaptive decoder"},
      {"envelope", "largest rate per section size meeting a section error target"},
      {"demo", "decode one message and print the step trace"}};
  std::vector<Values> values(4);
  std::vector<Flags> flags(4);
  std::vector<CLI::App*> subs;
  for (int i = 0; i < 4; ++i) {
    subs.push_back(app.add_subcommand(commands[i][0], commands[i][1]));
    // --h mirrors the config field, so help is long-form only.
    subs.back()->set_help_flag("--help", "print this help message and exit");
    add_flags(subs.back(), values[i], flags[i]);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  for (int i = 0; i < 4; ++i) {
    if (!subs[i]->parsed()) continue;
    json cfg;
    try {
      cfg = flags_to_json(values[i], flags[i]);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
    if (!values[i].config.empty()) {
      std::ifstream in(values[i].config);
      if (!in) {
        std::cerr << "error: cannot read config file '" << values[i].config << "'\n";
        return 4;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      json file;
      try {
        file = json::parse(ss.str());
      } catch (const json::parse_error& e) {
        std::cerr << "error: config file is not valid JSON: " << e.what() << '\n';
        return 2;
      }
      if (!file.is_object()) {
        std::cerr << "error: config file must hold a JSON object\n";
        return 2;
      }
      cfg.merge_patch(file);
    }
    return run(commands[i][0], cfg);
  }
  return 1;
}
