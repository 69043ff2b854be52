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

#include "superpose/superpose.h"

#include <memory>
#include <new>
#include <optional>
#include <string>

#include "superpose/codebook.hpp"
#include "superpose/error.hpp"
#include "superpose/harness.hpp"
#include "superpose/model.hpp"

struct sp_experiment {
  superpose::ExperimentConfig config;
  std::string config_json;
};

struct sp_report {
  std::string json;
  std::optional<std::string> tables[4];
  superpose::OutputPaths paths;
};

namespace {

thread_local std::string last_error;

sp_status fail(sp_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

// Maps the current exception to a status. `domain` is the status used for
// domain errors, which differ between argument and configuration checks.
sp_status translate(sp_status domain) {
  try {
    throw;
  } catch (const superpose::Error& e) {
    switch (e.kind()) {
      case superpose::ErrorKind::domain:
      case superpose::ErrorKind::resource: return fail(domain, e.what());
      case superpose::ErrorKind::infeasible: return fail(SP_INFEASIBLE, e.what());
      case superpose::ErrorKind::numerical: return fail(SP_NUMERICAL, e.what());
      case superpose::ErrorKind::decode_failure: return fail(SP_DECODE_FAILURE, e.what());
      case superpose::ErrorKind::io: return fail(SP_IO, e.what());
    }
    return fail(SP_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SP_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SP_INTERNAL, e.what());
  } catch (...) {
    return fail(SP_INTERNAL, "unknown error");
  }
}

template <class F>
sp_status run(const sp_experiment* exp, sp_report** out, F&& body) {
  if (!exp || !out) return fail(SP_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    auto rep = std::make_unique<sp_report>();
    rep->paths = exp->config.outputs;
    const sp_status s = body(exp->config, *rep);
    *out = rep.release();
    if (s == SP_OK) last_error.clear();
    return s;
  } catch (...) {
    return translate(SP_INVALID_CONFIG);
  }
}

}  // namespace

extern "C" {

const char* sp_version(void) { return "0.1.0"; }

const char* sp_status_string(sp_status status) {
  switch (status) {
    case SP_OK: return "ok";
    case SP_INVALID_ARGUMENT: return "invalid argument";
    case SP_INVALID_CONFIG: return "invalid configuration";
    case SP_INFEASIBLE: return "infeasible";
    case SP_IO: return "i/o failure";
    case SP_NUMERICAL: return "numerical failure";
    case SP_DECODE_FAILURE: return "decode failure";
    case SP_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sp_last_error(void) { return last_error.c_str(); }

sp_status sp_experiment_create(const char* json, sp_experiment** out) {
  if (!json || !out) return fail(SP_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    auto exp = std::make_unique<sp_experiment>();
    exp->config = superpose::parse_config(json);
    exp->config_json = superpose::config_to_json(exp->config);
    *out = exp.release();
    last_error.clear();
    return SP_OK;
  } catch (...) {
    return translate(SP_INVALID_CONFIG);
  }
}

const char* sp_experiment_config(const sp_experiment* exp) {
  return exp ? exp->config_json.c_str() : nullptr;
}

void sp_experiment_free(sp_experiment* exp) { delete exp; }

sp_status sp_run_bounds(const sp_experiment* exp, sp_report** out) {
  return run(exp, out, [](const superpose::ExperimentConfig& cfg, sp_report& rep) {
    const auto d = superpose::evaluate_bounds(cfg);
    rep.json = superpose::design_json(d);
    if (d.eval.schedule.m > 0) rep.tables[SP_TABLE_SCHEDULE] = superpose::schedule_csv(d.eval.schedule);
    if (!d.eval.feasible) {
      std::string msg = "infeasible design";
      for (const auto& s : d.diagnostics) msg += "; " + s;
      return fail(SP_INFEASIBLE, msg);
    }
    return SP_OK;
  });
}

sp_status sp_run_simulate(const sp_experiment* exp, sp_report** out) {
  return run(exp, out, [](const superpose::ExperimentConfig& cfg, sp_report& rep) {
    const auto r = superpose::run_monte_carlo(cfg);
    rep.json = superpose::monte_carlo_json(r);
    rep.tables[SP_TABLE_TRIALS] = superpose::trials_csv(r.records);
    rep.tables[SP_TABLE_SCHEDULE] = superpose::schedule_csv(r.design.eval.schedule);
    return SP_OK;
  });
}

sp_status sp_run_envelope(const sp_experiment* exp, sp_report** out) {
  return run(exp, out, [](const superpose::ExperimentConfig& cfg, sp_report& rep) {
    const auto pts = superpose::envelope_search(cfg);
    rep.json = superpose::envelope_json(pts);
    rep.tables[SP_TABLE_ENVELOPE] = superpose::envelope_csv(pts);
    return SP_OK;
  });
}

sp_status sp_run_demo(const sp_experiment* exp, sp_report** out) {
  return run(exp, out, [](const superpose::ExperimentConfig& cfg, sp_report& rep) {
    const auto r = superpose::run_demo(cfg);
    rep.json = superpose::demo_json(r);
    rep.tables[SP_TABLE_SCHEDULE] = superpose::schedule_csv(r.design.eval.schedule);
    rep.tables[SP_TABLE_TRACE] = superpose::trace_csv(r.outcome);
    return SP_OK;
  });
}

const char* sp_report_json(const sp_report* report) {
  return report ? report->json.c_str() : nullptr;
}

const char* sp_report_csv(const sp_report* report, sp_table table) {
  if (!report || table < SP_TABLE_TRIALS || table > SP_TABLE_TRACE) return nullptr;
  const auto& t = report->tables[table];
  return t ? t->c_str() : nullptr;
}

sp_status sp_report_write(const sp_report* report) {
  if (!report) return fail(SP_INVALID_ARGUMENT, "null argument");
  try {
    const auto& p = report->paths;
    const std::string* paths[4] = {&p.trials_csv, &p.schedule_csv, &p.envelope_csv,
                                   &p.trace_csv};
    for (int i = 0; i < 4; ++i)
      if (report->tables[i] && !paths[i]->empty())
        superpose::write_text_file(*paths[i], *report->tables[i]);
    if (!p.summary_json.empty()) superpose::write_text_file(p.summary_json, report->json);
    return SP_OK;
  } catch (...) {
    return translate(SP_INVALID_ARGUMENT);
  }
}

void sp_report_free(sp_report* report) { delete report; }

sp_status sp_channel_capacity(double snr, double* nats, double* bits) {
  if (!nats || !bits) return fail(SP_INVALID_ARGUMENT, "null argument");
  try {
    const auto ch = superpose::derive_channel(snr);
    *nats = ch.capacity_nats;
    *bits = ch.capacity_bits();
    return SP_OK;
  } catch (...) {
    return translate(SP_INVALID_ARGUMENT);
  }
}

sp_status sp_dictionary_export(uint64_t L, uint64_t M, double rate_nats, uint64_t seed,
                               const char* path) {
  if (!path) return fail(SP_INVALID_ARGUMENT, "null argument");
  try {
    const auto code = superpose::make_code(L, M, rate_nats);
    superpose::export_dictionary(superpose::generate_dictionary(code, seed), path);
    return SP_OK;
  } catch (...) {
    return translate(SP_INVALID_ARGUMENT);
  }
}

}  // extern "C"
