#include "strongmin.h"

#include "strongmin/json_io.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <new>
#include <string>

using namespace strongmin;

struct sm_instance {
  ProblemInstance inst;
};

namespace {

thread_local std::string g_last_error;

sm_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return SM_ERR_INVALID_ARGUMENT;
    case ErrorKind::Parse: return SM_ERR_PARSE;
    case ErrorKind::Infeasible: return SM_ERR_INFEASIBLE;
    case ErrorKind::NumericalFailure: return SM_ERR_NUMERICAL;
    case ErrorKind::ContractViolation: return SM_ERR_CONTRACT;
    case ErrorKind::DegenerateInput: return SM_ERR_DEGENERATE;
    case ErrorKind::AssertionFailure: return SM_ERR_ASSERTION;
    case ErrorKind::Io: return SM_ERR_IO;
  }
  return SM_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
sm_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SM_ERR_INTERNAL;
  }
}

sm_status write_out(char** out, const std::string& text) {
  if (!out) {
    g_last_error = "null output pointer";
    return SM_ERR_INVALID_ARGUMENT;
  }
  *out = dup_string(text);
  if (!*out) {
    g_last_error = "allocation failure";
    return SM_ERR_INTERNAL;
  }
  return SM_OK;
}

CertifyOptions parse_options(const char* options_json) {
  if (!options_json || !*options_json) return {};
  return options_from_json(parse_json_text(options_json, "options"));
}

}  // namespace

extern "C" {

const char* sm_version(void) { return "strongmin 1.0.0"; }

const char* sm_last_error(void) { return g_last_error.c_str(); }

void sm_string_free(char* s) { delete[] s; }

sm_status sm_instance_parse_json(const char* instance_json, sm_instance** out) {
  return guarded([&]() -> sm_status {
    if (!instance_json || !out) {
      g_last_error = "null argument";
      return SM_ERR_INVALID_ARGUMENT;
    }
    auto j = parse_json_text(instance_json, "instance");
    auto* handle = new sm_instance{instance_from_json(j)};
    *out = handle;
    return SM_OK;
  });
}

void sm_instance_free(sm_instance* inst) { delete inst; }

sm_status sm_instance_certify(const sm_instance* inst, const char* options_json,
                              char** report_json) {
  return guarded([&]() -> sm_status {
    if (!inst) {
      g_last_error = "null instance";
      return SM_ERR_INVALID_ARGUMENT;
    }
    CertifyOptions opts = parse_options(options_json);
    CertifyReport rep = classify(inst->inst, opts);
    return write_out(report_json, report_to_json(rep).dump(2));
  });
}

sm_status sm_instance_solve(const sm_instance* inst, const char* options_json,
                            char** result_json) {
  return guarded([&]() -> sm_status {
    if (!inst) {
      g_last_error = "null instance";
      return SM_ERR_INVALID_ARGUMENT;
    }
    CertifyOptions opts = parse_options(options_json);
    SolveResult res =
        inst->inst.mu
            ? solve_regularized(inst->inst.op, inst->inst.m0, *inst->inst.mu,
                                opts.solver)
            : solve_nuclear_affine(inst->inst.op, inst->inst.m0, opts.solver);
    return write_out(result_json, solve_result_to_json(res).dump(2));
  });
}

sm_status sm_experiment_run(const char* config_json, const char* ensemble_override,
                            char** csv_out, char** summary_json_out) {
  return guarded([&]() -> sm_status {
    if (!config_json) {
      g_last_error = "null config";
      return SM_ERR_INVALID_ARGUMENT;
    }
    ExperimentConfig cfg =
        experiment_config_from_json(parse_json_text(config_json, "config"));
    if (ensemble_override && *ensemble_override) {
      std::string e = ensemble_override;
      if (e == "gaussian")
        cfg.ensemble = Ensemble::Gaussian;
      else if (e == "completion")
        cfg.ensemble = Ensemble::Completion;
      else
        throw Error(ErrorKind::InvalidArgument,
                    "ensemble override must be gaussian|completion");
    }
    std::vector<TrialRow> rows = cfg.ensemble == Ensemble::Gaussian
                                     ? run_exp_gaussian(cfg)
                                     : run_exp_completion(cfg);
    sm_status st = write_out(csv_out, rows_to_csv(rows));
    if (st != SM_OK) return st;
    st = write_out(summary_json_out, summary_to_json(cfg, rows));
    if (st != SM_OK) {
      sm_string_free(*csv_out);
      *csv_out = nullptr;
    }
    return st;
  });
}

sm_status sm_demo_minimal(int n, int r, unsigned long long seed,
                          char** report_json) {
  return guarded([&]() -> sm_status {
    CertifyReport rep = demo_minimal(n, r, seed);
    return write_out(report_json, report_to_json(rep).dump(2));
  });
}

sm_status sm_demo_lrr(int q, int n1, int n2, int r, unsigned long long seed,
                      char** report_json) {
  return guarded([&]() -> sm_status {
    CertifyReport rep = demo_lrr(q, n1, n2, r, seed);
    return write_out(report_json, report_to_json(rep).dump(2));
  });
}

sm_status sm_fixtures_run(char** results_json) {
  return guarded([&]() -> sm_status {
    std::vector<FixtureResult> results = run_fixtures();
    sm_status st = write_out(results_json, fixture_results_to_json(results).dump(2));
    if (st != SM_OK) return st;
    for (const FixtureResult& r : results)
      if (!r.pass) {
        g_last_error = "fixture failed: " + r.name + " (" + r.details + ")";
        return SM_ERR_ASSERTION;
      }
    return SM_OK;
  });
}

}  // extern "C"
