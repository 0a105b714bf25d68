#include "pointersieve.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "common.hpp"
#include "experiments.hpp"
#include "validate.hpp"

struct ps_config {
  ps::ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error;

ps_status fail_with(ps::status code, const std::string& msg) {
  g_last_error = msg;
  return static_cast<ps_status>(static_cast<int>(code));
}

// Runs f() and funnels every failure through the status taxonomy; bad_alloc
// and unknown exceptions become PS_INTERNAL rather than crossing the ABI.
template <typename Fn>
ps_status guarded(Fn&& f) {
  try {
    f();
    g_last_error.clear();
    return PS_OK;
  } catch (const ps::error& e) {
    return fail_with(e.code, e.what());
  } catch (const std::exception& e) {
    return fail_with(ps::status::internal, e.what());
  } catch (...) {
    return fail_with(ps::status::internal, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ps_status need(bool ok, const char* what) {
  return ok ? PS_OK : fail_with(ps::status::invalid_argument, what);
}

}  // namespace

extern "C" {

const char* ps_version(void) { return "0.1.0"; }

const char* ps_last_error(void) { return g_last_error.c_str(); }

ps_status ps_config_default(const char* experiment, ps_config** out) {
  if (ps_status s = need(experiment && out, "null argument")) return s;
  *out = nullptr;
  return guarded([&] {
    auto* h = new ps_config{ps::default_config(experiment)};
    *out = h;
  });
}

ps_status ps_config_parse(const char* json_text, ps_config** out) {
  if (ps_status s = need(json_text && out, "null argument")) return s;
  *out = nullptr;
  return guarded([&] {
    auto* h = new ps_config{ps::parse_config(json_text)};
    *out = h;
  });
}

ps_status ps_config_to_json(const ps_config* cfg, char** json_out) {
  if (ps_status s = need(cfg && json_out, "null argument")) return s;
  *json_out = nullptr;
  return guarded([&] { *json_out = dup_string(ps::serialize_config(cfg->cfg)); });
}

const char* ps_config_experiment(const ps_config* cfg) {
  return cfg ? cfg->cfg.experiment.c_str() : "";
}

void ps_config_free(ps_config* cfg) { delete cfg; }

ps_status ps_config_set_experiment(ps_config* cfg, const char* name) {
  if (ps_status s = need(cfg && name, "null argument")) return s;
  cfg->cfg.experiment = name;
  return PS_OK;
}

ps_status ps_config_set_seed(ps_config* cfg, uint64_t seed) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  cfg->cfg.numerics.seed = seed;
  cfg->cfg.numerics.seed_set = true;
  return PS_OK;
}

ps_status ps_config_set_n_traj(ps_config* cfg, long long n_traj) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  cfg->cfg.numerics.n_traj = static_cast<long>(n_traj);
  return PS_OK;
}

ps_status ps_config_set_dt(ps_config* cfg, double dt) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  cfg->cfg.numerics.dt = dt;
  return PS_OK;
}

ps_status ps_config_set_eta(ps_config* cfg, double eta) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  cfg->cfg.scheme.eta = eta;
  return PS_OK;
}

ps_status ps_config_set_r(ps_config* cfg, double R) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  cfg->cfg.scheme.R = R;
  return PS_OK;
}

ps_status ps_config_set_phi(ps_config* cfg, double phi) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  cfg->cfg.scheme.phi = phi;
  return PS_OK;
}

ps_status ps_config_set_omega(ps_config* cfg, double omega) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  cfg->cfg.model.omega = omega;
  return PS_OK;
}

ps_status ps_config_set_threads(ps_config* cfg, int threads) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  cfg->cfg.numerics.threads = threads;
  return PS_OK;
}

ps_status ps_config_set_grid(ps_config* cfg, int grid) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  cfg->cfg.sieve.grid = grid;
  return PS_OK;
}

ps_status ps_config_set_quick(ps_config* cfg, int quick) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  cfg->cfg.validate.quick = quick != 0;
  return PS_OK;
}

ps_status ps_config_set_out(ps_config* cfg, const char* path) {
  if (ps_status s = need(cfg && path, "null argument")) return s;
  cfg->cfg.out = path;
  return PS_OK;
}

ps_status ps_run(const ps_config* cfg, char** csv_out) {
  if (ps_status s = need(cfg != nullptr, "null config")) return s;
  if (csv_out) *csv_out = nullptr;
  return guarded([&] {
    std::string csv = ps::run_experiment(cfg->cfg);
    if (csv_out) *csv_out = dup_string(csv);
  });
}

ps_status ps_validate(uint64_t seed, int quick, int threads, char** report_out,
                      int* all_passed) {
  if (report_out) *report_out = nullptr;
  if (all_passed) *all_passed = 0;
  bool passed = false;
  ps_status s = guarded([&] {
    ps::AcceptanceOptions opt;
    opt.seed = seed;
    opt.quick = quick != 0;
    opt.threads = threads > 0 ? threads : 1;
    ps::ValidationReport rep = ps::run_acceptance(opt);
    passed = rep.all_passed();
    if (report_out) *report_out = dup_string(rep.to_text());
  });
  if (s != PS_OK) return s;
  if (all_passed) *all_passed = passed ? 1 : 0;
  if (!passed)
    return fail_with(ps::status::validation_failed,
                     "one or more acceptance criteria failed");
  return PS_OK;
}

void ps_string_free(char* s) { std::free(s); }

}  // extern "C"
