#include "qfloq/qfloq.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>

#include "qfloq/engine.hpp"
#include "qfloq/error.hpp"
#include "qfloq/io.hpp"
#include "qfloq/mps.hpp"
#include "qfloq/observables.hpp"
#include "qfloq/sweep.hpp"

using namespace qfloq;

namespace {

void put_err(char* err, size_t errlen, const std::string& msg) {
  if (err && errlen > 0) std::snprintf(err, errlen, "%s", msg.c_str());
}

qfloq_status to_status(Status s) { return static_cast<qfloq_status>(s); }

// Runs f, translating exceptions into status codes + message.
template <typename F>
qfloq_status guarded(char* err, size_t errlen, F&& f) {
  try {
    f();
    return QFLOQ_OK;
  } catch (const Error& e) {
    put_err(err, errlen, e.what());
    return to_status(e.code());
  } catch (const std::exception& e) {
    put_err(err, errlen, e.what());
    return QFLOQ_ENGINE_ERROR;
  }
}

io::RunConfig parse_or_default(const char* config_json) {
  if (!config_json || !*config_json) return io::RunConfig{};
  return io::config_from_json(config_json);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

struct qfloq_engine {
  FloquetEngine impl;
};

struct qfloq_tebd {
  Tebd impl;
};

const char* qfloq_version(void) {
  static const std::string v = io::version();
  return v.c_str();
}

qfloq_status qfloq_cmd_evolve(const char* config_json, const char* outdir,
                              char* err, size_t errlen) {
  return guarded(err, errlen, [&] {
    if (!outdir) throw Error(Status::ConfigError, "outdir must not be null");
    io::run_evolve(parse_or_default(config_json), outdir);
  });
}

qfloq_status qfloq_cmd_mps_evolve(const char* config_json, const char* outdir,
                                  char* err, size_t errlen) {
  return guarded(err, errlen, [&] {
    if (!outdir) throw Error(Status::ConfigError, "outdir must not be null");
    io::run_mps_evolve(parse_or_default(config_json), outdir);
  });
}

qfloq_status qfloq_cmd_sweep(const char* config_json, const char* outdir,
                             char* err, size_t errlen) {
  return guarded(err, errlen, [&] {
    if (!outdir) throw Error(Status::ConfigError, "outdir must not be null");
    io::run_sweep(parse_or_default(config_json), outdir);
  });
}

qfloq_status qfloq_cmd_reproduce(const char* figure, int full, const char* outdir,
                                 char* err, size_t errlen) {
  return guarded(err, errlen, [&] {
    if (!figure || !outdir)
      throw Error(Status::ConfigError, "figure and outdir must not be null");
    io::run_reproduce(figure, full != 0, outdir);
  });
}

qfloq_status qfloq_compile_check(char axis, double theta, int use_ledger,
                                 char** json_out, char* err, size_t errlen) {
  return guarded(err, errlen, [&] {
    if (!json_out) throw Error(Status::ConfigError, "json_out must not be null");
    *json_out = dup_string(io::compile_check_json(axis, theta, use_ledger != 0));
    if (!*json_out) throw Error(Status::EngineError, "allocation failed");
  });
}

qfloq_status qfloq_ops_dump(const char* name, double theta, char** json_out,
                            char* err, size_t errlen) {
  return guarded(err, errlen, [&] {
    if (!name || !json_out)
      throw Error(Status::ConfigError, "name and json_out must not be null");
    *json_out = dup_string(io::ops_dump_json(name, theta));
    if (!*json_out) throw Error(Status::EngineError, "allocation failed");
  });
}

void qfloq_string_free(char* s) { std::free(s); }

double qfloq_predict_nt(double theta_x, double theta_z, int L) {
  try {
    return predict_nt(theta_x, theta_z, L);
  } catch (...) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

double qfloq_nt_first_crossing(double theta_x, double theta_z, int L) {
  try {
    return nt_first_crossing(theta_x, theta_z, L);
  } catch (...) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

qfloq_engine* qfloq_engine_new(int L, double theta_x, double theta_z,
                               double epsilon, const char* ux_mode, char* err,
                               size_t errlen) {
  qfloq_engine* h = nullptr;
  guarded(err, errlen, [&] {
    FloquetParams p{L, theta_x, theta_z, epsilon};
    const UxMode mode = parse_ux_mode(ux_mode ? ux_mode : "exact");
    h = new qfloq_engine{FloquetEngine(p, mode)};
  });
  return h;
}

qfloq_status qfloq_engine_step(qfloq_engine* h, int n, char* err, size_t errlen) {
  return guarded(err, errlen, [&] {
    if (!h) throw Error(Status::ConfigError, "null handle");
    h->impl.evolve(n);
  });
}

qfloq_status qfloq_engine_observe(const qfloq_engine* h, const char* what,
                                  double* out, char* err, size_t errlen) {
  return guarded(err, errlen, [&] {
    if (!h || !what || !out)
      throw Error(Status::ConfigError, "null handle or argument");
    const StateVec& psi = h->impl.state();
    const int L = h->impl.params().L;
    const std::string key = what;
    if (key == "overlap") *out = overlap0(psi, L);
    else if (key == "mean_sz") *out = mean_magnetization(psi, L);
    else if (key == "entropy_half") *out = half_chain_entropy(psi, L);
    else if (key == "fq") *out = qfi(psi, L).f_q;
    else
      throw Error(Status::ConfigError,
                  "unknown observable \"" + key +
                      "\" (valid: overlap, mean_sz, entropy_half, fq)");
  });
}

void qfloq_engine_free(qfloq_engine* h) { delete h; }

qfloq_tebd* qfloq_tebd_new(int L, double theta_x, double theta_z, double epsilon,
                           double tolerance, int chi_cap, int substeps,
                           char* err, size_t errlen) {
  qfloq_tebd* h = nullptr;
  guarded(err, errlen, [&] {
    FloquetParams p{L, theta_x, theta_z, epsilon};
    TruncationPolicy pol;
    pol.tolerance = tolerance;
    pol.chi_cap = chi_cap;
    h = new qfloq_tebd{Tebd(p, pol, substeps)};
  });
  return h;
}

qfloq_status qfloq_tebd_step(qfloq_tebd* h, int n, char* err, size_t errlen) {
  return guarded(err, errlen, [&] {
    if (!h) throw Error(Status::ConfigError, "null handle");
    for (int i = 0; i < n; ++i) h->impl.step();
  });
}

qfloq_status qfloq_tebd_observe(const qfloq_tebd* h, const char* what,
                                double* out, char* err, size_t errlen) {
  return guarded(err, errlen, [&] {
    if (!h || !what || !out)
      throw Error(Status::ConfigError, "null handle or argument");
    const Mps& m = h->impl.mps();
    const std::string key = what;
    if (key == "overlap") *out = m.overlap0();
    else if (key == "mean_sz") *out = m.mean_magnetization();
    else if (key == "entropy_half") *out = m.entropy_bond(m.L() / 2);
    else if (key == "fq") *out = m.qfi().f_q;
    else if (key == "chi") *out = m.chi_max();
    else if (key == "discarded") *out = h->impl.diagnostics().discarded;
    else
      throw Error(Status::ConfigError,
                  "unknown observable \"" + key +
                      "\" (valid: overlap, mean_sz, entropy_half, fq, chi, "
                      "discarded)");
  });
}

void qfloq_tebd_free(qfloq_tebd* h) { delete h; }

}  // extern "C"
