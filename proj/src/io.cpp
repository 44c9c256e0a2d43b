#include "qfloq/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "qfloq/compiler.hpp"
#include "qfloq/error.hpp"
#include "qfloq/observables.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace qfloq::io {

std::string version() { return "1.0.0"; }

namespace {

// shortest round-trip decimal form; keeps CSV output deterministic
std::string fmt(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
std::string fmt(int v) { return std::to_string(v); }

int edit_distance(const std::string& a, const std::string& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "L",        "theta_x",  "theta_z", "epsilon",  "steps",
      "ux_mode",  "engine",   "mode",    "tebd_tol", "chi_cap",
      "substeps", "cycles",   "grid_x",  "grid_z",   "observables"};
  return keys;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

void validate(const RunConfig& c) {
  if (c.L < 2) throw Error(Status::ConfigError, "L must be >= 2");
  if (c.steps < 0) throw Error(Status::ConfigError, "steps must be >= 0");
  if (c.cycles < 0) throw Error(Status::ConfigError, "cycles must be >= 0");
  if (!(c.tebd_tol > 0.0))
    throw Error(Status::ConfigError, "tebd_tol must be > 0");
  if (c.chi_cap < 1) throw Error(Status::ConfigError, "chi_cap must be >= 1");
  if (c.substeps < 1) throw Error(Status::ConfigError, "substeps must be >= 1");
  if (c.ux_mode != "exact" && c.ux_mode != "brickwork")
    throw Error(Status::ConfigError, "ux_mode must be 'exact' or 'brickwork'");
  if (c.engine != "exact" && c.engine != "mps")
    throw Error(Status::ConfigError, "engine must be 'exact' or 'mps'");
  if (c.mode != "finite" && c.mode != "infinite")
    throw Error(Status::ConfigError, "mode must be 'finite' or 'infinite'");
  parse_axis(c.grid_x);
  parse_axis(c.grid_z);
  const auto toks = split(c.observables, ',');
  if (toks.empty()) throw Error(Status::ConfigError, "observables must not be empty");
  for (const auto& t : toks)
    if (t != "overlap" && t != "entropy" && t != "qfi")
      throw Error(Status::ConfigError,
                  "unknown observable \"" + t + "\" (valid: overlap, entropy, qfi)");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Status::EngineError, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(Status::EngineError, "write failed: " + path.string());
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  write_text(path, out);
}

json config_json(const RunConfig& c) {
  json j;
  j["L"] = c.L;
  j["theta_x"] = c.theta_x;
  j["theta_z"] = c.theta_z;
  j["epsilon"] = c.epsilon;
  j["steps"] = c.steps;
  j["ux_mode"] = c.ux_mode;
  j["engine"] = c.engine;
  j["mode"] = c.mode;
  j["tebd_tol"] = c.tebd_tol;
  j["chi_cap"] = c.chi_cap;
  j["substeps"] = c.substeps;
  j["cycles"] = c.cycles;
  j["grid_x"] = c.grid_x;
  j["grid_z"] = c.grid_z;
  j["observables"] = c.observables;
  return j;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_manifest(const fs::path& outdir, const std::string& command,
                    const RunConfig& c, const std::string& engine_desc,
                    double elapsed_ms, json diagnostics, const FileList& files) {
  json m;
  m["command"] = command;
  m["version"] = version();
  m["engine"] = engine_desc;
  m["config"] = config_json(c);
  m["timings_ms"] = {{"total", elapsed_ms}};
  m["diagnostics"] = std::move(diagnostics);
  m["outputs"] = files;
  write_text(outdir / "manifest.json", m.dump(2) + "\n");
}

void write_spectrum(const fs::path& path, const std::vector<double>& series) {
  const auto mags = dft_mag(series);
  const double n = static_cast<double>(mags.size());
  std::vector<std::vector<std::string>> rows;
  rows.reserve(mags.size());
  for (std::size_t k = 0; k < mags.size(); ++k)
    rows.push_back({fmt(k / n), fmt(mags[k])});
  write_csv(path, {"omega_over_2pi", "magnitude"}, rows);
}

json tebd_diag_json(const Tebd& tebd) {
  const TebdDiagnostics& d = tebd.diagnostics();
  json j;
  j["chi_max"] = d.chi_max;
  j["discarded_weight"] = d.discarded;
  j["chi_cap_hit"] = d.chi_cap_hit;
  j["stopped_at_step"] = d.stopped_at_step;
  j["canonical_residual"] = tebd.mps().canonical_residual();
  j["norm_error"] = tebd.mps().norm_error();
  return j;
}

}  // namespace

GridAxis parse_axis(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3)
    throw Error(Status::ConfigError, "grid axis \"" + spec + "\" must be lo:hi:n");
  GridAxis a;
  try {
    std::size_t used = 0;
    a.lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    a.hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    a.n = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
  } catch (const std::exception&) {
    throw Error(Status::ConfigError, "grid axis \"" + spec + "\" must be lo:hi:n");
  }
  if (a.n < 1)
    throw Error(Status::ConfigError, "grid axis \"" + spec + "\" needs n >= 1");
  return a;
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Status::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw Error(Status::ConfigError, "config must be a JSON object");

  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), k) != keys.end()) continue;
    std::string best = keys.front();
    int best_d = edit_distance(k, best);
    for (const auto& cand : keys) {
      const int d = edit_distance(k, cand);
      if (d < best_d) {
        best_d = d;
        best = cand;
      }
    }
    throw Error(Status::ConfigError,
                "unknown key \"" + k + "\" (did you mean \"" + best + "\"?)");
  }

  RunConfig c;
  auto geti = [&](const char* k, int& dst) {
    if (!j.contains(k)) return;
    if (!j[k].is_number_integer())
      throw Error(Status::ConfigError, std::string(k) + " must be an integer");
    dst = j[k].get<int>();
  };
  auto getd = [&](const char* k, double& dst) {
    if (!j.contains(k)) return;
    if (!j[k].is_number())
      throw Error(Status::ConfigError, std::string(k) + " must be a number");
    dst = j[k].get<double>();
  };
  auto gets = [&](const char* k, std::string& dst) {
    if (!j.contains(k)) return;
    if (!j[k].is_string())
      throw Error(Status::ConfigError, std::string(k) + " must be a string");
    dst = j[k].get<std::string>();
  };
  geti("L", c.L);
  getd("theta_x", c.theta_x);
  getd("theta_z", c.theta_z);
  getd("epsilon", c.epsilon);
  geti("steps", c.steps);
  gets("ux_mode", c.ux_mode);
  gets("engine", c.engine);
  gets("mode", c.mode);
  getd("tebd_tol", c.tebd_tol);
  geti("chi_cap", c.chi_cap);
  geti("substeps", c.substeps);
  geti("cycles", c.cycles);
  gets("grid_x", c.grid_x);
  gets("grid_z", c.grid_z);
  gets("observables", c.observables);
  validate(c);
  return c;
}

RunConfig config_from_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Status::ConfigError, "cannot read config file " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return config_from_json(text);
}

std::string config_to_json(const RunConfig& c) { return config_json(c).dump(2) + "\n"; }

FileList run_evolve(const RunConfig& c, const std::string& outdir) {
  validate(c);
  if (c.L > FloquetEngine::kMaxL)
    throw Error(Status::ConfigError, "exact evolution limited to L <= 14");
  fs::create_directories(outdir);
  Timer timer;

  FloquetParams p{c.L, c.theta_x, c.theta_z, c.epsilon};
  FloquetEngine eng(p, parse_ux_mode(c.ux_mode));
  const int mid = c.L / 2;

  std::vector<std::vector<std::string>> rows;
  std::vector<double> mag, corr_nn, corr_me;
  for (int n = 0;; ++n) {
    const StateVec& psi = eng.state();
    const double ov = overlap0(psi, c.L);
    const double mz = mean_magnetization(psi, c.L);
    const double ent = half_chain_entropy(psi, c.L);
    const double fq = qfi(psi, c.L).f_q;
    const double cn = zz_correlation(psi, mid, mid + 1, c.L);
    const double ce = zz_correlation(psi, mid, c.L, c.L);
    mag.push_back(mz);
    corr_nn.push_back(cn);
    corr_me.push_back(ce);
    rows.push_back({fmt(n), fmt(ov), fmt(mz), fmt(ent), fmt(fq), fmt(cn), fmt(ce)});
    if (n == c.steps) break;
    eng.step();
  }

  const FileList files = {"series.csv", "spectrum_mean_sz.csv",
                          "spectrum_corr_nn.csv", "spectrum_corr_mid_edge.csv"};
  write_csv(fs::path(outdir) / files[0],
            {"step", "overlap", "mean_Sz", "entropy_half", "fQ", "corr_nn",
             "corr_mid_edge"},
            rows);
  write_spectrum(fs::path(outdir) / files[1], mag);
  write_spectrum(fs::path(outdir) / files[2], corr_nn);
  write_spectrum(fs::path(outdir) / files[3], corr_me);

  double norm = 0.0;
  for (const cplx& a : eng.state()) norm += std::norm(a);
  json diag;
  diag["norm_drift"] = std::abs(norm - 1.0);
  write_manifest(outdir, "evolve", c, "exact/" + c.ux_mode, timer.ms(),
                 std::move(diag), files);
  return files;
}

namespace {

FileList run_tebd_finite(const RunConfig& c, const std::string& outdir) {
  Timer timer;
  FloquetParams p{c.L, c.theta_x, c.theta_z, c.epsilon};
  TruncationPolicy pol;
  pol.tolerance = c.tebd_tol;
  pol.chi_cap = c.chi_cap;
  Tebd tebd(p, pol, c.substeps);
  const int mid = c.L / 2;
  const spin::Mat3 sz = spin::sz();

  std::vector<std::vector<std::string>> rows, drows;
  std::vector<double> mag, corr_nn, corr_me;
  double disc_prev = 0.0;
  bool stopped = false;
  for (int n = 0;; ++n) {
    const Mps& m = tebd.mps();
    const double ov = m.overlap0();
    const double mz = m.mean_magnetization();
    const double ent = m.entropy_bond(mid);
    const double fq = m.qfi().f_q;
    const double cn = m.expect_two(sz, mid, sz, mid + 1);
    const double ce = mid < c.L ? m.expect_two(sz, mid, sz, c.L) : cn;
    mag.push_back(mz);
    corr_nn.push_back(cn);
    corr_me.push_back(ce);
    rows.push_back({fmt(n), fmt(ov), fmt(mz), fmt(ent), fmt(fq), fmt(cn), fmt(ce)});
    const double disc = tebd.diagnostics().discarded;
    drows.push_back({fmt(n), fmt(m.chi_max()), fmt(disc - disc_prev), fmt(disc)});
    disc_prev = disc;
    if (n == c.steps) break;
    try {
      tebd.step();
    } catch (const Error& e) {
      if (e.code() != Status::ChiCapExceeded) throw;
      stopped = true;
      break;
    }
  }

  const FileList files = {"series.csv", "diagnostics.csv", "spectrum_mean_sz.csv",
                          "spectrum_corr_nn.csv", "spectrum_corr_mid_edge.csv"};
  write_csv(fs::path(outdir) / files[0],
            {"step", "overlap", "mean_Sz", "entropy_half", "fQ", "corr_nn",
             "corr_mid_edge"},
            rows);
  write_csv(fs::path(outdir) / files[1],
            {"step", "chi", "discarded_step", "discarded_total"}, drows);
  write_spectrum(fs::path(outdir) / files[2], mag);
  write_spectrum(fs::path(outdir) / files[3], corr_nn);
  write_spectrum(fs::path(outdir) / files[4], corr_me);
  (void)stopped;  // recorded via diagnostics below
  write_manifest(outdir, "mps-evolve", c, "mps/finite", timer.ms(),
                 tebd_diag_json(tebd), files);
  return files;
}

FileList run_tebd_infinite(const RunConfig& c, const std::string& outdir) {
  Timer timer;
  FloquetParams p{0, c.theta_x, c.theta_z, c.epsilon};
  TruncationPolicy pol;
  pol.tolerance = c.tebd_tol;
  pol.chi_cap = c.chi_cap;
  Itebd it(p, pol, c.substeps);

  std::vector<std::vector<std::string>> rows, drows;
  std::vector<double> mag;
  double disc_prev = 0.0;
  for (int n = 0;; ++n) {
    const double sa = it.sz_site(0), sb = it.sz_site(1);
    mag.push_back(0.5 * (sa + sb));
    rows.push_back({fmt(n), fmt(sa), fmt(sb), fmt(it.entropy_bond(0)),
                    fmt(it.entropy_bond(1)), fmt(it.chi())});
    const double disc = it.diagnostics().discarded;
    drows.push_back({fmt(n), fmt(it.chi()), fmt(disc - disc_prev), fmt(disc)});
    disc_prev = disc;
    if (n == c.steps) break;
    try {
      it.step();
    } catch (const Error& e) {
      if (e.code() != Status::ChiCapExceeded) throw;
      break;
    }
  }

  const FileList files = {"series.csv", "diagnostics.csv", "spectrum_mean_sz.csv"};
  write_csv(fs::path(outdir) / files[0],
            {"step", "sz_a", "sz_b", "entropy_cell", "entropy_boundary", "chi"},
            rows);
  write_csv(fs::path(outdir) / files[1],
            {"step", "chi", "discarded_step", "discarded_total"}, drows);
  write_spectrum(fs::path(outdir) / files[2], mag);

  const TebdDiagnostics& d = it.diagnostics();
  json diag;
  diag["chi_max"] = d.chi_max;
  diag["discarded_weight"] = d.discarded;
  diag["chi_cap_hit"] = d.chi_cap_hit;
  diag["stopped_at_step"] = d.stopped_at_step;
  diag["right_residual"] = it.right_residual();
  write_manifest(outdir, "mps-evolve", c, "mps/infinite", timer.ms(),
                 std::move(diag), files);
  return files;
}

}  // namespace

FileList run_mps_evolve(const RunConfig& c, const std::string& outdir) {
  validate(c);
  fs::create_directories(outdir);
  return c.mode == "infinite" ? run_tebd_infinite(c, outdir)
                              : run_tebd_finite(c, outdir);
}

FileList run_sweep(const RunConfig& c, const std::string& outdir) {
  validate(c);
  fs::create_directories(outdir);
  Timer timer;

  const GridAxis ax = parse_axis(c.grid_x), az = parse_axis(c.grid_z);
  GridSpec spec;
  spec.x_lo = ax.lo;
  spec.x_hi = ax.hi;
  spec.nx = ax.n;
  spec.z_lo = az.lo;
  spec.z_hi = az.hi;
  spec.nz = az.n;
  SweepOptions opt;
  opt.L = c.L;
  opt.cycles = c.cycles;
  opt.engine = c.engine;
  opt.epsilon = c.epsilon;
  opt.ux_mode = parse_ux_mode(c.ux_mode);
  opt.policy.tolerance = c.tebd_tol;
  opt.policy.chi_cap = c.chi_cap;
  opt.substeps = c.substeps;

  const PhaseGrid g = sweep(spec, opt);

  auto write_grid = [&](const std::string& name, auto value_at) {
    std::vector<std::string> header = {"theta_x"};
    for (double z : g.theta_z) header.push_back(fmt(z));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t ix = 0; ix < g.theta_x.size(); ++ix) {
      std::vector<std::string> row = {fmt(g.theta_x[ix])};
      for (std::size_t iz = 0; iz < g.theta_z.size(); ++iz)
        row.push_back(value_at(g.index(static_cast<int>(ix), static_cast<int>(iz))));
      rows.push_back(std::move(row));
    }
    write_csv(fs::path(outdir) / name, header, rows);
  };

  FileList files;
  const auto toks = split(c.observables, ',');
  auto has = [&](const char* t) {
    return std::find(toks.begin(), toks.end(), t) != toks.end();
  };
  if (has("overlap")) {
    write_grid("overlap.csv", [&](std::size_t i) { return fmt(g.overlap[i]); });
    files.push_back("overlap.csv");
  }
  if (has("entropy")) {
    write_grid("entropy.csv", [&](std::size_t i) { return fmt(g.entropy[i]); });
    files.push_back("entropy.csv");
  }
  if (has("qfi")) {
    write_grid("fq.csv", [&](std::size_t i) { return fmt(g.fq[i]); });
    files.push_back("fq.csv");
  }
  write_grid("flags.csv",
             [&](std::size_t i) { return fmt(static_cast<int>(g.flags[i])); });
  files.push_back("flags.csv");

  int flagged = 0;
  for (CellFlag f : g.flags)
    if (f != CellFlag::Ok) ++flagged;
  json diag;
  diag["cells"] = g.flags.size();
  diag["flagged_cells"] = flagged;
  write_manifest(outdir, "sweep", c, c.engine, timer.ms(), std::move(diag), files);
  return files;
}

// ---------------------------------------------------------------------------
// reproduce: canned parameter sets for each figure-equivalent dataset

namespace {

constexpr double kPi = spin::kPi;

std::string tz_label(double tz) { return "tz_" + fmt(tz); }

void append_under(FileList& all, const std::string& sub, const FileList& files) {
  for (const auto& f : files) all.push_back(sub + "/" + f);
}

FileList reproduce_fig2(bool /*full*/, const fs::path& out) {
  FileList all;
  for (double tz : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) {
    RunConfig c;
    c.L = 4;
    c.theta_x = 0.2;
    c.theta_z = tz;
    c.steps = 20;
    append_under(all, tz_label(tz), run_evolve(c, (out / tz_label(tz)).string()));
  }
  return all;
}

FileList reproduce_fig3(bool /*full*/, const fs::path& out) {
  FileList all;
  for (double tz : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) {
    RunConfig c;
    c.L = 12;
    c.theta_x = 0.2;
    c.theta_z = tz;
    c.steps = 200;
    append_under(all, tz_label(tz), run_evolve(c, (out / tz_label(tz)).string()));
  }
  return all;
}

FileList reproduce_grid(bool full, const fs::path& out) {
  RunConfig c;
  c.L = full ? 10 : 8;
  c.cycles = full ? 500 : 150;
  c.grid_x = "0:0.5:25";
  c.grid_z = "0:" + fmt(kPi) + ":25";
  return run_sweep(c, out.string());
}

FileList reproduce_fig4c(bool full, const fs::path& out) {
  FileList all;
  const std::vector<int> sizes = full ? std::vector<int>{4, 6, 8, 10, 12}
                                      : std::vector<int>{4, 8, 12};
  for (int L : sizes) {
    RunConfig c;
    c.L = L;
    c.theta_x = 0.2;
    c.theta_z = 0.5;
    c.steps = 200;
    const std::string sub = "L" + fmt(L) + "_" + tz_label(0.5);
    append_under(all, sub, run_evolve(c, (out / sub).string()));
  }
  for (int L : full ? std::vector<int>{10, 12} : std::vector<int>{12}) {
    RunConfig c;
    c.L = L;
    c.theta_x = 0.2;
    c.theta_z = 0.0;
    c.steps = 200;
    const std::string sub = "L" + fmt(L) + "_" + tz_label(0.0);
    append_under(all, sub, run_evolve(c, (out / sub).string()));
  }
  return all;
}

FileList reproduce_fig5b(bool full, const fs::path& out) {
  const int cycles = full ? 500 : 150;
  FileList all;
  for (double tz : {0.0, 0.5, 1.0}) {
    RunConfig c;
    c.L = 10;
    c.theta_x = 0.2;
    c.theta_z = tz;
    c.cycles = cycles;
    FloquetParams p{c.L, c.theta_x, c.theta_z, c.epsilon};
    FloquetEngine eng(p);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"0", fmt(qfi(eng.state(), c.L).f_q), "1"});
    for (int n = 1; n <= cycles; ++n) {
      eng.step();
      if (n % 3 == 0)
        rows.push_back({fmt(n), fmt(qfi(eng.state(), c.L).f_q), "1"});
    }
    const std::string sub = tz_label(tz);
    fs::create_directories(out / sub);
    write_csv(out / sub / "fq_series.csv", {"step", "fQ", "separable_bound"}, rows);
    all.push_back(sub + "/fq_series.csv");
  }
  return all;
}

FileList reproduce_fig5c(bool full, const fs::path& out) {
  const std::vector<int> sizes =
      full ? std::vector<int>{8, 12, 16, 20} : std::vector<int>{8, 12};
  const int cycles = full ? 100 : 60;
  FileList all;
  std::vector<std::vector<std::string>> peaks;
  std::vector<double> invs, maxima;
  for (int L : sizes) {
    FloquetParams p{L, 0.04, 1.0, 0.0};
    Tebd tebd(p, TruncationPolicy{});
    std::vector<std::vector<std::string>> rows;
    double peak = tebd.mps().qfi().f_q;
    rows.push_back({"0", fmt(peak)});
    for (int n = 1; n <= cycles; ++n) {
      try {
        tebd.step();
      } catch (const Error& e) {
        if (e.code() != Status::ChiCapExceeded) throw;
        break;
      }
      if (n % 3 == 0) {
        const double fq = tebd.mps().qfi().f_q;
        peak = std::max(peak, fq);
        rows.push_back({fmt(n), fmt(fq)});
      }
    }
    const std::string name = "trace_L" + fmt(L) + ".csv";
    write_csv(out / name, {"step", "fQ"}, rows);
    all.push_back(name);
    peaks.push_back({fmt(L), fmt(peak), fmt(1.0 / L)});
    invs.push_back(1.0 / L);
    maxima.push_back(peak);
  }
  write_csv(out / "peaks.csv", {"L", "max_fQ", "inv_L"}, peaks);
  all.push_back("peaks.csv");
  // least-squares line max_fQ = a + b/L; intercept a is the L->inf estimate
  const double n = static_cast<double>(invs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < invs.size(); ++i) {
    sx += invs[i];
    sy += maxima[i];
    sxx += invs[i] * invs[i];
    sxy += invs[i] * maxima[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  write_csv(out / "extrapolation.csv", {"fq_infinite", "slope"},
            {{fmt(intercept), fmt(slope)}});
  all.push_back("extrapolation.csv");
  return all;
}

FileList reproduce_dips(bool full, const fs::path& out) {
  GridSpec spec;
  spec.x_lo = spec.x_hi = 0.05;
  spec.nx = 1;
  spec.z_lo = 0.0;
  spec.z_hi = kPi;
  spec.nz = 60;
  SweepOptions opt;
  opt.L = 8;
  opt.cycles = full ? 500 : 150;
  const PhaseGrid g = sweep(spec, opt);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t iz = 0; iz < g.theta_z.size(); ++iz)
    rows.push_back({fmt(g.theta_z[iz]), fmt(g.overlap[iz])});
  write_csv(out / "row.csv", {"theta_z", "avg_overlap"}, rows);

  const auto dips = find_dips(g.overlap, g.theta_z);
  std::vector<std::vector<std::string>> drows;
  for (double d : dips) drows.push_back({fmt(d)});
  write_csv(out / "dips.csv", {"theta_z_dip"}, drows);
  return {"row.csv", "dips.csv"};
}

}  // namespace

FileList run_reproduce(const std::string& figure, bool full, const std::string& outdir) {
  Timer timer;
  const fs::path out(outdir);
  fs::create_directories(out);
  FileList files;
  if (figure == "fig2") files = reproduce_fig2(full, out);
  else if (figure == "fig3") files = reproduce_fig3(full, out);
  else if (figure == "fig4a" || figure == "fig5a") files = reproduce_grid(full, out);
  else if (figure == "fig4c") files = reproduce_fig4c(full, out);
  else if (figure == "fig5b") files = reproduce_fig5b(full, out);
  else if (figure == "fig5c") files = reproduce_fig5c(full, out);
  else if (figure == "dips") files = reproduce_dips(full, out);
  else
    throw Error(Status::ConfigError,
                "unknown figure \"" + figure +
                    "\" (valid: fig2, fig3, fig4a, fig4c, fig5a, fig5b, fig5c, dips)");

  json top;
  top["command"] = "reproduce";
  top["version"] = version();
  top["figure"] = figure;
  top["scale"] = full ? "full" : "desk";
  top["timings_ms"] = {{"total", timer.ms()}};
  top["outputs"] = files;
  write_text(out / "reproduce.json", top.dump(2) + "\n");
  return files;
}

// ---------------------------------------------------------------------------

namespace {

json gate_json(const compiler::Gate& g) {
  json out;
  switch (g.kind) {
    case compiler::Gate::Kind::R:
      out["kind"] = "R";
      out["site"] = g.site;
      out["k"] = g.k;
      out["theta"] = g.theta;
      out["phi"] = g.phi;
      break;
    case compiler::Gate::Kind::Z:
      out["kind"] = "Z";
      out["site"] = g.site;
      out["levels"] = {g.li, g.lj};
      out["theta"] = g.theta;
      break;
    case compiler::Gate::Kind::MS:
      out["kind"] = "MS";
      out["theta"] = g.theta;
      out["phi"] = g.phi;
      break;
  }
  return out;
}

json matrix_json(const spin::MatX& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string compile_check_json(char axis, double theta, bool use_ledger) {
  const compiler::CompileResult r = compiler::compile_coupling(axis, theta);
  json out;
  out["axis"] = std::string(1, axis);
  out["theta"] = theta;
  out["subspace_residual"] = r.subspace_residual;
  out["leakage"] = r.leakage;
  json gates = json::array();
  for (const auto& g : r.seq) gates.push_back(gate_json(g));
  out["gates"] = std::move(gates);
  if (use_ledger) {
    const compiler::LedgerResult lr = compiler::ledger_compile(r.seq);
    json lg = json::array();
    for (const auto& g : lr.seq) lg.push_back(gate_json(g));
    out["ledger_gates"] = std::move(lg);
    out["ledger_alpha"] = {lr.ledger.alpha[0], lr.ledger.alpha[1]};
  }
  return out.dump(2) + "\n";
}

std::string ops_dump_json(const std::string& name, double theta) {
  spin::MatX m;
  if (name.size() == 7 && name.rfind("lambda", 0) == 0 && name[6] >= '1' &&
      name[6] <= '8') {
    m = spin::gell_mann(name[6] - '0');
  } else if (name == "sx") {
    m = spin::sx();
  } else if (name == "sy") {
    m = spin::sy();
  } else if (name == "sz") {
    m = spin::sz();
  } else if (name == "kick") {
    m = spin::kick(theta);
  } else if (name == "xbasis") {
    m = spin::x_eigenbasis();
  } else if (name == "gate-x") {
    m = spin::two_site_gate('x', theta);
  } else if (name == "gate-z") {
    m = spin::two_site_gate('z', theta);
  } else if (name == "ms") {
    m = compiler::ms_gate(theta);
  } else {
    throw Error(Status::ConfigError,
                "unknown operator \"" + name +
                    "\" (valid: lambda1..lambda8, sx, sy, sz, kick, xbasis, "
                    "gate-x, gate-z, ms)");
  }
  json out;
  out["op"] = name;
  out["theta"] = theta;
  out["dim"] = m.rows();
  out["matrix"] = matrix_json(m);
  return out.dump(2) + "\n";
}

}  // namespace qfloq::io
