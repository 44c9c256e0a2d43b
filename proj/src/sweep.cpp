#include "qfloq/sweep.hpp"

#include <cmath>

#include "qfloq/error.hpp"
#include "qfloq/observables.hpp"

namespace qfloq {

namespace {

std::vector<double> axis_values(double lo, double hi, int n) {
  if (n < 1) throw Error(Status::ConfigError, "grid axis needs at least 1 point");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = lo + i * (hi - lo) / (n - 1);
  return v;
}

struct CellResult {
  double overlap = 0.0, entropy = 0.0, fq = 0.0;
  CellFlag flag = CellFlag::Ok;
};

CellResult run_cell_exact(double tx, double tz, const SweepOptions& opt) {
  CellResult r;
  FloquetParams p{opt.L, tx, tz, opt.epsilon};
  FloquetEngine eng(p, opt.ux_mode);
  int samples = 0;
  auto sample = [&] {
    r.overlap += overlap0(eng.state(), opt.L);
    r.entropy += half_chain_entropy(eng.state(), opt.L);
    r.fq += qfi(eng.state(), opt.L).f_q;
    ++samples;
  };
  sample();
  for (int s = 1; s <= opt.cycles; ++s) {
    eng.step();
    if (s % 3 == 0) sample();
  }
  r.overlap /= samples;
  r.entropy /= samples;
  r.fq /= samples;
  return r;
}

CellResult run_cell_mps(double tx, double tz, const SweepOptions& opt) {
  CellResult r;
  FloquetParams p{opt.L, tx, tz, opt.epsilon};
  Tebd tebd(p, opt.policy, opt.substeps);
  int samples = 0;
  auto sample = [&] {
    r.overlap += tebd.mps().overlap0();
    r.entropy += tebd.mps().entropy_bond(opt.L / 2);
    r.fq += tebd.mps().qfi().f_q;
    ++samples;
  };
  sample();
  for (int s = 1; s <= opt.cycles; ++s) {
    try {
      tebd.step();
    } catch (const Error& e) {
      r.flag = e.code() == Status::ChiCapExceeded ? CellFlag::ChiCap
                                                  : CellFlag::EngineFailure;
      break;
    }
    if (s % 3 == 0) sample();
  }
  r.overlap /= samples;
  r.entropy /= samples;
  r.fq /= samples;
  return r;
}

}  // namespace

PhaseGrid sweep(const GridSpec& grid, const SweepOptions& opt) {
  if (opt.engine != "exact" && opt.engine != "mps")
    throw Error(Status::ConfigError, "engine must be 'exact' or 'mps'");
  if (opt.cycles < 0) throw Error(Status::ConfigError, "cycles must be >= 0");
  if (opt.engine == "exact" && opt.L > FloquetEngine::kMaxL)
    throw Error(Status::ConfigError, "exact sweep limited to L <= 14");

  PhaseGrid out;
  out.theta_x = axis_values(grid.x_lo, grid.x_hi, grid.nx);
  out.theta_z = axis_values(grid.z_lo, grid.z_hi, grid.nz);
  out.L = opt.L;
  out.cycles = opt.cycles;
  const std::size_t ncells = out.theta_x.size() * out.theta_z.size();
  out.overlap.resize(ncells);
  out.entropy.resize(ncells);
  out.fq.resize(ncells);
  out.flags.resize(ncells);

  const int nx = grid.nx, nz = grid.nz;
#pragma omp parallel for schedule(dynamic)
  for (int cell = 0; cell < nx * nz; ++cell) {
    const int ix = cell / nz, iz = cell % nz;
    CellResult r;
    try {
      r = opt.engine == "exact"
              ? run_cell_exact(out.theta_x[ix], out.theta_z[iz], opt)
              : run_cell_mps(out.theta_x[ix], out.theta_z[iz], opt);
    } catch (...) {
      r.flag = CellFlag::EngineFailure;
    }
    const std::size_t idx = out.index(ix, iz);
    out.overlap[idx] = r.overlap;
    out.entropy[idx] = r.entropy;
    out.fq[idx] = r.fq;
    out.flags[idx] = r.flag;
  }
  return out;
}

LifetimeFit fit_lifetime(const std::vector<double>& series) {
  const int nb = static_cast<int>(series.size()) / 3;
  if (nb < 4)
    throw Error(Status::ConfigError,
                "lifetime fit needs at least 4 full oscillation periods");
  LifetimeFit fit;
  fit.blocks = nb;
  std::vector<double> env(nb);
  for (int b = 0; b < nb; ++b) {
    double m = 0.0;
    for (int k = 0; k < 3; ++k) m = std::max(m, std::abs(series[3 * b + k]));
    if (m <= 0.0) {
      fit.degenerate = true;
      return fit;
    }
    env[b] = std::log(m);
  }
  // least squares on (b, log env)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int b = 0; b < nb; ++b) {
    sx += b;
    sy += env[b];
    sxx += static_cast<double>(b) * b;
    sxy += b * env[b];
  }
  const double n = nb;
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  if (slope >= -1e-9) {
    fit.degenerate = true;  // flat or growing envelope: no decay to fit
    return fit;
  }
  const double intercept = (sy - slope * sx) / n;
  double ssr = 0.0;
  for (int b = 0; b < nb; ++b) {
    const double resid = env[b] - (intercept + slope * b);
    ssr += resid * resid;
  }
  const double var_slope = nb > 2 ? ssr / (n - 2) / (sxx - sx * sx / n) : 0.0;
  fit.T = -3.0 / slope;
  fit.stderr_T = 3.0 * std::sqrt(std::max(0.0, var_slope)) / (slope * slope);
  fit.degenerate = false;
  return fit;
}

double predict_nt(double theta_x, double theta_z, int L) {
  if (L < 2) throw Error(Status::ConfigError, "L must be >= 2");
  if (theta_x == 0.0) return std::numeric_limits<double>::infinity();
  const double dx = theta_x / 2.0;
  const double eta = 1.0 / std::sqrt(1.0 + 2.0 * L * dx * dx);
  const double chi = 4.5 * theta_z;
  const double a1 = 1.0 - eta * eta;
  const double a2 = 1.0 + eta * eta - 2.0 * eta * std::cos(chi);
  if (a1 <= 0.0 || a2 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (std::log(a1) - std::log(a2)) / std::log(eta * eta);
}

double nt_first_crossing(double theta_x, double theta_z, int L) {
  if (L < 2) throw Error(Status::ConfigError, "L must be >= 2");
  const double inf = std::numeric_limits<double>::infinity();
  if (theta_x == 0.0) return inf;
  const double dx = theta_x / 2.0;
  const double eta = 1.0 / std::sqrt(1.0 + 2.0 * L * dx * dx);
  const double chi = 4.5 * theta_z;
  // overlap model: F(n) = 1/2 when eta^2n |1-z|^2 = (1-eta^2) |1-z^n|^2, z = eta e^(i chi)
  const double lhs0 = 1.0 + eta * eta - 2.0 * eta * std::cos(chi);  // |1-z|^2
  if (lhs0 <= 1e-300) return inf;
  auto g = [&](double n) {
    const double en = std::pow(eta, n);
    const double rhs = (1.0 - eta * eta) * (1.0 - 2.0 * en * std::cos(n * chi) + en * en);
    return std::pow(eta, 2.0 * n) * lhs0 - rhs;
  };
  double prev = 0.0, cur = 0.25;
  const double step = 0.25, nmax = 1e7;
  if (g(prev) <= 0.0) return 0.0;
  while (cur < nmax && g(cur) > 0.0) {
    prev = cur;
    cur += step;
  }
  if (cur >= nmax) return inf;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (prev + cur);
    (g(mid) > 0.0 ? prev : cur) = mid;
  }
  return 0.5 * (prev + cur);
}

std::vector<double> find_dips(const std::vector<double>& row,
                              const std::vector<double>& theta_z) {
  if (row.size() != theta_z.size())
    throw Error(Status::ConfigError, "row and axis lengths differ");
  if (row.size() < 5)
    throw Error(Status::ConfigError, "dip finding needs at least 5 columns");
  std::vector<double> dips;
  for (std::size_t i = 1; i + 1 < row.size(); ++i) {
    if (!(row[i] < row[i - 1] && row[i] < row[i + 1])) continue;
    const double denom = row[i - 1] - 2.0 * row[i] + row[i + 1];
    double loc = theta_z[i];
    if (std::abs(denom) > 1e-30) {
      const double h = theta_z[i + 1] - theta_z[i];
      loc += 0.5 * h * (row[i - 1] - row[i + 1]) / denom;
    }
    dips.push_back(loc);
  }
  return dips;
}

}  // namespace qfloq
