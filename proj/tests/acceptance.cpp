// Acceptance suite: each criterion prints one PASS/FAIL line with its key
// numbers.  Exit status is the number of failures among the criteria that
// ran.  `--only N` restricts to one criterion; `--slow` enables the
// long-running TEBD scaling study (criterion 8), which is otherwise SKIP.
//
// Tolerances are fixed here on purpose; they are the contract, not knobs.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qfloq/compiler.hpp"
#include "qfloq/engine.hpp"
#include "qfloq/error.hpp"
#include "qfloq/mps.hpp"
#include "qfloq/observables.hpp"
#include "qfloq/spin.hpp"
#include "qfloq/sweep.hpp"

using namespace qfloq;
using spin::Mat9;
using spin::MatX;
using clk = std::chrono::steady_clock;
constexpr std::complex<double> I1{0.0, 1.0};

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed_s(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---- criterion 1: trivial-limit exactness ---------------------------------

Outcome criterion1() {
  const auto t0 = clk::now();
  double worst_f = 0.0, worst_m = 0.0;
  for (int L = 2; L <= 12; ++L)
    for (double tz : {0.0, 0.7, 2.5}) {
      FloquetEngine e({L, 0.0, tz, 0.0});
      for (int n = 1; n <= 300; ++n) {
        e.evolve(1);
        const double target = (n % 3 == 1) ? 1.0 : (n % 3 == 2) ? -1.0 : 0.0;
        worst_m = std::max(worst_m,
                           std::fabs(mean_magnetization(e.state(), L) - target));
        if (n % 3 == 0)
          worst_f = std::max(worst_f, std::fabs(overlap0(e.state(), L) - 1.0));
      }
    }
  const double dt = elapsed_s(t0);
  Outcome o;
  o.pass = worst_f < 1e-10 && worst_m < 1e-10 && dt < 60.0;
  o.detail = "max |F(3n)-1| = " + num(worst_f) + ", max |<Sz>-pattern| = " +
             num(worst_m) + ", " + num(dt) + "s";
  return o;
}

// ---- criterion 2: oracle equivalence ---------------------------------------

// Dense one-cycle unitary assembled only from operator embeddings and a
// spectral exponential; shares no code with the engine's factorized sweep.
MatX oracle_cycle(const FloquetParams& p) {
  const auto dim = static_cast<Eigen::Index>(pow3(p.L));
  const Mat9 sxx = spin::kron(spin::sx(), spin::sx());
  const Mat9 szz = spin::kron(spin::sz(), spin::sz());
  MatX hx = MatX::Zero(dim, dim), hz = MatX::Zero(dim, dim);
  for (int j = 1; j < p.L; ++j) {
    hx += spin::op_at_bond(sxx, j, p.L);
    hz += spin::op_at_bond(szz, j, p.L);
  }
  const auto expm = [](const MatX& h, double theta) {
    Eigen::SelfAdjointEigenSolver<MatX> es(h);
    MatX d = MatX::Zero(h.rows(), h.cols());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
      d(k, k) = std::exp(-I1 * (theta / 2.0) * es.eigenvalues()(k));
    return MatX(es.eigenvectors() * d * es.eigenvectors().adjoint());
  };
  MatX u = expm(hz, p.theta_z) * expm(hx, p.theta_x);
  for (int j = 1; j <= p.L; ++j)
    u = spin::op_at_site(spin::kick(p.epsilon), j, p.L) * u;
  return u;
}

Outcome criterion2() {
  const auto t0 = clk::now();
  double worst_amp = 0.0;
  std::mt19937 rng(271828);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int L = 2; L <= 5; ++L) {
    // theta in (0, pi]
    const FloquetParams p{L, M_PI * (1.0 - u01(rng)), M_PI * (1.0 - u01(rng)),
                          0.1};
    const MatX u = oracle_cycle(p);
    Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(u.rows());
    ref[(pow3(L) - 1) / 2] = 1.0;
    FloquetEngine e(p);
    for (int n = 0; n < 50; ++n) ref = u * ref;
    e.evolve(50);
    for (Eigen::Index i = 0; i < ref.size(); ++i)
      worst_amp = std::max(worst_amp, std::abs(ref[i] - e.state()[i]));
  }

  // TEBD vs exact at a tolerance of 1e-9 (the default 1e-6 tracks these
  // observables only to ~8e-4, short of the 1e-4 demanded here)
  const FloquetParams p{8, 0.04, 1.0, 0.0};
  FloquetEngine exact(p);
  TruncationPolicy pol;
  pol.tolerance = 1e-9;
  Tebd tebd(p, pol);
  double worst_obs = 0.0;
  for (int n = 1; n <= 30; ++n) {
    exact.evolve(1);
    tebd.step();
    const StateVec& psi = exact.state();
    const Mps& m = tebd.mps();
    worst_obs = std::max(
        {worst_obs, std::fabs(overlap0(psi, 8) - m.overlap0()),
         std::fabs(mean_magnetization(psi, 8) - m.mean_magnetization()),
         std::fabs(half_chain_entropy(psi, 8) - m.entropy_bond(4)),
         std::fabs(qfi(psi, 8).f_q - m.qfi().f_q),
         std::fabs(zz_correlation(psi, 4, 5, 8) -
                   m.expect_two(spin::sz(), 4, spin::sz(), 5)),
         std::fabs(zz_correlation(psi, 4, 8, 8) -
                   m.expect_two(spin::sz(), 4, spin::sz(), 8))});
  }
  const double dt = elapsed_s(t0);
  Outcome o;
  o.pass = worst_amp < 1e-9 && worst_obs < 1e-4 && dt < 300.0;
  o.detail = "max amp dev = " + num(worst_amp) +
             ", max TEBD obs dev = " + num(worst_obs) + ", " + num(dt) + "s";
  return o;
}

// ---- criterion 3: subharmonic spectrum -------------------------------------

Outcome criterion3() {
  double weight[2] = {0, 0};
  bool bins_ok = true;
  int idx = 0;
  for (double tz : {2.0, 0.0}) {
    FloquetEngine e({4, 0.2, tz, 0.0});
    std::vector<double> mag{mean_magnetization(e.state(), 4)};
    for (int n = 1; n <= 20; ++n) {
      e.evolve(1);
      mag.push_back(mean_magnetization(e.state(), 4));
    }
    const auto c = dft_mag(mag);  // N = 21 bins, subharmonics at k = 7, 14
    int k1 = -1, k2 = -1;
    double m1 = -1, m2 = -1;
    for (int k = 1; k < static_cast<int>(c.size()); ++k) {
      const double m = std::abs(c[k]);
      if (m > m1) {
        m2 = m1; k2 = k1; m1 = m; k1 = k;
      } else if (m > m2) {
        m2 = m; k2 = k;
      }
    }
    if (std::min(k1, k2) != 7 || std::max(k1, k2) != 14) bins_ok = false;
    weight[idx++] = m1 + m2;
  }
  Outcome o;
  o.pass = bins_ok && weight[0] > weight[1];
  o.detail = "peak bins {7,14} of N=21: " + std::string(bins_ok ? "yes" : "NO") +
             ", weight tz=2.0: " + num(weight[0]) +
             " vs tz=0: " + num(weight[1]);
  return o;
}

// ---- criterion 4: long-time localization -----------------------------------

Outcome criterion4() {
  const auto t0 = clk::now();
  FloquetEngine loc({12, 0.2, 0.5, 0.0});
  double min_loc = 1.0;
  for (int n = 1; n <= 200; ++n) {
    loc.evolve(1);
    if (n % 3 == 0) min_loc = std::min(min_loc, overlap0(loc.state(), 12));
  }
  FloquetEngine erg({12, 0.2, 0.0, 0.0});
  double min_erg = 1.0;
  for (int n = 1; n <= 60; ++n) {
    erg.evolve(1);
    if (n % 3 == 0) min_erg = std::min(min_erg, overlap0(erg.state(), 12));
  }
  const double dt = elapsed_s(t0);
  Outcome o;
  o.pass = min_loc > 0.6 && min_erg < 0.5 && dt < 1800.0;
  o.detail = "tz=0.5 min F(3n<=200) = " + num(min_loc) +
             ", tz=0 min F(3n<=60) = " + num(min_erg) + ", " + num(dt) + "s";
  return o;
}

// ---- criterion 5: phase-diagram dips ----------------------------------------

Outcome criterion5() {
  const auto t0 = clk::now();
  GridSpec g;
  g.x_lo = g.x_hi = 0.05;
  g.nx = 1;
  g.z_lo = 0.0;
  g.z_hi = M_PI;
  g.nz = 60;
  SweepOptions opt;
  opt.L = 8;
  opt.cycles = 150;
  const PhaseGrid pg = sweep(g, opt);
  const std::vector<double> dips = find_dips(pg.overlap, pg.theta_z);
  const double cell = M_PI / 59.0;
  std::string found;
  bool all = true;
  for (double target : {4 * M_PI / 9, 6 * M_PI / 9, 8 * M_PI / 9}) {
    double best = std::numeric_limits<double>::infinity();
    for (double d : dips) best = std::min(best, std::fabs(d - target));
    if (!(best <= cell)) all = false;
    found += " " + num(target) + "->" + num(best);
  }
  Outcome o;
  o.pass = all;
  o.detail = "dip offsets (target->nearest):" + found + ", cell = " + num(cell) +
             ", " + num(elapsed_s(t0)) + "s";
  return o;
}

// ---- criterion 6: predictor consistency -------------------------------------

Outcome criterion6() {
  const auto nt = [](double tz) { return predict_nt(0.05, tz, 8); };
  const auto dnt = [&](double tz) { return (nt(tz + 1e-6) - nt(tz - 1e-6)) / 2e-6; };
  bool minima_ok = true;
  std::string roots;
  for (double target : {0.0, 4 * M_PI / 9, 8 * M_PI / 9}) {
    double lo = target - 0.05, hi = target + 0.05;
    if (!(dnt(lo) < 0.0 && dnt(hi) > 0.0)) {
      minima_ok = false;
      continue;
    }
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (dnt(mid) < 0.0 ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);
    if (std::fabs(root - target) > 1e-9) minima_ok = false;
    roots += " " + num(std::fabs(root - target));
  }

  const bool divergence = std::isinf(predict_nt(0.0, 0.5, 8)) &&
                          nt(0.5) < predict_nt(0.01, 0.5, 8) &&
                          predict_nt(0.01, 0.5, 8) < predict_nt(0.001, 0.5, 8);

  // at the theta_z = 0 resonance the closed form goes negative; the half-life
  // prediction is the first F = 1/2 crossing of the same approximation
  FloquetEngine e({8, 0.05, 0.0, 0.0});
  int measured = -1;
  for (int n = 1; n <= 200 && measured < 0; ++n) {
    e.evolve(3);
    if (overlap0(e.state(), 8) <= 0.5) measured = n;
  }
  const double predicted = std::floor(nt_first_crossing(0.05, 0.0, 8));
  const double ratio = measured / predicted;
  const bool half_ok = measured > 0 && ratio >= 0.5 && ratio <= 2.0;

  Outcome o;
  o.pass = minima_ok && divergence && half_ok;
  o.detail = "minima offsets:" + roots + ", diverges: " +
             (divergence ? "yes" : "NO") + ", half-life " +
             std::to_string(measured) + " vs floor(nt) " + num(predicted);
  return o;
}

// ---- criterion 7: QFI anchors ------------------------------------------------

Outcome criterion7() {
  const auto t0 = clk::now();
  double worst_anchor = 0.0;
  for (int L = 2; L <= 10; ++L)
    worst_anchor = std::max(
        worst_anchor,
        std::fabs(qfi(init_state(L, std::string(L, '0')), L).f_q - 1.0));

  // plateaus on the three desk-scale curves
  double means[3] = {0, 0, 0}, mins[3] = {1e9, 1e9, 1e9};
  const double tzs[3] = {0.0, 0.5, 1.0};
  for (int c = 0; c < 3; ++c) {
    FloquetEngine e({10, 0.2, tzs[c], 0.0});
    std::vector<double> fqs{qfi(e.state(), 10).f_q};
    for (int n = 1; n <= 50; ++n) {
      e.evolve(3);
      fqs.push_back(qfi(e.state(), 10).f_q);
    }
    int cnt = 0;
    for (int n = 34; n <= 50; ++n) {  // last third of the run
      means[c] += fqs[n];
      mins[c] = std::min(mins[c], fqs[n]);
      ++cnt;
    }
    means[c] /= cnt;
  }
  const double spread =
      std::max({means[0], means[1], means[2]}) -
      std::min({means[0], means[1], means[2]});
  const bool above = mins[0] > 1.0 || mins[1] > 1.0 || mins[2] > 1.0;

  // grid argmax of time-averaged f_Q vs the F = 0.5 level set
  GridSpec g;  // 25x25 desk grid on [0, 0.5] x [0, pi]
  SweepOptions opt;
  opt.L = 8;
  opt.cycles = 150;
  const PhaseGrid pg = sweep(g, opt);
  int bx = 0, bz = 0;
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iz = 0; iz < g.nz; ++iz)
      if (pg.fq[pg.index(ix, iz)] > pg.fq[pg.index(bx, bz)]) {
        bx = ix;
        bz = iz;
      }
  int best_cheb = std::numeric_limits<int>::max();
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iz = 0; iz < g.nz; ++iz) {
      const double here = pg.overlap[pg.index(ix, iz)] - 0.5;
      const bool boundary =
          (ix + 1 < g.nx &&
           here * (pg.overlap[pg.index(ix + 1, iz)] - 0.5) <= 0.0) ||
          (iz + 1 < g.nz &&
           here * (pg.overlap[pg.index(ix, iz + 1)] - 0.5) <= 0.0);
      if (boundary)
        best_cheb = std::min(
            best_cheb, std::max(std::abs(ix - bx), std::abs(iz - bz)));
    }

  Outcome o;
  o.pass = worst_anchor < 1e-12 && above && spread > 0.1 && best_cheb <= 2;
  o.detail = "max |f_Q-1| = " + num(worst_anchor) + ", plateau means " +
             num(means[0]) + "/" + num(means[1]) + "/" + num(means[2]) +
             ", argmax-to-levelset cells = " + std::to_string(best_cheb) +
             ", " + num(elapsed_s(t0)) + "s";
  return o;
}

// ---- criterion 8: QFI peak scaling (slow) -------------------------------------

Outcome criterion8() {
  const auto t0 = clk::now();
  const int sizes[4] = {8, 12, 16, 20};
  double peaks[4] = {0, 0, 0, 0};
  std::string note;
  for (int i = 0; i < 4; ++i) {
    const int L = sizes[i];
    Tebd tebd({L, 0.04, 1.0, 0.0}, TruncationPolicy{});  // tol 1e-6, cap 600
    peaks[i] = tebd.mps().qfi().f_q;
    for (int n = 1; n <= 100; ++n) {
      try {
        tebd.step();
      } catch (const Error& e) {
        if (e.code() != Status::ChiCapExceeded) throw;
        note += " L" + std::to_string(L) + " capped at n=" +
                std::to_string(tebd.steps_done());
        break;
      }
      if (n % 3 == 0) peaks[i] = std::max(peaks[i], tebd.mps().qfi().f_q);
    }
  }
  const bool monotone =
      peaks[0] < peaks[1] && peaks[1] < peaks[2] && peaks[2] < peaks[3];
  // least-squares peak = a + b/L; the intercept is the L->inf estimate
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 4; ++i) {
    const double x = 1.0 / sizes[i];
    sx += x;
    sy += peaks[i];
    sxx += x * x;
    sxy += x * peaks[i];
  }
  const double slope = (4 * sxy - sx * sy) / (4 * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / 4;

  Outcome o;
  o.pass = monotone && intercept >= 2.0 && intercept <= 2.5;
  o.detail = "peaks " + num(peaks[0]) + "/" + num(peaks[1]) + "/" +
             num(peaks[2]) + "/" + num(peaks[3]) + ", extrapolated " +
             num(intercept) + note + ", " + num(elapsed_s(t0)) + "s";
  return o;
}

// ---- criterion 9: compiler verification ---------------------------------------

Outcome criterion9() {
  const auto t0 = clk::now();
  std::mt19937 rng(314159);
  std::uniform_real_distribution<double> th(-2 * M_PI, 2 * M_PI);
  double worst_res = 0.0, worst_leak = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double theta = th(rng);
    for (char axis : {'x', 'z'}) {
      const compiler::CompileResult r = compiler::compile_coupling(axis, theta);
      worst_res = std::max(worst_res, r.subspace_residual);
      worst_leak = std::max(worst_leak, r.leakage);
    }
  }
  double cyc_dev = 0.0, cyc_leak = 0.0;
  for (int L : {2, 3}) {
    double leak = 0.0;
    const double dev = compiler::full_cycle_residual({L, 0.3, 0.7, 0.1}, &leak);
    cyc_dev = std::max(cyc_dev, dev);
    cyc_leak = std::max(cyc_leak, leak);
  }
  Outcome o;
  o.pass = worst_res < 1e-9 && worst_leak < 1e-12 && cyc_dev < 1e-8 &&
           cyc_leak < 1e-12;
  o.detail = "coupling residual = " + num(worst_res) + ", leakage = " +
             num(worst_leak) + ", full-cycle dev = " + num(cyc_dev) + ", " +
             num(elapsed_s(t0)) + "s";
  return o;
}

// ---- criterion 10: lifetime curve landmarks ------------------------------------

Outcome criterion10() {
  const auto t0 = clk::now();
  // noiseless stand-ins for the measured envelope lifetime: the exponential
  // envelope fit where a decay exists, and the time for the subharmonic
  // contrast to first halve where the fit degenerates (hard thermalization)
  std::vector<double> tz_axis, t_fit, t_half;
  for (int i = 0;; ++i) {
    const double tz = 0.05 * i;
    if (tz > M_PI) break;
    FloquetEngine e({4, 0.2, tz, 0.0});
    std::vector<double> mag{mean_magnetization(e.state(), 4)};
    for (int n = 1; n <= 600; ++n) {
      e.evolve(1);
      mag.push_back(mean_magnetization(e.state(), 4));
    }
    const LifetimeFit f = fit_lifetime(mag);
    tz_axis.push_back(tz);
    t_fit.push_back(f.degenerate ? std::numeric_limits<double>::infinity()
                                 : f.T);
    int th = 600;
    for (int k = 0; 3 * k + 2 < static_cast<int>(mag.size()); ++k) {
      const double b = std::max({std::fabs(mag[3 * k]), std::fabs(mag[3 * k + 1]),
                                 std::fabs(mag[3 * k + 2])});
      if (b < 0.5) {
        th = 3 * k;
        break;
      }
    }
    t_half.push_back(th);
  }
  const auto at = [&](double tz) {
    return static_cast<std::size_t>(std::lround(tz / 0.05));
  };

  // longest fitted lifetime in the first localized lobe sits at tz ~ 1.1
  std::size_t imax = at(0.8);
  for (std::size_t i = at(0.8); i <= at(1.4); ++i)
    if (t_fit[i] > t_fit[imax]) imax = i;
  const double tz_max = tz_axis[imax];
  const bool max_ok = tz_max >= 1.0 && tz_max <= 1.2 &&
                      t_fit[imax] > t_fit[at(0.8)] &&
                      t_fit[imax] > t_fit[at(1.4)];

  // contrast collapse (dip) around tz ~ 2.1; the fit is unusable there
  // because the signal dies within a few blocks, so use the half time
  std::size_t imin = at(1.8);
  for (std::size_t i = at(1.8); i <= at(2.4); ++i)
    if (t_half[i] < t_half[imin]) imin = i;
  const double tz_min = tz_axis[imin];
  const bool dip_ok = tz_min >= 1.95 && tz_min <= 2.3 &&
                      t_half[imin] < 0.5 * std::min(t_half[at(1.8)],
                                                    t_half[at(2.4)]);

  Outcome o;
  o.pass = max_ok && dip_ok;
  o.detail = "lifetime max at tz = " + num(tz_max) + " (target ~1.1), dip at tz = " +
             num(tz_min) + " (target ~2.1), " + num(elapsed_s(t0)) + "s";
  return o;
}

struct Criterion {
  int id;
  const char* description;
  Outcome (*run)();
  bool slow;
};

const Criterion kCriteria[] = {
    {1, "trivial-limit exactness", criterion1, false},
    {2, "oracle equivalence (dense + TEBD)", criterion2, false},
    {3, "subharmonic spectrum", criterion3, false},
    {4, "long-time localization at L=12", criterion4, false},
    {5, "phase-diagram dips", criterion5, false},
    {6, "thermalization predictor consistency", criterion6, false},
    {7, "QFI anchors, plateaus, and grid argmax", criterion7, false},
    {8, "QFI peak scaling vs L (slow)", criterion8, true},
    {9, "compiler verification", criterion9, false},
    {10, "lifetime curve landmarks", criterion10, false},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  bool slow = false;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--slow")) slow = true;
    else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = std::atoi(argv[++i]);
    else {
      std::fprintf(stderr, "usage: %s [--only N] [--slow]\n", argv[0]);
      return 2;
    }
  }

  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    if (c.slow && !slow) {
      std::printf("SKIP [%d] %s (enable with --slow)\n", c.id, c.description);
      continue;
    }
    const Outcome o = c.run();
    std::printf("%s [%d] %s (%s)\n", o.pass ? "PASS" : "FAIL", c.id,
                c.description, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures;
}
