#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "qfloq/mps.hpp"

#include <cmath>

#include "qfloq/error.hpp"

namespace qfloq {

namespace {

// budget for regauge passes that must not change the state: drops only
// numerical-noise Schmidt values (relative weight below ~1e-20 each)
constexpr double kRoundoffBudget = 1e-20;

struct Svd {
  Eigen::VectorXd s;
  MatC u, vh;
};

// Economy SVD via divide-and-conquer, with a zgesvd fallback for the rare
// non-convergent case.
Svd svd_econ(MatC m) {
  const lapack_int rows = static_cast<lapack_int>(m.rows());
  const lapack_int cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  Svd out;
  out.s.resize(k);
  out.u.resize(rows, k);
  out.vh.resize(k, cols);
  MatC work = m;
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, work.data(),
                                   rows, out.s.data(), out.u.data(), rows,
                                   out.vh.data(), k);
  if (info != 0) {
    work = m;
    std::vector<double> superb(std::max<lapack_int>(1, k - 1));
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols, work.data(),
                          rows, out.s.data(), out.u.data(), rows, out.vh.data(),
                          k, superb.data());
    if (info != 0)
      throw Error(Status::EngineError, "SVD failed, info=" + std::to_string(info));
  }
  return out;
}

// Number of Schmidt values to keep: drop the smallest relative squared
// weights greedily while the cumulative discarded weight stays within budget.
int truncation_rank(const Eigen::VectorXd& s, double budget, double* discarded) {
  const int n = static_cast<int>(s.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += s[i] * s[i];
  if (total <= 0.0) { *discarded = 0.0; return 1; }
  int keep = n;
  double tail = 0.0;
  for (int k = n - 1; k >= 1; --k) {
    const double p = s[k] * s[k] / total;
    if (tail + p > budget) break;
    tail += p;
    keep = k;
  }
  *discarded = tail;
  return keep;
}

void check_cap(int keep, int cap) {
  if (keep > cap)
    throw Error(Status::ChiCapExceeded,
                "bond dimension " + std::to_string(keep) + " exceeds cap " +
                    std::to_string(cap));
}

// theta0g[s'][t'] = sum_{s,t} G(3s'+t', 3s+t) * Bj[s] * Bk[t]
std::array<std::array<MatC, 3>, 3> gate_block(const std::array<MatC, 3>& bj,
                                              const std::array<MatC, 3>& bk,
                                              const spin::Mat9& g) {
  const Eigen::Index cl = bj[0].rows(), cr = bk[0].cols();
  std::array<std::array<MatC, 3>, 3> th0, th0g;
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 3; ++t) th0[s][t].noalias() = bj[s] * bk[t];
  for (int sp = 0; sp < 3; ++sp)
    for (int tp = 0; tp < 3; ++tp) {
      th0g[sp][tp] = MatC::Zero(cl, cr);
      for (int s = 0; s < 3; ++s)
        for (int t = 0; t < 3; ++t) {
          const cplx c = g(3 * sp + tp, 3 * s + t);
          if (c != cplx{0.0}) th0g[sp][tp] += c * th0[s][t];
        }
    }
  return th0g;
}

double entropy_from_schmidt(const Eigen::VectorXd& lam) {
  double ent = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < 1e-12) continue;
    const double p = lam[i] * lam[i];
    ent -= p * std::log(p);
  }
  return ent;
}

int pattern_digit(char c) {
  switch (c) {
    case '+': return 0;
    case '0': return 1;
    case '-': return 2;
    default: throw Error(Status::ConfigError, "pattern symbols must be one of + 0 -");
  }
}

}  // namespace

Mps::Mps(int L, const std::string& pattern) : L_(L) {
  if (L < 2) throw Error(Status::ConfigError, "L must be >= 2");
  if (static_cast<int>(pattern.size()) != L)
    throw Error(Status::ConfigError, "pattern length must equal L");
  B_.resize(L + 1);
  lam_.assign(L + 1, Eigen::VectorXd::Ones(1));
  for (int j = 1; j <= L; ++j) {
    const int d = pattern_digit(pattern[j - 1]);
    for (int s = 0; s < 3; ++s)
      B_[j][s] = (s == d) ? MatC::Ones(1, 1) : MatC::Zero(1, 1);
  }
}

int Mps::chi_max() const {
  int c = 1;
  for (const auto& l : lam_) c = std::max(c, static_cast<int>(l.size()));
  return c;
}

void Mps::apply_one_site(const spin::Mat3& u, int j) {
  if (j < 1 || j > L_) throw Error(Status::ConfigError, "site out of range");
  std::array<MatC, 3> nb;
  for (int s = 0; s < 3; ++s) {
    nb[s] = MatC::Zero(B_[j][s].rows(), B_[j][s].cols());
    for (int t = 0; t < 3; ++t)
      if (u(s, t) != cplx{0.0}) nb[s] += u(s, t) * B_[j][t];
  }
  B_[j] = std::move(nb);
}

double Mps::canonicalize(double budget, int chi_cap) {
  // Pass 1, left to right: QR each site into left-canonical form, carrying
  // the R factor.  No truncation; only establishes exact left orthogonality.
  MatC carry = MatC::Ones(1, 1);
  for (int j = 1; j <= L_; ++j) {
    const Eigen::Index cl = carry.rows(), cr = B_[j][0].cols();
    MatC m(3 * cl, cr);
    for (int s = 0; s < 3; ++s) m.block(s * cl, 0, cl, cr).noalias() = carry * B_[j][s];
    const Eigen::Index k = std::min<Eigen::Index>(3 * cl, cr);
    Eigen::HouseholderQR<MatC> qr(m);
    MatC q = qr.householderQ() * MatC::Identity(3 * cl, k);
    carry = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (int s = 0; s < 3; ++s) B_[j][s] = q.block(s * cl, 0, cl, k);
  }
  // carry is now 1x1 and holds the norm (up to phase); fold it into site L
  for (int s = 0; s < 3; ++s) B_[L_][s] *= carry(0, 0);

  // Pass 2, right to left: SVD each site into right-canonical form.  The left
  // block stays left-canonical throughout, so every spectrum is a true
  // Schmidt spectrum and truncation happens in the optimal basis.
  double total_discarded = 0.0;
  for (int j = L_; j >= 2; --j) {
    const Eigen::Index cl = B_[j][0].rows(), cr = B_[j][0].cols();
    MatC m(cl, 3 * cr);
    for (int s = 0; s < 3; ++s) m.block(0, s * cr, cl, cr) = B_[j][s];
    Svd svd = svd_econ(std::move(m));
    double disc = 0.0;
    const int keep = truncation_rank(svd.s, budget, &disc);
    check_cap(keep, chi_cap);
    total_discarded += disc;
    const Eigen::VectorXd sk = svd.s.head(keep);
    const double nrm = sk.norm();
    lam_[j - 1] = sk / nrm;
    for (int s = 0; s < 3; ++s) B_[j][s] = svd.vh.block(0, s * cr, keep, cr);
    const MatC us = svd.u.leftCols(keep) * (sk / nrm).asDiagonal();
    for (int s = 0; s < 3; ++s) B_[j - 1][s] = B_[j - 1][s] * us;
  }
  // pin the norm exactly (sites 2..L are exactly right-canonical, so the
  // state norm lives entirely in the site-1 row vectors)
  const double n1 = std::sqrt(B_[1][0].squaredNorm() + B_[1][1].squaredNorm() +
                              B_[1][2].squaredNorm());
  if (n1 > 0.0)
    for (int s = 0; s < 3; ++s) B_[1][s] /= n1;
  return total_discarded;
}

double Mps::apply_bond(const spin::Mat9& g, int j, const TruncationPolicy& pol) {
  if (j < 1 || j > L_ - 1) throw Error(Status::ConfigError, "bond out of range");
  // contract the gate into the pair, SVD with the left Schmidt weights, then
  // regauge the whole chain (the one-sided reconstruction below is exact on
  // the state but leaves the left tensor only approximately canonical)
  auto th0g = gate_block(B_[j], B_[j + 1], g);
  const Eigen::Index cl = th0g[0][0].rows(), cr = th0g[0][0].cols();
  MatC m(3 * cl, 3 * cr);
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 3; ++t)
      m.block(s * cl, t * cr, cl, cr) = lam_[j - 1].asDiagonal() * th0g[s][t];
  Svd svd = svd_econ(std::move(m));
  double disc = 0.0;
  const int keep = truncation_rank(svd.s, pol.tolerance, &disc);
  check_cap(keep, pol.chi_cap);
  const Eigen::VectorXd sk = svd.s.head(keep);
  const double nrm = sk.norm();
  lam_[j] = sk / nrm;
  for (int t = 0; t < 3; ++t) B_[j + 1][t] = svd.vh.block(0, t * cr, keep, cr);
  for (int s = 0; s < 3; ++s) {
    MatC acc = MatC::Zero(cl, keep);
    for (int t = 0; t < 3; ++t) acc.noalias() += th0g[s][t] * B_[j + 1][t].adjoint();
    B_[j][s] = acc / nrm;
  }
  disc += canonicalize(kRoundoffBudget, pol.chi_cap);
  return disc;
}

double Mps::apply_commuting_bond_layer(const spin::Mat9& g, const TruncationPolicy& pol) {
  // Forward sweep: carry the orthogonality center rightward, applying the
  // gate at each bond.  Left of the center everything is left-canonical and
  // right of it untouched right-canonical, so each SVD truncates a true
  // Schmidt spectrum.
  double total_discarded = 0.0;
  std::array<MatC, 3> c = B_[1];
  for (int j = 1; j <= L_ - 1; ++j) {
    auto th0g = gate_block(c, B_[j + 1], g);
    const Eigen::Index cl = th0g[0][0].rows(), cr = th0g[0][0].cols();
    MatC m(3 * cl, 3 * cr);
    for (int s = 0; s < 3; ++s)
      for (int t = 0; t < 3; ++t) m.block(s * cl, t * cr, cl, cr) = th0g[s][t];
    Svd svd = svd_econ(std::move(m));
    double disc = 0.0;
    const int keep = truncation_rank(svd.s, pol.tolerance, &disc);
    check_cap(keep, pol.chi_cap);
    total_discarded += disc;
    const Eigen::VectorXd sk = svd.s.head(keep);
    const double nrm = sk.norm();
    lam_[j] = sk / nrm;
    for (int s = 0; s < 3; ++s) B_[j][s] = svd.u.block(s * cl, 0, cl, keep);
    for (int t = 0; t < 3; ++t)
      c[t] = (sk / nrm).asDiagonal() * svd.vh.block(0, t * cr, keep, cr);
  }
  B_[L_] = std::move(c);
  // Backward pass: restore right-canonical form (and re-truncate in the now
  // exact bases; usually a no-op beyond dropping numerical zeros).
  for (int j = L_; j >= 2; --j) {
    const Eigen::Index cl = B_[j][0].rows(), cr = B_[j][0].cols();
    MatC m(cl, 3 * cr);
    for (int s = 0; s < 3; ++s) m.block(0, s * cr, cl, cr) = B_[j][s];
    Svd svd = svd_econ(std::move(m));
    double disc = 0.0;
    const int keep = truncation_rank(svd.s, pol.tolerance, &disc);
    check_cap(keep, pol.chi_cap);
    total_discarded += disc;
    const Eigen::VectorXd sk = svd.s.head(keep);
    const double nrm = sk.norm();
    lam_[j - 1] = sk / nrm;
    for (int s = 0; s < 3; ++s) B_[j][s] = svd.vh.block(0, s * cr, keep, cr);
    const MatC us = svd.u.leftCols(keep) * (sk / nrm).asDiagonal();
    for (int s = 0; s < 3; ++s) B_[j - 1][s] = B_[j - 1][s] * us;
  }
  const double n1 = std::sqrt(B_[1][0].squaredNorm() + B_[1][1].squaredNorm() +
                              B_[1][2].squaredNorm());
  if (n1 > 0.0)
    for (int s = 0; s < 3; ++s) B_[1][s] /= n1;
  return total_discarded;
}

StateVec Mps::to_statevector() const {
  if (L_ > 14) throw Error(Status::ConfigError, "statevector cast limited to L <= 14");
  MatC a = MatC::Ones(1, 1);
  std::size_t rows = 1;
  for (int j = 1; j <= L_; ++j) {
    const Eigen::Index chi = B_[j][0].cols();
    MatC next(rows * 3, chi);
    for (int d = 0; d < 3; ++d)
      next.block(d * rows, 0, rows, chi).noalias() = a * B_[j][d];
    a = std::move(next);
    rows *= 3;
  }
  StateVec psi(rows);
  for (std::size_t i = 0; i < rows; ++i) psi[i] = a(i, 0);
  return psi;
}

double Mps::norm_error() const {
  MatC e = MatC::Ones(1, 1);
  for (int j = 1; j <= L_; ++j) {
    MatC next = MatC::Zero(B_[j][0].cols(), B_[j][0].cols());
    for (int s = 0; s < 3; ++s) next.noalias() += B_[j][s].adjoint() * e * B_[j][s];
    e = std::move(next);
  }
  return std::abs(e(0, 0).real() - 1.0);
}

double Mps::canonical_residual() const {
  double r = 0.0;
  for (int j = 1; j <= L_; ++j) {
    MatC m = MatC::Zero(B_[j][0].rows(), B_[j][0].rows());
    for (int s = 0; s < 3; ++s) m.noalias() += B_[j][s] * B_[j][s].adjoint();
    m -= MatC::Identity(m.rows(), m.cols());
    r = std::max(r, m.cwiseAbs().maxCoeff());
  }
  for (int j = 0; j <= L_; ++j)
    r = std::max(r, std::abs(lam_[j].squaredNorm() - 1.0));
  return r;
}

double Mps::expect_one(const spin::Mat3& op, int j) const {
  if (j < 1 || j > L_) throw Error(Status::ConfigError, "site out of range");
  const Eigen::VectorXd w = lam_[j - 1].cwiseProduct(lam_[j - 1]);
  cplx val{0.0};
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 3; ++t) {
      if (op(s, t) == cplx{0.0}) continue;
      val += op(s, t) * (B_[j][s].adjoint() * w.asDiagonal() * B_[j][t]).trace();
    }
  return val.real();
}

double Mps::expect_two(const spin::Mat3& o1, int i, const spin::Mat3& o2, int j) const {
  if (i < 1 || j <= i || j > L_) throw Error(Status::ConfigError, "sites must satisfy 1 <= i < j <= L");
  const Eigen::VectorXd w = lam_[i - 1].cwiseProduct(lam_[i - 1]);
  MatC e = MatC::Zero(B_[i][0].cols(), B_[i][0].cols());
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 3; ++t) {
      if (o1(s, t) == cplx{0.0}) continue;
      e.noalias() += o1(s, t) * (B_[i][s].adjoint() * w.asDiagonal() * B_[i][t]);
    }
  for (int k = i + 1; k < j; ++k) {
    MatC next = MatC::Zero(B_[k][0].cols(), B_[k][0].cols());
    for (int s = 0; s < 3; ++s) next.noalias() += B_[k][s].adjoint() * e * B_[k][s];
    e = std::move(next);
  }
  cplx val{0.0};
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 3; ++t) {
      if (o2(s, t) == cplx{0.0}) continue;
      val += o2(s, t) * (B_[j][s].adjoint() * e * B_[j][t]).trace();
    }
  return val.real();
}

double Mps::mean_magnetization() const {
  const spin::Mat3 sz = spin::sz();
  double acc = 0.0;
  for (int j = 1; j <= L_; ++j) acc += expect_one(sz, j);
  return acc / L_;
}

double Mps::overlap0() const {
  MatC v = MatC::Ones(1, 1);
  for (int j = 1; j <= L_; ++j) v = v * B_[j][1];
  return std::norm(v(0, 0));
}

double Mps::entropy_bond(int j) const {
  if (j < 0 || j > L_) throw Error(Status::ConfigError, "bond out of range");
  return entropy_from_schmidt(lam_[j]);
}

QfiResult Mps::qfi() const {
  const spin::Mat3 ops[3] = {spin::sx(), spin::sy(), spin::sz()};
  double fq[3];
  for (int axis = 0; axis < 3; ++axis) {
    const spin::Mat3& op = ops[axis];
    const spin::Mat3 op2 = op * op;
    double exp_j = 0.0, sum_s2 = 0.0, cross = 0.0;
    MatC acc = MatC::Zero(1, 1);
    for (int j = 1; j <= L_; ++j) {
      const Eigen::VectorXd w = lam_[j - 1].cwiseProduct(lam_[j - 1]);
      cplx e1{0.0}, e2{0.0}, ec{0.0};
      MatC new_ins = MatC::Zero(B_[j][0].cols(), B_[j][0].cols());
      for (int s = 0; s < 3; ++s)
        for (int t = 0; t < 3; ++t) {
          const cplx c1 = op(s, t), c2 = op2(s, t);
          if (c1 == cplx{0.0} && c2 == cplx{0.0}) continue;
          if (c1 != cplx{0.0}) {
            const MatC bw = B_[j][s].adjoint() * w.asDiagonal() * B_[j][t];
            e1 += c1 * bw.trace();
            new_ins.noalias() += c1 * bw;
            ec += c1 * (B_[j][s].adjoint() * acc * B_[j][t]).trace();
          }
          if (c2 != cplx{0.0})
            e2 += c2 * (B_[j][s].adjoint() * w.asDiagonal() * B_[j][t]).trace();
        }
      exp_j += e1.real();
      sum_s2 += e2.real();
      cross += 2.0 * ec.real();
      MatC acc_t = MatC::Zero(B_[j][0].cols(), B_[j][0].cols());
      for (int s = 0; s < 3; ++s) acc_t.noalias() += B_[j][s].adjoint() * acc * B_[j][s];
      acc = acc_t + new_ins;
    }
    const double var = (sum_s2 + cross) - exp_j * exp_j;
    fq[axis] = 4.0 * var;
  }
  QfiResult r;
  r.fq_x = fq[0];
  r.fq_y = fq[1];
  r.fq_z = fq[2];
  r.total = fq[0] + fq[1] + fq[2];
  r.f_q = r.total / (8.0 * L_);
  return r;
}

// ---------------------------------------------------------------------------

Tebd::Tebd(const FloquetParams& p, const TruncationPolicy& pol, int substeps)
    : params_(p), pol_(pol), substeps_(substeps), mps_(Mps::polarized(p.L)) {
  if (substeps < 1) throw Error(Status::ConfigError, "substeps must be >= 1");
  if (pol.tolerance <= 0.0) throw Error(Status::ConfigError, "tolerance must be > 0");
  if (pol.chi_cap < 1) throw Error(Status::ConfigError, "chi cap must be >= 1");
  kick_ = spin::kick(p.epsilon);
  gx_ = spin::two_site_gate('x', p.theta_x / substeps);
  gz_ = spin::two_site_gate('z', p.theta_z);
}

void Tebd::step() {
  Mps backup = mps_;  // a cap stop must leave the last completed cycle intact
  try {
    if (params_.theta_x != 0.0)
      for (int s = 0; s < substeps_; ++s) {
        diag_.discarded += mps_.apply_commuting_bond_layer(gx_, pol_);
        diag_.chi_max = std::max(diag_.chi_max, mps_.chi_max());
      }
    if (params_.theta_z != 0.0) {
      diag_.discarded += mps_.apply_commuting_bond_layer(gz_, pol_);
      diag_.chi_max = std::max(diag_.chi_max, mps_.chi_max());
    }
  } catch (const Error& e) {
    if (e.code() == Status::ChiCapExceeded) {
      diag_.chi_cap_hit = true;
      diag_.stopped_at_step = steps_;
      mps_ = std::move(backup);
    }
    throw;
  }
  for (int j = 1; j <= params_.L; ++j) mps_.apply_one_site(kick_, j);
  ++steps_;
}

// ---------------------------------------------------------------------------

Itebd::Itebd(const FloquetParams& p, const TruncationPolicy& pol, int substeps)
    : params_(p), pol_(pol), substeps_(substeps) {
  if (substeps < 1) throw Error(Status::ConfigError, "substeps must be >= 1");
  if (pol.tolerance <= 0.0) throw Error(Status::ConfigError, "tolerance must be > 0");
  if (pol.chi_cap < 1) throw Error(Status::ConfigError, "chi cap must be >= 1");
  kick_ = spin::kick(p.epsilon);
  gx_ = spin::two_site_gate('x', p.theta_x / substeps);
  gz_ = spin::two_site_gate('z', p.theta_z);
  for (int i = 0; i < 2; ++i) {
    for (int s = 0; s < 3; ++s)
      B_[i][s] = (s == 1) ? MatC::Ones(1, 1) : MatC::Zero(1, 1);
    lam_[i] = Eigen::VectorXd::Ones(1);
  }
}

void Itebd::bond_update(const spin::Mat9& g, int which, double budget) {
  const int j = which, k = 1 - which;
  auto th0g = gate_block(B_[j], B_[k], g);
  const Eigen::Index cl = th0g[0][0].rows(), cr = th0g[0][0].cols();
  const Eigen::VectorXd& wl = lam_[1 - which];
  MatC m(3 * cl, 3 * cr);
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 3; ++t)
      m.block(s * cl, t * cr, cl, cr) = wl.asDiagonal() * th0g[s][t];
  Svd svd = svd_econ(std::move(m));
  double disc = 0.0;
  const int keep = truncation_rank(svd.s, budget, &disc);
  if (keep > pol_.chi_cap) {
    diag_.chi_cap_hit = true;
    diag_.stopped_at_step = steps_;
    check_cap(keep, pol_.chi_cap);
  }
  diag_.discarded += disc;
  const Eigen::VectorXd sk = svd.s.head(keep);
  const double nrm = sk.norm();
  lam_[which] = sk / nrm;
  for (int t = 0; t < 3; ++t) B_[k][t] = svd.vh.block(0, t * cr, keep, cr);
  for (int s = 0; s < 3; ++s) {
    MatC acc = MatC::Zero(cl, keep);
    for (int t = 0; t < 3; ++t) acc.noalias() += th0g[s][t] * B_[k][t].adjoint();
    B_[j][s] = acc / nrm;
  }
  diag_.chi_max = std::max(diag_.chi_max, chi());
}

void Itebd::gauge_round(double resplit_budget) {
  const Eigen::Index chi_b = B_[0][0].rows();
  constexpr double kFixedPointTol = 1e-12;
  constexpr int kMaxIter = 500;

  // right fixed point of the cell transfer map, warm-started at identity
  auto right_map = [&](const MatC& v) {
    MatC v1 = MatC::Zero(B_[1][0].rows(), B_[1][0].rows());
    for (int t = 0; t < 3; ++t) v1.noalias() += B_[1][t] * v * B_[1][t].adjoint();
    MatC v2 = MatC::Zero(chi_b, chi_b);
    for (int s = 0; s < 3; ++s) v2.noalias() += B_[0][s] * v1 * B_[0][s].adjoint();
    return v2;
  };
  MatC v = MatC::Identity(chi_b, chi_b);
  for (int it = 0; it < kMaxIter; ++it) {
    MatC vn = right_map(v);
    vn = 0.5 * (vn + vn.adjoint().eval());
    vn *= static_cast<double>(chi_b) / std::abs(vn.trace());
    const double delta = (vn - v).cwiseAbs().maxCoeff();
    v = std::move(vn);
    if (delta < kFixedPointTol) break;
  }
  Eigen::SelfAdjointEigenSolver<MatC> es_v(v);
  Eigen::VectorXd dv = es_v.eigenvalues().cwiseMax(1e-14 * es_v.eigenvalues().maxCoeff());
  const MatC x = es_v.eigenvectors() * dv.cwiseSqrt().asDiagonal();
  const MatC xi = dv.cwiseSqrt().cwiseInverse().asDiagonal() * es_v.eigenvectors().adjoint();
  for (int s = 0; s < 3; ++s) {
    B_[0][s] = xi * B_[0][s];
    B_[1][s] = B_[1][s] * x;
  }

  // left fixed point of the regauged cell, warm-started at diag(lam_B^2)
  auto left_map = [&](const MatC& w) {
    MatC w1 = MatC::Zero(B_[0][0].cols(), B_[0][0].cols());
    for (int s = 0; s < 3; ++s) w1.noalias() += B_[0][s].adjoint() * w * B_[0][s];
    MatC w2 = MatC::Zero(chi_b, chi_b);
    for (int t = 0; t < 3; ++t) w2.noalias() += B_[1][t].adjoint() * w1 * B_[1][t];
    return w2;
  };
  MatC w;
  if (lam_[1].size() == chi_b) {
    w = lam_[1].cwiseProduct(lam_[1]).cast<cplx>().asDiagonal();
  } else {
    w = MatC::Identity(chi_b, chi_b) / static_cast<double>(chi_b);
  }
  for (int it = 0; it < kMaxIter; ++it) {
    MatC wn = left_map(w);
    wn = 0.5 * (wn + wn.adjoint().eval());
    wn /= wn.trace().real();
    const double delta = (wn - w).cwiseAbs().maxCoeff();
    w = std::move(wn);
    if (delta < kFixedPointTol) break;
  }
  Eigen::SelfAdjointEigenSolver<MatC> es_w(w);
  // eigenvalues ascending; reorder descending so Schmidt values are sorted
  const Eigen::Index n = es_w.eigenvalues().size();
  Eigen::VectorXd lam2(n);
  MatC u(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lam2[i] = std::max(es_w.eigenvalues()[n - 1 - i], 0.0);
    u.col(i) = es_w.eigenvectors().col(n - 1 - i);
  }
  for (int s = 0; s < 3; ++s) {
    B_[0][s] = u.adjoint() * B_[0][s];
    B_[1][s] = B_[1][s] * u;
  }
  Eigen::VectorXd lam_b = lam2.cwiseSqrt();
  lam_[1] = lam_b / lam_b.norm();

  // no-gate resplit of the internal bond: refreshes lam_A and restores the
  // per-tensor right-canonical form (exact when its truncation is empty)
  bond_update(spin::Mat9::Identity(), 0, resplit_budget);
}

void Itebd::canonicalize(double target, int rounds) {
  // a truncating resplit reintroduces O(discarded/lambda_min^2) gauge error;
  // later rounds truncate at roundoff only, so the second round is exact
  double budget = pol_.tolerance;
  for (int r = 0; r < rounds; ++r) {
    if (right_residual() < target) return;
    gauge_round(budget);
    budget = kRoundoffBudget;
  }
}

void Itebd::step() {
  const auto backup_b = B_;
  const auto backup_lam = lam_;
  try {
    if (params_.theta_x != 0.0)
      for (int s = 0; s < substeps_; ++s) {
        bond_update(gx_, 0, pol_.tolerance);
        bond_update(gx_, 1, pol_.tolerance);
        canonicalize();
      }
    if (params_.theta_z != 0.0) {
      bond_update(gz_, 0, pol_.tolerance);
      bond_update(gz_, 1, pol_.tolerance);
      canonicalize();
    }
  } catch (const Error& e) {
    if (e.code() == Status::ChiCapExceeded) {
      diag_.chi_cap_hit = true;
      diag_.stopped_at_step = steps_;
      B_ = backup_b;
      lam_ = backup_lam;
    }
    throw;
  }
  for (int i = 0; i < 2; ++i) {
    std::array<MatC, 3> nb;
    for (int s = 0; s < 3; ++s) {
      nb[s] = MatC::Zero(B_[i][s].rows(), B_[i][s].cols());
      for (int t = 0; t < 3; ++t)
        if (kick_(s, t) != cplx{0.0}) nb[s] += kick_(s, t) * B_[i][t];
    }
    B_[i] = std::move(nb);
  }
  ++steps_;
}

int Itebd::chi() const {
  return static_cast<int>(std::max(lam_[0].size(), lam_[1].size()));
}

double Itebd::sz_site(int which) const {
  const spin::Mat3 sz = spin::sz();
  const Eigen::VectorXd w =
      lam_[1 - which].cwiseProduct(lam_[1 - which]);
  cplx val{0.0};
  for (int s = 0; s < 3; ++s) {
    if (sz(s, s) == cplx{0.0}) continue;
    val += sz(s, s) * (B_[which][s].adjoint() * w.asDiagonal() * B_[which][s]).trace();
  }
  return val.real();
}

double Itebd::entropy_bond(int which) const { return entropy_from_schmidt(lam_[which]); }

double Itebd::right_residual() const {
  double r = 0.0;
  for (int i = 0; i < 2; ++i) {
    MatC m = MatC::Zero(B_[i][0].rows(), B_[i][0].rows());
    for (int s = 0; s < 3; ++s) m.noalias() += B_[i][s] * B_[i][s].adjoint();
    m -= MatC::Identity(m.rows(), m.cols());
    if (m.size() > 0) r = std::max(r, m.cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace qfloq
