#include "qfloq/engine.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "qfloq/error.hpp"

namespace qfloq {

std::size_t pow3(int l) {
  std::size_t d = 1;
  while (l-- > 0) d *= 3;
  return d;
}

UxMode parse_ux_mode(const std::string& s) {
  if (s == "exact") return UxMode::Exact;
  if (s == "brickwork") return UxMode::Brickwork;
  throw Error(Status::ConfigError, "ux-mode must be 'exact' or 'brickwork', got '" + s + "'");
}

StateVec init_state(int L, const std::string& pattern) {
  if (static_cast<int>(pattern.size()) != L)
    throw Error(Status::ConfigError, "pattern length must equal L");
  std::size_t idx = 0, w = 1;
  for (int j = 0; j < L; ++j, w *= 3) {
    int d;
    switch (pattern[j]) {
      case '+': d = 0; break;
      case '0': d = 1; break;
      case '-': d = 2; break;
      default:
        throw Error(Status::ConfigError, "pattern symbols must be one of + 0 -");
    }
    idx += static_cast<std::size_t>(d) * w;
  }
  StateVec psi(pow3(L), cplx{0.0});
  psi[idx] = 1.0;
  return psi;
}

void apply_one_site(StateVec& psi, const spin::Mat3& m, int j, int L) {
  if (j < 1 || j > L) throw Error(Status::ConfigError, "site out of range");
  const std::size_t s = pow3(j - 1), dim = psi.size();
  cplx* p = psi.data();
  if (s == 1) {
    // site 1: the state is a 3 x (dim/3) column-major matrix; chunked GEMM
    const std::size_t cols = dim / 3, chunk = 4096;
    Eigen::Matrix<cplx, 3, Eigen::Dynamic> w(3, std::min(cols, chunk));
    for (std::size_t c0 = 0; c0 < cols; c0 += chunk) {
      const auto nc = static_cast<Eigen::Index>(std::min(chunk, cols - c0));
      Eigen::Map<Eigen::Matrix<cplx, 3, Eigen::Dynamic>> blk(p + 3 * c0, 3, nc);
      w.leftCols(nc).noalias() = m * blk;
      blk = w.leftCols(nc);
    }
    return;
  }
  // each contiguous 3s-block is an s x 3 matrix (column r at offset r*s)
  const spin::Mat3 mt = m.transpose();
  Eigen::Matrix<cplx, Eigen::Dynamic, 3> w(s, 3);
  for (std::size_t i0 = 0; i0 < dim; i0 += 3 * s) {
    Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, 3>> blk(
        p + i0, static_cast<Eigen::Index>(s), 3);
    w.noalias() = blk * mt;
    blk = w;
  }
}

void apply_two_site(StateVec& psi, const spin::Mat9& m, int j, int L) {
  if (j < 1 || j > L - 1) throw Error(Status::ConfigError, "bond out of range");
  const std::size_t s = pow3(j - 1), dim = psi.size(), block = 9 * s;
  cplx mm[81];  // local copy: no aliasing against the psi stores
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c) mm[9 * r + c] = m(r, c);
  cplx* p = psi.data();
  cplx in[9], out[9];
  for (std::size_t i0 = 0; i0 < dim; i0 += block)
    for (std::size_t i1 = i0; i1 < i0 + s; ++i1) {
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) in[3 * a + b] = p[i1 + a * s + b * 3 * s];
      for (int r = 0; r < 9; ++r) {
        cplx acc{0.0};
        for (int c = 0; c < 9; ++c) acc += mm[9 * r + c] * in[c];
        out[r] = acc;
      }
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) p[i1 + a * s + b * 3 * s] = out[3 * a + b];
    }
}

FloquetEngine::FloquetEngine(const FloquetParams& p, UxMode mode)
    : params_(p), mode_(mode) {
  if (p.L < 2)
    throw Error(Status::ConfigError, "L must be >= 2");
  if (p.L > kMaxL)
    throw Error(Status::ConfigError,
                "exact engine supports L <= " + std::to_string(kMaxL) +
                    "; use the MPS engine for larger chains");
  dim_ = pow3(p.L);

  // One bond-sum table serves both diagonal passes: ordering the S^x
  // eigenbasis columns so digit d maps to eigenvalue m = 1-d makes the U_x
  // phase pattern in the rotated frame identical to the U_z one.
  bondsum_.resize(dim_);
  for (std::size_t I = 0; I < dim_; ++I) {
    std::size_t t = I;
    int prev = 1 - static_cast<int>(t % 3);
    t /= 3;
    int sum = 0;
    for (int j = 2; j <= p.L; ++j) {
      const int cur = 1 - static_cast<int>(t % 3);
      t /= 3;
      sum += prev * cur;
      prev = cur;
    }
    bondsum_[I] = static_cast<int8_t>(sum);
  }
  const int span = 2 * p.L - 1;
  xphase_.resize(span);
  zphase_.resize(span);
  for (int k = 0; k < span; ++k) {
    const double b = k - (p.L - 1);
    xphase_[k] = std::exp(cplx(0.0, -p.theta_x / 2 * b));
    zphase_[k] = std::exp(cplx(0.0, -p.theta_z / 2 * b));
  }

  v_ = spin::x_eigenbasis();
  vdag_ = v_.adjoint();
  kick_ = spin::kick(p.epsilon);
  gx_ = spin::two_site_gate('x', p.theta_x);

  psi_ = init_state(p.L, std::string(p.L, '0'));
}

void FloquetEngine::set_state(StateVec psi) {
  if (psi.size() != dim_)
    throw Error(Status::ConfigError, "state dimension must be 3^L");
  psi_ = std::move(psi);
  steps_ = 0;
}

void FloquetEngine::step() {
  if (mode_ == UxMode::Exact)
    apply_ux_exact();
  else
    apply_ux_brickwork();
  apply_uz();
  apply_kick();
  ++steps_;
  check_norm();
}

void FloquetEngine::evolve(int n) {
  for (int i = 0; i < n; ++i) step();
}

void FloquetEngine::apply_ux_exact() {
  if (params_.theta_x == 0.0) return;  // U_x is the identity
  const int L = params_.L, off = L - 1;
  for (int j = 1; j <= L; ++j) apply_one_site(psi_, vdag_, j, L);
  for (std::size_t I = 0; I < dim_; ++I) psi_[I] *= xphase_[bondsum_[I] + off];
  for (int j = 1; j <= L; ++j) apply_one_site(psi_, v_, j, L);
}

void FloquetEngine::apply_ux_brickwork() {
  if (params_.theta_x == 0.0) return;
  const int L = params_.L;
  for (int j = 1; j <= L - 1; j += 2) apply_two_site(psi_, gx_, j, L);
  for (int j = 2; j <= L - 1; j += 2) apply_two_site(psi_, gx_, j, L);
}

void FloquetEngine::apply_uz() {
  if (params_.theta_z == 0.0) return;
  const int off = params_.L - 1;
  for (std::size_t I = 0; I < dim_; ++I) psi_[I] *= zphase_[bondsum_[I] + off];
}

void FloquetEngine::apply_kick() {
  for (int j = 1; j <= params_.L; ++j) apply_one_site(psi_, kick_, j, params_.L);
}

void FloquetEngine::check_norm() const {
  double n2 = 0.0;
  for (const cplx& a : psi_) n2 += std::norm(a);
  if (std::abs(n2 - 1.0) > 1e-8)
    throw Error(Status::EngineError,
                "norm drift exceeded 1e-8 at step " + std::to_string(steps_));
}

spin::MatX dense_cycle(const FloquetParams& p) {
  if (p.L < 2 || p.L > 5)
    throw Error(Status::ConfigError, "dense oracle supports 2 <= L <= 5");
  using spin::MatX;
  const auto dim = static_cast<Eigen::Index>(pow3(p.L));

  auto pair99 = [](const spin::Mat3& s) {
    spin::Mat9 a;
    for (int r1 = 0; r1 < 3; ++r1)
      for (int c1 = 0; c1 < 3; ++c1)
        for (int r2 = 0; r2 < 3; ++r2)
          for (int c2 = 0; c2 < 3; ++c2)
            a(3 * r1 + r2, 3 * c1 + c2) = s(r1, c1) * s(r2, c2);
    return a;
  };
  auto expm_herm = [&](const MatX& h, double pref) {
    Eigen::SelfAdjointEigenSolver<MatX> es(h);
    MatX d = MatX::Zero(h.rows(), h.cols());
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      d(i, i) = std::exp(cplx(0.0, pref * es.eigenvalues()[i]));
    return MatX(es.eigenvectors() * d * es.eigenvectors().adjoint());
  };

  MatX hx = MatX::Zero(dim, dim), hz = MatX::Zero(dim, dim);
  const spin::Mat9 xx = pair99(spin::sx()), zz = pair99(spin::sz());
  for (int j = 1; j <= p.L - 1; ++j) {
    hx += spin::op_at_bond(xx, j, p.L);
    hz += spin::op_at_bond(zz, j, p.L);
  }
  const MatX ux = expm_herm(hx, -p.theta_x / 2);
  const MatX uz = expm_herm(hz, -p.theta_z / 2);
  MatX pk = MatX::Identity(dim, dim);
  for (int j = 1; j <= p.L; ++j) pk = spin::op_at_site(spin::kick(p.epsilon), j, p.L) * pk;
  return pk * uz * ux;
}

}  // namespace qfloq
