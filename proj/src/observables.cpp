#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "qfloq/observables.hpp"

#include <cmath>

#include "qfloq/error.hpp"

namespace qfloq {

namespace {

inline int digit(std::size_t I, int j) {  // 1-based site
  return static_cast<int>((I / pow3(j - 1)) % 3);
}

inline double mval(int d) { return 1.0 - d; }  // (+,0,-) -> (+1,0,-1)

// Per-index ternary digit sums, so sum_j m_j = L - dsum[I] without touching
// every digit of every index (dsum[I] = I%3 + dsum[I/3]).
std::vector<int8_t> digit_sums(std::size_t dim) {
  std::vector<int8_t> t(dim);
  t[0] = 0;
  for (std::size_t I = 1; I < dim; ++I)
    t[I] = static_cast<int8_t>(static_cast<int>(I % 3) + t[I / 3]);
  return t;
}

// phi += J_a psi for the collective spin J_a = sum_j S^a_j.  S^x and S^y only
// connect neighboring levels with element 1/sqrt(2) (times -/+ i for y).
void accumulate_jx(const StateVec& psi, StateVec& phi, int L, bool want_y) {
  const double r = 1.0 / std::sqrt(2.0);
  const std::size_t dim = psi.size();
  for (int j = 1; j <= L; ++j) {
    const std::size_t s = pow3(j - 1), block = 3 * s;
    for (std::size_t i0 = 0; i0 < dim; i0 += block)
      for (std::size_t i1 = i0; i1 < i0 + s; ++i1) {
        const cplx a0 = psi[i1], a1 = psi[i1 + s], a2 = psi[i1 + 2 * s];
        if (!want_y) {
          phi[i1] += r * a1;
          phi[i1 + s] += r * (a0 + a2);
          phi[i1 + 2 * s] += r * a1;
        } else {
          // S^y rows: (0,1) = -i/sqrt2, (1,0) = +i/sqrt2, (1,2) = -i/sqrt2, (2,1) = +i/sqrt2
          const cplx mi{0.0, -r}, pi{0.0, r};
          phi[i1] += mi * a1;
          phi[i1 + s] += pi * a0 + mi * a2;
          phi[i1 + 2 * s] += pi * a1;
        }
      }
  }
}

}  // namespace

double sz_site(const StateVec& psi, int j, int L) {
  if (j < 1 || j > L) throw Error(Status::ConfigError, "site out of range");
  const std::size_t s = pow3(j - 1), dim = psi.size(), block = 3 * s;
  double acc = 0.0;
  for (std::size_t i0 = 0; i0 < dim; i0 += block)
    for (std::size_t i1 = i0; i1 < i0 + s; ++i1)
      acc += std::norm(psi[i1]) - std::norm(psi[i1 + 2 * s]);
  return acc;
}

double mean_magnetization(const StateVec& psi, int L) {
  const std::vector<int8_t> dsum = digit_sums(psi.size());
  double acc = 0.0;
  for (std::size_t I = 0; I < psi.size(); ++I)
    acc += std::norm(psi[I]) * (L - dsum[I]);
  return acc / L;
}

double zz_correlation(const StateVec& psi, int i, int j, int L) {
  if (i < 1 || j < 1 || i > L || j > L)
    throw Error(Status::ConfigError, "site out of range");
  double acc = 0.0;
  for (std::size_t I = 0; I < psi.size(); ++I) {
    const double w = std::norm(psi[I]);
    if (w == 0.0) continue;
    acc += w * mval(digit(I, i)) * mval(digit(I, j));
  }
  return acc;
}

double overlap(const StateVec& psi, const StateVec& phi) {
  if (psi.size() != phi.size())
    throw Error(Status::ConfigError, "overlap: dimension mismatch");
  cplx acc{0.0};
  for (std::size_t I = 0; I < psi.size(); ++I) acc += std::conj(phi[I]) * psi[I];
  return std::norm(acc);
}

double overlap0(const StateVec& psi, int L) {
  return std::norm(psi[(pow3(L) - 1) / 2]);
}

double entropy_cut(const StateVec& psi, int cut, int L) {
  if (cut < 1 || cut > L - 1) throw Error(Status::ConfigError, "cut out of range");
  const lapack_int dl = static_cast<lapack_int>(pow3(cut));
  const lapack_int dr = static_cast<lapack_int>(pow3(L - cut));
  // Little-endian digits make the amplitude buffer the column-major matrix
  // psi[left + dl*right] directly; zgesdd destroys its input, so copy.
  StateVec a = psi;
  const lapack_int ns = std::min(dl, dr);
  std::vector<double> s(ns);
  const lapack_int info = LAPACKE_zgesdd(
      LAPACK_COL_MAJOR, 'N', dl, dr, a.data(), dl, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0)
    throw Error(Status::EngineError, "zgesdd failed with info=" + std::to_string(info));
  double ent = 0.0;
  for (double sv : s) {
    if (sv < 1e-12) continue;
    const double p = sv * sv;
    ent -= p * std::log(p);
  }
  return ent;
}

double half_chain_entropy(const StateVec& psi, int L) {
  return entropy_cut(psi, L / 2, L);
}

QfiResult qfi(const StateVec& psi, int L) {
  const std::size_t dim = psi.size();
  QfiResult r;

  // J_z is diagonal: moments from the digit sums.
  const std::vector<int8_t> dsum = digit_sums(dim);
  double ez = 0.0, ez2 = 0.0;
  for (std::size_t I = 0; I < dim; ++I) {
    const double w = std::norm(psi[I]);
    if (w == 0.0) continue;
    const double msum = L - dsum[I];
    ez += w * msum;
    ez2 += w * msum * msum;
  }
  r.fq_z = 4.0 * (ez2 - ez * ez);

  StateVec phi(dim, cplx{0.0});
  accumulate_jx(psi, phi, L, false);
  cplx ex{0.0};
  double ex2 = 0.0;
  for (std::size_t I = 0; I < dim; ++I) {
    ex += std::conj(psi[I]) * phi[I];
    ex2 += std::norm(phi[I]);
  }
  r.fq_x = 4.0 * (ex2 - ex.real() * ex.real());

  std::fill(phi.begin(), phi.end(), cplx{0.0});
  accumulate_jx(psi, phi, L, true);
  cplx ey{0.0};
  double ey2 = 0.0;
  for (std::size_t I = 0; I < dim; ++I) {
    ey += std::conj(psi[I]) * phi[I];
    ey2 += std::norm(phi[I]);
  }
  r.fq_y = 4.0 * (ey2 - ey.real() * ey.real());

  r.total = r.fq_x + r.fq_y + r.fq_z;
  r.f_q = r.total / (8.0 * L);
  return r;
}

double multipartite_bound(int k, int L) {
  if (k < 1 || k > L) throw Error(Status::ConfigError, "block size must be in [1, L]");
  return (k + 1) / 2.0;
}

std::vector<double> dft_mag(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) throw Error(Status::ConfigError, "dft needs at least 2 samples");
  std::vector<double> mag(n);
  const double w0 = -2.0 * spin::kPi / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{0.0};
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::exp(cplx(0.0, w0 * static_cast<double>(k * i)));
    mag[k] = std::abs(acc) / static_cast<double>(n);
  }
  return mag;
}

}  // namespace qfloq
