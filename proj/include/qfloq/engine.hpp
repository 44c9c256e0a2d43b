#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfloq/spin.hpp"

namespace qfloq {

using cplx = std::complex<double>;

// Amplitudes indexed little-endian in ternary: basis index I = sum_j d_j 3^{j-1}
// with d_j in {0,1,2} the local level (+,0,-) of site j (sites are 1-based).
using StateVec = std::vector<cplx>;

struct FloquetParams {
  int L = 4;
  double theta_x = 0.0;
  double theta_z = 0.0;
  double epsilon = 0.0;
};

// U_x realization: Exact = rotated diagonal (change every site to the S^x
// eigenbasis, apply the diagonal phase of the full bond sum, rotate back);
// Brickwork = odd bonds then even bonds as 9x9 gates.  Same-axis bond terms
// commute (they are functions of the commuting set {S^x_j}), so both paths
// are exact and agree to rounding; the mode switch exists to mirror the
// hardware circuit layout.
enum class UxMode { Exact, Brickwork };

std::size_t pow3(int l);

UxMode parse_ux_mode(const std::string& s);  // "exact" | "brickwork"

StateVec init_state(int L, const std::string& pattern);  // pattern of + 0 -

// In-place strided kernels. j is the 1-based site (bond) index; for bonds the
// 9x9 row index is 3*a_j + a_{j+1}.
void apply_one_site(StateVec& psi, const spin::Mat3& m, int j, int L);
void apply_two_site(StateVec& psi, const spin::Mat9& m, int j, int L);

class FloquetEngine {
 public:
  static constexpr int kMaxL = 14;  // 3^14 amplitudes = 76 MB

  explicit FloquetEngine(const FloquetParams& p, UxMode mode = UxMode::Exact);

  void set_state(StateVec psi);
  const StateVec& state() const { return psi_; }
  const FloquetParams& params() const { return params_; }
  int steps_done() const { return steps_; }

  void step();  // one Floquet cycle U_F = P · U_z · U_x
  void evolve(int n);

 private:
  void apply_ux_exact();
  void apply_ux_brickwork();
  void apply_uz();
  void apply_kick();
  void check_norm() const;

  FloquetParams params_;
  UxMode mode_;
  std::size_t dim_;
  StateVec psi_;
  std::vector<int8_t> bondsum_;        // sum_j m_j m_{j+1}, m = 1 - d
  std::vector<cplx> xphase_, zphase_;  // LUT over bondsum + (L-1)
  spin::Mat3 v_, vdag_, kick_;
  spin::Mat9 gx_;
  int steps_ = 0;
};

// Dense 3^L x 3^L one-cycle unitary from matrix exponentials of the full bond
// sums (L <= 5).  Deliberately avoids the engine's factorized path so it can
// serve as an independent oracle.
spin::MatX dense_cycle(const FloquetParams& p);

}  // namespace qfloq
