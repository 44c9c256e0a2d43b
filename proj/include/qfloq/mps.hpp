#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "qfloq/engine.hpp"
#include "qfloq/observables.hpp"

namespace qfloq {

using MatC = Eigen::MatrixXcd;

struct TruncationPolicy {
  // Discarded-weight budget per bond SVD: the smallest relative squared
  // Schmidt values are dropped greedily while their cumulative sum stays
  // within tolerance.  Bond dimension grows dynamically up to chi_cap.
  double tolerance = 1e-6;
  int chi_cap = 600;  // stop-and-flag threshold
};

struct TebdDiagnostics {
  int chi_max = 0;             // largest bond dimension seen
  double discarded = 0.0;      // cumulative discarded weight
  bool chi_cap_hit = false;
  int stopped_at_step = -1;    // step at which the cap stopped the run
};

// Right-canonical B-form MPS: per site j (1-based) three chi_l x chi_r
// matrices B[j][s] (s = physical level), per bond Schmidt values lam[j]
// (lam[0] and lam[L] are the trivial boundary bonds).  Every public mutator
// leaves the state right-canonical with true Schmidt spectra, so the left
// environment at bond j is diag(lam[j]^2) exactly.
class Mps {
 public:
  Mps(int L, const std::string& pattern);  // product state, pattern of + 0 -
  static Mps polarized(int L) { return Mps(L, std::string(L, '0')); }

  int L() const { return L_; }
  int chi_max() const;
  const std::array<MatC, 3>& site(int j) const { return B_[j]; }
  const Eigen::VectorXd& schmidt(int j) const { return lam_[j]; }

  void apply_one_site(const spin::Mat3& u, int j);
  // Two-site gate on bond j followed by a regauge; returns discarded weight.
  double apply_bond(const spin::Mat9& g, int j, const TruncationPolicy& pol);
  // One layer of the same two-site gate on every bond.  The per-axis coupling
  // terms all commute, so a strict left-to-right sweep applies the layer
  // exactly; a backward pass then restores canonical form and fresh spectra.
  double apply_commuting_bond_layer(const spin::Mat9& g, const TruncationPolicy& pol);
  // Left-to-right QR pass + right-to-left SVD pass: restores right-canonical
  // form and exact Schmidt values from any gauge.  Truncates within budget.
  double canonicalize(double budget, int chi_cap);

  StateVec to_statevector() const;  // L <= 14
  double norm_error() const;        // | <psi|psi> - 1 |
  // max over sites/bonds of right-orthonormality and Schmidt-normalization residuals
  double canonical_residual() const;

  double expect_one(const spin::Mat3& op, int j) const;
  double expect_two(const spin::Mat3& o1, int i, const spin::Mat3& o2, int j) const;
  double mean_magnetization() const;
  double overlap0() const;           // |<0...0|psi>|^2
  double entropy_bond(int j) const;  // natural log, from Schmidt values
  QfiResult qfi() const;             // O(L chi^3) accumulation sweep

 private:
  int L_;
  std::vector<std::array<MatC, 3>> B_;   // 1-based
  std::vector<Eigen::VectorXd> lam_;     // bonds 0..L
};

// Finite-chain TEBD driver for one Floquet cycle per step().
class Tebd {
 public:
  Tebd(const FloquetParams& p, const TruncationPolicy& pol, int substeps = 1);

  void step();  // throws Error(ChiCapExceeded) when the cap is hit
  const Mps& mps() const { return mps_; }
  Mps& mps() { return mps_; }
  const TebdDiagnostics& diagnostics() const { return diag_; }
  int steps_done() const { return steps_; }

 private:
  FloquetParams params_;
  TruncationPolicy pol_;
  int substeps_;
  Mps mps_;
  spin::Mat3 kick_;
  spin::Mat9 gx_, gz_;
  TebdDiagnostics diag_;
  int steps_ = 0;
};

// Infinite TEBD on a two-site unit cell (translation-invariant bulk).
// Gate application uses inverse-free bond updates; truncation pollutes the
// gauge at O(discarded/lambda_min^2), so each layer ends with a
// canonicalization: power-iteration fixed points of the cell transfer map,
// gauge fix, and a no-gate resplit of the internal bond.
class Itebd {
 public:
  Itebd(const FloquetParams& p, const TruncationPolicy& pol, int substeps = 1);

  void step();
  int chi() const;
  double sz_site(int which) const;  // which in {0,1}
  double entropy_bond(int which) const;
  double right_residual() const;
  const TebdDiagnostics& diagnostics() const { return diag_; }
  int steps_done() const { return steps_; }

 private:
  void bond_update(const spin::Mat9& g, int which, double budget);
  void gauge_round(double resplit_budget);
  void canonicalize(double target = 1e-9, int rounds = 4);

  FloquetParams params_;
  TruncationPolicy pol_;
  int substeps_;
  std::array<std::array<MatC, 3>, 2> B_;   // cell tensors A, B
  std::array<Eigen::VectorXd, 2> lam_;     // lam[0]: bond inside cell (A-B); lam[1]: bond between cells
  spin::Mat3 kick_;
  spin::Mat9 gx_, gz_;
  TebdDiagnostics diag_;
  int steps_ = 0;
};

}  // namespace qfloq
