#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "qfloq/engine.hpp"

// Appendix-level gate compilation: spin-spin couplings synthesized from the
// native MS gate plus local rotations in the 4-level encoding (a, +, 0, -)
// with the auxiliary level at index 0.
namespace qfloq::compiler {

using Mat4 = Eigen::Matrix4cd;
using Mat16 = Eigen::Matrix<cplx, 16, 16>;

struct Gate {
  enum class Kind { R, Z, MS };
  Kind kind = Kind::R;
  int site = 0;        // 0 or 1 within the pair; MS acts on both
  int k = 1;           // rotation family 1..3
  int li = 0, lj = 0;  // Z level pair (indices in a,+,0,-)
  double theta = 0.0, phi = 0.0;
};
using GateSequence = std::vector<Gate>;

// Per-site, per-level diagonal phases tracked in software.
struct PhaseLedger {
  std::array<std::array<double, 4>, 2> alpha{};  // [site][level]
};

Mat4 embed(const spin::Mat3& q);           // qutrit op in the lower-right block
Mat4 lambda1_4();                          // lambda_1 on the {+,0} block
Mat4 rotation4(int k, double theta, double phi);
Mat4 zgate(int li, int lj, double theta);  // e^{+i theta/2} at li, e^{-i theta/2} at lj
Mat16 ms_gate(double theta);
Mat16 kron4(const Mat4& a, const Mat4& b);  // a on the pair's first site (slow digit)

Mat4 gate_matrix1(const Gate& g);           // single-site gates only
Mat16 gate_matrix(const Gate& g);           // embedded on the pair
Mat16 sequence_matrix(const GateSequence& seq);  // list order = application order

struct IsolationResult {
  GateSequence seq;        // dressing Z gates, application order after the MS
  Mat16 a1, a2;            // residual diagonals, nontrivial only on |a>
  double identity_residual = 0.0;
  double qutrit_block_residual = 0.0;  // || restrict(A_i) - I ||
};
IsolationResult aux_isolation(double theta);

struct CompileResult {
  GateSequence seq;
  double subspace_residual = 0.0;  // vs exp(-i theta/2 S^a x S^a), phase-aligned
  double leakage = 0.0;            // coupling into/out of the |a> blocks
};
// Throws Error(VerifyError) when the compiled gate misses its target.
CompileResult compile_coupling(char axis, double theta);

struct LedgerResult {
  GateSequence seq;  // Z gates removed, later rotation phases rewritten
  PhaseLedger ledger;
};
// Throws Error(VerifyError, "NonDiagonalResidual...") when a tracked phase
// cannot be pushed through a subsequent gate (MS needs alpha_+ == alpha_0).
LedgerResult ledger_compile(const GateSequence& circuit);

// Compiles one full Floquet cycle to native gates on an L-site 4-level chain
// (L in {2,3}), simulates it densely, and returns the max amplitude deviation
// from the exact 3^L engine on the qutrit subspace after phase alignment.
// aux_leakage receives the total probability weight left outside the qutrit
// subspace.
double full_cycle_residual(const FloquetParams& p, double* aux_leakage = nullptr);

}  // namespace qfloq::compiler
