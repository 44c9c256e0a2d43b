// Native-gate synthesis on the 4-level encoding: rotations and virtual-Z
// algebra, the dressed MS construction, axis conjugation, the phase ledger,
// and the compiled full Floquet cycle.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>

#include "qfloq/compiler.hpp"
#include "qfloq/error.hpp"
#include "qfloq/spin.hpp"

using namespace qfloq;
using namespace qfloq::compiler;
using cd = std::complex<double>;
constexpr cd I1{0.0, 1.0};
using spin::kPi;

namespace {

double mat_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// exp(-i theta/2 H) for Hermitian H by spectral decomposition
Eigen::MatrixXcd herm_exp(const Eigen::MatrixXcd& h, double theta) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(h.rows(), h.cols());
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    d(k, k) = std::exp(-I1 * (theta / 2.0) * es.eigenvalues()(k));
  return es.eigenvectors() * d * es.eigenvectors().adjoint();
}

// qutrit-subspace restriction of a pair unitary (level l = qutrit digit + 1)
Eigen::MatrixXcd restrict9(const Mat16& u) {
  Eigen::MatrixXcd got(9, 9);
  for (int r1 = 0; r1 < 3; ++r1)
    for (int r2 = 0; r2 < 3; ++r2)
      for (int c1 = 0; c1 < 3; ++c1)
        for (int c2 = 0; c2 < 3; ++c2)
          got(3 * r1 + r2, 3 * c1 + c2) =
              u(4 * (r1 + 1) + (r2 + 1), 4 * (c1 + 1) + (c2 + 1));
  return got;
}

double aligned_diff(const Eigen::MatrixXcd& got, const Eigen::MatrixXcd& want) {
  Eigen::Index r = 0, c = 0;
  want.cwiseAbs().maxCoeff(&r, &c);
  REQUIRE(std::abs(got(r, c)) > 1e-12);
  const cd align = want(r, c) / got(r, c) * (std::abs(got(r, c)) / std::abs(want(r, c)));
  return (got * align - want).cwiseAbs().maxCoeff();
}

Mat16 ledger_diagonal(const PhaseLedger& lg) {
  Mat4 d0 = Mat4::Identity(), d1 = Mat4::Identity();
  for (int l = 0; l < 4; ++l) {
    d0(l, l) = std::exp(I1 * lg.alpha[0][l]);
    d1(l, l) = std::exp(I1 * lg.alpha[1][l]);
  }
  return kron4(d0, d1);
}

GateSequence dressed_ms(double theta) {
  GateSequence seq;
  for (int site = 0; site < 2; ++site) {
    seq.push_back({Gate::Kind::Z, site, 0, 0, 1, -theta, 0.0});
    seq.push_back({Gate::Kind::Z, site, 0, 1, 2, -theta / 2, 0.0});
  }
  seq.push_back({Gate::Kind::MS, 0, 0, 0, 0, theta, 0.0});
  return seq;
}

}  // namespace

TEST_CASE("4-level embedding") {
  const Mat4 e = embed(spin::sz());
  CHECK(std::abs(e(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(e(1, 1) - 1.0) < 1e-15);
  CHECK(std::abs(e(2, 2)) < 1e-15);
  CHECK(std::abs(e(3, 3) + 1.0) < 1e-15);

  // embed() keeps the identity on the aux level, so lambda1_4 carries a 1 there
  const Mat4 l1 = lambda1_4();
  CHECK(std::abs(l1(1, 2) - 1.0) < 1e-15);
  CHECK(std::abs(l1(2, 1) - 1.0) < 1e-15);
  CHECK(std::abs(l1(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(l1(1, 1)) < 1e-15);
  CHECK(std::abs(l1(3, 3)) < 1e-15);
}

TEST_CASE("native rotations and virtual Z") {
  // families act on (+,0), (+,-), (0,-); the aux level is never touched
  const int pairs[3][2] = {{1, 2}, {1, 3}, {2, 3}};
  for (int k = 1; k <= 3; ++k) {
    const Mat4 u = rotation4(k, 0.9, -0.4);
    CHECK(mat_diff(u * u.adjoint(), Mat4::Identity()) < 1e-14);
    CHECK(std::abs(u(0, 0) - 1.0) < 1e-15);
    const int a = pairs[k - 1][0], b = pairs[k - 1][1];
    for (int l = 0; l < 4; ++l)
      if (l != a && l != b) {
        CHECK(std::abs(u(l, l) - 1.0) < 1e-15);
        for (int m = 0; m < 4; ++m)
          if (m != l) {
            CHECK(std::abs(u(l, m)) < 1e-15);
            CHECK(std::abs(u(m, l)) < 1e-15);
          }
      }
  }
  CHECK_THROWS_AS(rotation4(0, 0.5, 0.0), Error);
  CHECK_THROWS_AS(rotation4(4, 0.5, 0.0), Error);

  const Mat4 z = zgate(1, 2, 0.7);
  CHECK(std::abs(z(1, 1) - std::exp(I1 * 0.35)) < 1e-15);
  CHECK(std::abs(z(2, 2) - std::exp(-I1 * 0.35)) < 1e-15);
  CHECK(std::abs(z(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(z(3, 3) - 1.0) < 1e-15);
  CHECK_THROWS_AS(zgate(1, 1, 0.5), Error);
  CHECK_THROWS_AS(zgate(-1, 2, 0.5), Error);
  CHECK_THROWS_AS(zgate(1, 4, 0.5), Error);

  // Z_{+0}(theta) from physical rotations: R_1(pi/2,-pi/2) first, then
  // R_1(theta,0), then R_1(pi/2,pi/2)
  for (double th : {0.4, 1.9, -0.8}) {
    const Mat4 composed = rotation4(1, kPi / 2, kPi / 2) *
                          rotation4(1, th, 0.0) *
                          rotation4(1, kPi / 2, -kPi / 2);
    CHECK(mat_diff(composed, zgate(1, 2, th)) < 1e-12);
  }
}

TEST_CASE("MS gate") {
  CHECK(mat_diff(ms_gate(0.0), Mat16::Identity()) < 1e-14);
  for (double th : {0.3, 1.2, -2.0}) {
    const Mat16 u = ms_gate(th);
    CHECK(mat_diff(u * u.adjoint(), Mat16::Identity()) < 1e-13);
    CHECK(mat_diff(u * ms_gate(-th), Mat16::Identity()) < 1e-13);
  }

  // all generator terms commute, so the factored form must equal the
  // spectral exponential of lam1 x lam1 + (P x I + I x P)/2 - I
  const Mat4 l1 = lambda1_4();
  const Mat4 p = l1 * l1;
  const Eigen::MatrixXcd h =
      Eigen::MatrixXcd(kron4(l1, l1)) +
      0.5 * Eigen::MatrixXcd(kron4(p, Mat4::Identity())) +
      0.5 * Eigen::MatrixXcd(kron4(Mat4::Identity(), p)) -
      Eigen::MatrixXcd::Identity(16, 16);
  for (double th : {0.5, 1.7})
    CHECK(mat_diff(ms_gate(th), herm_exp(h, th)) < 1e-12);
}

TEST_CASE("gate matrices and sequence order") {
  const Gate r0{Gate::Kind::R, 0, 2, 0, 0, 0.8, 0.1};
  const Gate r1{Gate::Kind::R, 1, 1, 0, 0, -0.5, 0.7};
  CHECK(mat_diff(gate_matrix(r0), kron4(rotation4(2, 0.8, 0.1), Mat4::Identity())) <
        1e-15);
  CHECK(mat_diff(gate_matrix(r1), kron4(Mat4::Identity(), rotation4(1, -0.5, 0.7))) <
        1e-15);

  // list order is application order: later gates multiply from the left
  CHECK(mat_diff(sequence_matrix({r0, r1}), gate_matrix(r1) * gate_matrix(r0)) <
        1e-14);
  const Gate ms{Gate::Kind::MS, 0, 0, 0, 0, 0.6, 0.0};
  CHECK(mat_diff(sequence_matrix({r0, ms}), ms_gate(0.6) * gate_matrix(r0)) <
        1e-13);
  CHECK_THROWS_AS(gate_matrix1(ms), Error);
}

TEST_CASE("aux isolation dressing") {
  const IsolationResult triv = aux_isolation(0.0);
  CHECK(triv.identity_residual < 1e-12);
  CHECK(triv.qutrit_block_residual < 1e-12);

  const double th = 0.7;
  const IsolationResult iso = aux_isolation(th);
  CHECK(iso.seq.size() == 4);  // two Z gates per site
  CHECK(iso.identity_residual < 1e-10);
  CHECK(iso.qutrit_block_residual < 1e-10);

  // residual diagonals carry phase only on the aux level: the dressing's
  // e^{-i theta/2} there combines with the MS factor's e^{-i theta/4}
  const cd aux_phase = std::exp(-I1 * 3.0 * th / 4.0);
  const Mat16 a1 = iso.a1;
  const Mat16 a2 = iso.a2;
  for (int l = 0; l < 4; ++l) {
    CHECK(std::abs(a1(4 * 0 + l, 4 * 0 + l) - aux_phase) < 1e-13);
    CHECK(std::abs(a2(4 * l + 0, 4 * l + 0) - aux_phase) < 1e-13);
  }
}

TEST_CASE("compiled couplings hit the qutrit-subspace target") {
  for (double th : {0.2, 1.0}) {
    for (char axis : {'x', 'z'}) {
      const CompileResult res = compile_coupling(axis, th);
      CHECK(res.subspace_residual < 1e-10);
      CHECK(res.leakage < 1e-12);
      int n_ms = 0;
      for (const Gate& g : res.seq) n_ms += (g.kind == Gate::Kind::MS);
      CHECK(n_ms == 1);

      // independent re-verification of the restriction
      const Eigen::MatrixXcd got = restrict9(sequence_matrix(res.seq));
      CHECK(aligned_diff(got, spin::two_site_gate(axis, th)) < 1e-10);
    }
  }

  // theta = 0 compiles to a pure phase on the qutrit block
  const CompileResult id = compile_coupling('x', 0.0);
  CHECK(aligned_diff(restrict9(sequence_matrix(id.seq)),
                     Eigen::MatrixXcd::Identity(9, 9)) < 1e-10);

  CHECK_THROWS_AS(compile_coupling('y', 0.5), Error);
  try {
    compile_coupling('q', 0.5);
    FAIL("bad axis accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Status::ConfigError);
  }
}

TEST_CASE("compiled couplings across the angle range") {
  for (int i = 0; i < 100; ++i) {
    // deterministic low-discrepancy sweep of (-2pi, 2pi)
    const double th = -2 * kPi + 4 * kPi * (i + 0.5) / 100.0;
    for (char axis : {'x', 'z'}) {
      const CompileResult res = compile_coupling(axis, th);
      CHECK(res.subspace_residual < 1e-9);
      CHECK(res.leakage < 1e-12);
    }
  }
}

TEST_CASE("phase ledger") {
  // no Z gates: pass-through, empty ledger
  const GateSequence plain{{Gate::Kind::R, 0, 1, 0, 0, 0.4, 0.2},
                           {Gate::Kind::R, 1, 3, 0, 0, 1.1, -0.3}};
  const LedgerResult same = ledger_compile(plain);
  REQUIRE(same.seq.size() == 2);
  CHECK(same.seq[0].phi == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(same.seq[1].phi == doctest::Approx(-0.3).epsilon(1e-14));
  for (int s = 0; s < 2; ++s)
    for (int l = 0; l < 4; ++l) CHECK(same.ledger.alpha[s][l] == 0.0);

  // Z folded into a later rotation's phase; the tracked diagonal applied
  // last reproduces the original circuit exactly
  const GateSequence circ{{Gate::Kind::Z, 0, 0, 1, 2, 0.8, 0.0},
                          {Gate::Kind::R, 0, 1, 0, 0, 0.6, 0.3},
                          {Gate::Kind::R, 1, 2, 0, 0, -0.9, 0.5}};
  const LedgerResult lr = ledger_compile(circ);
  REQUIRE(lr.seq.size() == 2);
  for (const Gate& g : lr.seq) CHECK(g.kind == Gate::Kind::R);
  CHECK(lr.seq[0].phi == doctest::Approx(0.3 + 0.8).epsilon(1e-12));
  CHECK(mat_diff(sequence_matrix(circ),
                 ledger_diagonal(lr.ledger) * sequence_matrix(lr.seq)) < 1e-12);

  // dressing Zs equalize the (+,0) phases, so the MS passes
  const double th = 0.7;
  const LedgerResult ms = ledger_compile(dressed_ms(th));
  REQUIRE(ms.seq.size() == 1);
  CHECK(ms.seq[0].kind == Gate::Kind::MS);
  for (int s = 0; s < 2; ++s) {
    CHECK(ms.ledger.alpha[s][0] == doctest::Approx(-th / 2).epsilon(1e-14));
    CHECK(ms.ledger.alpha[s][1] == doctest::Approx(th / 4).epsilon(1e-14));
    CHECK(ms.ledger.alpha[s][2] == doctest::Approx(th / 4).epsilon(1e-14));
    CHECK(ms.ledger.alpha[s][3] == 0.0);
  }
  CHECK(mat_diff(sequence_matrix(dressed_ms(th)),
                 ledger_diagonal(ms.ledger) * sequence_matrix(ms.seq)) < 1e-12);

  // consecutive dressed MS blocks: ledger phases add
  GateSequence twice = dressed_ms(th);
  const GateSequence second = dressed_ms(th);
  twice.insert(twice.end(), second.begin(), second.end());
  const LedgerResult two = ledger_compile(twice);
  CHECK(two.seq.size() == 2);
  CHECK(two.ledger.alpha[0][0] == doctest::Approx(-th).epsilon(1e-14));
  CHECK(two.ledger.alpha[0][1] == doctest::Approx(th / 2).epsilon(1e-14));
  CHECK(mat_diff(sequence_matrix(twice),
                 ledger_diagonal(two.ledger) * sequence_matrix(two.seq)) < 1e-12);

  // an unbalanced diagonal cannot pass an MS gate
  const GateSequence bad{{Gate::Kind::Z, 0, 0, 1, 2, 0.8, 0.0},
                         {Gate::Kind::MS, 0, 0, 0, 0, 0.6, 0.0}};
  try {
    ledger_compile(bad);
    FAIL("unbalanced ledger passed an MS gate");
  } catch (const Error& e) {
    CHECK(e.code() == Status::VerifyError);
    CHECK(std::string(e.what()).find("NonDiagonalResidual") != std::string::npos);
  }
}

TEST_CASE("compiled full cycle matches the engine") {
  for (int L : {2, 3}) {
    FloquetParams p{L, 0.3, 0.7, 0.1};
    double leak = -1.0;
    const double dev = full_cycle_residual(p, &leak);
    CHECK(dev < 1e-8);
    CHECK(leak >= 0.0);
    CHECK(leak < 1e-12);
  }
  CHECK_THROWS_AS(full_cycle_residual(FloquetParams{4, 0.3, 0.7, 0.1}), Error);
}
