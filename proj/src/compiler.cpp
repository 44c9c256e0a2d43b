#include "qfloq/compiler.hpp"

#include <cmath>

#include "qfloq/error.hpp"

namespace qfloq::compiler {

namespace {
constexpr cplx I{0.0, 1.0};

// Rotation families act on these 4-level pairs: R_1 on (+,0), R_2 on (+,-),
// R_3 on (0,-); the auxiliary level 0 is never touched.
constexpr int kPairs[3][2] = {{1, 2}, {1, 3}, {2, 3}};

Mat16 embed_pair(const Mat4& a, const Mat4& b) { return kron4(a, b); }

double phase_aligned_residual(const Eigen::MatrixXcd& got,
                              const Eigen::MatrixXcd& want) {
  Eigen::Index r = 0, c = 0;
  want.cwiseAbs().maxCoeff(&r, &c);
  const cplx g = got(r, c), w = want(r, c);
  if (std::abs(g) < 1e-14) return 1e9;  // target's biggest entry missing entirely
  const cplx align = w / g * (std::abs(g) / std::abs(w));
  return (got * align - want).cwiseAbs().maxCoeff();
}

}  // namespace

Mat4 embed(const spin::Mat3& q) {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(1, 1) = q;
  return m;
}

Mat4 lambda1_4() { return embed(spin::gell_mann(1)); }

Mat4 rotation4(int k, double theta, double phi) {
  if (k < 1 || k > 3) throw Error(Status::ConfigError, "rotation family must be 1..3");
  const int a = kPairs[k - 1][0], b = kPairs[k - 1][1];
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat4 r = Mat4::Identity();
  r(a, a) = c;
  r(b, b) = c;
  r(a, b) = -I * s * std::exp(-I * phi);
  r(b, a) = -I * s * std::exp(I * phi);
  return r;
}

Mat4 zgate(int li, int lj, double theta) {
  if (li < 0 || li > 3 || lj < 0 || lj > 3 || li == lj)
    throw Error(Status::ConfigError, "zgate needs two distinct levels in 0..3");
  Mat4 m = Mat4::Identity();
  m(li, li) = std::exp(I * theta / 2.0);
  m(lj, lj) = std::exp(-I * theta / 2.0);
  return m;
}

Mat16 kron4(const Mat4& a, const Mat4& b) {
  Mat16 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
  return out;
}

Mat16 ms_gate(double theta) {
  const Mat4 l1 = lambda1_4();
  const Mat4 l1sq = l1 * l1;  // diag(1,1,1,0): the embed identity keeps aux at 1
  auto diag_exp = [&](const Mat4& p, double pref) {
    Mat4 m = Mat4::Identity();
    for (int i = 0; i < 4; ++i) m(i, i) = std::exp(I * pref * p(i, i).real());
    return m;
  };
  const Mat16 f1 = embed_pair(diag_exp(l1sq, -theta / 4), Mat4::Identity());
  const Mat16 f2 = embed_pair(Mat4::Identity(), diag_exp(l1sq, -theta / 4));
  // exp(-i theta/2 l1 x l1): (l1 x l1)^2 is a projector on its support, and
  // (l1 x l1)^3 = l1 x l1, so the closed form of the bond gate applies.
  const Mat16 ll = embed_pair(l1, l1);
  const Mat16 f3 = Mat16::Identity() + (std::cos(theta / 2) - 1.0) * (ll * ll) -
                   I * std::sin(theta / 2) * ll;
  return std::exp(I * theta / 2.0) * f1 * f2 * f3;
}

Mat4 gate_matrix1(const Gate& g) {
  switch (g.kind) {
    case Gate::Kind::R: return rotation4(g.k, g.theta, g.phi);
    case Gate::Kind::Z: return zgate(g.li, g.lj, g.theta);
    default: throw Error(Status::ConfigError, "MS is not a single-site gate");
  }
}

Mat16 gate_matrix(const Gate& g) {
  if (g.kind == Gate::Kind::MS) return ms_gate(g.theta);
  const Mat4 m = gate_matrix1(g);
  // pair row index = 4*d_first + d_second, so the first site is the slow digit
  return g.site == 0 ? embed_pair(m, Mat4::Identity())
                     : embed_pair(Mat4::Identity(), m);
}

Mat16 sequence_matrix(const GateSequence& seq) {
  Mat16 u = Mat16::Identity();
  for (const Gate& g : seq) u = gate_matrix(g) * u;
  return u;
}

IsolationResult aux_isolation(double theta) {
  IsolationResult out;
  // Dressing per site: Z_{a+}(-theta) Z_{+0}(-theta/2), applied after the MS.
  for (int site = 0; site < 2; ++site) {
    out.seq.push_back({Gate::Kind::Z, site, 0, 0, 1, -theta, 0.0});
    out.seq.push_back({Gate::Kind::Z, site, 0, 1, 2, -theta / 2, 0.0});
  }
  const Mat4 d = zgate(0, 1, -theta) * zgate(1, 2, -theta / 2);
  const Mat4 l1 = lambda1_4();
  Mat4 a = d;  // D * exp(-i theta/4 l1^2) collapses to a phase on |a> alone
  for (int i = 0; i < 4; ++i)
    a(i, i) *= std::exp(I * (-theta / 4) * (l1 * l1)(i, i).real());
  out.a1 = embed_pair(a, Mat4::Identity());
  out.a2 = embed_pair(Mat4::Identity(), a);

  const Mat16 dressed = embed_pair(d, d) * ms_gate(theta);
  const Mat16 ll = embed_pair(l1, l1);
  const Mat16 core = Mat16::Identity() + (std::cos(theta / 2) - 1.0) * (ll * ll) -
                     I * std::sin(theta / 2) * ll;
  const Mat16 rhs = std::exp(I * theta / 2.0) * out.a1 * out.a2 * core;
  out.identity_residual = (dressed - rhs).cwiseAbs().maxCoeff();

  double r = 0.0;
  for (const Mat16& m : {out.a1, out.a2}) {
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        const bool qutrit_row = (i / 4 != 0) && (i % 4 != 0);
        if (i != j && std::abs(m(i, j)) > r) r = std::abs(m(i, j));
        if (i == j && qutrit_row) r = std::max(r, std::abs(m(i, i) - 1.0));
      }
  }
  out.qutrit_block_residual = r;
  if (out.identity_residual > 1e-10 || r > 1e-10)
    throw Error(Status::VerifyError,
                "aux isolation residual " + std::to_string(out.identity_residual));
  return out;
}

namespace {

// Conjugation sequences turning lambda_1 into S^a on the qutrit block.
GateSequence axis_conjugation(char axis, bool adjoint) {
  GateSequence seq;
  for (int site = 0; site < 2; ++site) {
    if (axis == 'x') {
      // S_x = R_2(pi/2, pi/2) lambda_1 R_2(pi/2, pi/2)^dagger
      seq.push_back({Gate::Kind::R, site, 2, 0, 0,
                     adjoint ? -spin::kPi / 2 : spin::kPi / 2, spin::kPi / 2});
    } else {
      // lambda_3 = R_1(-pi/2, pi/2) lambda_1 R_1(-pi/2, pi/2)^dagger, then the
      // 0 <-> - relabeling R_3(pi, 0) maps diag(1,-1,0) to diag(1,0,-1) = S^z.
      if (!adjoint) {
        seq.push_back({Gate::Kind::R, site, 1, 0, 0, -spin::kPi / 2, spin::kPi / 2});
        seq.push_back({Gate::Kind::R, site, 3, 0, 0, spin::kPi, 0.0});
      } else {
        seq.push_back({Gate::Kind::R, site, 3, 0, 0, -spin::kPi, 0.0});
        seq.push_back({Gate::Kind::R, site, 1, 0, 0, spin::kPi / 2, spin::kPi / 2});
      }
    }
  }
  return seq;
}

}  // namespace

CompileResult compile_coupling(char axis, double theta) {
  if (axis != 'x' && axis != 'z')
    throw Error(Status::ConfigError, "axis must be x or z");
  CompileResult out;
  const GateSequence pre = axis_conjugation(axis, /*adjoint=*/true);
  out.seq.insert(out.seq.end(), pre.begin(), pre.end());
  out.seq.push_back({Gate::Kind::MS, 0, 0, 0, 0, theta, 0.0});
  const IsolationResult iso = aux_isolation(theta);
  out.seq.insert(out.seq.end(), iso.seq.begin(), iso.seq.end());
  const GateSequence post = axis_conjugation(axis, /*adjoint=*/false);
  out.seq.insert(out.seq.end(), post.begin(), post.end());

  const Mat16 u = sequence_matrix(out.seq);

  // leakage: any coupling between the aux blocks and the qutrit blocks
  double leak = 0.0;
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) {
      const bool r_q = (r / 4 != 0) && (r % 4 != 0);
      const bool c_q = (c / 4 != 0) && (c % 4 != 0);
      if (r_q != c_q) leak = std::max(leak, std::abs(u(r, c)));
    }
  out.leakage = leak;

  Eigen::MatrixXcd got(9, 9);
  for (int r1 = 0; r1 < 3; ++r1)
    for (int r2 = 0; r2 < 3; ++r2)
      for (int c1 = 0; c1 < 3; ++c1)
        for (int c2 = 0; c2 < 3; ++c2)
          got(3 * r1 + r2, 3 * c1 + c2) =
              u(4 * (r1 + 1) + (r2 + 1), 4 * (c1 + 1) + (c2 + 1));
  const Eigen::MatrixXcd want = spin::two_site_gate(axis, theta);
  out.subspace_residual = phase_aligned_residual(got, want);

  if (out.subspace_residual > 1e-10 || out.leakage > 1e-12)
    throw Error(Status::VerifyError,
                "compiled " + std::string(1, axis) + " coupling off target: residual " +
                    std::to_string(out.subspace_residual) + ", leakage " +
                    std::to_string(out.leakage));
  return out;
}

LedgerResult ledger_compile(const GateSequence& circuit) {
  LedgerResult out;
  auto& alpha = out.ledger.alpha;
  for (const Gate& g : circuit) {
    switch (g.kind) {
      case Gate::Kind::Z:
        alpha[g.site][g.li] += g.theta / 2.0;
        alpha[g.site][g.lj] -= g.theta / 2.0;
        break;
      case Gate::Kind::R: {
        // Push the accumulated diagonal leftward past this rotation:
        // D R(theta, phi) = R(theta, phi + a_j - a_i) D on the (i,j) pair.
        const int i = kPairs[g.k - 1][0], j = kPairs[g.k - 1][1];
        Gate h = g;
        h.phi += alpha[g.site][i] - alpha[g.site][j];
        out.seq.push_back(h);
        break;
      }
      case Gate::Kind::MS: {
        // MS is generated by lambda_1 terms on the (+,0) blocks; a diagonal
        // commutes through iff its + and 0 phases agree on both sites.
        for (int site = 0; site < 2; ++site) {
          const double diff =
              std::remainder(alpha[site][1] - alpha[site][2], 2 * spin::kPi);
          if (std::abs(diff) > 1e-12)
            throw Error(Status::VerifyError,
                        "NonDiagonalResidual: ledger phase difference " +
                            std::to_string(diff) + " on site " +
                            std::to_string(site) + " cannot pass an MS gate");
        }
        out.seq.push_back(g);
        break;
      }
    }
  }
  return out;
}

namespace {

using Vec = std::vector<cplx>;

std::size_t pow4(int l) {
  std::size_t d = 1;
  while (l-- > 0) d *= 4;
  return d;
}

void apply_one4(Vec& psi, const Mat4& m, int j) {
  const std::size_t s = pow4(j - 1), dim = psi.size(), block = 4 * s;
  for (std::size_t i0 = 0; i0 < dim; i0 += block)
    for (std::size_t i1 = i0; i1 < i0 + s; ++i1) {
      cplx a[4];
      for (int r = 0; r < 4; ++r) a[r] = psi[i1 + r * s];
      for (int r = 0; r < 4; ++r) {
        cplx acc{0.0};
        for (int c = 0; c < 4; ++c) acc += m(r, c) * a[c];
        psi[i1 + r * s] = acc;
      }
    }
}

void apply_two4(Vec& psi, const Mat16& m, int j) {
  const std::size_t s = pow4(j - 1), dim = psi.size(), block = 16 * s;
  cplx in[16], outv[16];
  for (std::size_t i0 = 0; i0 < dim; i0 += block)
    for (std::size_t i1 = i0; i1 < i0 + s; ++i1) {
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) in[4 * a + b] = psi[i1 + a * s + b * 4 * s];
      for (int r = 0; r < 16; ++r) {
        cplx acc{0.0};
        for (int c = 0; c < 16; ++c) acc += m(r, c) * in[c];
        outv[r] = acc;
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) psi[i1 + a * s + b * 4 * s] = outv[4 * a + b];
    }
}

}  // namespace

double full_cycle_residual(const FloquetParams& p, double* aux_leakage) {
  if (p.L < 2 || p.L > 3)
    throw Error(Status::ConfigError, "compiled full-cycle check supports L in {2,3}");
  const int L = p.L;

  const Mat16 ux = sequence_matrix(compile_coupling('x', p.theta_x).seq);
  const Mat16 uz = sequence_matrix(compile_coupling('z', p.theta_z).seq);
  // Native kick: the lambda_1 factor acts first, then lambda_6 (family 3).
  const Mat4 kick4 = rotation4(3, spin::kPi - p.epsilon, 0.0) *
                     rotation4(1, spin::kPi - p.epsilon, 0.0);

  Vec psi(pow4(L), cplx{0.0});
  std::size_t idx0 = 0, w = 1;
  for (int j = 0; j < L; ++j, w *= 4) idx0 += 2 * w;  // level '0' is index 2
  psi[idx0] = 1.0;

  for (int j = 1; j <= L - 1; ++j) apply_two4(psi, ux, j);
  for (int j = 1; j <= L - 1; ++j) apply_two4(psi, uz, j);
  for (int j = 1; j <= L; ++j) apply_one4(psi, kick4, j);

  FloquetEngine eng(p);
  eng.step();
  const StateVec& ref = eng.state();

  // Gather the qutrit-subspace amplitudes (4-level digit = qutrit digit + 1).
  StateVec sub(pow3(L), cplx{0.0});
  double leak = 0.0;
  for (std::size_t I4 = 0; I4 < psi.size(); ++I4) {
    std::size_t t = I4, i3 = 0, w3 = 1;
    bool in_sub = true;
    for (int j = 0; j < L; ++j, t /= 4, w3 *= 3) {
      const int d = static_cast<int>(t % 4);
      if (d == 0) {
        in_sub = false;
        break;
      }
      i3 += static_cast<std::size_t>(d - 1) * w3;
    }
    if (in_sub)
      sub[i3] = psi[I4];
    else
      leak += std::norm(psi[I4]);
  }
  if (aux_leakage) *aux_leakage = leak;

  // Align global phase on the largest reference amplitude.
  std::size_t imax = 0;
  for (std::size_t i = 1; i < ref.size(); ++i)
    if (std::abs(ref[i]) > std::abs(ref[imax])) imax = i;
  cplx align{1.0};
  if (std::abs(sub[imax]) > 1e-14)
    align = ref[imax] / sub[imax] * (std::abs(sub[imax]) / std::abs(ref[imax]));
  double dev = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    dev = std::max(dev, std::abs(sub[i] * align - ref[i]));
  return dev;
}

}  // namespace qfloq::compiler
