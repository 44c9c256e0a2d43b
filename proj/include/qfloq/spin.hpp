#pragma once
// Single-site spin-1 operator algebra in the (+, 0, -) basis: Gell-Mann
// matrices, two-level rotations, the Z3 kick, and closed-form two-site
// coupling gates. Basis index d in {0,1,2} carries magnetization m = 1 - d.

#include <Eigen/Dense>
#include <complex>

namespace qfloq::spin {

using cplx = std::complex<double>;
using Mat3 = Eigen::Matrix3cd;
using Mat9 = Eigen::Matrix<cplx, 9, 9>;
using MatX = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

// lambda_k, k = 1..8. Levels: 0=|+>, 1=|0>, 2=|->.
Mat3 gell_mann(int k);

Mat3 sx();  // (lambda1 + lambda6)/sqrt(2)
Mat3 sy();  // (lambda2 + lambda7)/sqrt(2)
Mat3 sz();  // diag(1, 0, -1)

// R_k(theta, phi) = exp(-i theta/2 (cos(phi) lambda_a + sin(phi) lambda_b))
// with (a,b) = (1,2), (4,5), (6,7) for k = 1, 2, 3. Evaluated exactly on the
// coupled two-level block.
Mat3 rotation(int k, double theta, double phi);

// P_eps^{Z3} single-site factor: exp(-i(pi-eps)/2 lambda6) exp(-i(pi-eps)/2 lambda1),
// the lambda1 factor acting first. At eps = 0 it cycles |0> -> |+> -> |-> -> |0>
// up to phases, and cubes to the identity.
Mat3 kick(double eps);

// Eigenvectors of S^x as columns, ordered so column d has eigenvalue 1 - d.
Mat3 x_eigenbasis();

// exp(-i theta/2 S^a (x) S^a) for axis 'x' or 'z'. A = S^a (x) S^a satisfies
// A^3 = A, so the exponential is I + (cos(theta/2) - 1) A^2 - i sin(theta/2) A.
Mat9 two_site_gate(char axis, double theta);

// Dense Kronecker helpers for small-L oracles. Index convention is
// little-endian: site 1 is the fastest ternary digit, so the full operator is
// op_L (x) ... (x) op_1.
MatX kron(const MatX& a, const MatX& b);
MatX op_at_site(const Mat3& op, int j, int L);        // identity elsewhere
MatX op_at_bond(const Mat9& op, int j, int L);        // acts on sites j, j+1

}  // namespace qfloq::spin
