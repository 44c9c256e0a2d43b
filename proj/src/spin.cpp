#include "qfloq/spin.hpp"

#include <cmath>
#include <stdexcept>

namespace qfloq::spin {

namespace {
constexpr cplx I{0.0, 1.0};

// Coupled level pair for each Gell-Mann doublet; k indexes rotation families.
struct Pair { int a, b; };
constexpr Pair kPairs[3] = {{0, 1}, {0, 2}, {1, 2}};  // R_1, R_2, R_3
}  // namespace

Mat3 gell_mann(int k) {
  Mat3 m = Mat3::Zero();
  switch (k) {
    case 1: m(0, 1) = 1; m(1, 0) = 1; break;
    case 2: m(0, 1) = -I; m(1, 0) = I; break;
    case 3: m(0, 0) = 1; m(1, 1) = -1; break;
    case 4: m(0, 2) = 1; m(2, 0) = 1; break;
    case 5: m(0, 2) = -I; m(2, 0) = I; break;
    case 6: m(1, 2) = 1; m(2, 1) = 1; break;
    case 7: m(1, 2) = -I; m(2, 1) = I; break;
    case 8:
      m(0, 0) = 1; m(1, 1) = 1; m(2, 2) = -2;
      m /= std::sqrt(3.0);
      break;
    default: throw std::invalid_argument("gell_mann: k must be 1..8");
  }
  return m;
}

Mat3 sx() { return (gell_mann(1) + gell_mann(6)) / std::sqrt(2.0); }
Mat3 sy() { return (gell_mann(2) + gell_mann(7)) / std::sqrt(2.0); }

Mat3 sz() {
  Mat3 m = Mat3::Zero();
  m(0, 0) = 1;
  m(2, 2) = -1;
  return m;
}

Mat3 rotation(int k, double theta, double phi) {
  if (k < 1 || k > 3) throw std::invalid_argument("rotation: k must be 1..3");
  auto [a, b] = kPairs[k - 1];
  // Generator restricted to the (a,b) block is cos(phi) sigma_x + sin(phi) sigma_y.
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat3 r = Mat3::Identity();
  r(a, a) = c;
  r(b, b) = c;
  r(a, b) = -I * s * std::exp(-I * phi);
  r(b, a) = -I * s * std::exp(I * phi);
  return r;
}

Mat3 kick(double eps) {
  const double th = kPi - eps;
  return rotation(3, th, 0.0) * rotation(1, th, 0.0);
}

Mat3 x_eigenbasis() {
  const double h = 0.5, q = 1.0 / std::sqrt(2.0);
  Mat3 v;
  v << h, q, h,
       q, 0, -q,
       h, -q, h;
  return v;
}

Mat9 two_site_gate(char axis, double theta) {
  Mat3 s;
  switch (axis) {
    case 'x': s = sx(); break;
    case 'y': s = sy(); break;
    case 'z': s = sz(); break;
    default: throw std::invalid_argument("two_site_gate: axis must be x, y or z");
  }
  Mat9 a;
  for (int r1 = 0; r1 < 3; ++r1)
    for (int c1 = 0; c1 < 3; ++c1)
      for (int r2 = 0; r2 < 3; ++r2)
        for (int c2 = 0; c2 < 3; ++c2)
          a(3 * r1 + r2, 3 * c1 + c2) = s(r1, c1) * s(r2, c2);
  const double c = std::cos(theta / 2), sn = std::sin(theta / 2);
  return Mat9::Identity() + (c - 1.0) * (a * a) - I * sn * a;
}

MatX kron(const MatX& a, const MatX& b) {
  MatX out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

MatX op_at_site(const Mat3& op, int j, int L) {
  MatX m = MatX::Identity(1, 1);
  for (int site = 1; site <= L; ++site)
    m = kron(site == j ? MatX(op) : MatX(Mat3::Identity()), m);
  return m;
}

MatX op_at_bond(const Mat9& op, int j, int L) {
  // Row index of op is 3*s_j + s_{j+1}; in the little-endian state the pair
  // (s_j, s_{j+1}) occupies digits j, j+1, so embed as I_(above) (x) P (x) I_(below)
  // with P the bond operator reindexed to digit order (s_{j+1} slow, s_j fast).
  MatX p(9, 9);
  for (int r1 = 0; r1 < 3; ++r1)
    for (int r2 = 0; r2 < 3; ++r2)
      for (int c1 = 0; c1 < 3; ++c1)
        for (int c2 = 0; c2 < 3; ++c2)
          p(3 * r2 + r1, 3 * c2 + c1) = op(3 * r1 + r2, 3 * c1 + c2);
  MatX m = MatX::Identity(1, 1);
  for (int site = 1; site <= L; ++site) {
    if (site == j) {
      m = kron(p, m);
      ++site;  // consumed two sites; loop ++ advances past j+1
    } else {
      m = kron(MatX(Mat3::Identity()), m);
    }
  }
  return m;
}

}  // namespace qfloq::spin
