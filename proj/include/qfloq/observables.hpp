#pragma once

#include <vector>

#include "qfloq/engine.hpp"

namespace qfloq {

// Sites are 1-based throughout, matching the bond/site indexing of the engine.

double sz_site(const StateVec& psi, int j, int L);
double mean_magnetization(const StateVec& psi, int L);
double zz_correlation(const StateVec& psi, int i, int j, int L);

double overlap(const StateVec& psi, const StateVec& phi);
double overlap0(const StateVec& psi, int L);  // against |0...0>

// Von Neumann entropy (natural log) of sites 1..floor(L/2); Schmidt values
// below 1e-12 are dropped before the log.
double half_chain_entropy(const StateVec& psi, int L);
double entropy_cut(const StateVec& psi, int cut, int L);

struct QfiResult {
  double fq_x = 0.0, fq_y = 0.0, fq_z = 0.0;  // per-axis 4*Var(J_l)
  double total = 0.0;                          // sum over axes
  double f_q = 0.0;                            // total / (8L)
};
QfiResult qfi(const StateVec& psi, int L);

// f_Q ceiling for k-producible states: (k+1)/2.
double multipartite_bound(int k, int L);

// |c_k| with c_k = (1/N) sum_n x_n exp(-2*pi*i*k*n/N), k = 0..N-1.
std::vector<double> dft_mag(const std::vector<double>& x);

}  // namespace qfloq
