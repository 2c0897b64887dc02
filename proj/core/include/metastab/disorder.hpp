#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metastab/rng.hpp"
#include "metastab/types.hpp"

namespace metastab {

enum class DisorderKind { erdos_renyi, inhomogeneous, diluted_hopfield };

std::string to_string(DisorderKind k);
DisorderKind disorder_kind_from_string(const std::string& s);

// Specification of the random coupling law J_ij = A_ij * 1{U_ij <= P_ij}.
//  - erdos_renyi:      A_ij = 1,            P_ij = p
//  - inhomogeneous:    A_ij = 1,            P_ij = V_i V_j, V_i ~ U(v_min,v_max)
//  - diluted_hopfield: A_ij = sum_k xi_i^k xi_j^k (xi = +/- xi_amp), P_ij = p
struct DisorderSpec {
  DisorderKind kind = DisorderKind::erdos_renyi;
  int N = 0;
  double k_J = 1.0;
  double p = 0.5;        // ER retention / Hopfield dilution
  double v_min = 0.2;    // inhomogeneous vertex-weight law U(v_min, v_max)
  double v_max = 0.8;
  int n_patterns = 1;    // Hopfield pattern count
  double xi_amp = 1.0;   // Hopfield pattern amplitude, |xi| = xi_amp <= 1

  void validate() const;  // throws ConfigError
};

// Couplings plus their per-edge conditional mean and variance; immutable after
// construction and safe to share across threads.
struct CouplingMatrix {
  int N = 0;
  double k_J = 1.0;
  std::vector<double> J;     // upper triangle, row-major: (0,1),(0,2),...,(N-2,N-1)
  std::vector<double> mean;  // E[J_ij] given the (A,P) arrays
  std::vector<double> var;   // Var[J_ij] given the (A,P) arrays

  static std::size_t edge_count(int N) {
    return std::size_t(N) * (N - 1) / 2;
  }
  // Row-major upper-triangular index for i < j.
  static std::size_t edge_index(int i, int j, int N) {
    return std::size_t(i) * (2 * N - i - 1) / 2 + (j - i - 1);
  }
  double coupling(int i, int j) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return J[edge_index(i, j, N)];
  }
};

CouplingMatrix sample_couplings(const DisorderSpec& spec, RandomSeed seed);

// alpha_N = beta^2/(2 N^2) * sum_{i<j} Var[J_ij].
double alpha_N(const CouplingMatrix& cm, double beta);

// Couplings replaced by their conditional means; variance zero.  Idempotent.
CouplingMatrix annealed_couplings(const CouplingMatrix& cm);

// Self-describing text format; values serialized with exact round-trip
// precision (17 significant digits), reader restores them bit-exactly.
void write_coupling_file(const std::string& path, const CouplingMatrix& cm,
                         const DisorderSpec& spec, RandomSeed seed);
struct CouplingFile {
  CouplingMatrix cm;
  DisorderSpec spec;
  RandomSeed seed;
  int format_version = 1;
};
CouplingFile read_coupling_file(const std::string& path);

}  // namespace metastab
