#pragma once

#include <string>
#include <vector>

#include "metastab/state_set.hpp"
#include "metastab/types.hpp"

namespace metastab {

// Mean-field (Curie-Weiss) reference model with constant mean coupling pbar.
struct FreeEnergySpec {
  double beta = 1.0;
  double h = 0.0;
  double pbar = 1.0;  // E[J_ij], constant across edges
};

// F(x) = -pbar x^2/2 - h x + (1/beta)((1-x)/2 log((1-x)/2)
//        + (1+x)/2 log((1+x)/2) + log 2), entropy extended to x = +-1.
// The +log 2 normalizes F(0) = 0; consequently
// -(1/(beta N)) log Z -> min F - (log 2)/beta.
double free_energy(double x, const FreeEnergySpec& spec);
double free_energy_d1(double x, const FreeEnergySpec& spec);
double free_energy_d2(double x, const FreeEnergySpec& spec);

struct StationaryPoint {
  double m = 0.0;
  bool is_minimum = false;
};
// All solutions of x = tanh(beta(pbar x + h)) in (-1,1), bracketing +
// bisection to 1e-12, classified by the sign of F''.
std::vector<StationaryPoint> stationary_points(const FreeEnergySpec& spec);
std::vector<double> local_minima(const FreeEnergySpec& spec);

// Spinodal field: closed form h_c = pbar*s - (1/(2 beta)) log(beta pbar
// (1+s)^2), s = sqrt(1 - 1/(beta pbar)); requires beta*pbar > 1.
double critical_field(double beta, double pbar);
// Independent oracle: bisection on the field at which the metastable minimum
// and the local maximum of F merge (F' and F'' share a root).
double spinodal_field_root(double beta, double pbar, double tol = 1e-12);

// Exact lumping of the annealed chain to the magnetization birth-death chain
// on levels k = 0..N (m = -1 + 2k/N).  Valid because the annealed Hamiltonian
// depends on sigma only through m:  H(m) = -pbar N m^2/2 + pbar/2 - h N m.
// Everything is kept in logs so the chain scales to N = 10^4.
struct BirthDeathChain {
  int N = 0;
  FreeEnergySpec spec;
  std::vector<double> H;        // lumped Hamiltonian per level
  std::vector<double> log_muw;  // log( binom(N,k) e^{-beta(H-Hmin)} )
  std::vector<double> log_b;    // log up-rate b(k), k -> k+1 (log(0) = -inf)
  std::vector<double> log_d;    // log down-rate d(k), k -> k-1
  std::vector<double> log_cond; // log conductance c(k) = muw(k) b(k), k<N
  double Hmin = 0.0;
  double log_Zw = 0.0;          // log sum muw
  double log_Z() const;         // true log partition function

  double level_m(int k) const { return -1.0 + 2.0 * k / N; }
  double log_mu(int k) const { return log_muw[k] - log_Zw; }
};

BirthDeathChain make_birth_death_chain(const FreeEnergySpec& spec, int N);

// Capacity between level sets {ka}, {kb} (mu-normalized, returned as log):
// log cap = -logsumexp_{k in [ka, kb)} ( -log c(k) ).
double lumped_log_capacity(const BirthDeathChain& ch, int ka, int kb);

// log ||h||_{l1(mu)} for A = {ka}, B = {kb}.
double lumped_log_harmonic_sum(const BirthDeathChain& ch, int ka, int kb);

struct LumpedHitting {
  double log_via_identity = 0.0;  // log harm - log cap
  double log_via_direct = 0.0;    // tridiagonal solve (log-space closed form)
  // Literal double-precision Thomas solve (independent small-N cross-check;
  // NaN if overflowed, precision degrades once e^{beta N dF} nears 1/eps).
  double via_tridiag = 0.0;
};
LumpedHitting lumped_mean_hitting(const BirthDeathChain& ch, int ka, int kb);

struct MetastableLevels {
  int k1 = 0, k2 = 0;       // up-spin counts of the two pre-image sets
  double m1 = 0.0, m2 = 0.0;  // grid-rounded magnetizations, weight-ordered
};
// Nearest grid points to the two free-energy minima (tie toward the smaller
// magnetization), labeled by decreasing lumped Gibbs weight.  Throws
// ConfigError in the single-minimum regime.
MetastableLevels metastable_levels(const FreeEnergySpec& spec, int N);
// The same as StateSets over the full space (N within enumeration limit).
std::pair<StateSet, StateSet> metastable_sets(const FreeEnergySpec& spec,
                                              int N);

// CSV export: m, F, mu_hat, b, d per level.
void write_chain_csv(const std::string& path, const BirthDeathChain& ch);
void write_free_energy_csv(const std::string& path, const FreeEnergySpec& spec,
                           int grid_points);

}  // namespace metastab
