#pragma once

#include <unordered_map>
#include <vector>

#include "metastab/disorder.hpp"
#include "metastab/model.hpp"
#include "metastab/state_set.hpp"
#include "metastab/types.hpp"

namespace metastab {

// Full 2^N reversible chain: energy table, unnormalized Gibbs weights
// w(s) = e^{-beta (H(s)-Hmin)}, and edge conductances
// c(s,s^k) = w(s) p(s,s^k) = e^{-beta (max(H(s),H(s^k)) - Hmin)},
// which are symmetric by construction.  All capacities/measures below are
// normalized by Zw = sum w (i.e. expressed under the Gibbs measure mu); the
// unnormalized logs are exposed so Z-weighted observables log(Z cap) etc. can
// be formed without cancellation: log(Z cap) = log cap_w - beta Hmin.
class ExactChain {
 public:
  ExactChain(const CouplingMatrix& cm, const ModelParams& p,
             int enum_limit = kDefaultEnumLimit);

  int dim() const { return p_.N; }
  std::size_t states() const { return H_.size(); }
  const ModelParams& params() const { return p_; }
  const std::vector<double>& energies() const { return H_; }
  double energy_min() const { return Hmin_; }
  double weight(State s) const { return w_[s]; }          // unnormalized
  double weight_sum() const { return Zw_; }
  double log_Z() const { return logZw_ - p_.beta * Hmin_; }
  double rate(State s, int k) const;                       // p(s, s^k)
  double conductance(State s, int k) const;                // symmetric c
  double total_rate(State s) const;
  double mu(State s) const { return w_[s] / Zw_; }
  double mu_set(const StateSet& A) const;
  double log_Z_mu_set(const StateSet& A) const;  // log(Z * mu[A])

 private:
  ModelParams p_;
  std::vector<double> H_;
  std::vector<double> w_;
  double Hmin_ = 0.0, Zw_ = 0.0, logZw_ = 0.0;
};

struct PotentialSolution {
  std::vector<double> h;   // equilibrium potential, 1 on A, 0 on B
  double cap = 0.0;        // mu-normalized capacity E(h)
  double cap_via_escape = 0.0;  // sum_A mu(s) e(s), e = -L h (second route)
  double harm = 0.0;       // ||h||_{l1(mu)}
  double log_Zcap = 0.0;   // log(Z * cap)
  double log_Zharm = 0.0;  // log(Z * harm)
  double residual = 0.0;   // max interior |L h|
  std::unordered_map<State, double> nu;  // last-exit biased distribution on A
};

// Solves the boundary value problem L h = 0 off A u B, h = 1_A on the
// boundary, via the symmetric conductance Laplacian and a sparse LDLT
// factorization with iterative refinement; residual target 1e-10.
PotentialSolution equilibrium_potential(const ExactChain& ch, const StateSet& A,
                                        const StateSet& B);

double capacity(const ExactChain& ch, const StateSet& A, const StateSet& B);
double harmonic_sum(const ExactChain& ch, const StateSet& A, const StateSet& B);
std::unordered_map<State, double> last_exit_distribution(const ExactChain& ch,
                                                         const StateSet& A,
                                                         const StateSet& B);

struct MeanHitting {
  double via_identity = 0.0;  // harm / cap
  double via_direct = 0.0;    // L u = -1 on B^c, averaged under nu
};
MeanHitting mean_hitting_time(const ExactChain& ch, const StateSet& A,
                              const StateSet& B);

// Dirichlet form E(f) = (1/Zw) sum_{edges} c (f(s)-f(s'))^2.  Boundary values
// f|_A = 1, f|_B = 0 are checked.
double dirichlet_energy(const ExactChain& ch, const std::vector<double>& f,
                        const StateSet& A, const StateSet& B);

// Antisymmetric edge function, stored on canonical directed edges (s, s^k)
// with s < s^k; phi > 0 means flow from s to s^k.
struct Flow {
  std::unordered_map<std::uint64_t, double> phi;
  static std::uint64_t key(State s, int k) {
    return (std::uint64_t(s) << 5) | std::uint64_t(k);
  }
  void add(State s, int k, double v);  // directed s -> s^k, any orientation
  double get(State s, int k) const;
  void check_unit_flow(const ExactChain& ch, const StateSet& A,
                       const StateSet& B, double tol = 1e-10) const;
};

// D(phi) = Zw * sum_edges phi^2 / c; Thomson: 1/D(phi) <= cap.
double thomson_energy(const ExactChain& ch, const Flow& phi);

// The equality case phi*(s,s') = mu(s) p(s,s') (h(s)-h(s')) / cap.
Flow harmonic_flow(const ExactChain& ch, const PotentialSolution& sol,
                   const StateSet& A, const StateSet& B);

struct EigResult {
  double lambda0 = 0.0;
  double residual = 0.0;
  bool converged = false;
};
// Smallest eigenvalue of -L on S \ M with absorption on M (mu-weighted
// symmetric formulation, shift-invert power iteration), certified by
// ||(-L)v - lambda v|| <= 1e-8 ||v||.
EigResult dirichlet_eigenvalue(const ExactChain& ch, const StateSet& M);

struct MetaSpec {
  std::vector<StateSet> sets;  // M_1..M_K ordered by decreasing Gibbs weight
  double rho = 1.0;            // certification target
  double k_1 = 1.0, k_2 = 1.0;
  int i = 2;                   // A = M_i, B = union of M_j, j < i (1-based)
};

struct Certificate {
  double numerator = 0.0;      // K * max_j cap(M_j, M\M_j) / mu[M_j]
  double lambda0 = 0.0;        // denominator lower bound
  double singleton_min = 0.0;  // denominator upper bound
  double ratio_upper = 0.0;    // numerator / lambda0
  double ratio_lower = 0.0;    // numerator / singleton_min
  bool certified = false;      // ratio_upper <= rho
};
Certificate metastability_certificate(const ExactChain& ch, const MetaSpec& ms);

// Valley assignment under the (annealed) chain: argmax_i P_sigma[tau_{M_i} <
// tau_{M \ M_i}], ties to the lowest index.
std::vector<int> metastable_partition(const ExactChain& annealed_chain,
                                      const MetaSpec& ms);

struct SandwichReport {
  double a_N = 0.0;
  double max_dev = 0.0;
  // Each entry: |log ratio| must be <= bound, valid on the event Xi.
  struct Entry {
    std::string what;
    double log_ratio = 0.0;
    double bound = 0.0;
    bool ok = false;
  };
  std::vector<Entry> entries;
  bool all_ok = true;
};

// Verifies, on Xi(a_N):  e^{-beta a} <= (Z cap)/(Z~ cap~) <= e^{beta a},
// the same for Z mu[X], and e^{+-2 beta a} for the conditioned escape
// probabilities cap/mu[A].  Throws ConfigError if max|Delta| >= a_N.
SandwichReport sandwich_check(const CouplingMatrix& cm, const ModelParams& p,
                              double a_N, const StateSet& A, const StateSet& B);

}  // namespace metastab
