#include "metastab/potential.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>

namespace metastab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Trip = Eigen::Triplet<double>;

void check_pair(const StateSet& A, const StateSet& B) {
  if (A.empty() || B.empty())
    throw ConfigError("potential: A and B must be non-empty");
  if (!A.disjoint(B)) throw ConfigError("potential: A and B overlap");
}

// Solve the SPD system M x = b.  Incomplete-Cholesky preconditioned CG is
// dramatically faster than a direct factorization here: the hypercube
// adjacency has large vertex separators, so sparse LDLT suffers near-dense
// fill-in, while CG converges in a few dozen iterations.  Two rounds of
// iterative refinement polish the result to machine precision.
Vec refined_solve(const SpMat& M, const Vec& b, const char* what) {
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(20000);
  cg.compute(M);
  if (cg.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": preconditioner failed");
  Vec x = cg.solve(b);
  for (int it = 0; it < 2; ++it) {
    Vec r = b - M * x;
    x += cg.solve(r);
  }
  return x;
}

}  // namespace

ExactChain::ExactChain(const CouplingMatrix& cm, const ModelParams& p,
                       int enum_limit)
    : p_(p) {
  validate_params(p);
  require_enumerable(p.N, enum_limit);
  H_ = hamiltonian_table(cm, p, enum_limit);
  Hmin_ = *std::min_element(H_.begin(), H_.end());
  w_.resize(H_.size());
  Zw_ = 0.0;
  for (std::size_t s = 0; s < H_.size(); ++s) {
    w_[s] = std::exp(-p.beta * (H_[s] - Hmin_));
    Zw_ += w_[s];
  }
  logZw_ = std::log(Zw_);
}

double ExactChain::rate(State s, int k) const {
  const double dH = H_[s ^ (State(1) << k)] - H_[s];
  return dH > 0 ? std::exp(-p_.beta * dH) : 1.0;
}

double ExactChain::conductance(State s, int k) const {
  // w(s) p(s,s') = e^{-beta (H(s) \/ H(s') - Hmin)}: symmetric by
  // construction, which keeps the Dirichlet matrix exactly symmetric.
  const double Hmax = std::max(H_[s], H_[s ^ (State(1) << k)]);
  return std::exp(-p_.beta * (Hmax - Hmin_));
}

double ExactChain::total_rate(State s) const {
  double R = 0.0;
  for (int k = 0; k < p_.N; ++k) R += rate(s, k);
  return R;
}

double ExactChain::mu_set(const StateSet& A) const {
  double m = 0.0;
  for (State s : A.members()) m += w_[s];
  return m / Zw_;
}

double ExactChain::log_Z_mu_set(const StateSet& A) const {
  double m = 0.0;
  for (State s : A.members()) m += w_[s];
  return std::log(m) - p_.beta * Hmin_;
}

PotentialSolution equilibrium_potential(const ExactChain& ch, const StateSet& A,
                                        const StateSet& B) {
  check_pair(A, B);
  const int N = ch.dim();
  const std::size_t n_states = ch.states();

  // Interior indexing: states off A u B get equation rows.
  std::vector<std::int32_t> idx(n_states, -1);
  std::vector<State> interior;
  interior.reserve(n_states);
  for (State s = 0; s < n_states; ++s)
    if (!A.contains(s) && !B.contains(s)) {
      idx[s] = std::int32_t(interior.size());
      interior.push_back(s);
    }

  PotentialSolution sol;
  sol.h.assign(n_states, 0.0);
  for (State s : A.members()) sol.h[s] = 1.0;

  if (!interior.empty()) {
    const std::size_t n = interior.size();
    std::vector<Trip> trips;
    trips.reserve(n * (N + 1));
    Vec rhs = Vec::Zero(n);
    for (std::size_t r = 0; r < n; ++r) {
      const State s = interior[r];
      double diag = 0.0;
      for (int k = 0; k < N; ++k) {
        const State t = s ^ (State(1) << k);
        const double c = ch.conductance(s, k);
        diag += c;
        if (idx[t] >= 0)
          trips.emplace_back(int(r), int(idx[t]), -c);
        else if (A.contains(t))
          rhs[r] += c;
      }
      trips.emplace_back(int(r), int(r), diag);
    }
    const int nn = int(n);
    SpMat M(nn, nn);
    M.setFromTriplets(trips.begin(), trips.end());
    Vec x = refined_solve(M, rhs, "equilibrium_potential");
    for (std::size_t r = 0; r < n; ++r)
      sol.h[interior[r]] = std::min(1.0, std::max(0.0, x[r]));
  }

  // Residual of the harmonic equation in rate units.
  double res = 0.0;
  for (State s : interior) {
    double ls = 0.0;
    for (int k = 0; k < N; ++k)
      ls += ch.rate(s, k) * (sol.h[s ^ (State(1) << k)] - sol.h[s]);
    res = std::max(res, std::abs(ls));
  }
  sol.residual = res;

  // Capacity, route 1: Dirichlet energy over canonical edges.
  double capw = 0.0;
  for (State s = 0; s < n_states; ++s)
    for (int k = 0; k < N; ++k) {
      const State t = s ^ (State(1) << k);
      if (t < s) continue;
      const double dh = sol.h[s] - sol.h[t];
      if (dh != 0.0) capw += ch.conductance(s, k) * dh * dh;
    }

  // Route 2: equilibrium measure e = -L h on A, cap = sum_A mu e.
  double capw2 = 0.0;
  for (State s : A.members()) {
    double ew = 0.0;  // w(s) e(s) = sum_k c(s,k)(h(s) - h(s^k))
    for (int k = 0; k < N; ++k)
      ew += ch.conductance(s, k) * (1.0 - sol.h[s ^ (State(1) << k)]);
    capw2 += ew;
    sol.nu[s] = ew;
  }
  for (auto& [s, v] : sol.nu) v /= capw2;

  const double Zw = ch.weight_sum();
  sol.cap = capw / Zw;
  sol.cap_via_escape = capw2 / Zw;
  double harmw = 0.0;
  for (State s = 0; s < n_states; ++s) harmw += ch.weight(s) * sol.h[s];
  sol.harm = harmw / Zw;
  const double shift = -ch.params().beta * ch.energy_min();
  sol.log_Zcap = std::log(capw) + shift;
  sol.log_Zharm = std::log(harmw) + shift;
  return sol;
}

double capacity(const ExactChain& ch, const StateSet& A, const StateSet& B) {
  return equilibrium_potential(ch, A, B).cap;
}

double harmonic_sum(const ExactChain& ch, const StateSet& A,
                    const StateSet& B) {
  return equilibrium_potential(ch, A, B).harm;
}

std::unordered_map<State, double> last_exit_distribution(const ExactChain& ch,
                                                         const StateSet& A,
                                                         const StateSet& B) {
  return equilibrium_potential(ch, A, B).nu;
}

MeanHitting mean_hitting_time(const ExactChain& ch, const StateSet& A,
                              const StateSet& B) {
  PotentialSolution sol = equilibrium_potential(ch, A, B);
  MeanHitting out;
  out.via_identity = sol.harm / sol.cap;

  // Direct route: -L u = 1 on B^c, u = 0 on B, averaged under nu.
  const int N = ch.dim();
  const std::size_t n_states = ch.states();
  std::vector<std::int32_t> idx(n_states, -1);
  std::vector<State> interior;
  for (State s = 0; s < n_states; ++s)
    if (!B.contains(s)) {
      idx[s] = std::int32_t(interior.size());
      interior.push_back(s);
    }
  const std::size_t n = interior.size();
  std::vector<Trip> trips;
  trips.reserve(n * (N + 1));
  Vec rhs(n);
  for (std::size_t r = 0; r < n; ++r) {
    const State s = interior[r];
    double diag = 0.0;
    for (int k = 0; k < N; ++k) {
      const State t = s ^ (State(1) << k);
      const double c = ch.conductance(s, k);
      diag += c;
      if (idx[t] >= 0) trips.emplace_back(int(r), int(idx[t]), -c);
    }
    trips.emplace_back(int(r), int(r), diag);
    rhs[r] = ch.weight(s);  // (D - C) u = w  <=>  -L u = 1
  }
  const int nn = int(n);
  SpMat M(nn, nn);
  M.setFromTriplets(trips.begin(), trips.end());
  Vec u = refined_solve(M, rhs, "mean_hitting_time");
  double mean = 0.0;
  for (const auto& [s, nu_s] : sol.nu) mean += nu_s * u[idx[s]];
  out.via_direct = mean;
  return out;
}

double dirichlet_energy(const ExactChain& ch, const std::vector<double>& f,
                        const StateSet& A, const StateSet& B) {
  check_pair(A, B);
  if (f.size() != ch.states())
    throw ConfigError("dirichlet_energy: vector size mismatch");
  for (State s : A.members())
    if (std::abs(f[s] - 1.0) > 1e-12)
      throw ConfigError("dirichlet_energy: f != 1 on A");
  for (State s : B.members())
    if (std::abs(f[s]) > 1e-12)
      throw ConfigError("dirichlet_energy: f != 0 on B");
  const int N = ch.dim();
  double e = 0.0;
  for (State s = 0; s < ch.states(); ++s)
    for (int k = 0; k < N; ++k) {
      const State t = s ^ (State(1) << k);
      if (t < s) continue;
      const double df = f[s] - f[t];
      if (df != 0.0) e += ch.conductance(s, k) * df * df;
    }
  return e / ch.weight_sum();
}

void Flow::add(State s, int k, double v) {
  const State t = s ^ (State(1) << k);
  if (s < t)
    phi[key(s, k)] += v;
  else
    phi[key(t, k)] -= v;
}

double Flow::get(State s, int k) const {
  const State t = s ^ (State(1) << k);
  if (s < t) {
    auto it = phi.find(key(s, k));
    return it == phi.end() ? 0.0 : it->second;
  }
  auto it = phi.find(key(t, k));
  return it == phi.end() ? 0.0 : -it->second;
}

void Flow::check_unit_flow(const ExactChain& ch, const StateSet& A,
                           const StateSet& B, double tol) const {
  // Node balance off A u B, and unit flux out of A.
  std::unordered_map<State, double> div;
  for (const auto& [k, v] : phi) {
    const State s = State(k >> 5);
    const int bit = int(k & 31u);
    const State t = s ^ (State(1) << bit);
    div[s] += v;
    div[t] -= v;
  }
  double flux_A = 0.0;
  for (const auto& [s, d] : div) {
    if (A.contains(s)) {
      flux_A += d;
    } else if (!B.contains(s)) {
      if (std::abs(d) > tol)
        throw ConfigError("Flow: node balance violated off A u B");
    }
  }
  if (std::abs(flux_A - 1.0) > tol)
    throw ConfigError("Flow: flux out of A is not 1");
}

double thomson_energy(const ExactChain& ch, const Flow& flow) {
  double d = 0.0;
  for (const auto& [k, v] : flow.phi) {
    if (v == 0.0) continue;
    const State s = State(k >> 5);
    const int bit = int(k & 31u);
    d += v * v / ch.conductance(s, bit);
  }
  return ch.weight_sum() * d;  // phi^2 / (mu p) with mu p = c / Zw
}

Flow harmonic_flow(const ExactChain& ch, const PotentialSolution& sol,
                   const StateSet& A, const StateSet& B) {
  (void)A;
  (void)B;
  Flow f;
  const int N = ch.dim();
  const double denom = ch.weight_sum() * sol.cap;
  for (State s = 0; s < ch.states(); ++s)
    for (int k = 0; k < N; ++k) {
      const State t = s ^ (State(1) << k);
      if (t < s) continue;
      const double dh = sol.h[s] - sol.h[t];
      if (dh != 0.0) f.add(s, k, ch.conductance(s, k) * dh / denom);
    }
  return f;
}

EigResult dirichlet_eigenvalue(const ExactChain& ch, const StateSet& M) {
  if (M.empty()) throw ConfigError("dirichlet_eigenvalue: M empty");
  const int N = ch.dim();
  const std::size_t n_states = ch.states();
  std::vector<std::int32_t> idx(n_states, -1);
  std::vector<State> interior;
  for (State s = 0; s < n_states; ++s)
    if (!M.contains(s)) {
      idx[s] = std::int32_t(interior.size());
      interior.push_back(s);
    }
  if (interior.empty())
    throw ConfigError("dirichlet_eigenvalue: M covers the whole space");
  const std::size_t n = interior.size();

  // Generalized problem T v = lambda W v with T the absorbing conductance
  // Laplacian and W = diag(w); shift-invert power iteration on T^{-1} W.
  std::vector<Trip> trips;
  trips.reserve(n * (N + 1));
  Vec w(n);
  for (std::size_t r = 0; r < n; ++r) {
    const State s = interior[r];
    double diag = 0.0;
    for (int k = 0; k < N; ++k) {
      const State t = s ^ (State(1) << k);
      diag += ch.conductance(s, k);
      if (idx[t] >= 0) trips.emplace_back(int(r), int(idx[t]),
                                          -ch.conductance(s, k));
    }
    trips.emplace_back(int(r), int(r), diag);
    w[r] = ch.weight(s);
  }
  const int nn = int(n);
  SpMat T(nn, nn);
  T.setFromTriplets(trips.begin(), trips.end());

  EigResult out;
  Vec v = Vec::Ones(n);
  v /= v.norm();
  auto rayleigh_and_residual = [&](const Vec& x) {
    const Vec Tx = T * x;
    out.lambda0 = x.dot(Tx) / x.dot(w.asDiagonal() * x);
    // Certificate: || (-L) v - lambda v || <= 1e-8 ||v|| with
    // (-L) v = W^{-1} T v.
    const Vec r = Tx.cwiseQuotient(w) - out.lambda0 * x;
    out.residual = r.norm() / x.norm();
  };

  // Plain inverse iteration on T^{-1} W stalls when the low eigenvalues
  // cluster (rate lambda0/lambda1), so after a warm-up estimate we re-factor
  // the shifted matrix T - shift*W and iterate on that: the rate becomes
  // |lambda0-shift|/|lambda1-shift|, which a Rayleigh-quotient shift drives
  // to machine precision in a few rounds.
  double shift = 0.0;
  for (int round = 0; round < 6; ++round) {
    SpMat A = T;
    if (shift != 0.0) {
      SpMat Ws(nn, nn);
      std::vector<Trip> wt;
      wt.reserve(n);
      for (std::size_t r = 0; r < n; ++r)
        wt.emplace_back(int(r), int(r), w[r]);
      Ws.setFromTriplets(wt.begin(), wt.end());
      A = T - shift * Ws;
    }
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("dirichlet_eigenvalue: factorization failed");
    const int iters = round == 0 ? 30 : 8;
    for (int it = 0; it < iters; ++it) {
      Vec y = ldlt.solve(w.asDiagonal() * v);
      const double norm = y.norm();
      if (!(norm > 0) || !std::isfinite(norm)) break;
      v = y / norm;
      rayleigh_and_residual(v);
      if (out.residual <= 1e-8) {
        out.converged = true;
        return out;
      }
    }
    // Shift slightly below the current Rayleigh quotient so the factorization
    // stays definite and the target eigenvalue is the closest one.
    shift = out.lambda0 * (1.0 - 1e-4);
  }
  return out;
}

Certificate metastability_certificate(const ExactChain& ch,
                                      const MetaSpec& ms) {
  const int K = int(ms.sets.size());
  if (K < 2) throw ConfigError("metastability_certificate: need K >= 2 sets");
  for (int a = 0; a < K; ++a)
    for (int b = a + 1; b < K; ++b)
      if (!ms.sets[a].disjoint(ms.sets[b]))
        throw ConfigError("metastability_certificate: sets overlap");

  std::vector<State> union_states;
  for (const auto& Mj : ms.sets)
    union_states.insert(union_states.end(), Mj.members().begin(),
                        Mj.members().end());
  const StateSet M = StateSet::from_states(ch.dim(), union_states);

  Certificate cert;
  for (int j = 0; j < K; ++j) {
    std::vector<State> rest;
    for (int l = 0; l < K; ++l)
      if (l != j)
        rest.insert(rest.end(), ms.sets[l].members().begin(),
                    ms.sets[l].members().end());
    const StateSet Mrest = StateSet::from_states(ch.dim(), rest);
    const double r =
        capacity(ch, ms.sets[j], Mrest) / ch.mu_set(ms.sets[j]);
    cert.numerator = std::max(cert.numerator, r);
  }
  cert.numerator *= K;

  EigResult eig = dirichlet_eigenvalue(ch, M);
  if (!eig.converged)
    throw std::runtime_error(
        "metastability_certificate: eigenvalue residual " +
        std::to_string(eig.residual));
  cert.lambda0 = eig.lambda0;

  // Singleton scan (denominator upper bound).  Every singleton is an
  // admissible X, so a subsample still upper-bounds the true minimum; cap the
  // scan so N=12 stays cheap.
  std::vector<State> outside;
  for (State s = 0; s < ch.states(); ++s)
    if (!M.contains(s)) outside.push_back(s);
  const std::size_t max_scan = 256;
  const std::size_t stride = std::max<std::size_t>(1, outside.size() / max_scan);
  cert.singleton_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < outside.size(); i += stride) {
    const State s = outside[i];
    const double r =
        capacity(ch, StateSet::singleton(ch.dim(), s), M) / ch.mu(s);
    cert.singleton_min = std::min(cert.singleton_min, r);
  }

  cert.ratio_upper = cert.numerator / cert.lambda0;
  cert.ratio_lower = cert.numerator / cert.singleton_min;
  cert.certified = cert.ratio_upper <= ms.rho;
  return cert;
}

std::vector<int> metastable_partition(const ExactChain& annealed_chain,
                                      const MetaSpec& ms) {
  const int K = int(ms.sets.size());
  if (K < 2) throw ConfigError("metastable_partition: need K >= 2 sets");
  const std::size_t n_states = annealed_chain.states();
  std::vector<std::vector<double>> hs(K);
  for (int j = 0; j < K; ++j) {
    std::vector<State> rest;
    for (int l = 0; l < K; ++l)
      if (l != j)
        rest.insert(rest.end(), ms.sets[l].members().begin(),
                    ms.sets[l].members().end());
    hs[j] = equilibrium_potential(annealed_chain, ms.sets[j],
                                  StateSet::from_states(annealed_chain.dim(),
                                                        rest))
                .h;
  }
  std::vector<int> valley(n_states, 0);
  for (State s = 0; s < n_states; ++s) {
    int best = 0;
    double best_p = hs[0][s];
    for (int j = 1; j < K; ++j)
      if (hs[j][s] > best_p) {  // strict: ties keep the lowest index
        best = j;
        best_p = hs[j][s];
      }
    valley[s] = best;
  }
  // Membership overrides the hitting-probability vote (M_i subset of S_i).
  for (int j = 0; j < K; ++j)
    for (State s : ms.sets[j].members()) valley[s] = j;
  return valley;
}

SandwichReport sandwich_check(const CouplingMatrix& cm, const ModelParams& p,
                              double a_N, const StateSet& A,
                              const StateSet& B) {
  XiSpec xs{a_N};
  XiResult xi = xi_check(cm, p, xs);
  SandwichReport rep;
  rep.a_N = a_N;
  rep.max_dev = xi.max_dev;
  if (!xi.in_event)
    throw ConfigError("sandwich_check: a_N <= max|Delta|; Xi(a_N) fails");

  const ExactChain quenched(cm, p);
  const ExactChain annealed(annealed_couplings(cm), p);
  const PotentialSolution sq = equilibrium_potential(quenched, A, B);
  const PotentialSolution sa = equilibrium_potential(annealed, A, B);
  const double ba = p.beta * a_N;

  auto push = [&rep](std::string what, double log_ratio, double bound) {
    rep.entries.push_back(
        {std::move(what), log_ratio, bound, std::abs(log_ratio) <= bound});
    rep.all_ok = rep.all_ok && rep.entries.back().ok;
  };
  push("Z*cap(A,B)", sq.log_Zcap - sa.log_Zcap, ba);
  const double dA = quenched.log_Z_mu_set(A) - annealed.log_Z_mu_set(A);
  const double dB = quenched.log_Z_mu_set(B) - annealed.log_Z_mu_set(B);
  push("Z*mu[A]", dA, ba);
  push("Z*mu[B]", dB, ba);
  push("escape cap/mu[A]", (sq.log_Zcap - sa.log_Zcap) - dA, 2.0 * ba);
  push("escape cap/mu[B]", (sq.log_Zcap - sa.log_Zcap) - dB, 2.0 * ba);
  return rep;
}

}  // namespace metastab
