#include "metastab/model.hpp"

#include <algorithm>
#include <cmath>

namespace metastab {

double hamiltonian(const CouplingMatrix& cm, const ModelParams& p, State s) {
  if (cm.N != p.N) throw ConfigError("hamiltonian: dimension mismatch");
  double pair_sum = 0.0;
  std::size_t e = 0;
  for (int i = 0; i < p.N; ++i) {
    const int si = spin_at(s, i);
    for (int j = i + 1; j < p.N; ++j, ++e)
      pair_sum += cm.J[e] * si * spin_at(s, j);
  }
  const double field_sum = 2.0 * up_count(s) - p.N;
  return -pair_sum / p.N - p.h * field_sum;
}

double flip_delta(const CouplingMatrix& cm, const ModelParams& p, State s,
                  int k) {
  if (k < 0 || k >= p.N) throw ConfigError("flip_delta: site out of range");
  const int sk = spin_at(s, k);
  double g = p.h;
  for (int j = 0; j < p.N; ++j)
    if (j != k) g += cm.coupling(k, j) * spin_at(s, j) / p.N;
  return 2.0 * sk * g;
}

std::vector<double> hamiltonian_table(const CouplingMatrix& cm,
                                      const ModelParams& p, int enum_limit) {
  require_enumerable(p.N, enum_limit);
  const std::size_t n_states = std::size_t(1) << p.N;
  std::vector<double> H(n_states);
  // Walk states in Gray-code order; consecutive codes differ in one spin, so
  // each energy is an O(N) update of the previous one via the local field.
  std::vector<signed char> sp(p.N, -1);  // spins of the current Gray state
  double cur = hamiltonian(cm, p, 0);
  H[0] = cur;
  State gray = 0;
  for (std::size_t t = 1; t < n_states; ++t) {
    const State next_gray = State(t ^ (t >> 1));
    const int k = __builtin_ctzll(gray ^ next_gray);
    double g = p.h;
    for (int j = 0; j < p.N; ++j)
      if (j != k) g += cm.coupling(k, j) * sp[j] / double(p.N);
    cur += 2.0 * sp[k] * g;
    sp[k] = static_cast<signed char>(-sp[k]);
    gray = next_gray;
    H[gray] = cur;
  }
  return H;
}

double log_partition(const std::vector<double>& H, double beta) {
  const double Hmin = *std::min_element(H.begin(), H.end());
  double s = 0.0;
  for (double e : H) s += std::exp(-beta * (e - Hmin));
  return std::log(s) - beta * Hmin;
}

double log_partition(const CouplingMatrix& cm, const ModelParams& p,
                     int enum_limit) {
  return log_partition(hamiltonian_table(cm, p, enum_limit), p.beta);
}

std::vector<double> gibbs_distribution(const std::vector<double>& H,
                                       double beta) {
  const double Hmin = *std::min_element(H.begin(), H.end());
  std::vector<double> w(H.size());
  double Z = 0.0;
  for (std::size_t i = 0; i < H.size(); ++i) {
    w[i] = std::exp(-beta * (H[i] - Hmin));
    Z += w[i];
  }
  for (double& x : w) x /= Z;
  return w;
}

double gibbs(const CouplingMatrix& cm, const ModelParams& p, State s,
             int enum_limit) {
  return gibbs_distribution(hamiltonian_table(cm, p, enum_limit), p.beta)[s];
}

double delta_energy(const CouplingMatrix& cm, const ModelParams& p, State s) {
  double sum = 0.0;
  std::size_t e = 0;
  for (int i = 0; i < p.N; ++i) {
    const int si = spin_at(s, i);
    for (int j = i + 1; j < p.N; ++j, ++e)
      sum += (cm.J[e] - cm.mean[e]) * si * spin_at(s, j);
  }
  return -sum / p.N;
}

double XiSpec::b_N(double k_J, int N) const {
  return a_N * a_N / (2.0 * k_J) - N * std::log(2.0);
}

double default_a_N(double k_J, double k_1, int N) {
  return std::sqrt(2.0 * k_J * (k_1 + std::log(2.0)) * N);
}

XiResult xi_check(const CouplingMatrix& cm, const ModelParams& p,
                  const XiSpec& xs, int enum_limit) {
  require_enumerable(p.N, enum_limit);
  const std::size_t n_states = std::size_t(1) << p.N;
  // Same Gray-code trick as hamiltonian_table, on the centered couplings.
  std::vector<signed char> sp(p.N, -1);
  double cur = delta_energy(cm, p, 0);
  double max_dev = std::abs(cur);
  State gray = 0;
  for (std::size_t t = 1; t < n_states; ++t) {
    const State next_gray = State(t ^ (t >> 1));
    const int k = __builtin_ctzll(gray ^ next_gray);
    double g = 0.0;
    for (int j = 0; j < p.N; ++j)
      if (j != k) {
        int lo = std::min(j, k), hi = std::max(j, k);
        const std::size_t e = CouplingMatrix::edge_index(lo, hi, p.N);
        g += (cm.J[e] - cm.mean[e]) * sp[j] / double(p.N);
      }
    cur += 2.0 * sp[k] * g;
    sp[k] = static_cast<signed char>(-sp[k]);
    gray = next_gray;
    max_dev = std::max(max_dev, std::abs(cur));
  }
  return {max_dev < xs.a_N, max_dev};
}

double log_conditional_mgf_exact(const CouplingMatrix& cm,
                                 const ModelParams& p, State s, int sign) {
  if (sign != 1 && sign != -1)
    throw ConfigError("log_conditional_mgf_exact: sign must be +-1");
  double log_mgf = 0.0;
  std::size_t e = 0;
  for (int i = 0; i < p.N; ++i) {
    const int si = spin_at(s, i);
    for (int j = i + 1; j < p.N; ++j, ++e) {
      const double mean = cm.mean[e], var = cm.var[e];
      if (mean == 0.0 && var == 0.0) continue;  // J identically 0
      if (mean == 0.0)
        throw ConfigError(
            "log_conditional_mgf_exact: edge law not two-point recoverable");
      // Two-point law: value A with probability P, 0 otherwise.
      const double A = var / mean + mean;
      const double P = mean / A;
      if (var == 0.0) continue;  // P = 1, degenerate: factor 1
      // Delta = -(1/N) sum (J - mean) s_i s_j, so the edge exponent is
      // t (J - A P) with t = -sign * beta * s_i s_j / N.
      const double t = -sign * p.beta * si * spin_at(s, j) / p.N;
      const double f =
          (1.0 - P) * std::exp(-t * A * P) + P * std::exp(t * A * (1.0 - P));
      log_mgf += std::log(f);
    }
  }
  return log_mgf;
}

}  // namespace metastab
