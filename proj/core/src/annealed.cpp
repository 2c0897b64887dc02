#include "metastab/annealed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

namespace metastab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double xlogx_half(double t) {  // (t/2) log(t/2), extended to 0 at t = 0
  return t > 0 ? 0.5 * t * std::log(0.5 * t) : 0.0;
}

}  // namespace

double free_energy(double x, const FreeEnergySpec& spec) {
  if (std::abs(x) > 1.0) throw ConfigError("free_energy: |x| > 1");
  const double entropy = xlogx_half(1.0 - x) + xlogx_half(1.0 + x);
  return -0.5 * spec.pbar * x * x - spec.h * x +
         (entropy + std::log(2.0)) / spec.beta;
}

double free_energy_d1(double x, const FreeEnergySpec& spec) {
  return -spec.pbar * x - spec.h + std::atanh(x) / spec.beta;
}

double free_energy_d2(double x, const FreeEnergySpec& spec) {
  return -spec.pbar + 1.0 / (spec.beta * (1.0 - x * x));
}

std::vector<StationaryPoint> stationary_points(const FreeEnergySpec& spec) {
  // F' is continuous on (-1,1) and diverges to -/+ inf at the ends; bracket
  // its sign changes on a fine grid, then bisect to 1e-12.
  const int G = 4000;
  std::vector<StationaryPoint> out;
  double prev_x = -1.0 + 1e-12;
  double prev_f = free_energy_d1(prev_x, spec);
  for (int i = 1; i <= G; ++i) {
    const double x = -1.0 + 2.0 * i / G - (i == G ? 1e-12 : 0.0);
    const double f = free_energy_d1(x, spec);
    if ((prev_f < 0) != (f < 0)) {
      double lo = prev_x, hi = x;
      for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((free_energy_d1(mid, spec) < 0) == (prev_f < 0))
          lo = mid;
        else
          hi = mid;
      }
      const double m = 0.5 * (lo + hi);
      out.push_back({m, free_energy_d2(m, spec) > 0});
    }
    prev_x = x;
    prev_f = f;
  }
  return out;
}

std::vector<double> local_minima(const FreeEnergySpec& spec) {
  std::vector<double> mins;
  for (const auto& sp : stationary_points(spec))
    if (sp.is_minimum) mins.push_back(sp.m);
  return mins;
}

double critical_field(double beta, double pbar) {
  if (!(beta * pbar > 1.0))
    throw ConfigError("critical_field: requires beta * pbar > 1");
  const double s = std::sqrt(1.0 - 1.0 / (beta * pbar));
  return pbar * s - std::log(beta * pbar * (1.0 + s) * (1.0 + s)) / (2.0 * beta);
}

double spinodal_field_root(double beta, double pbar, double tol) {
  if (!(beta * pbar > 1.0))
    throw ConfigError("spinodal_field_root: requires beta * pbar > 1");
  // Independent oracle: bisect on h for the disappearance of the second
  // (metastable) minimum.  Near the merge the two F' roots are separated by
  // O(sqrt(h_c - h)), so minima counting needs a much finer grid than the
  // general-purpose stationary_points scan: with G intervals the detection
  // window is O(1/G^2), and G = 2e5 resolves h_c to ~1e-11.
  auto two_minima = [&](double h) {
    const FreeEnergySpec s{beta, h, pbar};
    const int G = 200000;
    int minima = 0;
    double prev = free_energy_d1(-1.0 + 1e-9, s);
    for (int i = 1; i <= G; ++i) {
      const double x = -1.0 + (2.0 - 2e-9) * i / G;
      const double f = free_energy_d1(x, s);
      if (prev < 0 && f >= 0) ++minima;
      prev = f;
    }
    return minima >= 2;
  };
  double lo = 0.0, hi = pbar + 1.0 / beta;  // F' > 0 everywhere beyond this
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (two_minima(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double BirthDeathChain::log_Z() const { return log_Zw - spec.beta * Hmin; }

BirthDeathChain make_birth_death_chain(const FreeEnergySpec& spec, int N) {
  if (N < 2) throw ConfigError("make_birth_death_chain: N >= 2");
  BirthDeathChain ch;
  ch.N = N;
  ch.spec = spec;
  ch.H.resize(N + 1);
  for (int k = 0; k <= N; ++k) {
    const double m = ch.level_m(k);
    ch.H[k] = -0.5 * spec.pbar * N * m * m + 0.5 * spec.pbar - spec.h * N * m;
  }
  ch.Hmin = *std::min_element(ch.H.begin(), ch.H.end());
  ch.log_muw.resize(N + 1);
  ch.log_b.assign(N + 1, kNegInf);
  ch.log_d.assign(N + 1, kNegInf);
  ch.log_cond.assign(N, kNegInf);
  // Build the log-binomial ladder from shared log(i) terms so detailed
  // balance mu(k) b(k) = mu(k+1) d(k+1) cancels exactly in floating point
  // (lgamma-based binomials lose ~1e-11 at N = 10^4).
  std::vector<double> ln(N + 1, 0.0);
  for (int i = 1; i <= N; ++i) ln[i] = std::log(double(i));
  std::vector<double> lchoose_acc(N + 1, 0.0);
  for (int k = 0; k < N; ++k)
    lchoose_acc[k + 1] = lchoose_acc[k] + ln[N - k] - ln[k + 1];
  for (int k = 0; k <= N; ++k) {
    ch.log_muw[k] = lchoose_acc[k] - spec.beta * (ch.H[k] - ch.Hmin);
    if (k < N) {
      const double dH = ch.H[k + 1] - ch.H[k];
      ch.log_b[k] = ln[N - k] - spec.beta * std::max(dH, 0.0);
      ch.log_d[k + 1] = ln[k + 1] - spec.beta * std::max(-dH, 0.0);
    }
  }
  for (int k = 0; k < N; ++k) ch.log_cond[k] = ch.log_muw[k] + ch.log_b[k];
  ch.log_Zw = logsumexp(ch.log_muw);
  return ch;
}

double lumped_log_capacity(const BirthDeathChain& ch, int ka, int kb) {
  if (ka == kb || ka < 0 || kb < 0 || ka > ch.N || kb > ch.N)
    throw ConfigError("lumped_log_capacity: degenerate levels");
  if (ka > kb) std::swap(ka, kb);  // capacity is symmetric
  std::vector<double> terms;
  for (int k = ka; k < kb; ++k) terms.push_back(-ch.log_cond[k]);
  return -logsumexp(terms) - ch.log_Zw;
}

namespace {

// log h(k) for the equilibrium potential of A = {ka}, B = {kb}.
std::vector<double> lumped_log_h(const BirthDeathChain& ch, int ka, int kb) {
  const int N = ch.N;
  std::vector<double> log_h(N + 1, kNegInf);
  if (ka < kb) {
    // h = 1 at and below ka, 0 at and beyond kb; between:
    // h(k) = S(k)/S(ka), S(k) = sum_{l=k}^{kb-1} 1/c(l).
    for (int k = 0; k <= ka; ++k) log_h[k] = 0.0;
    double log_S = kNegInf;  // running suffix sum, built downward from kb-1
    std::vector<double> log_Sk(N + 1, kNegInf);
    for (int k = kb - 1; k >= ka; --k) {
      log_S = logsumexp({log_S, -ch.log_cond[k]});
      log_Sk[k] = log_S;
    }
    for (int k = ka + 1; k < kb; ++k) log_h[k] = log_Sk[k] - log_Sk[ka];
  } else {
    for (int k = ka; k <= N; ++k) log_h[k] = 0.0;
    double log_S = kNegInf;
    std::vector<double> log_Sk(N + 1, kNegInf);
    for (int k = kb; k < ka; ++k) {
      log_S = logsumexp({log_S, -ch.log_cond[k]});
      log_Sk[k + 1] = log_S;  // S(k) = sum_{l=kb}^{k-1} 1/c(l)
    }
    for (int k = kb + 1; k < ka; ++k) log_h[k] = log_Sk[k] - log_Sk[ka];
  }
  return log_h;
}

}  // namespace

double lumped_log_harmonic_sum(const BirthDeathChain& ch, int ka, int kb) {
  if (ka == kb) throw ConfigError("lumped_log_harmonic_sum: degenerate levels");
  const std::vector<double> log_h = lumped_log_h(ch, ka, kb);
  std::vector<double> terms;
  for (int k = 0; k <= ch.N; ++k)
    if (log_h[k] != kNegInf) terms.push_back(ch.log_muw[k] + log_h[k]);
  return logsumexp(terms) - ch.log_Zw;
}

LumpedHitting lumped_mean_hitting(const BirthDeathChain& ch, int ka, int kb) {
  if (ka == kb) throw ConfigError("lumped_mean_hitting: degenerate levels");
  LumpedHitting out;
  out.log_via_identity =
      lumped_log_harmonic_sum(ch, ka, kb) - lumped_log_capacity(ch, ka, kb);

  // Closed-form solution of the absorbing tridiagonal system, in logs:
  // u(ka) = sum_{j between} W(j)/c(j) with W the mu-mass on the far side of
  // the absorbing level.
  std::vector<double> terms;
  if (ka < kb) {
    double log_W = kNegInf;  // prefix mass sum_{l<=j} muw(l)
    int j = 0;
    std::vector<double> log_Wj(ch.N + 1, kNegInf);
    for (j = 0; j < kb; ++j) {
      log_W = logsumexp({log_W, ch.log_muw[j]});
      log_Wj[j] = log_W;
    }
    for (j = ka; j < kb; ++j) terms.push_back(log_Wj[j] - ch.log_cond[j]);
  } else {
    double log_W = kNegInf;  // suffix mass sum_{l>j} muw(l)
    std::vector<double> log_Wj(ch.N + 1, kNegInf);
    for (int j = ch.N - 1; j >= kb; --j) {
      log_W = logsumexp({log_W, ch.log_muw[j + 1]});
      log_Wj[j] = log_W;
    }
    for (int j = kb; j < ka; ++j) terms.push_back(log_Wj[j] - ch.log_cond[j]);
  }
  // Normalization of mu cancels between W(j) and c(j) = muw(j) b(j).
  out.log_via_direct = logsumexp(terms);

  // Literal Thomas solve in plain doubles when representable (a third,
  // independent route used by the exact-lumping tests at small N).
  {
    const int N = ch.N;
    const int lo = ka < kb ? 0 : kb + 1;
    const int hi = ka < kb ? kb - 1 : N;
    const int n = hi - lo + 1;
    std::vector<double> a(n), b(n), c(n), r(n, 1.0);
    for (int k = lo; k <= hi; ++k) {
      const double bk = k < N ? std::exp(ch.log_b[k]) : 0.0;
      const double dk = k > 0 ? std::exp(ch.log_d[k]) : 0.0;
      const int i = k - lo;
      // (b_k + d_k) u_k - b_k u_{k+1} - d_k u_{k-1} = 1; absorbing neighbor
      // contributes to the diagonal only.
      b[i] = bk + dk;
      c[i] = (k < hi) ? -bk : 0.0;
      a[i] = (k > lo) ? -dk : 0.0;
      if (k == lo && ka < kb) b[i] = bk;           // reflecting at 0
      if (k == hi && ka > kb) b[i] = dk;           // reflecting at N
    }
    for (int i = 1; i < n; ++i) {
      const double m = a[i] / b[i - 1];
      b[i] -= m * c[i - 1];
      r[i] -= m * r[i - 1];
    }
    std::vector<double> u(n);
    u[n - 1] = r[n - 1] / b[n - 1];
    for (int i = n - 2; i >= 0; --i) u[i] = (r[i] - c[i] * u[i + 1]) / b[i];
    const double ua = u[ka - lo];
    out.via_tridiag = std::isfinite(ua) ? ua : std::nan("");
  }
  return out;
}

MetastableLevels metastable_levels(const FreeEnergySpec& spec, int N) {
  std::vector<double> mins = local_minima(spec);
  if (mins.size() < 2)
    throw ConfigError(
        "metastable_levels: the free energy has a single minimum "
        "(no annealed metastability at these parameters)");
  // Nearest grid point, ties toward the smaller magnetization.
  auto to_level = [&](double m) {
    const double x = (m + 1.0) * N / 2.0;
    int k = int(std::ceil(x - 0.5));
    return std::clamp(k, 0, N);
  };
  int ka = to_level(mins[0]), kb = to_level(mins[1]);
  if (ka == kb)
    throw ConfigError("metastable_levels: minima collapse to one grid level");
  // Order by lumped Gibbs weight, heavier first.
  BirthDeathChain ch = make_birth_death_chain(spec, N);
  MetastableLevels out;
  if (ch.log_muw[ka] >= ch.log_muw[kb]) {
    out.k1 = ka;
    out.k2 = kb;
  } else {
    out.k1 = kb;
    out.k2 = ka;
  }
  out.m1 = ch.level_m(out.k1);
  out.m2 = ch.level_m(out.k2);
  return out;
}

std::pair<StateSet, StateSet> metastable_sets(const FreeEnergySpec& spec,
                                              int N) {
  require_enumerable(N);
  MetastableLevels lv = metastable_levels(spec, N);
  return {StateSet::from_levels(N, {lv.k1}), StateSet::from_levels(N, {lv.k2})};
}

void write_chain_csv(const std::string& path, const BirthDeathChain& ch) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# lumped annealed birth-death chain: level magnetization, free "
         "energy, Gibbs weight, up rate, down rate\n";
  out << "m,F,mu_hat,b,d\n";
  out.precision(17);
  for (int k = 0; k <= ch.N; ++k) {
    const double m = ch.level_m(k);
    out << m << "," << free_energy(m, ch.spec) << ","
        << std::exp(ch.log_mu(k)) << "," << std::exp(ch.log_b[k]) << ","
        << std::exp(ch.log_d[k]) << "\n";
  }
}

void write_free_energy_csv(const std::string& path,
                           const FreeEnergySpec& spec, int grid_points) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# mean-field free energy curve\n";
  out << "x,F\n";
  out.precision(17);
  for (int i = 0; i <= grid_points; ++i) {
    const double x = -1.0 + 2.0 * i / grid_points;
    out << x << "," << free_energy(x, spec) << "\n";
  }
}

}  // namespace metastab
