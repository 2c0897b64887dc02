#include "metastab/experiments.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

namespace metastab {

namespace {

double binom_stderr(double p_hat, std::size_t n) {
  return n ? std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) / double(n)) : 0.0;
}

std::vector<const ReplicaResult*> ok_results(const ExperimentData& d) {
  std::vector<const ReplicaResult*> out;
  for (const auto& r : d.results)
    if (r.ok) out.push_back(&r);
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  validate_params(mp);
  ds.validate();
  if (ds.N != mp.N) throw ConfigError("ExperimentConfig: N mismatch");
  if (R < 2) throw ConfigError("ExperimentConfig: need at least 2 replicas");
  for (double t : t_grid_conc)
    if (!(t > 0)) throw ConfigError("ExperimentConfig: t-grid must be > 0");
  for (double t : t_grid_ratio)
    if (!(t > 0)) throw ConfigError("ExperimentConfig: t-grid must be > 0");
  for (double q : q_list)
    if (!(q >= 1)) throw ConfigError("ExperimentConfig: q must be >= 1");
  if (!(k_1 > 0)) throw ConfigError("ExperimentConfig: k_1 must be > 0");
  if (levels) {
    if (levels->first == levels->second)
      throw ConfigError("ExperimentConfig: metastable levels coincide");
    if (levels->first < 0 || levels->first > mp.N || levels->second < 0 ||
        levels->second > mp.N)
      throw ConfigError("ExperimentConfig: metastable level out of range");
  }
}

double ExperimentConfig::a_N() const {
  return a_N_override ? *a_N_override : default_a_N(mp.k_J, k_1, mp.N);
}

ExperimentData run_replicas(const ExperimentConfig& config) {
  config.validate();
  require_enumerable(config.mp.N);
  ExperimentData data;
  data.config = config;
  data.a_N = config.a_N();

  // Resolve the metastable pair A (start), B (target).
  int kA = 0, kB = 0;
  if (config.levels) {
    kA = config.levels->first;
    kB = config.levels->second;
  } else {
    if (config.ds.kind != DisorderKind::erdos_renyi)
      throw ConfigError(
          "run_replicas: automatic metastable sets require a constant "
          "annealed coupling (erdos_renyi); pass explicit levels");
    FreeEnergySpec fes{config.mp.beta, config.mp.h, config.ds.p};
    MetastableLevels lv = metastable_levels(fes, config.mp.N);
    kA = lv.k2;  // the lighter set is the start, per the weight ordering
    kB = lv.k1;
  }
  data.A = StateSet::from_levels(config.mp.N, {kA});
  data.B = StateSet::from_levels(config.mp.N, {kB});
  if (!data.A.disjoint(data.B))
    throw ConfigError("run_replicas: A and B overlap");

  // Global annealed reference and the valley S of A under the annealed chain
  // of replica 0 (exact for families with deterministic conditional means).
  const CouplingMatrix cm0 = annealed_couplings(
      sample_couplings(config.ds, {config.master_seed, 0}));
  const ExactChain ann(cm0, config.mp);
  {
    PotentialSolution s = equilibrium_potential(ann, data.A, data.B);
    data.ref.log_Zcap = s.log_Zcap;
    data.ref.log_Zharm = s.log_Zharm;
    data.ref.logE = s.log_Zharm - s.log_Zcap;
    data.ref.log_Zmu_A = ann.log_Z_mu_set(data.A);
    MetaSpec ms;
    ms.sets = {data.B, data.A};  // weight order: B = M_1, A = M_2
    std::vector<int> valley = metastable_partition(ann, ms);
    std::vector<State> S_states;
    for (State s2 = 0; s2 < ann.states(); ++s2)
      if (valley[s2] == 1) S_states.push_back(s2);
    data.S_valley = StateSet::from_states(config.mp.N, std::move(S_states));
    data.ref.log_Zmu_S = ann.log_Z_mu_set(data.S_valley);
  }

  data.results.assign(config.R, ReplicaResult{});
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= config.R) return;
      ReplicaResult& out = data.results[r];
      out.index = r;
      try {
        const RandomSeed seed{config.master_seed, std::uint64_t(r)};
        const CouplingMatrix cm = sample_couplings(config.ds, seed);
        const ExactChain chain(cm, config.mp);
        PotentialSolution sol = equilibrium_potential(chain, data.A, data.B);
        out.log_Zcap = sol.log_Zcap;
        out.log_Zharm = sol.log_Zharm;
        out.logE = sol.log_Zharm - sol.log_Zcap;
        out.alpha = alpha_N(cm, config.mp.beta);
        XiResult xi = xi_check(cm, config.mp, XiSpec{data.a_N});
        out.max_dev = xi.max_dev;
        out.xi_ok = xi.in_event;
        out.log_Zmu_A = chain.log_Z_mu_set(data.A);
        out.log_Zmu_S = chain.log_Z_mu_set(data.S_valley);
        if (config.ds.kind == DisorderKind::erdos_renyi) {
          // The conditional means are deterministic: the annealed chain is
          // the same for every replica, already solved in data.ref.
          out.log_Zcap_a = data.ref.log_Zcap;
          out.log_Zharm_a = data.ref.log_Zharm;
          out.logE_a = data.ref.logE;
        } else {
          const ExactChain achain(annealed_couplings(cm), config.mp);
          PotentialSolution asol =
              equilibrium_potential(achain, data.A, data.B);
          out.log_Zcap_a = asol.log_Zcap;
          out.log_Zharm_a = asol.log_Zharm;
          out.logE_a = asol.log_Zharm - asol.log_Zcap;
        }
        out.ok = true;
      } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
      }
    }
  };
  int n_threads = config.threads > 0
                      ? config.threads
                      : int(std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min(n_threads, config.R);
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& r : data.results)
    if (!r.ok) ++data.failures;
  return data;
}

namespace {

TailReport centered_tail_report(const char* name,
                                const std::vector<double>& values,
                                const std::vector<double>& t_grid,
                                const std::function<double(double)>& envelope,
                                double slack) {
  TailReport rep;
  rep.name = name;
  const std::size_t n = values.size();
  const double mean =
      n ? std::accumulate(values.begin(), values.end(), 0.0) / double(n) : 0.0;
  for (double t : t_grid) {
    TailRow row;
    row.t = t;
    std::size_t exceed = 0;
    for (double v : values)
      if (std::abs(v - mean) > t) ++exceed;
    row.empirical = n ? double(exceed) / double(n) : 0.0;
    row.stderr_ = binom_stderr(row.empirical, n);
    row.bound = envelope(t);
    row.vacuous = row.bound >= 1.0;
    row.pass = row.empirical <= row.bound + slack + 3.0 * row.stderr_;
    if (row.vacuous) ++rep.vacuous_count;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace

TailReport capacity_concentration_report(const ExperimentData& data) {
  auto oks = ok_results(data);
  if (oks.size() < 100)
    throw ConfigError("capacity_concentration_report: need >= 100 replicas");
  std::vector<double> v;
  v.reserve(oks.size());
  for (auto* r : oks) v.push_back(r->log_Zcap);
  const double bk = data.config.mp.beta * data.config.mp.k_J;
  TailReport rep = centered_tail_report(
      "capacity_concentration", v, data.config.t_grid_conc,
      [bk](double t) { return 2.0 * std::exp(-t * t / (bk * bk)); }, 0.0);
  rep.note =
      "two-sided tail of mean-centered log(Z cap); envelope 2 exp(-t^2/"
      "(beta k_J)^2)";
  return rep;
}

TailReport harmonic_concentration_report(const ExperimentData& data) {
  auto oks = ok_results(data);
  if (oks.size() < 100)
    throw ConfigError("harmonic_concentration_report: need >= 100 replicas");
  std::vector<double> v;
  v.reserve(oks.size());
  for (auto* r : oks) v.push_back(r->log_Zharm);
  const double bk = data.config.mp.beta * data.config.mp.k_J;
  const double cN = data.config.harm_shift_cN;
  const double k1N = std::exp(-data.config.k_1 * data.config.mp.N);
  TailReport rep = centered_tail_report(
      "harmonic_concentration", v, data.config.t_grid_conc,
      [bk, cN, k1N](double t) {
        const double u = std::max(t - cN, 0.0) / bk;
        return 2.0 * std::exp(-u * u) + k1N;
      },
      data.config.slack);
  rep.note =
      "two-sided tail of mean-centered log(Z harm); envelope 2 exp(-((t-c_N)/"
      "(beta k_J))^2) + e^{-k_1 N}, c_N and slack configurable";
  return rep;
}

TailReport ratio_tail_report(const ExperimentData& data) {
  auto oks = ok_results(data);
  if (oks.size() < 100)
    throw ConfigError("ratio_tail_report: need >= 100 replicas");
  const double bk2 = 2.0 * data.config.mp.beta * data.config.mp.k_J;
  TailReport rep;
  rep.name = "ratio_tail";
  rep.note =
      "frequency of exp(-t-alpha) <= E_q[tau]/E_a[tau] <= exp(t+2 alpha) vs "
      "confidence 1 - 4 exp(-t^2/(2 beta k_J)^2); rows with confidence <= 0 "
      "are vacuous";
  for (double t : data.config.t_grid_ratio) {
    TailRow row;
    row.t = t;
    std::size_t inside = 0;
    for (auto* r : oks) {
      const double log_ratio = r->logE - r->logE_a;
      if (log_ratio >= -t - r->alpha && log_ratio <= t + 2.0 * r->alpha)
        ++inside;
    }
    row.empirical = double(inside) / double(oks.size());
    row.stderr_ = binom_stderr(row.empirical, oks.size());
    row.bound = 1.0 - 4.0 * std::exp(-t * t / (bk2 * bk2));
    row.vacuous = row.bound <= 0.0;
    row.pass =
        row.vacuous || row.empirical >= row.bound - data.config.slack;
    if (row.vacuous) ++rep.vacuous_count;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

TailReport xi_tail_report(const ExperimentData& data) {
  auto oks = ok_results(data);
  if (oks.empty()) throw ConfigError("xi_tail_report: no replicas");
  std::size_t out_count = 0;
  for (auto* r : oks)
    if (!r->xi_ok) ++out_count;
  XiSpec xs{data.a_N};
  const double bN = xs.b_N(data.config.mp.k_J, data.config.mp.N);
  TailReport rep;
  rep.name = "xi_tail";
  TailRow row;
  row.t = data.a_N;
  row.empirical = double(out_count) / double(oks.size());
  row.stderr_ = binom_stderr(row.empirical, oks.size());
  row.bound = std::min(1.0, std::exp(-bN));
  row.vacuous = bN <= 0.0;
  row.pass = row.empirical <= row.bound + 3.0 * row.stderr_;
  rep.vacuous_count = row.vacuous ? 1 : 0;
  rep.pass = row.pass;
  rep.rows.push_back(row);
  rep.note = "empirical P[Xi(a_N)^c] vs min(1, e^{-b_N}); b_N = " +
             std::to_string(bN);
  return rep;
}

MomentReport ratio_moment_report(const std::vector<ExperimentData>& sweep,
                                 const std::vector<double>& q_list,
                                 double c_max) {
  MomentReport rep;
  rep.c_max = c_max;
  double c_need = 0.0;
  struct Item {
    int N;
    double q, norm, alpha;
  };
  std::vector<Item> items;
  for (const auto& data : sweep) {
    auto oks = ok_results(data);
    if (oks.empty()) throw ConfigError("ratio_moment_report: no replicas");
    double alpha = 0.0;
    for (auto* r : oks) alpha += r->alpha;
    alpha /= double(oks.size());
    for (double q : q_list) {
      double s = 0.0;
      for (auto* r : oks) s += std::exp(q * (r->logE - r->logE_a));
      const double norm = std::pow(s / double(oks.size()), 1.0 / q);
      items.push_back({data.config.mp.N, q, norm, alpha});
      const double rtN = std::sqrt(double(data.config.mp.N));
      // Smallest c with e^{-a}(1-c/rtN) <= norm <= e^{4qa}(1+c/rtN).
      c_need = std::max(c_need, rtN * (1.0 - norm * std::exp(alpha)));
      c_need = std::max(c_need, rtN * (norm * std::exp(-4.0 * q * alpha) - 1.0));
    }
  }
  rep.fitted_c = std::max(0.0, c_need);
  rep.pass = rep.fitted_c <= c_max;
  for (const auto& it : items) {
    MomentRow row;
    row.N = it.N;
    row.q = it.q;
    row.norm = it.norm;
    const double rtN = std::sqrt(double(it.N));
    row.lower = std::exp(-it.alpha) * (1.0 - rep.fitted_c / rtN);
    row.upper = std::exp(4.0 * it.q * it.alpha) * (1.0 + rep.fitted_c / rtN);
    row.pass = it.norm >= row.lower && it.norm <= row.upper;
    rep.rows.push_back(row);
  }
  return rep;
}

MgfReport mgf_report(const DisorderSpec& ds, const ModelParams& mp,
                     std::uint64_t seed, int n_sigmas) {
  const CouplingMatrix cm = sample_couplings(ds, {seed, 0});
  const double alpha = alpha_N(cm, mp.beta);
  MgfReport rep;
  rep.sigmas = n_sigmas;
  rep.bound = std::pow(mp.beta * mp.k_J, 3.0) / (2.0 * mp.N);
  Rng rng = stream_rng({seed, 0}, StreamKind::generic, 17);
  for (int i = 0; i < n_sigmas; ++i) {
    const State s = State(rng.below(std::uint64_t(1) << mp.N));
    for (int sign : {+1, -1}) {
      const double err =
          std::abs(log_conditional_mgf_exact(cm, mp, s, sign) - alpha);
      rep.max_err = std::max(rep.max_err, err);
    }
  }
  rep.pass = rep.max_err <= rep.bound;
  return rep;
}

TailReport mcdiarmid_harness(const std::function<double(std::uint64_t)>& draw,
                             double v, int R,
                             const std::vector<double>& t_grid) {
  if (R < 2) throw ConfigError("mcdiarmid_harness: need R >= 2");
  if (!(v > 0)) throw ConfigError("mcdiarmid_harness: need variance proxy > 0");
  std::vector<double> values(R);
  for (int r = 0; r < R; ++r) values[r] = draw(std::uint64_t(r));
  TailReport rep = centered_tail_report(
      "mcdiarmid", values, t_grid,
      [v](double t) { return std::exp(-t * t / (2.0 * v)); }, 0.0);
  rep.note = "two-sided tail vs exp(-t^2/(2v)), v = (1/4) sum c_i^2";
  return rep;
}

LocalizationReport localization_report(const ExperimentData& data) {
  LocalizationReport rep;
  rep.threshold = data.config.localization_threshold;
  for (const auto& r : data.results) {
    if (!r.ok || !r.xi_ok) {
      ++rep.excluded;
      continue;
    }
    const double dev = std::abs(std::exp(r.log_Zharm - r.log_Zmu_S) - 1.0);
    rep.deviations.push_back(dev);
    rep.max_dev = std::max(rep.max_dev, dev);
  }
  rep.annealed_dev =
      std::abs(std::exp(data.ref.log_Zharm - data.ref.log_Zmu_S) - 1.0);
  rep.pass = !rep.deviations.empty() && rep.max_dev <= rep.threshold;
  return rep;
}

void write_tail_csv(const std::string& path, const TailReport& r) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# " << r.name << ": " << r.note << "\n";
  out << "t,empirical,stderr,bound,vacuous,pass\n";
  out.precision(17);
  for (const auto& row : r.rows)
    out << row.t << "," << row.empirical << "," << row.stderr_ << ","
        << row.bound << "," << (row.vacuous ? 1 : 0) << ","
        << (row.pass ? 1 : 0) << "\n";
}

void write_moment_csv(const std::string& path, const MomentReport& r) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# ratio moments: fitted c = " << r.fitted_c
      << " (bounds e^{-a}(1-c/sqrt(N)) <= ||ratio||_q <= e^{4qa}(1+c/sqrt(N)))\n";
  out << "N,q,norm,lower,upper,pass\n";
  out.precision(17);
  for (const auto& row : r.rows)
    out << row.N << "," << row.q << "," << row.norm << "," << row.lower << ","
        << row.upper << "," << (row.pass ? 1 : 0) << "\n";
}

void write_replicas_csv(const std::string& path, const ExperimentData& d) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# per-replica observables; a_N = " << d.a_N << "\n";
  out << "index,ok,log_Zcap,log_Zharm,logE,alpha,max_dev,xi_ok,log_Zcap_a,"
         "log_Zharm_a,logE_a\n";
  out.precision(17);
  for (const auto& r : d.results)
    out << r.index << "," << (r.ok ? 1 : 0) << "," << r.log_Zcap << ","
        << r.log_Zharm << "," << r.logE << "," << r.alpha << "," << r.max_dev
        << "," << (r.xi_ok ? 1 : 0) << "," << r.log_Zcap_a << ","
        << r.log_Zharm_a << "," << r.logE_a << "\n";
}

}  // namespace metastab
