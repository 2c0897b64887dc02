// metastab command-line tool: generate disorder, run exact potential-theory
// analyses, lumped annealed chains, hitting-time simulations, and disorder
// Monte Carlo experiment suites.
//
// Exit codes: 0 ok, 1 I/O error, 2 config error, 3 capability error,
// 4 acceptance failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "metastab/annealed.hpp"
#include "metastab/disorder.hpp"
#include "metastab/dynamics.hpp"
#include "metastab/experiments.hpp"
#include "metastab/model.hpp"
#include "metastab/potential.hpp"
#include "metastab/version.hpp"

namespace ms = metastab;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0, kExitIo = 1, kExitConfig = 2, kExitCapability = 3,
              kExitAcceptance = 4;

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ms::IoError("cannot digest: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

ms::DisorderSpec disorder_from_json(const json& j, int N, double k_J) {
  ms::DisorderSpec ds;
  ds.N = N;
  ds.k_J = k_J;
  ds.kind = ms::disorder_kind_from_string(j.value("kind", "erdos_renyi"));
  ds.p = j.value("p", 0.5);
  ds.v_min = j.value("v_min", 0.2);
  ds.v_max = j.value("v_max", 0.8);
  ds.n_patterns = j.value("n_patterns", 1);
  ds.xi_amp = j.value("xi_amp", 1.0);
  return ds;
}

ms::ExperimentConfig experiment_config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ms::IoError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ms::ConfigError(std::string("config parse error: ") + e.what());
  }
  ms::ExperimentConfig cfg;
  const json& m = j.at("model");
  cfg.mp.N = m.at("N").get<int>();
  cfg.mp.beta = m.at("beta").get<double>();
  cfg.mp.h = m.value("h", 0.0);
  cfg.mp.k_J = m.value("k_J", 1.0);
  cfg.ds = disorder_from_json(j.at("disorder"), cfg.mp.N, cfg.mp.k_J);
  cfg.R = j.value("replicas", 100);
  cfg.master_seed = j.value("seed", std::uint64_t(0));
  if (j.contains("levels"))
    cfg.levels = std::make_pair(j["levels"].at("A").get<int>(),
                                j["levels"].at("B").get<int>());
  cfg.k_1 = j.value("k_1", 2.0);
  if (j.contains("a_N")) cfg.a_N_override = j["a_N"].get<double>();
  if (j.contains("t_grid"))
    cfg.t_grid_conc = j["t_grid"].get<std::vector<double>>();
  if (j.contains("ratio_t_grid"))
    cfg.t_grid_ratio = j["ratio_t_grid"].get<std::vector<double>>();
  if (j.contains("q_list")) cfg.q_list = j["q_list"].get<std::vector<double>>();
  cfg.slack = j.value("slack", 0.02);
  cfg.harm_shift_cN = j.value("c_N", 0.0);
  cfg.localization_threshold = j.value("localization_threshold", 0.05);
  cfg.threads = j.value("threads", 0);
  return cfg;
}

json experiment_config_to_json(const ms::ExperimentConfig& cfg) {
  json j;
  j["model"] = {{"N", cfg.mp.N},
                {"beta", cfg.mp.beta},
                {"h", cfg.mp.h},
                {"k_J", cfg.mp.k_J}};
  j["disorder"] = {{"kind", ms::to_string(cfg.ds.kind)},
                   {"p", cfg.ds.p},
                   {"v_min", cfg.ds.v_min},
                   {"v_max", cfg.ds.v_max},
                   {"n_patterns", cfg.ds.n_patterns},
                   {"xi_amp", cfg.ds.xi_amp}};
  j["replicas"] = cfg.R;
  j["seed"] = cfg.master_seed;
  if (cfg.levels)
    j["levels"] = {{"A", cfg.levels->first}, {"B", cfg.levels->second}};
  j["k_1"] = cfg.k_1;
  if (cfg.a_N_override) j["a_N"] = *cfg.a_N_override;
  j["a_N_resolved"] = cfg.a_N();
  j["t_grid"] = cfg.t_grid_conc;
  j["ratio_t_grid"] = cfg.t_grid_ratio;
  j["q_list"] = cfg.q_list;
  j["slack"] = cfg.slack;
  j["c_N"] = cfg.harm_shift_cN;
  j["localization_threshold"] = cfg.localization_threshold;
  j["threads"] = cfg.threads;
  return j;
}

ms::StateSet set_from_option(int N, int level, const std::string& states_csv) {
  if (!states_csv.empty()) {
    std::vector<ms::State> st;
    std::stringstream ss(states_csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
      st.push_back(ms::State(std::stoul(tok)));
    return ms::StateSet::from_states(N, std::move(st));
  }
  if (level < 0) throw ms::ConfigError("no set specification given");
  return ms::StateSet::from_levels(N, {level});
}

struct ExactInputs {
  ms::CouplingMatrix cm;
  ms::ModelParams mp;
};

int default_threads() {
  if (const char* env = std::getenv("METASTAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;  // 0 -> hardware concurrency
}

// ---------------------------------------------------------------- gen
int cmd_gen(const std::string& config_path, std::uint64_t seed,
            std::uint64_t replica, const std::string& out_path, double beta) {
  json j;
  {
    std::ifstream in(config_path);
    if (!in) throw ms::IoError("cannot open config: " + config_path);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ms::ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  const int N = j.at("model").at("N").get<int>();
  const double k_J = j.at("model").value("k_J", 1.0);
  ms::DisorderSpec ds = disorder_from_json(j.at("disorder"), N, k_J);
  ms::RandomSeed rs{seed, replica};
  ms::CouplingMatrix cm = ms::sample_couplings(ds, rs);
  ms::write_coupling_file(out_path, cm, ds, rs);
  double mean_sum = 0, var_sum = 0;
  for (std::size_t e = 0; e < cm.J.size(); ++e) {
    mean_sum += cm.mean[e];
    var_sum += cm.var[e];
  }
  std::printf("wrote %s (N=%d, %zu edges)\n", out_path.c_str(), N, cm.J.size());
  std::printf("alpha_N(beta=%g) = %.12g\n", beta, ms::alpha_N(cm, beta));
  std::printf("edge mean avg = %.12g, edge var avg = %.12g\n",
              mean_sum / double(cm.J.size()), var_sum / double(cm.J.size()));
  return kExitOk;
}

// ---------------------------------------------------------------- exact
int cmd_exact(const std::string& couplings, bool annealed_flag, int N_opt,
              double pbar, double beta, double h, double k_J, int A_level,
              int B_level, const std::string& A_states,
              const std::string& B_states, const std::string& out_path) {
  ExactInputs in;
  if (!couplings.empty()) {
    ms::CouplingFile f = ms::read_coupling_file(couplings);
    in.cm = annealed_flag ? ms::annealed_couplings(f.cm) : f.cm;
    in.mp = {f.cm.N, beta, h, f.cm.k_J};
  } else if (annealed_flag) {
    if (N_opt < 2) throw ms::ConfigError("exact --annealed requires --N");
    in.cm.N = N_opt;
    in.cm.k_J = k_J;
    const std::size_t E = ms::CouplingMatrix::edge_count(N_opt);
    in.cm.J.assign(E, pbar);
    in.cm.mean.assign(E, pbar);
    in.cm.var.assign(E, 0.0);
    in.mp = {N_opt, beta, h, k_J};
  } else {
    throw ms::ConfigError("exact: pass --couplings FILE or --annealed");
  }
  const ms::StateSet A = set_from_option(in.mp.N, A_level, A_states);
  const ms::StateSet B = set_from_option(in.mp.N, B_level, B_states);
  if (!A.disjoint(B)) throw ms::ConfigError("exact: sets overlap");

  ms::ExactChain chain(in.cm, in.mp);
  ms::PotentialSolution sol = ms::equilibrium_potential(chain, A, B);
  ms::MeanHitting mh = ms::mean_hitting_time(chain, A, B);
  std::vector<ms::State> both;
  both.insert(both.end(), A.members().begin(), A.members().end());
  both.insert(both.end(), B.members().begin(), B.members().end());
  ms::EigResult eig = ms::dirichlet_eigenvalue(
      chain, ms::StateSet::from_states(in.mp.N, both));
  ms::MetaSpec msp;
  const bool A_heavier = chain.mu_set(A) >= chain.mu_set(B);
  msp.sets = A_heavier ? std::vector<ms::StateSet>{A, B}
                       : std::vector<ms::StateSet>{B, A};
  ms::Certificate cert = ms::metastability_certificate(chain, msp);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw ms::IoError("cannot open for writing: " + out_path);
    os = &file;
  }
  os->precision(17);
  *os << "# exact potential-theory analysis\n";
  *os << "quantity,value\n";
  *os << "cap," << sol.cap << "\n";
  *os << "cap_via_escape," << sol.cap_via_escape << "\n";
  *os << "harm," << sol.harm << "\n";
  *os << "mu_A," << chain.mu_set(A) << "\n";
  *os << "mu_B," << chain.mu_set(B) << "\n";
  *os << "mean_hitting_identity," << mh.via_identity << "\n";
  *os << "mean_hitting_direct," << mh.via_direct << "\n";
  *os << "log_Zcap," << sol.log_Zcap << "\n";
  *os << "log_Zharm," << sol.log_Zharm << "\n";
  *os << "lambda0," << eig.lambda0 << "\n";
  *os << "cert_numerator," << cert.numerator << "\n";
  *os << "cert_ratio_upper," << cert.ratio_upper << "\n";
  *os << "cert_ratio_lower," << cert.ratio_lower << "\n";
  *os << "cert_singleton_min," << cert.singleton_min << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- lumped
int cmd_lumped(double beta, double h, double pbar, int N, bool want_hc,
               const std::string& out_prefix) {
  ms::FreeEnergySpec spec{beta, h, pbar};
  if (!out_prefix.empty()) {
    ms::write_free_energy_csv(out_prefix + "_free_energy.csv", spec, 400);
    ms::write_chain_csv(out_prefix + "_chain.csv",
                        ms::make_birth_death_chain(spec, N));
  }
  std::printf("N=%d beta=%.17g h=%.17g pbar=%.17g\n", N, beta, h, pbar);
  auto mins = ms::local_minima(spec);
  std::printf("free-energy minima:");
  for (double m : mins) std::printf(" %.9f", m);
  std::printf("\n");
  if (want_hc) {
    // Throws ConfigError (exit 2) in the single-phase regime.
    const double hc = ms::critical_field(beta, pbar);
    std::printf("h_c closed form = %.12f\n", hc);
    std::printf("h_c spinodal root = %.12f\n",
                ms::spinodal_field_root(beta, pbar));
  }
  if (mins.size() >= 2) {
    ms::MetastableLevels lv = ms::metastable_levels(spec, N);
    ms::BirthDeathChain ch = ms::make_birth_death_chain(spec, N);
    const double logcap = ms::lumped_log_capacity(ch, lv.k2, lv.k1);
    ms::LumpedHitting lh = ms::lumped_mean_hitting(ch, lv.k2, lv.k1);
    std::printf("metastable levels: m1=%.9f (k=%d, heavier), m2=%.9f (k=%d)\n",
                lv.m1, lv.k1, lv.m2, lv.k2);
    std::printf("log cap(M2,M1) = %.12f\n", logcap);
    std::printf("log E[tau] identity = %.12f, direct = %.12f\n",
                lh.log_via_identity, lh.log_via_direct);
  } else if (!want_hc) {
    throw ms::ConfigError(
        "lumped: single-phase regime, no metastable outputs available "
        "(pass --hc only above the critical point)");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- simulate
int cmd_simulate(const std::string& couplings, double beta, double h,
                 int A_level, int B_level, const std::string& A_states,
                 const std::string& B_states, int runs, std::uint64_t seed,
                 std::uint64_t budget) {
  ms::CouplingFile f = ms::read_coupling_file(couplings);
  ms::ModelParams mp{f.cm.N, beta, h, f.cm.k_J};
  const ms::StateSet A = set_from_option(mp.N, A_level, A_states);
  const ms::StateSet B = set_from_option(mp.N, B_level, B_states);
  if (!A.disjoint(B)) throw ms::ConfigError("simulate: sets overlap");
  ms::ExactChain chain(f.cm, mp);
  ms::PotentialSolution sol = ms::equilibrium_potential(chain, A, B);
  ms::MeanHitting mh = ms::mean_hitting_time(chain, A, B);

  // Start states drawn from the last-exit biased distribution nu.
  std::vector<ms::State> nu_states;
  std::vector<double> nu_cdf;
  double acc = 0.0;
  for (const auto& [s, p] : sol.nu) {
    nu_states.push_back(s);
    acc += p;
    nu_cdf.push_back(acc);
  }
  double sum = 0.0, sumsq = 0.0;
  std::uint64_t truncated = 0;
  for (int r = 0; r < runs; ++r) {
    ms::Rng rng = ms::stream_rng({seed, std::uint64_t(r)},
                                 ms::StreamKind::trajectory, 0);
    const double u = rng.uniform();
    std::size_t pick = 0;
    while (pick + 1 < nu_cdf.size() && u > nu_cdf[pick]) ++pick;
    ms::HittingSample hs =
        ms::first_hitting(f.cm, mp, nu_states[pick], B, rng, budget);
    if (hs.truncated) {
      ++truncated;
      continue;
    }
    sum += hs.elapsed_time;
    sumsq += hs.elapsed_time * hs.elapsed_time;
  }
  const double n = double(runs) - double(truncated);
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  std::printf("sampled mean hitting time = %.9g +- %.3g (n=%g, truncated "
              "%llu)\n",
              mean, se, n, static_cast<unsigned long long>(truncated));
  std::printf("exact mean hitting time   = %.9g (identity), %.9g (direct)\n",
              mh.via_identity, mh.via_direct);
  std::printf("deviation = %.3g stderr\n", (mean - mh.via_identity) / se);
  return kExitOk;
}

// ---------------------------------------------------------------- experiment
int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   int threads_flag) {
  ms::ExperimentConfig cfg = experiment_config_from_file(config_path);
  if (threads_flag > 0)
    cfg.threads = threads_flag;
  else if (cfg.threads == 0)
    cfg.threads = default_threads();
  std::filesystem::create_directories(out_dir);

  ms::ExperimentData data = ms::run_replicas(cfg);
  ms::TailReport cap_rep = ms::capacity_concentration_report(data);
  ms::TailReport harm_rep = ms::harmonic_concentration_report(data);
  ms::TailReport ratio_rep = ms::ratio_tail_report(data);
  ms::TailReport xi_rep = ms::xi_tail_report(data);
  ms::MomentReport mom_rep =
      ms::ratio_moment_report({data}, cfg.q_list);
  ms::MgfReport mgf = ms::mgf_report(cfg.ds, cfg.mp, cfg.master_seed, 100);
  ms::LocalizationReport loc = ms::localization_report(data);

  auto p = [&out_dir](const char* name) { return out_dir + "/" + name; };
  ms::write_replicas_csv(p("replicas.csv"), data);
  ms::write_tail_csv(p("capacity_concentration.csv"), cap_rep);
  ms::write_tail_csv(p("harmonic_concentration.csv"), harm_rep);
  ms::write_tail_csv(p("ratio_tail.csv"), ratio_rep);
  ms::write_tail_csv(p("xi_tail.csv"), xi_rep);
  ms::write_moment_csv(p("ratio_moments.csv"), mom_rep);
  {
    std::ofstream out(p("localization.csv"));
    if (!out) throw ms::IoError("cannot write localization.csv");
    out << "# |harm/mu[S]-1| per Xi-replica; threshold "
        << loc.threshold << "; excluded " << loc.excluded << "\n";
    out << "replica,deviation\n";
    out.precision(17);
    for (std::size_t i = 0; i < loc.deviations.size(); ++i)
      out << i << "," << loc.deviations[i] << "\n";
  }

  json manifest;
  manifest["tool_version"] = ms::kVersion;
  manifest["config"] = experiment_config_to_json(cfg);
  manifest["timestamp"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  manifest["replica_failures"] = data.failures;
  json outputs = json::array();
  for (const char* name :
       {"replicas.csv", "capacity_concentration.csv",
        "harmonic_concentration.csv", "ratio_tail.csv", "xi_tail.csv",
        "ratio_moments.csv", "localization.csv"}) {
    char digest[32];
    std::snprintf(digest, sizeof digest, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(p(name))));
    outputs.push_back({{"file", name}, {"digest", digest}});
  }
  manifest["outputs"] = outputs;
  {
    std::ofstream out(p("manifest.json"));
    if (!out) throw ms::IoError("cannot write manifest.json");
    out << manifest.dump(2) << "\n";
  }

  struct Check {
    const char* name;
    bool pass;
  } checks[] = {
      {"capacity_concentration", cap_rep.pass},
      {"harmonic_concentration", harm_rep.pass},
      {"ratio_tail", ratio_rep.pass},
      {"xi_tail", xi_rep.pass},
      {"ratio_moments", mom_rep.pass},
      {"mgf", mgf.pass},
  };
  bool all = true;
  for (const auto& c : checks) {
    std::printf("%-24s %s\n", c.name, c.pass ? "pass" : "FAIL");
    all = all && c.pass;
  }
  std::printf("localization max dev = %.6g (threshold %.3g, informational "
              "here)\n",
              loc.max_dev, loc.threshold);
  if (!all) {
    std::fprintf(stderr, "experiment: acceptance comparison failed\n");
    return kExitAcceptance;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- check
int cmd_check() {
  // Fast internal invariant suite (exact identities at small N).
  int failures = 0;
  auto expect = [&failures](bool ok, const char* what) {
    std::printf("%-40s %s\n", what, ok ? "ok" : "FAIL");
    if (!ok) ++failures;
  };
  ms::DisorderSpec ds;
  ds.kind = ms::DisorderKind::erdos_renyi;
  ds.N = 8;
  ds.p = 0.5;
  ds.k_J = 1.0;
  ms::CouplingMatrix cm = ms::sample_couplings(ds, {4242, 0});
  ms::ModelParams mp{8, 1.3, 0.07, 1.0};

  double max_flip_err = 0.0;
  for (ms::State s = 0; s < 256; s += 7)
    for (int k = 0; k < 8; ++k) {
      const double lhs = ms::hamiltonian(cm, mp, s ^ (ms::State(1) << k));
      const double rhs =
          ms::hamiltonian(cm, mp, s) + ms::flip_delta(cm, mp, s, k);
      max_flip_err = std::max(max_flip_err, std::abs(lhs - rhs));
    }
  expect(max_flip_err < 1e-12, "spin-flip consistency");

  auto gd = ms::gibbs_distribution(ms::hamiltonian_table(cm, mp), mp.beta);
  double gsum = 0.0;
  for (double g : gd) gsum += g;
  expect(std::abs(gsum - 1.0) < 1e-12, "Gibbs normalization");

  ms::ExactChain chain(cm, mp);
  ms::StateSet A = ms::StateSet::from_levels(8, {0});
  ms::StateSet B = ms::StateSet::from_levels(8, {8});
  ms::MeanHitting mh = ms::mean_hitting_time(chain, A, B);
  expect(std::abs(mh.via_identity / mh.via_direct - 1.0) < 1e-9,
         "mean-hitting identity (2 routes)");

  ms::PotentialSolution sol = ms::equilibrium_potential(chain, A, B);
  expect(std::abs(sol.cap / sol.cap_via_escape - 1.0) < 1e-9,
         "capacity: Dirichlet vs escape route");

  ms::FreeEnergySpec fes{2.0, 0.0, 1.0};
  auto mins = ms::local_minima(fes);
  expect(mins.size() == 2 && std::abs(mins[1] - 0.9575040) < 1e-6,
         "mean-field minima at beta=2");
  expect(std::abs(ms::critical_field(2.0, 1.0) -
                  ms::spinodal_field_root(2.0, 1.0)) < 1e-8,
         "h_c closed form vs spinodal root");
  return failures == 0 ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metastab: quenched/annealed Ising metastability toolkit"};
  app.set_version_flag("--version", std::string(ms::kVersion));
  app.require_subcommand(1);

  std::string config_path, couplings, out_path, out_prefix = "lumped";
  std::string A_states, B_states, out_dir = "reports";
  std::uint64_t seed = 0, replica = 0, budget = ms::kDefaultJumpBudget;
  double beta = 1.0, h = 0.0, pbar = 1.0, k_J = 1.0;
  int N = 0, A_level = -1, B_level = -1, runs = 1000, threads = 0;
  bool annealed_flag = false, want_hc = false;

  auto* gen = app.add_subcommand("gen", "sample couplings to a file");
  gen->add_option("--config", config_path)->required();
  gen->add_option("--seed", seed);
  gen->add_option("--replica", replica);
  gen->add_option("--out", out_path)->required();
  gen->add_option("--beta", beta);

  auto* exact = app.add_subcommand("exact", "exact potential-theory analysis");
  exact->add_option("--couplings", couplings);
  exact->add_flag("--annealed", annealed_flag);
  exact->add_option("--N", N);
  exact->add_option("--pbar", pbar);
  exact->add_option("--beta", beta);
  exact->add_option("--field", h);
  exact->add_option("--kJ", k_J);
  exact->add_option("--A-level", A_level);
  exact->add_option("--B-level", B_level);
  exact->add_option("--A-states", A_states);
  exact->add_option("--B-states", B_states);
  exact->add_option("--out", out_path);

  auto* lumped = app.add_subcommand("lumped", "lumped annealed chain");
  lumped->add_option("--beta", beta)->required();
  lumped->add_option("--field", h);
  lumped->add_option("--pbar", pbar);
  lumped->add_option("--N", N)->required();
  lumped->add_flag("--hc", want_hc);
  lumped->add_option("--out-prefix", out_prefix);

  auto* simulate = app.add_subcommand("simulate", "hitting-time sampling");
  simulate->add_option("--couplings", couplings)->required();
  simulate->add_option("--beta", beta)->required();
  simulate->add_option("--field", h);
  simulate->add_option("--A-level", A_level);
  simulate->add_option("--B-level", B_level);
  simulate->add_option("--A-states", A_states);
  simulate->add_option("--B-states", B_states);
  simulate->add_option("--runs", runs);
  simulate->add_option("--seed", seed);
  simulate->add_option("--budget", budget);

  auto* experiment = app.add_subcommand("experiment", "disorder Monte Carlo");
  experiment->add_option("--config", config_path)->required();
  experiment->add_option("--out", out_dir);
  experiment->add_option("--threads", threads);

  auto* check = app.add_subcommand("check", "run the invariant suite");
  (void)check;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen(config_path, seed, replica, out_path, beta);
    if (exact->parsed())
      return cmd_exact(couplings, annealed_flag, N, pbar, beta, h, k_J,
                       A_level, B_level, A_states, B_states, out_path);
    if (lumped->parsed()) return cmd_lumped(beta, h, pbar, N, want_hc, out_prefix);
    if (simulate->parsed())
      return cmd_simulate(couplings, beta, h, A_level, B_level, A_states,
                          B_states, runs, seed, budget);
    if (experiment->parsed()) return cmd_experiment(config_path, out_dir, threads);
    if (check->parsed()) return cmd_check();
  } catch (const ms::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ms::CapabilityError& e) {
    std::fprintf(stderr, "capability error: %s\n", e.what());
    return kExitCapability;
  } catch (const ms::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitOk;
}
