#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metastab/annealed.hpp"
#include "metastab/disorder.hpp"
#include "metastab/model.hpp"
#include "metastab/potential.hpp"

namespace metastab {

struct ExperimentConfig {
  ModelParams mp;
  DisorderSpec ds;
  int R = 100;                  // replica count, >= 2
  std::uint64_t master_seed = 0;
  // Metastable sets: either explicit levels (up-spin counts) or automatic
  // from the annealed free-energy minima (requires a metastable annealed
  // model).
  std::optional<std::pair<int, int>> levels;  // (A level, B level)
  double k_1 = 2.0;             // rate constant in the default a_N rule
  std::optional<double> a_N_override;
  std::vector<double> t_grid_conc = {0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> t_grid_ratio = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  std::vector<double> q_list = {1.0, 2.0};
  double slack = 0.02;          // documented slack for asymptotic claims
  double harm_shift_cN = 0.0;   // c_N shift in the harmonic envelope
  double localization_threshold = 0.05;
  int threads = 0;              // 0 -> hardware concurrency

  void validate() const;
  double a_N() const;  // override or sqrt(2 k_J (k_1 + log 2) N)
};

struct ReplicaResult {
  int index = -1;
  bool ok = false;
  std::string error;
  double log_Zcap = 0.0;   // log(Z cap(A,B))
  double log_Zharm = 0.0;  // log(Z ||h||_mu)
  double logE = 0.0;       // log E_nu[tau_B] = log_Zharm - log_Zcap
  double alpha = 0.0;      // alpha_N
  double max_dev = 0.0;    // max_sigma |Delta|
  bool xi_ok = false;      // max_dev < a_N
  double log_Zmu_A = 0.0;  // log(Z mu[A])
  double log_Zmu_S = 0.0;  // log(Z mu[S]) for the valley S of A
  // Annealed counterparts for the same replica (the conditional means differ
  // per replica for the inhomogeneous and Hopfield families).
  double log_Zcap_a = 0.0, log_Zharm_a = 0.0, logE_a = 0.0;
};

struct AnnealedReference {
  double log_Zcap = 0.0, log_Zharm = 0.0, logE = 0.0;
  double log_Zmu_A = 0.0, log_Zmu_S = 0.0;
};

struct ExperimentData {
  ExperimentConfig config;
  double a_N = 0.0;
  StateSet A, B, S_valley;  // S_valley: annealed valley of A
  AnnealedReference ref;
  std::vector<ReplicaResult> results;
  int failures = 0;
};

// R replicas, each a pure function of (config, replica index); identical
// results for any thread count.
ExperimentData run_replicas(const ExperimentConfig& config);

struct TailRow {
  double t = 0.0;
  double empirical = 0.0;
  double stderr_ = 0.0;
  double bound = 0.0;
  bool vacuous = false;  // envelope carries no information at this t
  bool pass = false;
};
struct TailReport {
  std::string name;
  std::vector<TailRow> rows;
  bool pass = true;          // over non-vacuous rows
  int vacuous_count = 0;
  std::string note;
};

// Two-sided tail of mean-centered log(Z cap) vs 2 e^{-t^2/(beta k_J)^2}.
TailReport capacity_concentration_report(const ExperimentData& data);
// Same for log(Z ||h||), envelope 2 e^{-((t-c_N)/(beta k_J))^2} + e^{-k_1 N}.
TailReport harmonic_concentration_report(const ExperimentData& data);
// Frequency of e^{-t-alpha} <= ratio <= e^{t+2 alpha} vs
// 1 - 4 e^{-t^2/(2 beta k_J)^2}; vacuous when the confidence is <= 0.
TailReport ratio_tail_report(const ExperimentData& data);
// Empirical frequency of Xi(a_N)^c vs min(1, e^{-b_N}).
TailReport xi_tail_report(const ExperimentData& data);

struct MomentRow {
  int N = 0;
  double q = 0.0;
  double norm = 0.0;        // (mean ratio^q)^{1/q}
  double lower = 0.0, upper = 0.0;  // bounds at the fitted c
  bool pass = false;
};
struct MomentReport {
  std::vector<MomentRow> rows;
  double fitted_c = 0.0;  // smallest c making all bounds hold
  bool pass = true;       // a finite c <= c_max exists
  double c_max = 100.0;
};
MomentReport ratio_moment_report(const std::vector<ExperimentData>& sweep,
                                 const std::vector<double>& q_list,
                                 double c_max = 100.0);

struct MgfReport {
  double max_err = 0.0;   // max over sigma, sign of |log mgf - alpha_N|
  double bound = 0.0;     // (beta k_J)^3 / (2N)
  bool pass = false;
  int sigmas = 0;
};
MgfReport mgf_report(const DisorderSpec& ds, const ModelParams& mp,
                     std::uint64_t seed, int n_sigmas);

// Generic bounded-difference harness: draw(replica_index) returns the value
// of the functional on an independent input sample; tail of the mean-centered
// value vs e^{-t^2/(2v)}, v = (1/4) sum c_i^2.
TailReport mcdiarmid_harness(const std::function<double(std::uint64_t)>& draw,
                             double v, int R,
                             const std::vector<double>& t_grid);

struct LocalizationReport {
  std::vector<double> deviations;  // per Xi-replica |harm/mu[S] - 1|
  double max_dev = 0.0;
  int excluded = 0;                // replicas off Xi (or failed)
  double threshold = 0.05;
  bool pass = false;
  double annealed_dev = 0.0;       // same quantity for the annealed chain
};
LocalizationReport localization_report(const ExperimentData& data);

void write_tail_csv(const std::string& path, const TailReport& r);
void write_moment_csv(const std::string& path, const MomentReport& r);
void write_replicas_csv(const std::string& path, const ExperimentData& d);

}  // namespace metastab
