#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "metastab/disorder.hpp"
#include "metastab/rng.hpp"
#include "metastab/state_set.hpp"
#include "metastab/types.hpp"

namespace metastab {

// Metropolis rate e^{-beta [dH]_+}.
inline double metropolis_rate(double dH, double beta) {
  return dH > 0 ? std::exp(-beta * dH) : 1.0;
}

inline constexpr std::uint64_t kDefaultJumpBudget = 1'000'000'000ull;

// Event-driven (Gillespie) continuous-time Glauber-Metropolis chain.  Exact
// sampling of the generator: holding time ~ Exp(R(sigma)), site k with
// probability r_k/R.  Local fields g_k = (1/N) sum_j J_kj s_j + h are cached
// and updated in O(N) per flip, so flip_delta(k) = 2 s_k g_k is O(1).
class GlauberChain {
 public:
  GlauberChain(const CouplingMatrix& cm, const ModelParams& p, State initial);

  int dim() const { return p_.N; }
  State state() const;  // requires N <= 32
  int up_spins() const { return ups_; }
  double total_rate() const;
  double rate(int k) const;       // r_k = e^{-beta [2 s_k g_k]_+}
  double flip_delta(int k) const; // 2 s_k g_k

  // One jump; returns (flipped site, holding time drawn before the jump).
  struct Jump {
    int site;
    double holding_time;
  };
  Jump step(Rng& rng);

  void set_state(State s);

 private:
  void rebuild_fields();

  const CouplingMatrix& cm_;
  ModelParams p_;
  std::vector<signed char> spins_;
  std::vector<double> g_;  // local fields including h
  int ups_ = 0;
};

struct HittingSample {
  double elapsed_time = 0.0;
  std::uint64_t jump_count = 0;
  bool truncated = false;   // jump budget exhausted before the hit
};

// Simulate until first entry into `target`; start must lie outside target.
HittingSample first_hitting(const CouplingMatrix& cm, const ModelParams& p,
                            State start, const StateSet& target, Rng& rng,
                            std::uint64_t budget = kDefaultJumpBudget);

struct ReturnSample {
  bool hit_B_first = false;  // B reached before re-entry into A
  HittingSample sample;
};

// tau semantics inf{t>0 : X(t) in S, X(t-) not in S}: jumps inside A do not
// count as returns; the trajectory must leave A and come back.
ReturnSample first_return(const CouplingMatrix& cm, const ModelParams& p,
                          State start, const StateSet& A, const StateSet& B,
                          Rng& rng, std::uint64_t budget = kDefaultJumpBudget);

}  // namespace metastab
