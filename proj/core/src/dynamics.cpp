#include "metastab/dynamics.hpp"

#include <cmath>

namespace metastab {

GlauberChain::GlauberChain(const CouplingMatrix& cm, const ModelParams& p,
                           State initial)
    : cm_(cm), p_(p) {
  validate_params(p);
  if (cm.N != p.N) throw ConfigError("GlauberChain: dimension mismatch");
  if (p.N > 32) throw CapabilityError("GlauberChain: N > 32 state packing");
  spins_.resize(p.N);
  set_state(initial);
}

void GlauberChain::set_state(State s) {
  ups_ = 0;
  for (int i = 0; i < p_.N; ++i) {
    spins_[i] = static_cast<signed char>(spin_at(s, i));
    if (spins_[i] > 0) ++ups_;
  }
  rebuild_fields();
}

void GlauberChain::rebuild_fields() {
  g_.assign(p_.N, p_.h);
  for (int k = 0; k < p_.N; ++k)
    for (int j = 0; j < p_.N; ++j)
      if (j != k) g_[k] += cm_.coupling(k, j) * spins_[j] / double(p_.N);
}

State GlauberChain::state() const {
  State s = 0;
  for (int i = 0; i < p_.N; ++i)
    if (spins_[i] > 0) s |= State(1) << i;
  return s;
}

double GlauberChain::flip_delta(int k) const { return 2.0 * spins_[k] * g_[k]; }

double GlauberChain::rate(int k) const {
  return metropolis_rate(flip_delta(k), p_.beta);
}

double GlauberChain::total_rate() const {
  double R = 0.0;
  for (int k = 0; k < p_.N; ++k) R += rate(k);
  return R;
}

GlauberChain::Jump GlauberChain::step(Rng& rng) {
  // Gillespie: exponential holding time at the total rate, then the flipped
  // site in proportion to its rate (linear scan; couplings are dense so the
  // O(N) field update below dominates anyway).
  double R = 0.0;
  // Rates are recomputed once into a small stack buffer to avoid double
  // evaluation in the selection scan.
  double r[32];
  for (int k = 0; k < p_.N; ++k) {
    r[k] = rate(k);
    R += r[k];
  }
  const double hold = rng.exponential(R);
  double u = rng.uniform() * R;
  int site = p_.N - 1;
  for (int k = 0; k < p_.N; ++k) {
    if (u < r[k]) {
      site = k;
      break;
    }
    u -= r[k];
  }
  // Flip and refresh all local fields in O(N).
  const double old_spin = spins_[site];
  spins_[site] = static_cast<signed char>(-spins_[site]);
  ups_ += spins_[site] > 0 ? 1 : -1;
  for (int j = 0; j < p_.N; ++j)
    if (j != site)
      g_[j] += cm_.coupling(j, site) * (-2.0 * old_spin) / double(p_.N);
  return {site, hold};
}

namespace {
inline bool member(const StateSet& set, const GlauberChain& ch) {
  if (set.level_defined() && ch.dim() > kDefaultEnumLimit)
    return set.contains_level(ch.up_spins());
  return set.contains(ch.state());
}
}  // namespace

HittingSample first_hitting(const CouplingMatrix& cm, const ModelParams& p,
                            State start, const StateSet& target, Rng& rng,
                            std::uint64_t budget) {
  if (target.empty()) throw ConfigError("first_hitting: empty target");
  if (target.contains(start))
    throw ConfigError("first_hitting: start lies in the target set");
  GlauberChain ch(cm, p, start);
  HittingSample out;
  while (out.jump_count < budget) {
    auto j = ch.step(rng);
    out.elapsed_time += j.holding_time;
    ++out.jump_count;
    if (member(target, ch)) return out;
  }
  out.truncated = true;
  return out;
}

ReturnSample first_return(const CouplingMatrix& cm, const ModelParams& p,
                          State start, const StateSet& A, const StateSet& B,
                          Rng& rng, std::uint64_t budget) {
  if (A.empty() || B.empty()) throw ConfigError("first_return: empty set");
  if (!A.disjoint(B)) throw ConfigError("first_return: A and B overlap");
  if (!A.contains(start)) throw ConfigError("first_return: start not in A");
  GlauberChain ch(cm, p, start);
  ReturnSample out;
  bool inside_A = true;
  while (out.sample.jump_count < budget) {
    auto j = ch.step(rng);
    out.sample.elapsed_time += j.holding_time;
    ++out.sample.jump_count;
    const bool in_A = member(A, ch);
    if (member(B, ch)) {
      out.hit_B_first = true;  // B entered before an outside->A re-entry
      return out;
    }
    if (in_A && !inside_A) {
      out.hit_B_first = false;  // genuine return: X(t-) outside A, X(t) in A
      return out;
    }
    inside_A = in_A;
  }
  out.sample.truncated = true;
  return out;
}

}  // namespace metastab
