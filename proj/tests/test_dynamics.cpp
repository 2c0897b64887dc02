#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "metastab/dynamics.hpp"
#include "metastab/model.hpp"
#include "metastab/potential.hpp"

using namespace metastab;

namespace {

CouplingMatrix random_er(int N, double p, std::uint64_t seed) {
  DisorderSpec s;
  s.kind = DisorderKind::erdos_renyi;
  s.N = N;
  s.p = p;
  return sample_couplings(s, {seed, 0});
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("cached rates equal the Metropolis rule on fresh energies") {
  auto cm = random_er(10, 0.5, 10);
  ModelParams p{10, 1.4, 0.1, 1.0};
  GlauberChain chain(cm, p, State(0b1100110011));
  for (int k = 0; k < p.N; ++k) {
    const double dH = flip_delta(cm, p, chain.state(), k);
    CHECK(chain.flip_delta(k) == doctest::Approx(dH).epsilon(1e-12));
    CHECK(chain.rate(k) ==
          doctest::Approx(metropolis_rate(dH, p.beta)).epsilon(1e-12));
  }
}

TEST_CASE("fields stay consistent over a long trajectory") {
  auto cm = random_er(8, 0.4, 21);
  ModelParams p{8, 1.2, -0.05, 1.0};
  GlauberChain chain(cm, p, State(0));
  Rng rng(5);
  for (int step = 0; step < 2000; ++step) chain.step(rng);
  for (int k = 0; k < p.N; ++k)
    CHECK(chain.flip_delta(k) ==
          doctest::Approx(flip_delta(cm, p, chain.state(), k)).epsilon(1e-10));
}

TEST_CASE("holding times are Exp(R) and site choice is rate-proportional") {
  // Freeze the state by resetting it after every jump, so all draws come
  // from one fixed generator row.
  auto cm = random_er(6, 0.5, 33);
  ModelParams p{6, 1.5, 0.2, 1.0};
  const State s0 = State(0b010101);
  GlauberChain chain(cm, p, s0);
  const double R = chain.total_rate();
  std::vector<double> rates(p.N);
  for (int k = 0; k < p.N; ++k) rates[k] = chain.rate(k);

  Rng rng(17);
  const int n = 200000;
  double time_sum = 0.0;
  std::vector<int> counts(p.N, 0);
  for (int i = 0; i < n; ++i) {
    auto j = chain.step(rng);
    time_sum += j.holding_time;
    ++counts[j.site];
    chain.set_state(s0);
  }
  // Mean holding time = 1/R, sd = 1/R -> 5 sigma band.
  CHECK(std::abs(time_sum / n - 1.0 / R) < 5.0 / (R * std::sqrt(double(n))));
  for (int k = 0; k < p.N; ++k) {
    const double q = rates[k] / R;
    const double sd = std::sqrt(q * (1 - q) / n);
    CHECK(std::abs(double(counts[k]) / n - q) < 5 * sd + 1e-12);
  }
}

TEST_CASE("long-run occupation matches the Gibbs measure (N = 5)") {
  auto cm = random_er(5, 0.6, 8);
  ModelParams p{5, 1.0, 0.1, 1.0};
  auto H = hamiltonian_table(cm, p);
  auto gibbs = gibbs_distribution(H, p.beta);

  GlauberChain chain(cm, p, State(0));
  Rng rng(101);
  // Time-weighted occupation over a long trajectory (burn-in discarded).
  for (int i = 0; i < 5000; ++i) chain.step(rng);
  std::vector<double> occ(1u << 5, 0.0);
  double total = 0.0;
  for (int i = 0; i < 400000; ++i) {
    const State s = chain.state();
    auto j = chain.step(rng);
    occ[s] += j.holding_time;
    total += j.holding_time;
  }
  for (State s = 0; s < occ.size(); ++s) {
    // Correlated samples: generous 0.01 absolute tolerance per state.
    CHECK(std::abs(occ[s] / total - gibbs[s]) < 0.01);
  }
}

TEST_CASE("escape probability from a singleton matches e(sigma)/R(sigma)") {
  // For A = {sigma}, P_sigma[tau_B < tau_A] = (-L h)(sigma) / R(sigma):
  // compare the simulated first-return outcome frequency against the exact
  // escape rate from the potential solver.
  auto cm = random_er(8, 0.5, 55);
  ModelParams p{8, 1.4, 0.1, 1.0};
  const State a = 0;           // all spins down
  const State b = (1u << 8) - 1;
  auto A = StateSet::singleton(8, a);
  auto B = StateSet::singleton(8, b);
  ExactChain ch(cm, p);
  auto sol = equilibrium_potential(ch, A, B);
  // e(sigma) = sum_k p(sigma, sigma^k)(h(sigma) - h(sigma^k)), h(a) = 1.
  double esc = 0.0;
  for (int k = 0; k < 8; ++k)
    esc += ch.rate(a, k) * (1.0 - sol.h[a ^ (State(1) << k)]);
  const double exact = esc / ch.total_rate(a);

  Rng rng(7);
  const int n = 20000;
  int hits = 0;
  for (int i = 0; i < n; ++i)
    hits += first_return(cm, p, a, A, B, rng).hit_B_first;
  const double freq = double(hits) / n;
  const double sd = std::sqrt(exact * (1 - exact) / n);
  CHECK(std::abs(freq - exact) < 4 * sd);
}

TEST_CASE("mean hitting time from a fixed start matches the exact solve") {
  auto cm = random_er(8, 0.5, 91);
  ModelParams p{8, 1.2, 0.05, 1.0};
  const State start = 0;
  auto B = StateSet::from_levels(8, {8});
  auto A = StateSet::singleton(8, start);
  ExactChain ch(cm, p);
  // Exact E_start[tau_B] from the potential module's direct route with a
  // deterministic starting state.
  auto mh = mean_hitting_time(ch, A, B);
  Rng rng(23);
  const int n = 4000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    auto s = first_hitting(cm, p, start, B, rng);
    REQUIRE_FALSE(s.truncated);
    sum += s.elapsed_time;
    sumsq += s.elapsed_time * s.elapsed_time;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(mean - mh.via_direct) < 4 * sd);
}

TEST_CASE("first_return ignores jumps inside A") {
  // A contains two adjacent states; moving within A is not a return.
  auto cm = random_er(6, 1.0, 1);  // p = 1: deterministic couplings
  ModelParams p{6, 0.5, 0.0, 1.0};
  auto A = StateSet::from_states(6, {State(0), State(1)});
  auto B = StateSet::from_levels(6, {6});
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    auto r = first_return(cm, p, State(0), A, B, rng);
    REQUIRE_FALSE(r.sample.truncated);
    CHECK(r.sample.jump_count >= 2);  // must leave A and come back or hit B
  }
}

TEST_CASE("trajectories are reproducible and budget-truncated") {
  auto cm = random_er(10, 0.5, 77);
  ModelParams p{10, 2.5, 0.0, 1.0};
  auto B = StateSet::from_levels(10, {10});
  Rng r1(9), r2(9);
  auto s1 = first_hitting(cm, p, State(0), B, r1);
  auto s2 = first_hitting(cm, p, State(0), B, r2);
  CHECK(s1.elapsed_time == s2.elapsed_time);
  CHECK(s1.jump_count == s2.jump_count);
  Rng r3(9);
  auto t = first_hitting(cm, p, State(0), B, r3, 5);
  CHECK(t.truncated);
  CHECK(t.jump_count == 5);
}

TEST_CASE("starting inside the target is rejected") {
  auto cm = random_er(6, 0.5, 2);
  ModelParams p{6, 1.0, 0.0, 1.0};
  auto B = StateSet::from_levels(6, {0});
  Rng rng(1);
  CHECK_THROWS_AS(first_hitting(cm, p, State(0), B, rng), ConfigError);
}

}  // TEST_SUITE
