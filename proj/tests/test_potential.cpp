#include <cmath>
#include <vector>

#include "doctest.h"
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

CouplingMatrix constant_couplings(int N, double J) {
  CouplingMatrix cm;
  cm.N = N;
  cm.k_J = 1.0;
  const std::size_t E = CouplingMatrix::edge_count(N);
  cm.J.assign(E, J);
  cm.mean.assign(E, J);
  cm.var.assign(E, 0.0);
  return cm;
}

}  // namespace

TEST_SUITE("potential") {

TEST_CASE("single-spin capacity in closed form") {
  // N = 1, h = 1, beta = 1: A = {-}, B = {+}; the chain jumps - -> + at rate
  // 1 (downhill) and mu(-) = e^{-1}/(e + e^{-1}), so
  // cap = mu(-) * P_-[tau_+ < tau_-] = mu(-) = 0.11920292202211755.
  auto cm = constant_couplings(1, 0.0);
  ModelParams p{1, 1.0, 1.0, 1.0};
  ExactChain ch(cm, p);
  auto A = StateSet::singleton(1, 0), B = StateSet::singleton(1, 1);
  auto sol = equilibrium_potential(ch, A, B);
  CHECK(sol.cap == doctest::Approx(0.11920292202211755).epsilon(1e-14));
  CHECK(sol.cap_via_escape == doctest::Approx(sol.cap).epsilon(1e-13));
  CHECK(sol.harm == doctest::Approx(ch.mu(0)).epsilon(1e-14));
}

TEST_CASE("equilibrium potential is harmonic with the right boundary data") {
  auto cm = random_er(8, 0.5, 12);
  ModelParams p{8, 1.4, 0.1, 1.0};
  ExactChain ch(cm, p);
  auto A = StateSet::from_levels(8, {0});
  auto B = StateSet::from_levels(8, {8});
  auto sol = equilibrium_potential(ch, A, B);
  CHECK(sol.h[0] == 1.0);
  CHECK(sol.h[255] == 0.0);
  CHECK(sol.residual < 1e-10);
  for (double v : sol.h) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("capacity is symmetric and both routes agree") {
  auto cm = random_er(9, 0.5, 40);
  ModelParams p{9, 1.5, 0.05, 1.0};
  ExactChain ch(cm, p);
  auto A = StateSet::from_levels(9, {0, 1});
  auto B = StateSet::from_levels(9, {8, 9});
  auto ab = equilibrium_potential(ch, A, B);
  auto ba = equilibrium_potential(ch, B, A);
  CHECK(ab.cap == doctest::Approx(ba.cap).epsilon(1e-11));
  CHECK(ab.cap == doctest::Approx(ab.cap_via_escape).epsilon(1e-11));
  // Complementary potentials: h_{A,B} + h_{B,A} = 1 everywhere.
  for (std::size_t s = 0; s < ab.h.size(); ++s)
    CHECK(ab.h[s] + ba.h[s] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("capacity grows with the target set") {
  auto cm = random_er(8, 0.5, 3);
  ModelParams p{8, 1.5, 0.0, 1.0};
  ExactChain ch(cm, p);
  auto A = StateSet::from_levels(8, {0});
  auto B1 = StateSet::from_levels(8, {8});
  auto B2 = StateSet::from_levels(8, {7, 8});
  CHECK(capacity(ch, A, B1) <= capacity(ch, A, B2) + 1e-15);
}

TEST_CASE("mean hitting identity: two independent routes") {
  auto cm = random_er(10, 0.5, 7);
  ModelParams p{10, 1.4, 0.1, 1.0};
  ExactChain ch(cm, p);
  auto A = StateSet::singleton(10, 0);
  auto B = StateSet::singleton(10, (1u << 10) - 1);
  auto mh = mean_hitting_time(ch, A, B);
  CHECK(mh.via_identity ==
        doctest::Approx(mh.via_direct).epsilon(1e-10));
}

TEST_CASE("last-exit distribution is a probability measure on A") {
  auto cm = random_er(8, 0.5, 19);
  ModelParams p{8, 1.3, 0.05, 1.0};
  ExactChain ch(cm, p);
  auto A = StateSet::from_levels(8, {0, 1});
  auto B = StateSet::from_levels(8, {8});
  auto nu = last_exit_distribution(ch, A, B);
  double total = 0.0;
  for (const auto& [s, v] : nu) {
    CHECK(A.contains(s));
    CHECK(v >= -1e-15);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("Dirichlet principle: E(f) >= cap with equality at h_{A,B}") {
  auto cm = random_er(8, 0.5, 14);
  ModelParams p{8, 1.4, 0.1, 1.0};
  ExactChain ch(cm, p);
  auto A = StateSet::from_levels(8, {0});
  auto B = StateSet::from_levels(8, {8});
  auto sol = equilibrium_potential(ch, A, B);
  CHECK(dirichlet_energy(ch, sol.h, A, B) ==
        doctest::Approx(sol.cap).epsilon(1e-10));
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = sol.h;
    for (State s = 0; s < State(f.size()); ++s)
      if (!A.contains(s) && !B.contains(s))
        f[s] = std::min(1.0, std::max(0.0, f[s] + 0.3 * (rng.uniform() - 0.5)));
    CHECK(dirichlet_energy(ch, f, A, B) >= sol.cap - 1e-12);
  }
  // Boundary violations are rejected.
  auto bad = sol.h;
  bad[0] = 0.5;
  CHECK_THROWS_AS(dirichlet_energy(ch, bad, A, B), ConfigError);
}

TEST_CASE("Thomson principle: 1/D(phi) <= cap with equality at the harmonic flow") {
  auto cm = random_er(8, 0.5, 14);
  ModelParams p{8, 1.4, 0.1, 1.0};
  ExactChain ch(cm, p);
  auto A = StateSet::from_levels(8, {0});
  auto B = StateSet::from_levels(8, {8});
  auto sol = equilibrium_potential(ch, A, B);
  auto hf = harmonic_flow(ch, sol, A, B);
  hf.check_unit_flow(ch, A, B);
  CHECK(1.0 / thomson_energy(ch, hf) == doctest::Approx(sol.cap).epsilon(1e-9));

  // Random monotone bit-fill paths from the all-minus to the all-plus state
  // are unit flows from A to B.
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Flow phi;
    std::vector<int> order = {0, 1, 2, 3, 4, 5, 6, 7};
    for (int i = 7; i > 0; --i)
      std::swap(order[i], order[rng.below(std::uint64_t(i) + 1)]);
    State s = 0;
    for (int k : order) {
      phi.add(s, k, 1.0);
      s ^= State(1) << k;
    }
    phi.check_unit_flow(ch, A, B);
    CHECK(1.0 / thomson_energy(ch, phi) <= sol.cap + 1e-12);
  }
}

TEST_CASE("detailed balance of the conductances is exact") {
  auto cm = random_er(9, 0.5, 26);
  ModelParams p{9, 1.5, 0.1, 1.0};
  ExactChain ch(cm, p);
  for (State s = 0; s < (State(1) << 9); ++s)
    for (int k = 0; k < 9; ++k) {
      const State t = s ^ (State(1) << k);
      // c(s, s^k) = w(s) p(s, s^k) must be exactly symmetric, and equal to
      // e^{-beta (max(H,H') - Hmin)} by construction.
      CHECK(ch.conductance(s, k) == ch.conductance(t, k));
      CHECK(ch.weight(s) * ch.rate(s, k) ==
            doctest::Approx(ch.conductance(s, k)).epsilon(4e-16));
    }
}

TEST_CASE("dirichlet eigenvalue solves the absorbing problem") {
  auto cm = random_er(8, 0.5, 44);
  ModelParams p{8, 1.5, 0.05, 1.0};
  ExactChain ch(cm, p);
  auto M = StateSet::from_levels(8, {0, 8});
  auto eig = dirichlet_eigenvalue(ch, M);
  CHECK(eig.converged);
  CHECK(eig.residual <= 1e-8);
  CHECK(eig.lambda0 > 0.0);
  // lambda0 is below the escape rate bound cap/mu of either well's basin.
  auto A = StateSet::from_levels(8, {0});
  auto B = StateSet::from_levels(8, {8});
  auto sol = equilibrium_potential(ch, A, B);
  CHECK(eig.lambda0 < ch.total_rate(0) + 1e-12);
  (void)sol;
}

TEST_CASE("certificate brackets are ordered and reproducible") {
  auto cm = constant_couplings(10, 1.0);
  ModelParams p{10, 1.5, 0.05, 1.0};
  ExactChain ch(cm, p);
  auto A = StateSet::from_levels(10, {0, 1});
  auto B = StateSet::from_levels(10, {9, 10});
  MetaSpec spec;
  spec.sets = {B, A};  // ordered by decreasing Gibbs weight (h > 0)
  spec.rho = 1.0;
  auto c1 = metastability_certificate(ch, spec);
  auto c2 = metastability_certificate(ch, spec);
  CHECK(c1.ratio_lower <= c1.ratio_upper);
  CHECK(c1.numerator > 0.0);
  CHECK(c1.lambda0 > 0.0);
  CHECK(c1.ratio_upper == c2.ratio_upper);
  CHECK(c1.certified == (c1.ratio_upper <= spec.rho));
}

TEST_CASE("metastable partition covers the space and respects membership") {
  auto cm = constant_couplings(8, 1.0);
  ModelParams p{8, 1.5, 0.05, 1.0};
  ExactChain ch(cm, p);
  auto M1 = StateSet::from_levels(8, {8});
  auto M2 = StateSet::from_levels(8, {0});
  MetaSpec spec;
  spec.sets = {M1, M2};
  auto part = metastable_partition(ch, spec);
  REQUIRE(part.size() == std::size_t(1) << 8);
  for (State s = 0; s < State(part.size()); ++s) {
    CHECK(part[s] >= 0);
    CHECK(part[s] < 2);
    if (M1.contains(s)) CHECK(part[s] == 0);
    if (M2.contains(s)) CHECK(part[s] == 1);
  }
  // With h > 0 the all-plus valley contains the all-plus neighborhood.
  CHECK(part[(1u << 8) - 2] == 0);
  CHECK(part[1] == 1);
}

TEST_CASE("quenched/annealed sandwich on the comparison event") {
  auto cm = random_er(8, 0.5, 66);
  ModelParams p{8, 1.0, 0.05, 1.0};
  auto A = StateSet::from_levels(8, {0});
  auto B = StateSet::from_levels(8, {8});
  const double a_N = default_a_N(1.0, 2.0, 8);
  auto rep = sandwich_check(cm, p, a_N, A, B);
  CHECK(rep.max_dev < a_N);
  CHECK(rep.all_ok);
  for (const auto& e : rep.entries) {
    CHECK(std::abs(e.log_ratio) <= e.bound);
    CHECK(e.ok);
  }
  // A tolerance below the actual deviation is a config error.
  CHECK_THROWS_AS(sandwich_check(cm, p, rep.max_dev * 0.5, A, B), ConfigError);
}

TEST_CASE("degenerate set configurations are rejected") {
  auto cm = random_er(6, 0.5, 1);
  ModelParams p{6, 1.0, 0.0, 1.0};
  ExactChain ch(cm, p);
  auto A = StateSet::from_levels(6, {0});
  CHECK_THROWS_AS(equilibrium_potential(ch, A, StateSet()), ConfigError);
  CHECK_THROWS_AS(equilibrium_potential(ch, A, A), ConfigError);
}

}  // TEST_SUITE
