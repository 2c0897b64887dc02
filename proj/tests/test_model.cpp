#include <cmath>
#include <vector>

#include "doctest.h"
#include "metastab/model.hpp"
#include "metastab/rng.hpp"

using namespace metastab;

namespace {

CouplingMatrix constant_couplings(int N, double J, double k_J = 1.0) {
  CouplingMatrix cm;
  cm.N = N;
  cm.k_J = k_J;
  const std::size_t E = CouplingMatrix::edge_count(N);
  cm.J.assign(E, J);
  cm.mean.assign(E, J);
  cm.var.assign(E, 0.0);
  return cm;
}

CouplingMatrix random_er(int N, double p, std::uint64_t seed) {
  DisorderSpec s;
  s.kind = DisorderKind::erdos_renyi;
  s.N = N;
  s.p = p;
  return sample_couplings(s, {seed, 0});
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("hand-computed energies at N = 2") {
  // H = -(1/2) J s0 s1 - h (s0 + s1), J = 1, h = 0.25.
  auto cm = constant_couplings(2, 1.0);
  ModelParams p{2, 1.0, 0.25, 1.0};
  CHECK(hamiltonian(cm, p, 0b00) == doctest::Approx(-0.5 + 0.5).epsilon(1e-15));
  CHECK(hamiltonian(cm, p, 0b11) == doctest::Approx(-0.5 - 0.5).epsilon(1e-15));
  CHECK(hamiltonian(cm, p, 0b01) == doctest::Approx(0.5 - 0.0).epsilon(1e-15));
  CHECK(hamiltonian(cm, p, 0b10) == doctest::Approx(0.5 - 0.0).epsilon(1e-15));
}

TEST_CASE("flip_delta agrees with the energy difference") {
  auto cm = random_er(10, 0.5, 31);
  ModelParams p{10, 1.3, 0.2, 1.0};
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const State s = State(rng.below(1u << 10));
    const int k = int(rng.below(10));
    const double direct =
        hamiltonian(cm, p, s ^ (State(1) << k)) - hamiltonian(cm, p, s);
    CHECK(flip_delta(cm, p, s, k) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("Gray-code energy table equals the direct evaluation") {
  auto cm = random_er(9, 0.4, 77);
  ModelParams p{9, 2.0, -0.15, 1.0};
  auto table = hamiltonian_table(cm, p);
  REQUIRE(table.size() == std::size_t(1) << 9);
  for (State s = 0; s < table.size(); ++s)
    CHECK(table[s] == doctest::Approx(hamiltonian(cm, p, s)).epsilon(1e-12));
}

TEST_CASE("partition function of a single spin") {
  // N = 1: H(+-) = -+ h, so Z = e^{beta h} + e^{-beta h}.
  auto cm = constant_couplings(1, 0.0);
  ModelParams p{1, 1.0, 1.0, 1.0};
  CHECK(std::exp(log_partition(cm, p)) ==
        doctest::Approx(std::exp(1.0) + std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("log_partition is shift-stable at large beta") {
  auto cm = random_er(8, 0.5, 5);
  ModelParams hot{8, 1.0, 0.1, 1.0};
  ModelParams cold{8, 400.0, 0.1, 1.0};
  CHECK(std::isfinite(log_partition(cm, hot)));
  const double lz = log_partition(cm, cold);
  CHECK(std::isfinite(lz));
  // At very large beta the ground state dominates: log Z ~ -beta * Hmin.
  auto H = hamiltonian_table(cm, cold);
  const double Hmin = *std::min_element(H.begin(), H.end());
  CHECK(lz == doctest::Approx(-400.0 * Hmin).epsilon(1e-6));
}

TEST_CASE("Gibbs distribution is normalized and ratio-correct") {
  auto cm = random_er(7, 0.6, 13);
  ModelParams p{7, 1.7, 0.05, 1.0};
  auto H = hamiltonian_table(cm, p);
  auto g = gibbs_distribution(H, p.beta);
  double total = 0.0;
  for (double x : g) total += x;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g[3] / g[90] ==
        doctest::Approx(std::exp(-p.beta * (H[3] - H[90]))).epsilon(1e-11));
}

TEST_CASE("delta energy vanishes for annealed couplings") {
  auto cm = random_er(8, 0.5, 21);
  auto an = annealed_couplings(cm);
  ModelParams p{8, 1.5, 0.0, 1.0};
  for (State s : {State(0), State(17), State(255)})
    CHECK(delta_energy(an, p, s) == doctest::Approx(0.0).epsilon(1e-15));
  // And equals H_quenched - H_annealed in general.
  for (State s : {State(5), State(100), State(200)})
    CHECK(delta_energy(cm, p, s) ==
          doctest::Approx(hamiltonian(cm, p, s) - hamiltonian(an, p, s))
              .epsilon(1e-12));
}

TEST_CASE("xi_check matches a brute-force scan of |Delta|") {
  auto cm = random_er(8, 0.5, 4);
  ModelParams p{8, 1.5, 0.1, 1.0};
  double brute = 0.0;
  for (State s = 0; s < (State(1) << 8); ++s)
    brute = std::max(brute, std::abs(delta_energy(cm, p, s)));
  XiSpec tight{brute * 0.999};
  XiSpec loose{brute * 1.001};
  auto rt = xi_check(cm, p, tight);
  auto rl = xi_check(cm, p, loose);
  CHECK(rt.max_dev == doctest::Approx(brute).epsilon(1e-12));
  CHECK_FALSE(rt.in_event);
  CHECK(rl.in_event);
}

TEST_CASE("b_N bookkeeping for the default a_N rule") {
  const double k_J = 1.0, k_1 = 2.0;
  const int N = 12;
  const double a = default_a_N(k_J, k_1, N);
  XiSpec xs{a};
  // a_N^2/(2 k_J) - N log 2 = (k_1 + log2) N - N log2 = k_1 N.
  CHECK(xs.b_N(k_J, N) == doctest::Approx(k_1 * N).epsilon(1e-12));
}

TEST_CASE("conditional mgf: single-edge oracle") {
  // N = 2, one ER edge with p = 1/2: for any sigma and sign the edge factor
  // is (e^{t/2} + e^{-t/2})/2 evaluated at |t| = beta/N, i.e. cosh(beta/4)
  // after centering; with beta = 1, N = 2 the exact value is
  // log[ (1/2)(1 + e^{+-1/2}) ] and alpha_N = beta^2/(2*4) * 1/4 = 1/32.
  CouplingMatrix cm;
  cm.N = 2;
  cm.k_J = 1.0;
  cm.J = {1.0};
  cm.mean = {0.5};
  cm.var = {0.25};
  ModelParams p{2, 1.0, 0.0, 1.0};
  for (int sign : {+1, -1}) {
    for (State s : {State(0b00), State(0b01), State(0b10), State(0b11)}) {
      const double si = spin_at(s, 0), sj = spin_at(s, 1);
      // Delta = -(1/N)(J - 1/2) s0 s1; E e^{sign beta Delta} =
      // (1/2) e^{sign*beta*si*sj/(2N)} + (1/2) e^{-sign*beta*si*sj/(2N)}
      const double t = sign * p.beta * si * sj / p.N;
      const double expect = std::log(0.5 * std::exp(0.5 * t) +
                                     0.5 * std::exp(-0.5 * t));
      CHECK(log_conditional_mgf_exact(cm, p, s, sign) ==
            doctest::Approx(expect).epsilon(1e-13));
    }
  }
}

TEST_CASE("conditional mgf remainder bound holds on random instances") {
  Rng pick(99);
  for (int N : {8, 12}) {
    auto cm = random_er(N, 0.5, 1000 + std::uint64_t(N));
    ModelParams p{N, 1.5, 0.1, 1.0};
    const double a = alpha_N(cm, p.beta);
    const double bound =
        std::pow(p.beta * p.k_J, 3) / (2.0 * N);
    for (int trial = 0; trial < 50; ++trial) {
      const State s = State(pick.below(std::uint64_t(1) << N));
      for (int sign : {+1, -1}) {
        const double lm = log_conditional_mgf_exact(cm, p, s, sign);
        CHECK(std::abs(lm - a) <= bound);
      }
    }
  }
}

TEST_CASE("zero-variance edges contribute exactly their deterministic factor") {
  auto cm = random_er(6, 0.5, 3);
  auto an = annealed_couplings(cm);  // var = 0 everywhere -> Delta = 0
  ModelParams p{6, 1.5, 0.0, 1.0};
  CHECK(log_conditional_mgf_exact(an, p, State(13), +1) ==
        doctest::Approx(0.0).epsilon(1e-14));
}

}  // TEST_SUITE
