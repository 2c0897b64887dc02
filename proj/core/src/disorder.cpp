#include "metastab/disorder.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace metastab {

std::string to_string(DisorderKind k) {
  switch (k) {
    case DisorderKind::erdos_renyi: return "erdos_renyi";
    case DisorderKind::inhomogeneous: return "inhomogeneous";
    case DisorderKind::diluted_hopfield: return "diluted_hopfield";
  }
  return "?";
}

DisorderKind disorder_kind_from_string(const std::string& s) {
  if (s == "erdos_renyi") return DisorderKind::erdos_renyi;
  if (s == "inhomogeneous") return DisorderKind::inhomogeneous;
  if (s == "diluted_hopfield") return DisorderKind::diluted_hopfield;
  throw ConfigError("unknown disorder kind: " + s);
}

void DisorderSpec::validate() const {
  if (N < 2) throw ConfigError("DisorderSpec: N must be >= 2");
  if (!(k_J > 0)) throw ConfigError("DisorderSpec: k_J must be > 0");
  switch (kind) {
    case DisorderKind::erdos_renyi:
      if (!(p > 0.0 && p <= 1.0))
        throw ConfigError("DisorderSpec: p must lie in (0,1]");
      if (k_J < 1.0)
        throw ConfigError("DisorderSpec: erdos_renyi needs k_J >= 1 (|A|=1)");
      break;
    case DisorderKind::inhomogeneous:
      if (!(v_min > 0.0 && v_max < 1.0 && v_min <= v_max))
        throw ConfigError("DisorderSpec: need 0 < v_min <= v_max < 1");
      if (k_J < 1.0)
        throw ConfigError("DisorderSpec: inhomogeneous needs k_J >= 1");
      break;
    case DisorderKind::diluted_hopfield:
      if (!(p > 0.0 && p < 1.0))
        throw ConfigError("DisorderSpec: dilution p must lie in (0,1)");
      if (n_patterns < 1) throw ConfigError("DisorderSpec: n_patterns >= 1");
      if (!(xi_amp > 0.0 && xi_amp <= 1.0))
        throw ConfigError("DisorderSpec: xi_amp must lie in (0,1]");
      if (k_J < n_patterns * xi_amp * xi_amp)
        throw ConfigError("DisorderSpec: need k_J >= n * max|xi|^2");
      break;
  }
}

CouplingMatrix sample_couplings(const DisorderSpec& spec, RandomSeed seed) {
  spec.validate();
  const int N = spec.N;
  CouplingMatrix cm;
  cm.N = N;
  cm.k_J = spec.k_J;
  const std::size_t E = CouplingMatrix::edge_count(N);
  cm.J.resize(E);
  cm.mean.resize(E);
  cm.var.resize(E);

  // Per-replica auxiliary arrays (the conditioning sigma-algebra): vertex
  // weights or patterns, drawn from their own streams.
  std::vector<double> V;
  std::vector<double> xi;  // n_patterns x N, pattern-major
  if (spec.kind == DisorderKind::inhomogeneous) {
    V.resize(N);
    for (int i = 0; i < N; ++i) {
      Rng r = stream_rng(seed, StreamKind::vertex_weight, std::uint64_t(i));
      V[i] = spec.v_min + (spec.v_max - spec.v_min) * r.uniform();
    }
  } else if (spec.kind == DisorderKind::diluted_hopfield) {
    xi.resize(std::size_t(spec.n_patterns) * N);
    for (int k = 0; k < spec.n_patterns; ++k)
      for (int i = 0; i < N; ++i) {
        Rng r = stream_rng(seed, StreamKind::pattern,
                           std::uint64_t(k) * N + std::uint64_t(i));
        xi[std::size_t(k) * N + i] =
            (r.next_u64() & 1u) ? spec.xi_amp : -spec.xi_amp;
      }
  }

  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      double A = 1.0, P = spec.p;
      if (spec.kind == DisorderKind::inhomogeneous) {
        P = V[i] * V[j];
      } else if (spec.kind == DisorderKind::diluted_hopfield) {
        A = 0.0;
        for (int k = 0; k < spec.n_patterns; ++k)
          A += xi[std::size_t(k) * N + i] * xi[std::size_t(k) * N + j];
      }
      const std::size_t e = CouplingMatrix::edge_index(i, j, N);
      Rng r = stream_rng(seed, StreamKind::edge,
                         std::uint64_t(i) * N + std::uint64_t(j));
      const bool kept = r.uniform() <= P;
      cm.J[e] = kept ? A : 0.0;
      cm.mean[e] = A * P;
      cm.var[e] = A * A * P * (1.0 - P);
    }
  }
  return cm;
}

double alpha_N(const CouplingMatrix& cm, double beta) {
  double s = 0.0;
  for (double v : cm.var) s += v;
  return beta * beta / (2.0 * double(cm.N) * cm.N) * s;
}

CouplingMatrix annealed_couplings(const CouplingMatrix& cm) {
  CouplingMatrix out = cm;
  out.J = cm.mean;
  std::fill(out.var.begin(), out.var.end(), 0.0);
  return out;
}

namespace {
std::string fmt_exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace

void write_coupling_file(const std::string& path, const CouplingMatrix& cm,
                         const DisorderSpec& spec, RandomSeed seed) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "metastab-couplings format_version 1\n";
  out << "N " << cm.N << "\n";
  out << "k_J " << fmt_exact(cm.k_J) << "\n";
  out << "kind " << to_string(spec.kind) << "\n";
  out << "p " << fmt_exact(spec.p) << "\n";
  out << "v_min " << fmt_exact(spec.v_min) << "\n";
  out << "v_max " << fmt_exact(spec.v_max) << "\n";
  out << "n_patterns " << spec.n_patterns << "\n";
  out << "xi_amp " << fmt_exact(spec.xi_amp) << "\n";
  out << "master_seed " << seed.master_seed << "\n";
  out << "replica_index " << seed.replica_index << "\n";
  out << "edges " << cm.J.size() << "\n";
  // Row-major upper triangle: one edge per line, J mean var.
  for (std::size_t e = 0; e < cm.J.size(); ++e)
    out << fmt_exact(cm.J[e]) << " " << fmt_exact(cm.mean[e]) << " "
        << fmt_exact(cm.var[e]) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

CouplingFile read_coupling_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  CouplingFile f;
  std::string magic, fv;
  if (!(in >> magic >> fv >> f.format_version) ||
      magic != "metastab-couplings" || fv != "format_version" ||
      f.format_version != 1)
    throw IoError("not a metastab coupling file: " + path);
  auto expect = [&](const char* key) {
    std::string k;
    if (!(in >> k) || k != key)
      throw IoError(std::string("coupling file: expected key ") + key);
  };
  std::string kind;
  std::size_t edges = 0;
  expect("N"); in >> f.spec.N;
  expect("k_J"); in >> f.spec.k_J;
  expect("kind"); in >> kind;
  f.spec.kind = disorder_kind_from_string(kind);
  expect("p"); in >> f.spec.p;
  expect("v_min"); in >> f.spec.v_min;
  expect("v_max"); in >> f.spec.v_max;
  expect("n_patterns"); in >> f.spec.n_patterns;
  expect("xi_amp"); in >> f.spec.xi_amp;
  expect("master_seed"); in >> f.seed.master_seed;
  expect("replica_index"); in >> f.seed.replica_index;
  expect("edges"); in >> edges;
  if (!in) throw IoError("coupling file: malformed header: " + path);
  if (edges != CouplingMatrix::edge_count(f.spec.N))
    throw IoError("coupling file: edge count mismatch: " + path);
  f.cm.N = f.spec.N;
  f.cm.k_J = f.spec.k_J;
  f.cm.J.resize(edges);
  f.cm.mean.resize(edges);
  f.cm.var.resize(edges);
  for (std::size_t e = 0; e < edges; ++e)
    if (!(in >> f.cm.J[e] >> f.cm.mean[e] >> f.cm.var[e]))
      throw IoError("coupling file: truncated edge list: " + path);
  return f;
}

}  // namespace metastab
