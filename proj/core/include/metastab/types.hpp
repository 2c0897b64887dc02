#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace metastab {

// State of N spins packed into an integer index; bit i set <=> sigma_i = +1.
using State = std::uint32_t;

inline int spin_at(State s, int i) { return (s >> i) & 1u ? +1 : -1; }

inline int up_count(State s) { return __builtin_popcount(s); }

// Magnetization m = (1/N) sum sigma_i on the grid {-1, -1+2/N, ..., 1}.
inline double magnetization(State s, int N) {
  return (2.0 * up_count(s) - N) / N;
}

struct ModelParams {
  int N = 0;
  double beta = 1.0;  // inverse temperature, > 0
  double h = 0.0;     // external field
  double k_J = 1.0;   // uniform coupling bound
};

// Error taxonomy mirrors the CLI exit-code contract:
//   IoError -> 1, ConfigError -> 2, CapabilityError -> 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact-enumeration limit for 2^N state-space work (Z, potentials, Xi scans).
inline constexpr int kDefaultEnumLimit = 20;

inline void require_enumerable(int N, int limit = kDefaultEnumLimit) {
  if (N > limit)
    throw CapabilityError("N=" + std::to_string(N) +
                          " exceeds the exact-enumeration limit " +
                          std::to_string(limit) +
                          "; use the lumped annealed chain instead");
}

inline void validate_params(const ModelParams& p) {
  if (p.N < 1) throw ConfigError("ModelParams: N must be >= 1");
  if (!(p.beta > 0)) throw ConfigError("ModelParams: beta must be > 0");
  if (!(p.k_J > 0)) throw ConfigError("ModelParams: k_J must be > 0");
}

}  // namespace metastab
