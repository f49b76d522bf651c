#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

namespace qtopc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Tolerances shared by the state invariants, integrators and tests.
struct NumericPolicy {
  double hermiticity_tol = 1e-10;
  double trace_tol = 1e-10;
  double psd_tol = 1e-10;          // min eigenvalue >= -psd_tol
  double unit_norm_tol = 1e-12;    // pure-state normalization
  double operator_norm_tol = 1e-9; // ||L|| = 1, ||H'_delta|| = 1
  double eig_degeneracy_tol = 1e-10;
  double integration_trace_tol = 1e-8;
  double integration_psd_tol = 1e-6;
  double jump_prob_cap = 0.1; // first-order jump approximation validity
};

inline const NumericPolicy& default_policy() {
  static const NumericPolicy p{};
  return p;
}

/// Seeded random stream. Stream k of a campaign is seeded with
/// master_seed XOR k so trajectories are independent and reproducible.
struct RngStream {
  std::mt19937_64 gen;
  explicit RngStream(std::uint64_t seed) : gen(seed) {}
  static RngStream derived(std::uint64_t master_seed, std::uint64_t k) {
    return RngStream(master_seed ^ k);
  }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
};

} // namespace qtopc
