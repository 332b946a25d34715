#pragma once

// Hand-rolled property testing: a seeded generator and a loop that reports
// the failing trial.

#include "rrsplit/sparse.hpp"

#include <Eigen/Dense>

#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace rrsplit::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  Vector vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform();
    return v;
  }

  /// Random sparse matrix with roughly `density` of its entries set.
  CsrMatrix sparse(Index rows, Index cols, double density) {
    std::vector<Triplet> t;
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        if (coin(density)) t.push_back({i, j, uniform()});
      }
    }
    return from_triplets(rows, cols, std::move(t));
  }

  /// B^T B + shift I for a random sparse B: symmetric positive definite.
  CsrMatrix spd(Index n, double density, double shift = 0.5) {
    const Eigen::MatrixXd b = sparse(n, n, density).to_dense();
    const Eigen::MatrixXd a = b.transpose() * b + shift * Eigen::MatrixXd::Identity(n, n);
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (a(i, j) != 0.0) t.push_back({i, j, a(i, j)});
      }
    }
    return from_triplets(n, n, std::move(t));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Runs `prop(gen, trial)` for each trial with its own derived seed.
template <class Prop>
void for_all(std::uint64_t seed, int trials, Prop&& prop) {
  for (int trial = 0; trial < trials; ++trial) {
    Gen gen(seed * 1000003ULL + static_cast<std::uint64_t>(trial));
    SCOPED_TRACE("seed " + std::to_string(seed) + ", trial " + std::to_string(trial));
    prop(gen, trial);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

}  // namespace rrsplit::testing
