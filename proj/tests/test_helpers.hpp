// Shared helpers for the test suite: random instances and independent
// brute-force implementations of the cut quantities. The oracles recompute
// the Gaussian affinities from the raw points rather than reusing
// build_graph, so they check the kernel evaluation too.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "spuds/common.hpp"
#include "spuds/dataset.hpp"
#include "spuds/graph.hpp"

namespace testing_support {

inline spuds::DataMatrix random_data(Eigen::Index n, Eigen::Index d, std::uint64_t seed,
                                     double spread = 2.0) {
  spuds::SplitMix64 rng(seed);
  spuds::DataMatrix X;
  X.values.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      X.values(i, j) = spread * (2.0 * rng.uniform() - 1.0);
  return X;
}

// Random assignment guaranteed to use every id in 0..c-1.
inline spuds::Partition random_partition(Eigen::Index n, int c, std::uint64_t seed) {
  spuds::SplitMix64 rng(seed);
  spuds::Partition P;
  P.cluster_count = c;
  P.assignment.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    P.assignment[static_cast<std::size_t>(i)] =
        static_cast<int>(rng.uniform_index(static_cast<std::size_t>(c)));
  for (int k = 0; k < c; ++k) P.assignment[static_cast<std::size_t>(k)] = k;
  return P;
}

inline double brute_affinity(const spuds::DataMatrix& X, double sigma, Eigen::Index i,
                             Eigen::Index j) {
  if (i == j) return 0.0;
  double d2 = 0.0;
  for (Eigen::Index k = 0; k < X.dim(); ++k) {
    const double diff = X.values(i, k) - X.values(j, k);
    d2 += diff * diff;
  }
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

// Cut as half the full double sum over ordered pairs in different clusters.
inline double brute_cut(const spuds::DataMatrix& X, double sigma, const spuds::Partition& P) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < X.n(); ++i)
    for (Eigen::Index j = 0; j < X.n(); ++j)
      if (P.assignment[static_cast<std::size_t>(i)] !=
          P.assignment[static_cast<std::size_t>(j)])
        s += brute_affinity(X, sigma, i, j);
  return 0.5 * s;
}

inline double brute_ncut(const spuds::DataMatrix& X, double sigma, const spuds::Partition& P) {
  double total = 0.0;
  for (int c = 0; c < P.cluster_count; ++c) {
    double cut = 0.0;
    double vol = 0.0;
    for (Eigen::Index i = 0; i < X.n(); ++i) {
      if (P.assignment[static_cast<std::size_t>(i)] != c) continue;
      for (Eigen::Index j = 0; j < X.n(); ++j) {
        vol += brute_affinity(X, sigma, i, j);
        if (P.assignment[static_cast<std::size_t>(j)] != c)
          cut += brute_affinity(X, sigma, i, j);
      }
    }
    total += cut / vol;
  }
  return total;
}

inline double brute_ratio_cut(const spuds::DataMatrix& X, double sigma,
                              const spuds::Partition& P) {
  double n0 = 0.0, n1 = 0.0;
  for (int a : P.assignment) (a == 0 ? n0 : n1) += 1.0;
  return brute_cut(X, sigma, P) * (1.0 / n0 + 1.0 / n1);
}

}  // namespace testing_support
