// Gaussian similarity graph and cut quantities: affinity matrix, degrees,
// normalized Laplacian, Cut, NCut, RatioCut, volumes and the degree-based
// density proxy.
#pragma once

#include <cmath>
#include <vector>

#include "spuds/common.hpp"
#include "spuds/dataset.hpp"

namespace spuds {

struct SimilarityGraph {
  Eigen::MatrixXd affinity;  // symmetric, zero diagonal, entries in [0,1]
  Eigen::VectorXd degree;    // row sums of affinity
  double sigma = 0.0;

  Eigen::Index n() const { return affinity.rows(); }
};

// Assignment of each point to one of `cluster_count` clusters; every id in
// 0..cluster_count-1 must occur.
struct Partition {
  std::vector<int> assignment;
  int cluster_count = 0;

  std::size_t size() const { return assignment.size(); }

  void validate() const {
    if (cluster_count < 1) throw InvalidConfig("partition needs cluster_count >= 1");
    std::vector<char> seen(static_cast<std::size_t>(cluster_count), 0);
    for (int a : assignment) {
      if (a < 0 || a >= cluster_count) throw InvalidConfig("cluster id out of range");
      seen[static_cast<std::size_t>(a)] = 1;
    }
    for (char s : seen)
      if (!s) throw InvalidConfig("empty cluster id in partition");
  }

  std::vector<int> cluster_sizes() const {
    std::vector<int> sizes(static_cast<std::size_t>(cluster_count), 0);
    for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
    return sizes;
  }

  std::vector<int> members_of(int cluster) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == cluster) out.push_back(static_cast<int>(i));
    return out;
  }
};

// A_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)) for i != j, zero diagonal.
// Upper-triangle entries are filled in parallel row blocks (disjoint writes),
// then degrees are summed per row in index order, so the result is identical
// for any thread count.
inline SimilarityGraph build_graph(const DataMatrix& X, double sigma,
                                   Eigen::Index max_n = 20000) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidSigma("sigma must be positive and finite");
  const Eigen::Index n = X.n();
  if (n > max_n)
    throw InvalidConfig("n = " + std::to_string(n) + " exceeds the dense-graph limit " +
                        std::to_string(max_n));

  SimilarityGraph G;
  G.sigma = sigma;
  G.affinity.setZero(n, n);
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  const auto& V = X.values;
  parallel_blocks(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (Eigen::Index j = static_cast<Eigen::Index>(i) + 1; j < n; ++j) {
        const double d2 = (V.row(static_cast<Eigen::Index>(i)) - V.row(j)).squaredNorm();
        const double a = std::exp(-d2 * inv_two_sigma_sq);
        G.affinity(static_cast<Eigen::Index>(i), j) = a;
        G.affinity(j, static_cast<Eigen::Index>(i)) = a;
      }
    }
  });

  G.degree.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += G.affinity(i, j);
    G.degree[i] = s;
  }
  return G;
}

// L = I - D^(-1/2) A D^(-1/2); symmetric by construction, spectrum in [0,2].
inline Eigen::MatrixXd laplacian(const SimilarityGraph& G) {
  const Eigen::Index n = G.n();
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (G.degree[i] < 1e-300)
      throw IsolatedVertex("vertex " + std::to_string(i) +
                           " has (near-)zero degree; sigma is too small");
    inv_sqrt[i] = 1.0 / std::sqrt(G.degree[i]);
  }
  Eigen::MatrixXd L(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) {
        L(i, j) = 1.0;
      } else {
        const double w = inv_sqrt[i] * inv_sqrt[j];
        L(i, j) = -G.affinity(i, j) * w;
      }
    }
  }
  return L;
}

// Total affinity across the partition boundary, each unordered pair once.
inline double cut_value(const SimilarityGraph& G, const Partition& P) {
  if (static_cast<Eigen::Index>(P.size()) != G.n())
    throw DimensionMismatch("partition size does not match graph");
  double cut = 0.0;
  const Eigen::Index n = G.n();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (P.assignment[static_cast<std::size_t>(i)] != P.assignment[static_cast<std::size_t>(j)])
        cut += G.affinity(i, j);
  return cut;
}

inline std::vector<double> cluster_volumes(const SimilarityGraph& G, const Partition& P) {
  std::vector<double> vol(static_cast<std::size_t>(P.cluster_count), 0.0);
  for (Eigen::Index i = 0; i < G.n(); ++i)
    vol[static_cast<std::size_t>(P.assignment[static_cast<std::size_t>(i)])] += G.degree[i];
  return vol;
}

// Sum over clusters of cut-to-volume ratios.
inline double ncut_value(const SimilarityGraph& G, const Partition& P) {
  if (static_cast<Eigen::Index>(P.size()) != G.n())
    throw DimensionMismatch("partition size does not match graph");
  const std::vector<double> vol = cluster_volumes(G, P);
  std::vector<double> cut(static_cast<std::size_t>(P.cluster_count), 0.0);
  const Eigen::Index n = G.n();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int ci = P.assignment[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int cj = P.assignment[static_cast<std::size_t>(j)];
      if (ci != cj) {
        cut[static_cast<std::size_t>(ci)] += G.affinity(i, j);
        cut[static_cast<std::size_t>(cj)] += G.affinity(i, j);
      }
    }
  }
  double ncut = 0.0;
  for (int c = 0; c < P.cluster_count; ++c) {
    if (vol[static_cast<std::size_t>(c)] <= 0.0)
      throw ZeroVolumeCluster("cluster " + std::to_string(c) + " has zero volume");
    ncut += cut[static_cast<std::size_t>(c)] / vol[static_cast<std::size_t>(c)];
  }
  return ncut;
}

// Two-cluster form: Cut * (1/|C| + 1/|complement|).
inline double ratio_cut_value(const SimilarityGraph& G, const Partition& P) {
  if (P.cluster_count != 2) throw RequiresTwoClusters("ratio cut is defined for c = 2");
  const std::vector<int> sizes = P.cluster_sizes();
  if (sizes[0] == 0 || sizes[1] == 0) throw EmptyCluster("both clusters must be non-empty");
  return cut_value(G, P) * (1.0 / sizes[0] + 1.0 / sizes[1]);
}

// Unnormalized kernel density proxy at sample i: D_ii + 1.
inline double point_density(const SimilarityGraph& G, Eigen::Index i) {
  if (i < 0 || i >= G.n()) throw InvalidConfig("point index out of range");
  return G.degree[i] + 1.0;
}

}  // namespace spuds
