// Lloyd's algorithm with k-means++ seeding, used to round the scaled spectral
// embedding into c clusters. Deterministic for a fixed config: restart r draws
// from SplitMix64(seed + r), exact distance ties go to the lowest center
// index, and the winner over restarts is lexicographic in
// (distortion, restart index).
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spuds/common.hpp"
#include "spuds/graph.hpp"

namespace spuds {

struct KMeansConfig {
  int restarts = 10;
  int max_iters = 100;
  std::uint64_t seed = 0;
  double tol = 1e-9;  // relative distortion decrease that counts as converged

  void validate() const {
    if (restarts < 1 || max_iters < 1) throw InvalidConfig("restarts and max_iters must be >= 1");
    if (tol < 0.0) throw InvalidConfig("tol must be non-negative");
  }
};

struct KMeansResult {
  Partition partition;
  Eigen::MatrixXd centers;
  double distortion = 0.0;
  int best_restart = 0;
  std::vector<double> iteration_distortions;  // winning restart, one per assignment pass
};

namespace detail {

struct LloydRun {
  std::vector<int> assignment;
  Eigen::MatrixXd centers;
  double distortion = 0.0;
  std::vector<double> trajectory;
};

// Nearest center for every row (lowest index on ties) plus the total squared
// distance. Distances use the expanded form so the inner loop is a GEMM.
inline double assign_rows(const Eigen::MatrixXd& rows, const Eigen::VectorXd& row_sqnorm,
                          const Eigen::MatrixXd& centers, std::vector<int>& assignment) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index c = centers.rows();
  const Eigen::MatrixXd cross = rows * centers.transpose();
  const Eigen::VectorXd center_sqnorm = centers.rowwise().squaredNorm();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = row_sqnorm[i] - 2.0 * cross(i, 0) + center_sqnorm[0];
    for (Eigen::Index j = 1; j < c; ++j) {
      const double d = row_sqnorm[i] - 2.0 * cross(i, j) + center_sqnorm[j];
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    assignment[static_cast<std::size_t>(i)] = best;
    total += std::max(0.0, best_d);
  }
  return total;
}

inline Eigen::MatrixXd seed_centers_plusplus(const Eigen::MatrixXd& rows, int c,
                                             SplitMix64& rng) {
  const Eigen::Index n = rows.rows();
  Eigen::MatrixXd centers(c, rows.cols());
  centers.row(0) = rows.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n))));
  Eigen::VectorXd d2 = (rows.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < c; ++k) {
    const double total = d2.sum();
    Eigen::Index pick;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += d2[i];
        if (r < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n)));
    }
    centers.row(k) = rows.row(pick);
    d2 = d2.cwiseMin((rows.rowwise() - centers.row(k)).rowwise().squaredNorm());
  }
  return centers;
}

// Any empty cluster takes over the point currently farthest from its own
// center (lowest index on ties, never the sole member of a cluster).
inline void repair_empty_clusters(const Eigen::MatrixXd& rows, Eigen::MatrixXd& centers,
                                  std::vector<int>& assignment, std::vector<int>& counts) {
  const int c = static_cast<int>(centers.rows());
  for (int e = 0; e < c; ++e) {
    if (counts[static_cast<std::size_t>(e)] > 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      const int a = assignment[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(a)] < 2) continue;
      const double d = (rows.row(i) - centers.row(a)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) throw EmptyCluster("cannot repair an empty cluster");
    const int old = assignment[static_cast<std::size_t>(far)];
    --counts[static_cast<std::size_t>(old)];
    ++counts[static_cast<std::size_t>(e)];
    assignment[static_cast<std::size_t>(far)] = e;
    centers.row(e) = rows.row(far);
  }
}

inline LloydRun lloyd_run(const Eigen::MatrixXd& rows, int c, std::uint64_t seed,
                          const KMeansConfig& cfg) {
  const Eigen::Index n = rows.rows();
  SplitMix64 rng(seed);
  LloydRun run;
  run.assignment.assign(static_cast<std::size_t>(n), 0);
  run.centers = seed_centers_plusplus(rows, c, rng);
  const Eigen::VectorXd row_sqnorm = rows.rowwise().squaredNorm();

  std::vector<int> counts(static_cast<std::size_t>(c), 0);
  double prev = -1.0;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    std::vector<int> next = run.assignment;
    double distortion = assign_rows(rows, row_sqnorm, run.centers, next);

    counts.assign(static_cast<std::size_t>(c), 0);
    for (int a : next) ++counts[static_cast<std::size_t>(a)];
    bool had_empty = false;
    for (int cnt : counts)
      if (cnt == 0) had_empty = true;
    if (had_empty) {
      repair_empty_clusters(rows, run.centers, next, counts);
      distortion = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        distortion +=
            (rows.row(i) - run.centers.row(next[static_cast<std::size_t>(i)])).squaredNorm();
    }

    const bool unchanged = (iter > 0 && next == run.assignment);
    run.assignment = next;
    run.distortion = distortion;
    run.trajectory.push_back(distortion);
    if (unchanged) break;
    if (iter > 0 && prev - distortion <= cfg.tol * std::max(prev, 1e-300)) break;
    prev = distortion;

    // Update step: each center moves to the mean of its members.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(c, rows.cols());
    for (Eigen::Index i = 0; i < n; ++i)
      sums.row(run.assignment[static_cast<std::size_t>(i)]) += rows.row(i);
    for (int k = 0; k < c; ++k)
      if (counts[static_cast<std::size_t>(k)] > 0)
        run.centers.row(k) = sums.row(k) / counts[static_cast<std::size_t>(k)];
  }
  return run;
}

}  // namespace detail

inline KMeansResult kmeans_detailed(const Eigen::MatrixXd& rows, int c,
                                    const KMeansConfig& cfg = {}) {
  cfg.validate();
  if (c < 1) throw InvalidConfig("c must be >= 1");
  if (static_cast<Eigen::Index>(c) > rows.rows())
    throw InvalidConfig("k-means needs c <= n");

  KMeansResult best;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    detail::LloydRun run = detail::lloyd_run(rows, c, cfg.seed + static_cast<std::uint64_t>(r), cfg);
    if (!have || run.distortion < best.distortion) {
      have = true;
      best.partition.assignment = run.assignment;
      best.partition.cluster_count = c;
      best.centers = run.centers;
      best.distortion = run.distortion;
      best.best_restart = r;
      best.iteration_distortions = run.trajectory;
    }
  }
  best.partition.validate();
  return best;
}

inline Partition kmeans(const Eigen::MatrixXd& rows, int c, const KMeansConfig& cfg = {}) {
  return kmeans_detailed(rows, c, cfg).partition;
}

}  // namespace spuds
