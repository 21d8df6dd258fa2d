// Density-separation test for a cluster: walk line segments from each
// boundary point of the cluster to its nearest point outside, and compare the
// lowest kernel-density sum along the segment against lambda times the
// smaller of the two within-side density maxima.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "spuds/common.hpp"
#include "spuds/dataset.hpp"
#include "spuds/graph.hpp"

namespace spuds {

struct SeparationConfig {
  double lambda = 1.0;    // threshold multiplier in (0, 1]
  int segment_grid = 100;  // interior gamma samples; endpoints are always added

  void validate() const {
    if (!(lambda > 0.0) || lambda > 1.0) throw InvalidConfig("lambda must lie in (0, 1]");
    if (segment_grid < 1) throw InvalidConfig("segment_grid must be >= 1");
  }
};

struct SeparationWitness {
  int boundary_index = -1;  // the cluster-side point whose segment failed
  int neighbor_index = -1;  // its nearest point outside the cluster
  double gamma = 0.0;       // failing position (1 = boundary point, 0 = neighbor)
  double density = 0.0;     // kernel-density sum at that position
};

struct SeparationVerdict {
  bool separated = true;
  std::optional<SeparationWitness> witness;  // present exactly when separated is false
};

namespace detail {

// Unnormalized kernel density sum over all samples at an arbitrary location.
inline double kernel_sum(const DataMatrix& X, const Eigen::RowVectorXd& point, double sigma) {
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  double s = 0.0;
  for (Eigen::Index i = 0; i < X.n(); ++i)
    s += std::exp(-(point - X.values.row(i)).squaredNorm() * inv_two_sigma_sq);
  return s;
}

}  // namespace detail

// Members of C that are the nearest C-point of at least one sample outside C;
// exact distance ties contribute every tied member. Returned ascending.
inline std::vector<int> boundary_points(const DataMatrix& X, const std::vector<int>& C) {
  const Eigen::Index n = X.n();
  std::vector<char> in_c(static_cast<std::size_t>(n), 0);
  for (int i : C) {
    if (i < 0 || i >= n) throw InvalidConfig("cluster index out of range");
    in_c[static_cast<std::size_t>(i)] = 1;
  }
  if (C.empty()) throw EmptyCluster("cluster is empty");
  bool has_outside = false;
  for (char f : in_c)
    if (!f) has_outside = true;
  if (static_cast<Eigen::Index>(C.size()) == n || !has_outside)
    throw EmptyCluster("complement is empty");

  std::vector<char> on_boundary(static_cast<std::size_t>(n), 0);
  for (Eigen::Index z = 0; z < n; ++z) {
    if (in_c[static_cast<std::size_t>(z)]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int y : C) {
      const double d = (X.values.row(z) - X.values.row(y)).squaredNorm();
      if (d < best) best = d;
    }
    for (int y : C) {
      const double d = (X.values.row(z) - X.values.row(y)).squaredNorm();
      if (d == best) on_boundary[static_cast<std::size_t>(y)] = 1;
    }
  }
  std::vector<int> out;
  for (Eigen::Index i = 0; i < n; ++i)
    if (on_boundary[static_cast<std::size_t>(i)]) out.push_back(static_cast<int>(i));
  return out;
}

// The separation test: true when every boundary segment of C passes through a
// region of density below lambda times the threshold. Boundary points are
// checked in ascending index order so the reported witness is the first
// failure; within a segment the first grid position attaining the minimum is
// reported.
inline SeparationVerdict is_density_separated(const DataMatrix& X, const std::vector<int>& C,
                                              const SimilarityGraph& G,
                                              const SeparationConfig& cfg = {}) {
  cfg.validate();
  if (G.n() != X.n()) throw DimensionMismatch("graph does not match data");
  const Eigen::Index n = X.n();
  std::vector<char> in_c(static_cast<std::size_t>(n), 0);
  for (int i : C) {
    if (i < 0 || i >= n) throw InvalidConfig("cluster index out of range");
    in_c[static_cast<std::size_t>(i)] = 1;
  }

  double max_inside = -std::numeric_limits<double>::infinity();
  double max_outside = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = G.degree[i] + 1.0;
    if (in_c[static_cast<std::size_t>(i)])
      max_inside = std::max(max_inside, p);
    else
      max_outside = std::max(max_outside, p);
  }
  if (!std::isfinite(max_inside)) throw EmptyCluster("cluster is empty");
  if (!std::isfinite(max_outside)) throw EmptyCluster("complement is empty");
  const double threshold = cfg.lambda * std::min(max_inside, max_outside);

  const std::vector<int> boundary = boundary_points(X, C);
  for (int x_idx : boundary) {
    // Nearest point outside C, lowest index on exact ties.
    int y_idx = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index z = 0; z < n; ++z) {
      if (in_c[static_cast<std::size_t>(z)]) continue;
      const double d = (X.values.row(x_idx) - X.values.row(z)).squaredNorm();
      if (d < best) {
        best = d;
        y_idx = static_cast<int>(z);
      }
    }

    const Eigen::RowVectorXd x = X.values.row(x_idx);
    const Eigen::RowVectorXd y = X.values.row(y_idx);
    double min_density = std::numeric_limits<double>::infinity();
    double min_gamma = 0.0;
    if (best == 0.0) {
      // Duplicate datum across the split: the segment is a single point, and
      // the density at a sample is its degree plus the self kernel.
      min_density = G.degree[y_idx] + 1.0;
      min_gamma = 0.0;
    } else {
      const int points = cfg.segment_grid + 2;
      for (int k = 0; k < points; ++k) {
        const double gamma = static_cast<double>(k) / static_cast<double>(points - 1);
        // The segment endpoints sit on samples, where the density is already
        // known as degree + 1. Reusing it keeps endpoint comparisons against
        // the threshold (built from the same degrees) exact, which matters
        // when a boundary point attains its side's maximum.
        double dens;
        if (k == 0) {
          dens = G.degree[y_idx] + 1.0;
        } else if (k == points - 1) {
          dens = G.degree[x_idx] + 1.0;
        } else {
          const Eigen::RowVectorXd p = gamma * x + (1.0 - gamma) * y;
          dens = detail::kernel_sum(X, p, G.sigma);
        }
        if (dens < min_density) {
          min_density = dens;
          min_gamma = gamma;
        }
        // One value under the threshold already decides this segment; the
        // remaining grid points cannot change the verdict.
        if (dens < threshold) break;
      }
    }

    if (min_density >= threshold) {
      SeparationVerdict v;
      v.separated = false;
      v.witness = SeparationWitness{x_idx, y_idx, min_gamma, min_density};
      return v;
    }
  }
  return SeparationVerdict{};
}

}  // namespace spuds
