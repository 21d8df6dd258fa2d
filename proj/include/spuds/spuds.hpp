// The full pipeline: pick sigma from the data, build the similarity graph and
// Laplacian once, then search over the cluster count c. A candidate c is kept
// while every substantive cluster (size >= gamma) is density-separated from
// the rest; the search ascends from c0 while that holds and descends
// otherwise. Outlier clusters are merged into their nearest substantive
// cluster at the end.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "spuds/common.hpp"
#include "spuds/dataset.hpp"
#include "spuds/density.hpp"
#include "spuds/embedding.hpp"
#include "spuds/graph.hpp"
#include "spuds/kmeans.hpp"
#include "spuds/scale.hpp"

namespace spuds {

struct SpudsConfig {
  int c0 = 30;
  double lambda = 1.0;
  double gamma_frac = 1.0 / 200.0;  // outlier threshold gamma = ceil(n * gamma_frac)
  int step = 1;                     // ascent stride; > 1 enables fine-tuning descent
  int c_max = 0;                    // 0 = automatic: min(n - 1, 100)
  std::optional<double> sigma_override;
  KMeansConfig kmeans;              // its seed field is re-derived per c from `seed`
  std::uint64_t seed = 0;

  void validate() const {
    if (c0 < 1) throw InvalidConfig("c0 must be >= 1");
    if (!(lambda > 0.0) || lambda > 1.0) throw InvalidConfig("lambda must lie in (0, 1]");
    if (!(gamma_frac > 0.0)) throw InvalidConfig("gamma_frac must be positive");
    if (step < 1) throw InvalidConfig("step must be >= 1");
    if (c_max < 0) throw InvalidConfig("c_max must be positive (or 0 for automatic)");
    if (sigma_override && (!(*sigma_override > 0.0) || !std::isfinite(*sigma_override)))
      throw InvalidSigma("sigma override must be positive and finite");
    kmeans.validate();
  }

  int resolved_c_max(Eigen::Index n) const {
    const int cap = static_cast<int>(std::min<Eigen::Index>(n - 1, 100));
    if (c_max == 0) return cap;
    return std::min(c_max, static_cast<int>(n - 1));
  }
};

struct ClusterVerdict {
  int cluster_id = 0;
  int size = 0;
  bool outlier = false;    // size < gamma: exempt from the separation check
  bool checked = false;    // separation test actually ran
  bool separated = false;  // meaningful only when checked
  std::optional<SeparationWitness> witness;
};

// One evaluated cluster count: the partition it produced and the per-cluster
// separation verdicts.
struct TraceEntry {
  int c = 0;
  std::vector<int> assignment;
  std::vector<int> sizes;
  std::vector<ClusterVerdict> verdicts;
  bool all_separated = false;
};

enum class SpudsWarning {
  SingleClusterFallback,  // descent hit c = 1 with no all-separated solution
  CMaxReached,            // ascent was still succeeding at the cap
};

inline const char* warning_name(SpudsWarning w) {
  switch (w) {
    case SpudsWarning::SingleClusterFallback: return "single_cluster_fallback";
    case SpudsWarning::CMaxReached: return "c_max_reached";
  }
  return "unknown";
}

struct SpudsTimings {
  double graph_build_seconds = 0.0;  // affinity + degrees + Laplacian
  std::vector<std::pair<int, double>> eigensolve_seconds;  // per evaluated c
  std::vector<std::pair<int, double>> kmeans_seconds;      // per evaluated c
  double separation_seconds = 0.0;
  double merge_seconds = 0.0;
};

struct SpudsResult {
  Partition partition;            // after outlier merging, compact ids
  Partition pre_merge_partition;  // the stored solution at selected_c
  int selected_c = 0;
  double sigma = 0.0;
  int gamma = 1;
  std::optional<ScaleReport> scale;  // absent when sigma was overridden
  std::vector<TraceEntry> trace;
  std::vector<std::pair<int, int>> merges;  // (outlier id, absorbed-into id), pre-merge ids
  std::vector<SpudsWarning> warnings;
  SpudsTimings timings;
  int solver_invocations = 0;
};

// Absorb every cluster of size < gamma into the substantive cluster nearest
// by single linkage (minimum pairwise point distance, ties to the lowest
// cluster id). Targets are decided against the original substantive clusters,
// outliers in ascending id order, so merges never cascade. Surviving clusters
// are renumbered compactly in their original order.
inline std::pair<Partition, std::vector<std::pair<int, int>>> merge_outliers(
    const DataMatrix& X, const Partition& P, int gamma) {
  P.validate();
  if (static_cast<Eigen::Index>(P.size()) != X.n())
    throw DimensionMismatch("partition does not match data");
  const std::vector<int> sizes = P.cluster_sizes();

  std::vector<int> substantive;
  std::vector<int> outliers;
  for (int c = 0; c < P.cluster_count; ++c) {
    if (sizes[static_cast<std::size_t>(c)] >= gamma)
      substantive.push_back(c);
    else
      outliers.push_back(c);
  }
  if (substantive.empty()) throw AllOutliers("no cluster reaches the outlier threshold");

  std::vector<int> new_id(static_cast<std::size_t>(P.cluster_count), -1);
  for (std::size_t r = 0; r < substantive.size(); ++r)
    new_id[static_cast<std::size_t>(substantive[r])] = static_cast<int>(r);

  std::vector<std::pair<int, int>> log;
  for (int o : outliers) {
    const std::vector<int> members = P.members_of(o);
    int target = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int s : substantive) {
      double dist = std::numeric_limits<double>::infinity();
      for (int a : members)
        for (int b : P.members_of(s))
          dist = std::min(dist, (X.values.row(a) - X.values.row(b)).squaredNorm());
      if (dist < best) {
        best = dist;
        target = s;
      }
    }
    log.emplace_back(o, target);
    new_id[static_cast<std::size_t>(o)] = new_id[static_cast<std::size_t>(target)];
  }

  Partition out;
  out.cluster_count = static_cast<int>(substantive.size());
  out.assignment.resize(P.size());
  for (std::size_t i = 0; i < P.size(); ++i)
    out.assignment[i] = new_id[static_cast<std::size_t>(P.assignment[i])];
  out.validate();
  return {out, log};
}

namespace detail {

struct Evaluation {
  TraceEntry entry;
};

class SpudsDriver {
 public:
  SpudsDriver(const DataMatrix& X, const SpudsConfig& cfg, double sigma, int gamma)
      : X_(X), cfg_(cfg), gamma_(gamma) {
    const auto t0 = now();
    graph_ = build_graph(X, sigma);
    cache_.emplace(graph_);
    timings_.graph_build_seconds = since(t0);
  }

  // Embedding + k-means at a given c; the k-means seed is derived from
  // (config seed, c) so every c gets an independent deterministic stream.
  Partition cluster_at(int c) {
    const auto t0 = now();
    const SpectralEmbedding emb = cache_->embedding(c);
    timings_.eigensolve_seconds.emplace_back(c, since(t0));

    KMeansConfig km = cfg_.kmeans;
    km.seed = mix_seed(cfg_.seed, static_cast<std::uint64_t>(c));
    const auto t1 = now();
    Partition P = kmeans(emb.scaled, c, km);
    timings_.kmeans_seconds.emplace_back(c, since(t1));
    return P;
  }

  TraceEntry evaluate(int c, const Partition& P) {
    const auto t0 = now();
    TraceEntry entry;
    entry.c = c;
    entry.assignment = P.assignment;
    entry.sizes = P.cluster_sizes();
    entry.all_separated = true;
    const SeparationConfig sep{cfg_.lambda, 100};
    for (int id = 0; id < P.cluster_count; ++id) {
      ClusterVerdict v;
      v.cluster_id = id;
      v.size = entry.sizes[static_cast<std::size_t>(id)];
      v.outlier = v.size < gamma_;
      if (!v.outlier && P.cluster_count > 1) {
        const SeparationVerdict sv = is_density_separated(X_, P.members_of(id), graph_, sep);
        v.checked = true;
        v.separated = sv.separated;
        v.witness = sv.witness;
        if (!sv.separated) entry.all_separated = false;
      }
      entry.verdicts.push_back(std::move(v));
    }
    timings_.separation_seconds += since(t0);
    return entry;
  }

  const SimilarityGraph& graph() const { return graph_; }
  SpudsTimings& timings() { return timings_; }
  int solver_invocations() const { return cache_->solver_invocations(); }

 private:
  static std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }
  static double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  const DataMatrix& X_;
  const SpudsConfig& cfg_;
  int gamma_;
  SimilarityGraph graph_;
  std::optional<SpectralCache> cache_;
  SpudsTimings timings_;
};

}  // namespace detail

inline SpudsResult spuds_cluster(const DataMatrix& X, const SpudsConfig& cfg = {}) {
  cfg.validate();
  X.validate();
  const Eigen::Index n = X.n();
  if (n < 4) throw EmptyData("need at least 4 samples");
  const int c_max = cfg.resolved_c_max(n);
  if (cfg.c0 > c_max)
    throw InvalidConfig("c0 = " + std::to_string(cfg.c0) + " exceeds c_max = " +
                        std::to_string(c_max));

  SpudsResult result;
  if (cfg.sigma_override) {
    result.sigma = *cfg.sigma_override;
  } else {
    result.scale = compute_sigma(X);
    result.sigma = result.scale->sigma;
  }
  result.gamma =
      std::max(1, static_cast<int>(std::ceil(static_cast<double>(n) * cfg.gamma_frac)));

  detail::SpudsDriver driver(X, cfg, result.sigma, result.gamma);

  // Returns a copy: the trace vector reallocates as the search proceeds.
  const auto run_at = [&](int c) -> TraceEntry {
    const Partition P = driver.cluster_at(c);
    result.trace.push_back(driver.evaluate(c, P));
    return result.trace.back();
  };

  int stored_c = 0;
  std::vector<int> stored_assignment;
  const auto store = [&](const TraceEntry& e) {
    stored_c = e.c;
    stored_assignment = e.assignment;
  };

  const TraceEntry first = run_at(cfg.c0);
  if (first.all_separated) {
    store(first);
    while (stored_c < c_max) {
      const int next_c = std::min(stored_c + cfg.step, c_max);
      const TraceEntry e = run_at(next_c);
      if (e.all_separated) {
        store(e);
      } else {
        // Failure at next_c ends the ascent. With a stride > 1 the counts
        // between the stored success and the failure were skipped, so walk
        // back down one at a time and keep the highest success.
        if (cfg.step > 1) {
          for (int c = next_c - 1; c > stored_c; --c) {
            const TraceEntry fine = run_at(c);
            if (fine.all_separated) {
              store(fine);
              break;
            }
          }
        }
        break;
      }
    }
    // The stored solution sits at the cap while separation still held, so
    // the true count may be censored.
    if (stored_c == c_max) result.warnings.push_back(SpudsWarning::CMaxReached);
  } else {
    bool found = false;
    for (int c = cfg.c0 - 1; c >= 2; --c) {
      const TraceEntry e = run_at(c);
      if (e.all_separated) {
        store(e);
        found = true;
        break;
      }
    }
    if (!found) {
      // Nothing separates: fall back to a single cluster and flag it.
      TraceEntry e;
      e.c = 1;
      e.assignment.assign(static_cast<std::size_t>(n), 0);
      e.sizes = {static_cast<int>(n)};
      ClusterVerdict v;
      v.cluster_id = 0;
      v.size = static_cast<int>(n);
      e.verdicts.push_back(v);
      e.all_separated = false;
      result.trace.push_back(e);
      store(result.trace.back());
      result.warnings.push_back(SpudsWarning::SingleClusterFallback);
    }
  }

  result.selected_c = stored_c;
  result.pre_merge_partition.assignment = stored_assignment;
  result.pre_merge_partition.cluster_count = stored_c;
  result.pre_merge_partition.validate();

  const auto t0 = std::chrono::steady_clock::now();
  auto [merged, log] = merge_outliers(X, result.pre_merge_partition, result.gamma);
  result.partition = std::move(merged);
  result.merges = std::move(log);
  result.timings = driver.timings();
  result.timings.merge_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.solver_invocations = driver.solver_invocations();
  return result;
}

}  // namespace spuds
