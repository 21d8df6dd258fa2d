// Minimal end-to-end example: sample three well-separated Gaussian blobs,
// run the clustering pipeline with an intentionally wrong initial cluster
// count, and report what was selected.

#include <cstdio>

#include "spuds/all.hpp"

int main() {
  const int per_cluster = 150;
  const double centers[3][2] = {{0.0, 0.0}, {14.0, 0.0}, {7.0, 12.0}};

  spuds::DataMatrix X;
  X.values.resize(3 * per_cluster, 2);
  std::vector<int> truth;
  spuds::SplitMix64 rng(41);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_cluster; ++i) {
      const Eigen::Index row = c * per_cluster + i;
      X.values(row, 0) = centers[c][0] + rng.normal();
      X.values(row, 1) = centers[c][1] + rng.normal();
      truth.push_back(c);
    }
  }

  spuds::SpudsConfig cfg;
  cfg.c0 = 2;  // deliberately too low; the search should ascend to 3
  cfg.seed = 7;

  const spuds::SpudsResult result = spuds::spuds_cluster(X, cfg);

  std::printf("sigma           %.6f\n", result.sigma);
  std::printf("selected c      %d\n", result.selected_c);
  std::printf("final clusters  %d\n", result.partition.cluster_count);
  std::printf("nmi vs truth    %.4f\n", spuds::nmi(result.partition.assignment, truth));
  std::printf("counts evaluated:");
  for (const spuds::TraceEntry& e : result.trace)
    std::printf(" %d%s", e.c, e.all_separated ? "+" : "-");
  std::printf("\n");
  return 0;
}
