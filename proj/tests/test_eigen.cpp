#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spuds/embedding.hpp"
#include "spuds/graph.hpp"
#include "test_helpers.hpp"

using spuds::DataMatrix;
using spuds::EigenOptions;
using spuds::SimilarityGraph;
using spuds::SpectralEmbedding;

namespace {

SimilarityGraph connected_graph(int n, unsigned seed, double sigma = 1.0) {
  DataMatrix X = testing_support::random_data(n, 2, seed);
  return spuds::build_graph(X, sigma);
}

double residual(const Eigen::MatrixXd& L, const SpectralEmbedding& E) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < E.vectors.cols(); ++k) {
    const double r = (L * E.vectors.col(k) - E.values[k] * E.vectors.col(k)).norm();
    worst = std::max(worst, r / std::max(1.0, std::abs(E.values[k])));
  }
  return worst;
}

double orthonormality_error(const Eigen::MatrixXd& U) {
  const Eigen::MatrixXd G = U.transpose() * U;
  return (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("2x2 case matches the closed form") {
  Eigen::MatrixXd L(2, 2);
  L << 1.0, -1.0, -1.0, 1.0;
  SpectralEmbedding E = spuds::smallest_eigenpairs(L, 2);
  const double isq = 1.0 / std::sqrt(2.0);
  CHECK(E.values[0] == Catch::Approx(0.0).margin(1e-14));
  CHECK(E.values[1] == Catch::Approx(2.0).epsilon(1e-14));
  // Sign convention: the tied maxima resolve to a positive first entry.
  CHECK(E.vectors(0, 0) == Catch::Approx(isq).epsilon(1e-12));
  CHECK(E.vectors(1, 0) == Catch::Approx(isq).epsilon(1e-12));
  CHECK(E.vectors(0, 1) == Catch::Approx(isq).epsilon(1e-12));
  CHECK(E.vectors(1, 1) == Catch::Approx(-isq).epsilon(1e-12));
}

TEST_CASE("coincident points give the complete-graph spectrum") {
  // n identical points: affinity 1 everywhere off the diagonal, so the
  // normalized Laplacian has eigenvalues {0, n/(n-1) x (n-1)}.
  const int n = 5;
  DataMatrix X;
  X.values.resize(n, 2);
  X.values.setConstant(3.25);
  SimilarityGraph G = spuds::build_graph(X, 1.0);
  Eigen::MatrixXd L = spuds::laplacian(G);
  SpectralEmbedding E = spuds::smallest_eigenpairs(L, n);
  CHECK(E.values[0] == Catch::Approx(0.0).margin(1e-12));
  for (int k = 1; k < n; ++k)
    CHECK(E.values[k] == Catch::Approx(n / (n - 1.0)).epsilon(1e-12));
}

TEST_CASE("full decomposition agrees with a direct dense solve") {
  SimilarityGraph G = connected_graph(12, 41u);
  Eigen::MatrixXd L = spuds::laplacian(G);
  SpectralEmbedding E = spuds::smallest_eigenpairs(L, 12);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  for (int k = 0; k < 12; ++k)
    CHECK(E.values[k] == Catch::Approx(es.eigenvalues()[k]).margin(1e-12));
  CHECK(orthonormality_error(E.vectors) < 1e-12);
  CHECK(residual(L, E) < 1e-10);
  CHECK(std::is_sorted(E.values.data(), E.values.data() + E.values.size()));
}

TEST_CASE("eigenvalue sum is trace-minimal over random orthonormal frames") {
  SimilarityGraph G = connected_graph(20, 7u);
  Eigen::MatrixXd L = spuds::laplacian(G);
  const int c = 4;
  SpectralEmbedding E = spuds::smallest_eigenpairs(L, c);
  const double best = E.values.sum();
  CHECK((E.vectors.transpose() * L * E.vectors).trace() == Catch::Approx(best).margin(1e-10));

  spuds::SplitMix64 rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd M(20, c);
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = rng.normal();
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(M)
                                  .householderQ() *
                              Eigen::MatrixXd::Identity(20, c);
    CHECK((Q.transpose() * L * Q).trace() >= best - 1e-6);
  }
}

TEST_CASE("requesting fewer pairs is consistent with requesting more") {
  SimilarityGraph G = connected_graph(18, 11u);
  Eigen::MatrixXd L = spuds::laplacian(G);
  SpectralEmbedding small = spuds::smallest_eigenpairs(L, 2);
  SpectralEmbedding large = spuds::smallest_eigenpairs(L, 6);
  for (int k = 0; k < 2; ++k)
    CHECK(small.values[k] == Catch::Approx(large.values[k]).margin(1e-10));
}

TEST_CASE("sign convention makes the dominant entry positive") {
  SimilarityGraph G = connected_graph(15, 17u);
  SpectralEmbedding E = spuds::smallest_eigenpairs(spuds::laplacian(G), 5);
  for (Eigen::Index k = 0; k < E.vectors.cols(); ++k) {
    Eigen::Index arg = 0;
    E.vectors.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(E.vectors(arg, k) > 0.0);
  }
}

TEST_CASE("iterative path matches the dense path on a larger problem") {
  SimilarityGraph G = connected_graph(300, 23u, 1.5);
  Eigen::MatrixXd L = spuds::laplacian(G);

  SpectralEmbedding dense = spuds::smallest_eigenpairs(L, 6);  // default: dense
  EigenOptions iter;
  iter.dense_threshold = 10;  // forces the Lanczos path at n = 300
  SpectralEmbedding lan = spuds::smallest_eigenpairs(L, 6, iter);

  for (int k = 0; k < 6; ++k)
    CHECK(lan.values[k] == Catch::Approx(dense.values[k]).margin(1e-8));
  CHECK(orthonormality_error(lan.vectors) < 1e-8);
  CHECK(residual(L, lan) < 1e-7);

  // Fixed seed: a second run reproduces the first bit for bit.
  SpectralEmbedding again = spuds::smallest_eigenpairs(L, 6, iter);
  CHECK((again.vectors - lan.vectors).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.values - lan.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two far-apart blocks give two near-zero eigenvalues") {
  spuds::SplitMix64 rng(5);
  DataMatrix X;
  X.values.resize(16, 1);
  for (int i = 0; i < 8; ++i) {
    X.values(i, 0) = rng.normal() * 0.05;
    X.values(8 + i, 0) = 50.0 + rng.normal() * 0.05;
  }
  SimilarityGraph G = spuds::build_graph(X, 0.5);
  spuds::SpectralCache cache(G);
  SpectralEmbedding E = cache.embedding(2);
  CHECK(E.values[0] < 1e-10);
  CHECK(E.values[1] < 1e-10);
  // The scaled rows are constant on each block and differ across blocks.
  for (int i = 1; i < 8; ++i) {
    CHECK((E.scaled.row(i) - E.scaled.row(0)).norm() < 1e-8);
    CHECK((E.scaled.row(8 + i) - E.scaled.row(8)).norm() < 1e-8);
  }
  CHECK((E.scaled.row(8) - E.scaled.row(0)).norm() > 1e-3);
}

TEST_CASE("the scaled embedding is the degree-scaled eigenbasis") {
  SimilarityGraph G = connected_graph(25, 29u);
  spuds::SpectralCache cache(G);
  SpectralEmbedding E = cache.embedding(3);
  for (Eigen::Index i = 0; i < G.n(); ++i)
    for (Eigen::Index k = 0; k < 3; ++k)
      CHECK(E.scaled(i, k) ==
            Catch::Approx(E.vectors(i, k) / std::sqrt(G.degree[i])).epsilon(1e-13));
}

TEST_CASE("first scaled column is constant") {
  SimilarityGraph G = connected_graph(20, 31u);
  SpectralEmbedding E = spuds::spectral_embed(G, 1);
  const double first = E.scaled(0, 0);
  for (Eigen::Index i = 1; i < G.n(); ++i)
    CHECK(E.scaled(i, 0) == Catch::Approx(first).epsilon(1e-8));
}

TEST_CASE("duplicate pairs collapse to two distinct embedding rows") {
  DataMatrix X;
  X.values.resize(4, 1);
  X.values << 0.0, 0.0, 10.0, 10.0;
  SimilarityGraph G = spuds::build_graph(X, 1.0);
  SpectralEmbedding E = spuds::spectral_embed(G, 2);
  CHECK((E.scaled.row(0) - E.scaled.row(1)).norm() < 1e-10);
  CHECK((E.scaled.row(2) - E.scaled.row(3)).norm() < 1e-10);
  CHECK((E.scaled.row(0) - E.scaled.row(2)).norm() > 1e-3);
}

TEST_CASE("dense cache decomposes once for any request pattern") {
  SimilarityGraph G = connected_graph(30, 37u);
  spuds::SpectralCache cache(G);
  CHECK(cache.solver_invocations() == 0);
  cache.embedding(3);
  CHECK(cache.solver_invocations() == 1);
  cache.embedding(7);
  cache.embedding(2);
  cache.embedding(7);
  cache.embedding(30);
  CHECK(cache.solver_invocations() == 1);
}

TEST_CASE("iterative cache reuses headroom across nearby requests") {
  SimilarityGraph G = connected_graph(300, 43u, 1.5);
  EigenOptions iter;
  iter.dense_threshold = 10;
  spuds::SpectralCache cache(G, iter);
  cache.embedding(2);  // solves for 2 + 8 = 10 columns
  CHECK(cache.solver_invocations() == 1);
  cache.embedding(5);
  cache.embedding(10);
  CHECK(cache.solver_invocations() == 1);
  cache.embedding(12);  // beyond the headroom: one more solve
  CHECK(cache.solver_invocations() == 2);
}

TEST_CASE("cached and one-shot embeddings agree") {
  SimilarityGraph G = connected_graph(300, 47u, 1.5);
  EigenOptions iter;
  iter.dense_threshold = 10;
  spuds::SpectralCache cache(G, iter);
  SpectralEmbedding a = cache.embedding(4);
  Eigen::MatrixXd L = spuds::laplacian(G);
  SpectralEmbedding b = spuds::smallest_eigenpairs(L, 4);
  for (int k = 0; k < 4; ++k) CHECK(a.values[k] == Catch::Approx(b.values[k]).margin(1e-8));
}

TEST_CASE("invalid inputs are rejected") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(spuds::smallest_eigenpairs(bad, 1), spuds::NonSymmetric);

  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(spuds::smallest_eigenpairs(rect, 1), spuds::NonSymmetric);

  Eigen::MatrixXd ok(3, 3);
  ok.setIdentity();
  CHECK_THROWS_AS(spuds::smallest_eigenpairs(ok, 0), spuds::InvalidConfig);
  CHECK_THROWS_AS(spuds::smallest_eigenpairs(ok, 4), spuds::InvalidConfig);

  SimilarityGraph G = connected_graph(10, 53u);
  spuds::SpectralCache cache(G);
  CHECK_THROWS_AS(cache.embedding(0), spuds::InvalidConfig);
  CHECK_THROWS_AS(cache.embedding(11), spuds::InvalidConfig);
}
