// Smallest eigenpairs of the normalized Laplacian and the scaled spectral
// embedding D^(-1/2)U. Dense full decomposition for moderate n, thick-restart
// Lanczos with full reorthogonalization above that, plus a cache so a model
// search over c solves the eigenproblem as few times as possible.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "spuds/common.hpp"
#include "spuds/graph.hpp"

namespace spuds {

struct SpectralEmbedding {
  Eigen::MatrixXd vectors;  // U: n x c, orthonormal columns
  Eigen::VectorXd values;   // ascending eigenvalues, length c
  Eigen::MatrixXd scaled;   // D^(-1/2) U (empty when no graph is involved)
};

struct EigenOptions {
  Eigen::Index dense_threshold = 2000;  // full decomposition at or below this n
  int keep_extra = 10;                  // extra Ritz pairs kept across restarts
  double tol = 1e-8;                    // residual tolerance per eigenpair
  std::uint64_t seed = 1;               // start-vector seed (fixed => reproducible)
};

namespace detail {

// Flip each column so its largest-magnitude entry is positive; ties go to the
// lowest index. Keeps eigenvectors reproducible across runs and solvers.
inline void apply_sign_convention(Eigen::MatrixXd& U) {
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    Eigen::Index best = 0;
    double best_abs = std::abs(U(0, k));
    for (Eigen::Index i = 1; i < U.rows(); ++i) {
      const double a = std::abs(U(i, k));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (U(best, k) < 0.0) U.col(k) = -U.col(k);
  }
}

inline void check_symmetric(const Eigen::MatrixXd& L, double tol = 1e-10) {
  if (L.rows() != L.cols()) throw NonSymmetric("matrix is not square");
  for (Eigen::Index j = 0; j < L.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (std::abs(L(i, j) - L(j, i)) > tol)
        throw NonSymmetric("matrix is not symmetric within 1e-10");
}

inline SpectralEmbedding dense_smallest(const Eigen::MatrixXd& L, Eigen::Index c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("dense symmetric eigensolver failed");
  SpectralEmbedding out;
  out.values = es.eigenvalues().head(c);
  out.vectors = es.eigenvectors().leftCols(c);
  apply_sign_convention(out.vectors);
  return out;
}

// Thick-restart Lanczos for the c smallest eigenpairs of a symmetric matrix.
// The basis is kept fully reorthogonalized (two-pass Gram-Schmidt), the
// projected matrix is rebuilt column by column, and every restart keeps the
// best c + keep_extra Ritz pairs. Deterministic for a fixed seed.
inline SpectralEmbedding lanczos_smallest(const Eigen::MatrixXd& L, Eigen::Index c,
                                          const EigenOptions& opts) {
  const Eigen::Index n = L.rows();
  const Eigen::Index m =
      std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * c + 10, 30));
  if (m >= n) return dense_smallest(L, c);

  const long max_matvecs = 10L * static_cast<long>(n);
  long matvecs = 0;
  SplitMix64 rng(opts.seed);

  Eigen::MatrixXd V(n, m);   // orthonormal basis
  Eigen::MatrixXd W(n, m);   // W = L * V
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);  // projected matrix (upper)

  const auto random_fill = [&](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  };
  // Two-pass orthogonalization of w against the first k basis columns; the
  // accumulated coefficients land in coeffs when requested.
  const auto orthogonalize = [&](Eigen::VectorXd& w, Eigen::Index k,
                                 Eigen::VectorXd* coeffs) {
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd h = V.leftCols(k).transpose() * w;
      w.noalias() -= V.leftCols(k) * h;
      if (coeffs) *coeffs += h;
    }
  };
  const auto fresh_direction = [&](Eigen::VectorXd& w, Eigen::Index k) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double norm = w.norm();
      if (norm > 1e-12) {
        w /= norm;
        return;
      }
      random_fill(w);
      orthogonalize(w, k, nullptr);
    }
    throw ConvergenceFailure("could not extend the Lanczos basis");
  };

  Eigen::VectorXd v0(n);
  random_fill(v0);
  v0.normalize();
  V.col(0) = v0;

  Eigen::Index j = 0;      // next column of the projected matrix to fill
  Eigen::Index kept = 0;   // columns carried over from the last restart
  while (true) {
    for (; j < m; ++j) {
      if (++matvecs > max_matvecs)
        throw ConvergenceFailure("eigensolver exceeded the iteration cap");
      W.col(j).noalias() = L * V.col(j);
      Eigen::VectorXd w = W.col(j);
      Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(j + 1);
      orthogonalize(w, j + 1, &coeffs);
      T.col(j).head(j + 1) = coeffs;
      if (j + 1 < m) {
        fresh_direction(w, j + 1);
        V.col(j + 1) = w;
      }
    }

    Eigen::MatrixXd Tsym = T.selfadjointView<Eigen::Upper>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tsym);
    if (es.info() != Eigen::Success)
      throw ConvergenceFailure("projected eigensolve failed");
    const Eigen::Index kk =
        std::min<Eigen::Index>(c + opts.keep_extra, m - 2);
    Eigen::MatrixXd X = V * es.eigenvectors().leftCols(kk);
    Eigen::MatrixXd WY = W * es.eigenvectors().leftCols(kk);

    Eigen::Index first_bad = -1;
    for (Eigen::Index i = 0; i < c; ++i) {
      const double theta = es.eigenvalues()[i];
      const double res = (WY.col(i) - theta * X.col(i)).norm();
      if (res > opts.tol * std::max(1.0, std::abs(theta))) {
        first_bad = i;
        break;
      }
    }
    if (first_bad < 0) {
      SpectralEmbedding out;
      out.values = es.eigenvalues().head(c);
      out.vectors = X.leftCols(c);
      apply_sign_convention(out.vectors);
      return out;
    }

    // Restart: the kept Ritz vectors become the new basis; expansion resumes
    // from the residual of the first unconverged pair.
    V.leftCols(kk) = X;
    W.leftCols(kk) = WY;
    T.setZero();
    T.diagonal().head(kk) = es.eigenvalues().head(kk);
    Eigen::VectorXd r =
        WY.col(first_bad) - es.eigenvalues()[first_bad] * X.col(first_bad);
    orthogonalize(r, kk, nullptr);
    fresh_direction(r, kk);
    V.col(kk) = r;
    kept = kk;
    j = kept;
  }
}

}  // namespace detail

// c eigenpairs of smallest eigenvalue for a symmetric matrix. The `scaled`
// field is left empty; use spectral_embed for graph embeddings.
inline SpectralEmbedding smallest_eigenpairs(const Eigen::MatrixXd& L, Eigen::Index c,
                                             const EigenOptions& opts = {}) {
  detail::check_symmetric(L);
  if (c < 1 || c > L.rows())
    throw InvalidConfig("need 1 <= c <= n for the eigensolver");
  if (L.rows() <= opts.dense_threshold) return detail::dense_smallest(L, c);
  return detail::lanczos_smallest(L, c, opts);
}

// Holds the Laplacian of one graph and hands out embeddings for any c,
// reusing previously computed eigenpairs. On the dense path one full
// decomposition serves every request; on the iterative path requests are
// solved with headroom so a sweep over c triggers few solves.
class SpectralCache {
 public:
  explicit SpectralCache(const SimilarityGraph& G, EigenOptions opts = {})
      : opts_(opts), laplacian_(laplacian(G)) {
    inv_sqrt_degree_ = G.degree.array().sqrt().inverse();
  }

  Eigen::Index n() const { return laplacian_.rows(); }
  int solver_invocations() const { return solver_invocations_; }
  const Eigen::MatrixXd& matrix() const { return laplacian_; }

  SpectralEmbedding embedding(Eigen::Index c) {
    if (c < 1 || c > n()) throw InvalidConfig("need 1 <= c <= n for the embedding");
    ensure_columns(c);
    SpectralEmbedding out;
    out.vectors = vectors_.leftCols(c);
    out.values = values_.head(c);
    out.scaled = inv_sqrt_degree_.asDiagonal() * out.vectors;
    return out;
  }

 private:
  void ensure_columns(Eigen::Index c) {
    if (c <= computed_) return;
    ++solver_invocations_;
    if (n() <= opts_.dense_threshold) {
      const SpectralEmbedding full = detail::dense_smallest(laplacian_, n());
      vectors_ = full.vectors;
      values_ = full.values;
      computed_ = n();
      return;
    }
    const Eigen::Index target = std::min<Eigen::Index>(n(), c + 8);
    const SpectralEmbedding part = detail::lanczos_smallest(laplacian_, target, opts_);
    vectors_ = part.vectors;
    values_ = part.values;
    computed_ = target;
  }

  EigenOptions opts_;
  Eigen::MatrixXd laplacian_;
  Eigen::VectorXd inv_sqrt_degree_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd values_;
  Eigen::Index computed_ = 0;
  int solver_invocations_ = 0;
};

// One-shot convenience: Laplacian eigenpairs of G plus the scaled rows.
inline SpectralEmbedding spectral_embed(const SimilarityGraph& G, Eigen::Index c,
                                        const EigenOptions& opts = {}) {
  SpectralCache cache(G, opts);
  return cache.embedding(c);
}

}  // namespace spuds
