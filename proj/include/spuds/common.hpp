// Shared basics: error types, deterministic RNG, compensated summation,
// thread-count control.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace spuds {

inline constexpr std::string_view kVersion = "0.1.0";

// Points and embeddings are stored row-major: one row per observation.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error { public: using Error::Error; };
class EmptyData : public Error { public: using Error::Error; };
class DimensionMismatch : public Error { public: using Error::Error; };
class DegenerateData : public Error { public: using Error::Error; };
class InvalidSigma : public Error { public: using Error::Error; };
class IsolatedVertex : public Error { public: using Error::Error; };
class ZeroVolumeCluster : public Error { public: using Error::Error; };
class RequiresTwoClusters : public Error { public: using Error::Error; };
class NonSymmetric : public Error { public: using Error::Error; };
class ConvergenceFailure : public Error { public: using Error::Error; };
class EmptyCluster : public Error { public: using Error::Error; };
class AllOutliers : public Error { public: using Error::Error; };
class EmptySide : public Error { public: using Error::Error; };
class LengthMismatch : public Error { public: using Error::Error; };
class InvalidConfig : public Error { public: using Error::Error; };

// SplitMix64: counter-based generator (state advances by a fixed odd
// increment, output is a bijective hash of the counter). Fully specified
// here so sequences are identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe as a log() argument.
  double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  // Uniform index in [0, n) via the multiply-high range reduction.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // One standard normal draw (Box-Muller, cosine branch; two uniforms
  // consumed per call).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double theta = 2.0 * M_PI * uniform();
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
};

// Order-sensitive seed combiner used to derive per-(seed, c) and
// per-restart streams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
  g.next();
  return g.next() ^ b;
}

// Kahan compensated accumulator for long pair sums.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }

  double value() const { return sum; }
};

namespace detail {
inline std::atomic<int>& thread_cap() {
  static std::atomic<int> cap{0};  // 0 = use hardware_concurrency
  return cap;
}
}  // namespace detail

inline void set_max_threads(int t) { detail::thread_cap().store(t > 0 ? t : 0); }

inline int max_threads() {
  const int cap = detail::thread_cap().load();
  if (cap > 0) return cap;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(begin, end) over contiguous index blocks, one block per worker.
// Workers write to disjoint outputs, so results do not depend on the
// thread count.
template <typename Fn>
void parallel_blocks(std::size_t total, Fn&& fn) {
  if (total == 0) return;
  const int workers = std::min<std::size_t>(std::max(1, max_threads()), total);
  if (workers <= 1) {
    fn(std::size_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = static_cast<std::size_t>(w) * chunk;
    const std::size_t end = std::min(total, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace spuds
