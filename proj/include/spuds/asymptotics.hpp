// Monte Carlo harness for the large-sample behaviour of the scaled cut
// quantities. Samples are drawn from analytic densities with closed-form
// oracles, split by a hyperplane, and the scaled empirical statistics are
// compared against their limits across a grid of sample sizes.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "spuds/common.hpp"
#include "spuds/dataset.hpp"

namespace spuds {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// Hyperplane {x : normal . x = offset}; the negative side is
// {x : normal . x <= offset} (boundary points count as negative).
struct HalfspaceSurface {
  Eigen::VectorXd normal;
  double offset = 0.0;

  void validate() const {
    if (normal.size() < 1) throw InvalidConfig("surface normal is empty");
    if (std::abs(normal.norm() - 1.0) > 1e-12)
      throw InvalidConfig("surface normal must have unit length");
  }
  bool negative_side(const Eigen::RowVectorXd& x) const {
    return normal.dot(x) <= offset;
  }
};

inline HalfspaceSurface axis_surface(int dim, double offset) {
  HalfspaceSurface s;
  s.normal = Eigen::VectorXd::Zero(dim);
  s.normal[0] = 1.0;
  s.offset = offset;
  return s;
}

enum class Region { NegativeSide, PositiveSide, All };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::NegativeSide: return "negative";
    case Region::PositiveSide: return "positive";
    case Region::All: return "all";
  }
  return "unknown";
}

inline std::optional<Region> parse_region(const std::string& s) {
  if (s == "negative") return Region::NegativeSide;
  if (s == "positive") return Region::PositiveSide;
  if (s == "all") return Region::All;
  return std::nullopt;
}

// A probability density with a seeded sampler and closed-form oracles for the
// quantities the harness compares against: squared-density mass of halfspace
// regions, the squared-density integral over the splitting hyperplane, and
// region probabilities.
class DensityModel {
 public:
  virtual ~DensityModel() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual DataMatrix sample(Eigen::Index n, std::uint64_t seed) const = 0;
  virtual double density(const Eigen::RowVectorXd& x) const = 0;
  virtual double squared_mass(const HalfspaceSurface& S, Region r) const = 0;
  virtual double surface_squared_mass(const HalfspaceSurface& S) const = 0;
  virtual double region_prob(const HalfspaceSurface& S, Region r) const = 0;

 protected:
  void check_surface(const HalfspaceSurface& S) const {
    S.validate();
    if (S.normal.size() != dim()) throw DimensionMismatch("surface dimension mismatch");
  }
};

// Standard multivariate normal in d dimensions. Rotational symmetry makes
// every unit normal equivalent: the projection onto it is a standard normal.
class GaussianModel : public DensityModel {
 public:
  explicit GaussianModel(int d) : d_(d) {
    if (d < 1) throw InvalidConfig("dimension must be >= 1");
  }
  std::string name() const override { return "gauss" + std::to_string(d_) + "d"; }
  int dim() const override { return d_; }

  DataMatrix sample(Eigen::Index n, std::uint64_t seed) const override {
    SplitMix64 rng(seed);
    DataMatrix X;
    X.values.resize(n, d_);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int j = 0; j < d_; ++j) X.values(i, j) = rng.normal();
    return X;
  }

  double density(const Eigen::RowVectorXd& x) const override {
    return std::pow(2.0 * M_PI, -0.5 * d_) * std::exp(-0.5 * x.squaredNorm());
  }

  // int_{n.x <= b} p^2 = (4 pi)^(-d/2) Phi(b sqrt(2))
  double squared_mass(const HalfspaceSurface& S, Region r) const override {
    check_surface(S);
    const double total = std::pow(4.0 * M_PI, -0.5 * d_);
    switch (r) {
      case Region::NegativeSide: return total * normal_cdf(S.offset * std::sqrt(2.0));
      case Region::PositiveSide: return total * normal_cdf(-S.offset * std::sqrt(2.0));
      case Region::All: return total;
    }
    return total;
  }

  // oint_{n.x = b} p^2 = (2 pi)^(-d) pi^((d-1)/2) e^(-b^2)
  double surface_squared_mass(const HalfspaceSurface& S) const override {
    check_surface(S);
    return std::pow(2.0 * M_PI, -static_cast<double>(d_)) *
           std::pow(M_PI, 0.5 * (d_ - 1)) * std::exp(-S.offset * S.offset);
  }

  double region_prob(const HalfspaceSurface& S, Region r) const override {
    check_surface(S);
    switch (r) {
      case Region::NegativeSide: return normal_cdf(S.offset);
      case Region::PositiveSide: return normal_cdf(-S.offset);
      case Region::All: return 1.0;
    }
    return 1.0;
  }

 private:
  int d_;
};

// Equal-weight mixture of N(-separation/2, 1) and N(+separation/2, 1) on the
// line. Oracles use the Gaussian product identity
// int_{-inf}^t phi(x-a) phi(x-c) dx = e^(-(a-c)^2/4)/(2 sqrt(pi)) *
// Phi((t-(a+c)/2) sqrt(2)).
class GaussianMixture1D : public DensityModel {
 public:
  explicit GaussianMixture1D(double separation) : separation_(separation) {
    if (!(separation > 0.0)) throw InvalidConfig("separation must be positive");
  }
  std::string name() const override { return "gmm1d"; }
  int dim() const override { return 1; }
  double separation() const { return separation_; }

  DataMatrix sample(Eigen::Index n, std::uint64_t seed) const override {
    SplitMix64 rng(seed);
    DataMatrix X;
    X.values.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mean = rng.uniform() < 0.5 ? mean_a() : mean_b();
      X.values(i, 0) = mean + rng.normal();
    }
    return X;
  }

  double density(const Eigen::RowVectorXd& x) const override {
    return 0.5 * (normal_pdf(x[0] - mean_a()) + normal_pdf(x[0] - mean_b()));
  }

  double squared_mass(const HalfspaceSurface& S, Region r) const override {
    check_surface(S);
    return side_mass(S, r, [this](double t) { return sq_below(t); }, sq_total());
  }

  double surface_squared_mass(const HalfspaceSurface& S) const override {
    check_surface(S);
    Eigen::RowVectorXd x(1);
    x[0] = S.offset * S.normal[0];  // the single point with normal.x = offset
    const double p = density(x);
    return p * p;
  }

  double region_prob(const HalfspaceSurface& S, Region r) const override {
    check_surface(S);
    return side_mass(S, r, [this](double t) { return prob_below(t); }, 1.0);
  }

 private:
  double mean_a() const { return -0.5 * separation_; }
  double mean_b() const { return 0.5 * separation_; }

  static double cross_below(double a, double c, double t) {
    return std::exp(-0.25 * (a - c) * (a - c)) / (2.0 * std::sqrt(M_PI)) *
           normal_cdf((t - 0.5 * (a + c)) * std::sqrt(2.0));
  }
  double sq_below(double t) const {
    return 0.25 * (cross_below(mean_a(), mean_a(), t) +
                   2.0 * cross_below(mean_a(), mean_b(), t) +
                   cross_below(mean_b(), mean_b(), t));
  }
  double sq_total() const {
    return (1.0 + std::exp(-0.25 * separation_ * separation_)) / (4.0 * std::sqrt(M_PI));
  }
  double prob_below(double t) const {
    return 0.5 * (normal_cdf(t - mean_a()) + normal_cdf(t - mean_b()));
  }

  // Reduce a halfspace of the line to "mass below a threshold": with normal
  // +1 the negative side is x <= offset; with normal -1 it is x >= -offset.
  template <typename BelowFn>
  double side_mass(const HalfspaceSurface& S, Region r, BelowFn below, double total) const {
    const double neg =
        S.normal[0] > 0.0 ? below(S.offset) : total - below(-S.offset);
    switch (r) {
      case Region::NegativeSide: return neg;
      case Region::PositiveSide: return total - neg;
      case Region::All: return total;
    }
    return total;
  }

  double separation_;
};

// Uniform density on [0, 1]. The density is not Lipschitz at the edges, so
// the convergence theory does not cover it; it is included as a negative
// control and documented as such.
class UniformBox1D : public DensityModel {
 public:
  std::string name() const override { return "unibox1d"; }
  int dim() const override { return 1; }

  DataMatrix sample(Eigen::Index n, std::uint64_t seed) const override {
    SplitMix64 rng(seed);
    DataMatrix X;
    X.values.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) X.values(i, 0) = rng.uniform();
    return X;
  }

  double density(const Eigen::RowVectorXd& x) const override {
    return (x[0] >= 0.0 && x[0] <= 1.0) ? 1.0 : 0.0;
  }

  double squared_mass(const HalfspaceSurface& S, Region r) const override {
    check_surface(S);
    const auto below = [](double t) { return std::clamp(t, 0.0, 1.0); };
    const double neg =
        S.normal[0] > 0.0 ? below(S.offset) : 1.0 - below(-S.offset);
    switch (r) {
      case Region::NegativeSide: return neg;
      case Region::PositiveSide: return 1.0 - neg;
      case Region::All: return 1.0;
    }
    return 1.0;
  }

  double surface_squared_mass(const HalfspaceSurface& S) const override {
    check_surface(S);
    Eigen::RowVectorXd x(1);
    x[0] = S.offset * S.normal[0];
    const double p = density(x);
    return p * p;
  }

  double region_prob(const HalfspaceSurface& S, Region r) const override {
    return squared_mass(S, r);  // p = p^2 on the support
  }
};

// Registry used by the CLI; `separation` feeds the mixture model only.
inline std::unique_ptr<DensityModel> make_model(const std::string& name,
                                                double separation = 6.0) {
  if (name == "gauss1d") return std::make_unique<GaussianModel>(1);
  if (name == "gauss2d") return std::make_unique<GaussianModel>(2);
  if (name == "gmm1d") return std::make_unique<GaussianMixture1D>(separation);
  if (name == "unibox1d") return std::make_unique<UniformBox1D>();
  throw InvalidConfig("unknown model '" + name +
                      "'; valid models: gauss1d, gauss2d, gmm1d, unibox1d");
}

namespace detail {

// All pairwise kernel sums needed by the scaled statistics, accumulated in a
// single fixed-order upper-triangle pass with compensated summation.
// vol_* are ordered-pair sums (each unordered pair contributes to the side of
// both endpoints); cut counts each cross pair once.
struct PairSums {
  double vol_negative = 0.0;
  double vol_positive = 0.0;
  double cut = 0.0;
  Eigen::Index count_negative = 0;
  Eigen::Index count_positive = 0;
};

inline PairSums pair_sums(const DataMatrix& X, const HalfspaceSurface& S, double sigma) {
  S.validate();
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidSigma("sigma must be positive and finite");
  if (S.normal.size() != X.dim()) throw DimensionMismatch("surface dimension mismatch");

  const Eigen::Index n = X.n();
  std::vector<char> neg(static_cast<std::size_t>(n));
  PairSums out;
  for (Eigen::Index i = 0; i < n; ++i) {
    neg[static_cast<std::size_t>(i)] = S.negative_side(X.values.row(i));
    if (neg[static_cast<std::size_t>(i)])
      ++out.count_negative;
    else
      ++out.count_positive;
  }

  KahanSum vol_neg, vol_pos, cut;
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool ni = neg[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w =
          std::exp(-(X.values.row(i) - X.values.row(j)).squaredNorm() * inv_two_sigma_sq);
      if (ni)
        vol_neg.add(w);
      else
        vol_pos.add(w);
      if (neg[static_cast<std::size_t>(j)])
        vol_neg.add(w);
      else
        vol_pos.add(w);
      if (ni != neg[static_cast<std::size_t>(j)]) cut.add(w);
    }
  }
  out.vol_negative = vol_neg.value();
  out.vol_positive = vol_pos.value();
  out.cut = cut.value();
  return out;
}

inline double kernel_normalizer(int d) { return std::pow(2.0 * M_PI, -0.5 * d); }

}  // namespace detail

// (c_d / (n^2 sigma^d)) * sum_{i in M} sum_{j != i} k(||x_i - x_j|| / sigma).
// The full-space value is returned as the sum of the two side values so the
// three calls are exactly additive.
inline double scaled_volume_estimate(const DataMatrix& X, const HalfspaceSurface& S,
                                     Region region, double sigma) {
  const detail::PairSums sums = detail::pair_sums(X, S, sigma);
  const int d = static_cast<int>(X.dim());
  const double n = static_cast<double>(X.n());
  const double factor = detail::kernel_normalizer(d) / (n * n * std::pow(sigma, d));
  switch (region) {
    case Region::NegativeSide: return factor * sums.vol_negative;
    case Region::PositiveSide: return factor * sums.vol_positive;
    case Region::All: return factor * sums.vol_negative + factor * sums.vol_positive;
  }
  return 0.0;
}

// (c_d sqrt(2 pi) / (n^2 sigma^(d+1))) * cross-side kernel sum.
inline double scaled_cut_estimate(const DataMatrix& X, const HalfspaceSurface& S,
                                  double sigma) {
  const detail::PairSums sums = detail::pair_sums(X, S, sigma);
  if (sums.count_negative == 0 || sums.count_positive == 0)
    throw EmptySide("one side of the surface holds no sample points");
  const int d = static_cast<int>(X.dim());
  const double n = static_cast<double>(X.n());
  return detail::kernel_normalizer(d) * std::sqrt(2.0 * M_PI) /
         (n * n * std::pow(sigma, d + 1)) * sums.cut;
}

// (sqrt(2 pi) / sigma) * NCut of the two-sided split.
inline double scaled_ncut_estimate(const DataMatrix& X, const HalfspaceSurface& S,
                                   double sigma) {
  const detail::PairSums sums = detail::pair_sums(X, S, sigma);
  if (sums.count_negative == 0 || sums.count_positive == 0)
    throw EmptySide("one side of the surface holds no sample points");
  if (sums.vol_negative <= 0.0 || sums.vol_positive <= 0.0)
    throw ZeroVolumeCluster("a side has zero graph volume");
  const double ncut = sums.cut / sums.vol_negative + sums.cut / sums.vol_positive;
  return std::sqrt(2.0 * M_PI) / sigma * ncut;
}

// Cut statistic times (n/|left| + n/|right|); converges to the surface term
// weighted by inverse region probabilities.
inline double scaled_ratio_cut_estimate(const DataMatrix& X, const HalfspaceSurface& S,
                                        double sigma) {
  const detail::PairSums sums = detail::pair_sums(X, S, sigma);
  if (sums.count_negative == 0 || sums.count_positive == 0)
    throw EmptySide("one side of the surface holds no sample points");
  const int d = static_cast<int>(X.dim());
  const double n = static_cast<double>(X.n());
  const double cut_stat = detail::kernel_normalizer(d) * std::sqrt(2.0 * M_PI) /
                          (n * n * std::pow(sigma, d + 1)) * sums.cut;
  return cut_stat * (n / static_cast<double>(sums.count_negative) +
                     n / static_cast<double>(sums.count_positive));
}

enum class Statistic { Volume, Cut, NCut, RatioCut };

inline const char* statistic_name(Statistic s) {
  switch (s) {
    case Statistic::Volume: return "volume";
    case Statistic::Cut: return "cut";
    case Statistic::NCut: return "ncut";
    case Statistic::RatioCut: return "ratiocut";
  }
  return "unknown";
}

inline std::optional<Statistic> parse_statistic(const std::string& s) {
  if (s == "volume") return Statistic::Volume;
  if (s == "cut") return Statistic::Cut;
  if (s == "ncut") return Statistic::NCut;
  if (s == "ratiocut") return Statistic::RatioCut;
  return std::nullopt;
}

struct ConvergenceCell {
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double error = 0.0;
  bool ok = true;
  std::string message;  // set when the cell was skipped
};

struct ConvergenceSummary {
  Eigen::Index n = 0;
  double median_error = 0.0;
  double iqr = 0.0;
  int used = 0;
  int missing = 0;
};

struct ConvergenceRun {
  std::string model;
  std::string statistic;
  HalfspaceSurface surface;
  Region region = Region::NegativeSide;
  double alpha = 0.0;
  double target = 0.0;
  std::vector<ConvergenceCell> cells;
  std::vector<ConvergenceSummary> summary;
  int missing_cells = 0;
};

namespace detail {

// Type-7 quantile (the linear-interpolation default of most stats packages)
// over an ascending vector.
inline double quantile_sorted(const std::vector<double>& x, double p) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (x.size() == 1) return x[0];
  const double h = p * static_cast<double>(x.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return x[lo] + frac * (x[hi] - x[lo]);
}

}  // namespace detail

struct ConvergenceOptions {
  Region region = Region::NegativeSide;  // which side the volume statistic measures
  std::uint64_t base_seed = 0;
};

inline ConvergenceRun convergence_study(const DensityModel& model,
                                        const HalfspaceSurface& S, Statistic statistic,
                                        const std::vector<Eigen::Index>& n_grid, int seeds,
                                        double alpha, const ConvergenceOptions& opts = {}) {
  S.validate();
  if (S.normal.size() != model.dim()) throw DimensionMismatch("surface dimension mismatch");
  if (n_grid.empty()) throw InvalidConfig("n_grid must be non-empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw InvalidConfig("n_grid entries must be >= 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw InvalidConfig("n_grid must be strictly ascending");
  }
  if (seeds < 1) throw InvalidConfig("seeds must be >= 1");
  const double alpha_cap = 1.0 / (2.0 * model.dim() + 2.0);
  if (!(alpha > 0.0) || alpha >= alpha_cap)
    throw InvalidConfig(
        "alpha must satisfy 0 < alpha < 1/(2d+2) = " + std::to_string(alpha_cap) +
        " so that n * sigma_n^(2d+2+eps) diverges for some eps > 0");

  ConvergenceRun run;
  run.model = model.name();
  run.statistic = statistic_name(statistic);
  run.surface = S;
  run.region = opts.region;
  run.alpha = alpha;
  switch (statistic) {
    case Statistic::Volume:
      run.target = model.squared_mass(S, opts.region);
      break;
    case Statistic::Cut:
      run.target = model.surface_squared_mass(S);
      break;
    case Statistic::NCut: {
      const double neg = model.squared_mass(S, Region::NegativeSide);
      const double pos = model.squared_mass(S, Region::PositiveSide);
      if (neg <= 0.0 || pos <= 0.0)
        throw EmptySide("the surface leaves one side with no squared-density mass");
      run.target = model.surface_squared_mass(S) * (1.0 / neg + 1.0 / pos);
      break;
    }
    case Statistic::RatioCut: {
      const double neg = model.region_prob(S, Region::NegativeSide);
      const double pos = model.region_prob(S, Region::PositiveSide);
      if (neg <= 0.0 || pos <= 0.0)
        throw EmptySide("the surface leaves one side with no probability mass");
      run.target = model.surface_squared_mass(S) * (1.0 / neg + 1.0 / pos);
      break;
    }
  }

  for (Eigen::Index n : n_grid) {
    std::vector<double> errors;
    int missing = 0;
    for (int s = 0; s < seeds; ++s) {
      ConvergenceCell cell;
      cell.n = n;
      cell.seed = mix_seed(opts.base_seed,
                           mix_seed(static_cast<std::uint64_t>(n),
                                    static_cast<std::uint64_t>(s)));
      const double sigma = std::pow(static_cast<double>(n), -alpha);
      try {
        const DataMatrix X = model.sample(n, cell.seed);
        switch (statistic) {
          case Statistic::Volume:
            cell.estimate = scaled_volume_estimate(X, S, opts.region, sigma);
            break;
          case Statistic::Cut:
            cell.estimate = scaled_cut_estimate(X, S, sigma);
            break;
          case Statistic::NCut:
            cell.estimate = scaled_ncut_estimate(X, S, sigma);
            break;
          case Statistic::RatioCut:
            cell.estimate = scaled_ratio_cut_estimate(X, S, sigma);
            break;
        }
        cell.error = std::abs(cell.estimate - run.target);
        errors.push_back(cell.error);
      } catch (const EmptySide& e) {
        cell.ok = false;
        cell.message = e.what();
        ++missing;
        ++run.missing_cells;
      }
      run.cells.push_back(std::move(cell));
    }
    std::sort(errors.begin(), errors.end());
    ConvergenceSummary sum;
    sum.n = n;
    sum.used = static_cast<int>(errors.size());
    sum.missing = missing;
    sum.median_error = detail::quantile_sorted(errors, 0.5);
    sum.iqr = errors.empty() ? std::numeric_limits<double>::quiet_NaN()
                             : detail::quantile_sorted(errors, 0.75) -
                                   detail::quantile_sorted(errors, 0.25);
    run.summary.push_back(sum);
  }
  return run;
}

// JSON document: {model, surface, statistic, alpha, target, cells, summary}.
// Skipped cells carry null estimate/error plus a message; non-finite summary
// values serialize as null.
inline nlohmann::json to_json(const ConvergenceRun& run) {
  nlohmann::json j;
  j["model"] = run.model;
  j["surface"] = {{"normal", std::vector<double>(run.surface.normal.data(),
                                                 run.surface.normal.data() +
                                                     run.surface.normal.size())},
                  {"offset", run.surface.offset}};
  j["statistic"] = run.statistic;
  j["region"] = region_name(run.region);
  j["alpha"] = run.alpha;
  j["target"] = run.target;
  j["missing_cells"] = run.missing_cells;
  j["cells"] = nlohmann::json::array();
  for (const ConvergenceCell& c : run.cells) {
    nlohmann::json jc;
    jc["n"] = c.n;
    jc["seed"] = c.seed;
    if (c.ok) {
      jc["estimate"] = c.estimate;
      jc["error"] = c.error;
    } else {
      jc["estimate"] = nullptr;
      jc["error"] = nullptr;
      jc["message"] = c.message;
    }
    j["cells"].push_back(jc);
  }
  j["summary"] = nlohmann::json::array();
  for (const ConvergenceSummary& s : run.summary) {
    nlohmann::json js;
    js["n"] = s.n;
    js["median_error"] =
        std::isfinite(s.median_error) ? nlohmann::json(s.median_error) : nlohmann::json();
    js["iqr"] = std::isfinite(s.iqr) ? nlohmann::json(s.iqr) : nlohmann::json();
    js["used"] = s.used;
    js["missing"] = s.missing;
    j["summary"].push_back(js);
  }
  return j;
}

// One row per cell; skipped cells keep their seed but leave the numeric
// columns empty.
inline std::string cells_csv(const ConvergenceRun& run) {
  std::ostringstream out;
  out << "n,seed,estimate,error,ok\n";
  out.precision(17);
  for (const ConvergenceCell& c : run.cells) {
    out << c.n << ',' << c.seed << ',';
    if (c.ok)
      out << c.estimate << ',' << c.error << ",1\n";
    else
      out << ",,0\n";
  }
  return out.str();
}

}  // namespace spuds
