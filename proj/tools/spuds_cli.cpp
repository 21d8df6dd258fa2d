// Command-line front-end: cluster CSV datasets, score clusterings with NMI,
// and run the asymptotic convergence harness. Emits machine-readable JSON.
//
// Exit codes: 0 success, 1 error, 2 success with warnings (single-cluster
// fallback or the cluster-count cap was hit).

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spuds/all.hpp"

namespace {

using nlohmann::json;

struct ClusterArgs {
  std::string input;
  bool has_header = false;
  int label_column = -1;  // -1 = none
  std::uint64_t seed = 0;
  double sigma = 0.0;  // 0 = automatic
  int c0 = 30;
  double lambda = 1.0;
  double gamma_frac = 1.0 / 200.0;
  int step = 1;
  int c_max = 0;  // 0 = automatic
  long long subsample = 0;  // 0 = use every row
  int threads = 0;          // 0 = all available cores
  std::string output;       // empty = stdout
};

json cluster_config_echo(const ClusterArgs& a) {
  json j;
  j["input"] = a.input;
  j["has_header"] = a.has_header;
  j["label_column"] = a.label_column >= 0 ? json(a.label_column) : json();
  j["seed"] = a.seed;
  j["sigma"] = a.sigma > 0.0 ? json(a.sigma) : json();
  j["c0"] = a.c0;
  j["lambda"] = a.lambda;
  j["gamma_frac"] = a.gamma_frac;
  j["step"] = a.step;
  j["c_max"] = a.c_max > 0 ? json(a.c_max) : json();
  j["subsample"] = a.subsample > 0 ? json(a.subsample) : json();
  j["threads"] = a.threads;
  return j;
}

json witness_json(const spuds::SeparationWitness& w) {
  return json{{"boundary_index", w.boundary_index},
              {"neighbor_index", w.neighbor_index},
              {"gamma", w.gamma},
              {"density", w.density}};
}

json trace_json(const std::vector<spuds::TraceEntry>& trace) {
  json out = json::array();
  for (const spuds::TraceEntry& e : trace) {
    json verdicts = json::array();
    for (const spuds::ClusterVerdict& v : e.verdicts) {
      json jv{{"cluster", v.cluster_id},
              {"size", v.size},
              {"outlier", v.outlier},
              {"checked", v.checked}};
      if (v.checked) {
        jv["separated"] = v.separated;
        if (v.witness) jv["witness"] = witness_json(*v.witness);
      }
      verdicts.push_back(jv);
    }
    out.push_back(json{{"c", e.c},
                       {"sizes", e.sizes},
                       {"all_separated", e.all_separated},
                       {"verdicts", verdicts}});
  }
  return out;
}

json timings_json(const spuds::SpudsTimings& t, double total_seconds) {
  json eig = json::array();
  for (const auto& [c, s] : t.eigensolve_seconds) eig.push_back({{"c", c}, {"seconds", s}});
  json km = json::array();
  for (const auto& [c, s] : t.kmeans_seconds) km.push_back({{"c", c}, {"seconds", s}});
  return json{{"graph_build_seconds", t.graph_build_seconds},
              {"eigensolve", eig},
              {"kmeans", km},
              {"separation_seconds", t.separation_seconds},
              {"merge_seconds", t.merge_seconds},
              {"total_seconds", total_seconds}};
}

void emit(const json& doc, const std::string& output) {
  if (output.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(output);
  if (!out) throw spuds::Error("cannot write to " + output);
  out << doc.dump(2) << "\n";
}

int run_cluster(const ClusterArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  spuds::set_max_threads(a.threads);

  std::optional<int> label_column;
  if (a.label_column >= 0) label_column = a.label_column;
  auto [X, labels] = spuds::load_csv(a.input, label_column, a.has_header);

  std::vector<long long> kept;
  if (a.subsample > 0 && a.subsample < X.n()) {
    // Uniform draw without replacement (partial Fisher-Yates), rows kept in
    // their original order.
    std::vector<long long> idx(static_cast<std::size_t>(X.n()));
    std::iota(idx.begin(), idx.end(), 0);
    spuds::SplitMix64 rng(
        spuds::mix_seed(a.seed, static_cast<std::uint64_t>(a.subsample)));
    for (long long i = 0; i < a.subsample; ++i) {
      const std::size_t j = static_cast<std::size_t>(i) +
                            rng.uniform_index(idx.size() - static_cast<std::size_t>(i));
      std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
    }
    kept.assign(idx.begin(), idx.begin() + a.subsample);
    std::sort(kept.begin(), kept.end());

    spuds::DataMatrix sub;
    sub.values.resize(a.subsample, X.dim());
    for (long long r = 0; r < a.subsample; ++r)
      sub.values.row(r) = X.values.row(kept[static_cast<std::size_t>(r)]);
    X = std::move(sub);
    if (labels) {
      std::vector<long long> sub_labels;
      for (long long i : kept)
        sub_labels.push_back(labels->labels[static_cast<std::size_t>(i)]);
      labels = spuds::canonicalize_labels(sub_labels);
    }
  }

  spuds::SpudsConfig cfg;
  cfg.c0 = a.c0;
  cfg.lambda = a.lambda;
  cfg.gamma_frac = a.gamma_frac;
  cfg.step = a.step;
  cfg.c_max = a.c_max;
  if (a.sigma > 0.0) cfg.sigma_override = a.sigma;
  cfg.seed = a.seed;

  const spuds::SpudsResult result = spuds::spuds_cluster(X, cfg);
  const double total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json doc;
  doc["version"] = spuds::kVersion;
  doc["command"] = "cluster";
  doc["config"] = cluster_config_echo(a);
  doc["resolved"] = {
      {"n", X.n()},
      {"d", X.dim()},
      {"sigma", result.sigma},
      {"s_value", result.scale ? json(result.scale->s_value) : json()},
      {"intrinsic_dim", result.scale ? json(result.scale->intrinsic_dim) : json()},
      {"gamma", result.gamma},
      {"c_max", cfg.resolved_c_max(X.n())},
  };
  if (!kept.empty()) doc["subsample_indices"] = kept;

  json warnings = json::array();
  for (spuds::SpudsWarning w : result.warnings) warnings.push_back(spuds::warning_name(w));
  json merges = json::array();
  for (const auto& [o, into] : result.merges) merges.push_back({{"outlier", o}, {"into", into}});

  doc["result"] = {{"selected_c", result.selected_c},
                   {"cluster_count", result.partition.cluster_count},
                   {"assignment", result.partition.assignment},
                   {"warnings", warnings},
                   {"merges", merges},
                   {"trace", trace_json(result.trace)},
                   {"solver_invocations", result.solver_invocations}};
  if (labels) doc["nmi"] = spuds::nmi(result.partition.assignment, labels->labels);
  doc["timings"] = timings_json(result.timings, total_seconds);

  emit(doc, a.output);
  return result.warnings.empty() ? 0 : 2;
}

int run_nmi(const std::string& pred_path, const std::string& truth_path) {
  const std::vector<long long> pred_raw = spuds::load_label_file(pred_path);
  const std::vector<long long> truth_raw = spuds::load_label_file(truth_path);
  const spuds::LabelVector pred = spuds::canonicalize_labels(pred_raw);
  const spuds::LabelVector truth = spuds::canonicalize_labels(truth_raw);
  std::printf("%.6f\n", spuds::nmi(pred, truth));
  return 0;
}

struct AsymptoticsArgs {
  std::string model = "gauss1d";
  double surface_offset = 0.0;
  std::string statistic = "ncut";
  std::vector<long long> n_grid;
  int seeds = 10;
  double alpha = 0.2;
  std::string side = "negative";
  double separation = 6.0;
  std::uint64_t base_seed = 0;
  std::string output;  // prefix for .json/.csv; empty = JSON to stdout
};

int run_asymptotics(const AsymptoticsArgs& a) {
  const std::unique_ptr<spuds::DensityModel> model =
      spuds::make_model(a.model, a.separation);
  const std::optional<spuds::Statistic> stat = spuds::parse_statistic(a.statistic);
  if (!stat)
    throw spuds::InvalidConfig("unknown statistic '" + a.statistic +
                               "'; valid statistics: volume, cut, ncut, ratiocut");
  const std::optional<spuds::Region> region = spuds::parse_region(a.side);
  if (!region)
    throw spuds::InvalidConfig("unknown side '" + a.side +
                               "'; valid sides: negative, positive, all");
  if (a.n_grid.empty()) throw spuds::InvalidConfig("--n-grid must list sample sizes");

  const spuds::HalfspaceSurface S = spuds::axis_surface(model->dim(), a.surface_offset);
  std::vector<Eigen::Index> n_grid(a.n_grid.begin(), a.n_grid.end());
  spuds::ConvergenceOptions opts;
  opts.region = *region;
  opts.base_seed = a.base_seed;

  const spuds::ConvergenceRun run =
      spuds::convergence_study(*model, S, *stat, n_grid, a.seeds, a.alpha, opts);
  const json doc = spuds::to_json(run);

  if (a.output.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream js(a.output + ".json");
    if (!js) throw spuds::Error("cannot write to " + a.output + ".json");
    js << doc.dump(2) << "\n";
    std::ofstream cs(a.output + ".csv");
    if (!cs) throw spuds::Error("cannot write to " + a.output + ".csv");
    cs << spuds::cells_csv(run);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral clustering with automatic scale and cluster-count selection"};
  app.require_subcommand(1);

  ClusterArgs ca;
  CLI::App* cluster = app.add_subcommand("cluster", "cluster a CSV dataset");
  cluster->add_option("--input", ca.input, "CSV file, one sample per row")->required();
  cluster->add_flag("--has-header", ca.has_header, "skip the first CSV line");
  cluster->add_option("--label-column", ca.label_column,
                      "0-based column holding ground-truth labels (enables NMI)");
  cluster->add_option("--seed", ca.seed, "random seed (default 0)");
  cluster->add_option("--sigma", ca.sigma, "override the automatic kernel scale");
  cluster->add_option("--c0", ca.c0, "initial cluster count (default 30)");
  cluster->add_option("--lambda", ca.lambda, "separation threshold multiplier in (0,1]");
  cluster->add_option("--gamma-frac", ca.gamma_frac,
                      "outlier-cluster size threshold as a fraction of n (default 1/200)");
  cluster->add_option("--step", ca.step, "ascent stride; >1 enables fine-tuning");
  cluster->add_option("--c-max", ca.c_max, "cluster-count cap (default min(n-1, 100))");
  cluster->add_option("--subsample", ca.subsample,
                      "draw this many rows uniformly without replacement");
  cluster->add_option("--threads", ca.threads, "cap on worker threads (0 = all cores)");
  cluster->add_option("--output", ca.output, "write the JSON report here instead of stdout");

  std::string pred_path, truth_path;
  CLI::App* nmi_cmd = app.add_subcommand("nmi", "normalised mutual information of two labelings");
  nmi_cmd->add_option("--pred", pred_path, "label file, one integer per line")->required();
  nmi_cmd->add_option("--truth", truth_path, "label file, one integer per line")->required();

  AsymptoticsArgs aa;
  CLI::App* asym = app.add_subcommand("asymptotics", "convergence study of scaled cut statistics");
  asym->add_option("--model", aa.model, "density model: gauss1d, gauss2d, gmm1d, unibox1d");
  asym->add_option("--surface-offset", aa.surface_offset, "hyperplane offset along the first axis");
  asym->add_option("--statistic", aa.statistic, "volume, cut, ncut, or ratiocut");
  asym->add_option("--n-grid", aa.n_grid, "comma-separated ascending sample sizes")
      ->delimiter(',')
      ->required();
  asym->add_option("--seeds", aa.seeds, "Monte Carlo repetitions per sample size");
  asym->add_option("--alpha", aa.alpha, "scale exponent: sigma_n = n^(-alpha)");
  asym->add_option("--side", aa.side, "region for the volume statistic: negative, positive, all");
  asym->add_option("--separation", aa.separation, "mixture mean separation (gmm1d only)");
  asym->add_option("--base-seed", aa.base_seed, "base seed for per-cell seed derivation");
  asym->add_option("--output", aa.output, "file prefix; writes <prefix>.json and <prefix>.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cluster->parsed()) return run_cluster(ca);
    if (nmi_cmd->parsed()) return run_nmi(pred_path, truth_path);
    if (asym->parsed()) return run_asymptotics(aa);
  } catch (const spuds::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
