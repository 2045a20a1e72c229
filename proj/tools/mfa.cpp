// Batch front end for manifold approximation with flats: dataset generation,
// greedy tangent-based clustering, evaluation, flat-feature classification,
// and runtime benchmarking.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mfa/classify.hpp"
#include "mfa/clustering.hpp"
#include "mfa/dataset.hpp"
#include "mfa/flats.hpp"
#include "mfa/graph.hpp"
#include "mfa/grassmann.hpp"

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

mfa::MatrixFormat parse_format(const std::string& name) {
  if (name == "csv") return mfa::MatrixFormat::kCsv;
  if (name == "raw-f64") return mfa::MatrixFormat::kRawF64;
  throw std::invalid_argument("unknown format '" + name + "'");
}

mfa::DissimilarityMode parse_mode(const std::string& name) {
  if (name == "bound") return mfa::DissimilarityMode::kBound;
  if (name == "exact") return mfa::DissimilarityMode::kExact;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

void warn_neighbor_count(int k, Eigen::Index m) {
  const double lo = 0.005 * static_cast<double>(m);
  const double hi = 0.02 * static_cast<double>(m);
  if (k < lo || k > hi)
    std::cerr << "warning: k = " << k << " is outside 0.5%-2% of m = " << m
              << " (recommended range " << lo << ".." << hi << ")\n";
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_json(const json& value, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << value.dump(2) << '\n';
}

void write_labels_csv(const std::vector<int>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "sample_index,cluster_label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

std::vector<int> read_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "sample_index,cluster_label")
    throw std::runtime_error("labels file " + path + ": bad or missing header");
  std::vector<int> labels;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("labels file " + path + ": malformed row " +
                               std::to_string(expected));
    const std::size_t index = std::stoull(line.substr(0, comma));
    if (index != expected)
      throw std::runtime_error("labels file " + path + ": non-contiguous sample index");
    labels.push_back(std::stoi(line.substr(comma + 1)));
    ++expected;
  }
  if (labels.empty()) throw std::runtime_error("labels file " + path + ": no rows");
  return labels;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string kind = "swiss-roll";
  std::int64_t count = 5000;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string output;
  std::string format = "raw-f64";
};

int cmd_generate(const GenerateArgs& args) {
  mfa::SampleSet samples;
  if (args.kind == "swiss-roll")
    samples = mfa::gen_swiss_roll(args.count, args.noise, args.seed);
  else if (args.kind == "s-curve")
    samples = mfa::gen_s_curve(args.count, args.noise, args.seed);
  else
    throw std::invalid_argument("unknown kind '" + args.kind + "'");
  mfa::save_matrix(samples, args.output, parse_format(args.format));
  std::cerr << "wrote " << samples.count() << " samples in R^" << samples.dim()
            << " to " << args.output << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// approximate

struct ApproximateArgs {
  std::string input;
  std::string format = "raw-f64";
  int k = 15;
  int clusters = 12;
  std::int64_t dim = 2;
  std::string mode = "bound";
  std::uint64_t seed = 0;
  int threads = 0;
  std::string labels_out;
  std::string flats_out;
  std::string manifest_out;
  std::string dump_graph;
};

json approximate_config(const ApproximateArgs& args) {
  return json{{"command", "approximate"}, {"input", args.input},
              {"format", args.format},    {"k", args.k},
              {"clusters", args.clusters},{"dim", args.dim},
              {"mode", args.mode},        {"seed", args.seed},
              {"threads", args.threads},  {"labels_out", args.labels_out},
              {"flats_out", args.flats_out}, {"manifest_out", args.manifest_out}};
}

int cmd_approximate(const ApproximateArgs& args) {
  const auto start = Clock::now();
  const mfa::SampleSet samples = mfa::load_matrix(args.input, parse_format(args.format));
  warn_neighbor_count(args.k, samples.count());

  mfa::AcdtOptions options;
  options.mode = parse_mode(args.mode);
  options.threads = args.threads;
  options.on_merge = [](int merges, int left) {
    if (merges % 100 == 0) std::cerr << "merged " << merges << ", " << left << " clusters left\n";
  };

  const mfa::NeighborGraph graph = mfa::build_knn_graph(samples, args.k, args.threads);
  if (!args.dump_graph.empty()) mfa::save_edge_list(graph, args.dump_graph);
  const std::vector<mfa::TangentBasis> tangents =
      mfa::estimate_tangents(samples, graph, args.dim, args.threads);
  const mfa::AcdtResult result = mfa::acdt(graph, tangents, args.clusters, options);

  const std::vector<mfa::Flat> flats = mfa::fit_flats(samples, result.partition, args.dim);
  const double error = mfa::msre(samples, result.partition.labels, flats);

  write_labels_csv(result.partition.labels, args.labels_out);
  if (!args.flats_out.empty()) mfa::save_flats(flats, args.flats_out);

  json manifest;
  manifest["config"] = approximate_config(args);
  manifest["objective"] = result.partition.objective();
  manifest["msre"] = error;
  manifest["iterations"] = result.iterations;
  json sizes = json::array();
  for (const mfa::Cluster& cluster : result.partition.clusters) sizes.push_back(cluster.size());
  manifest["cluster_sizes"] = sizes;
  manifest["wall_time_s"] = seconds_since(start);
  write_json(manifest, args.manifest_out);

  std::cerr << "objective " << result.partition.objective() << ", msre " << error << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string input;
  std::string format = "raw-f64";
  std::string labels;
  std::string flats;
  std::string output;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const mfa::SampleSet samples = mfa::load_matrix(args.input, parse_format(args.format));
  const std::vector<int> labels = read_labels_csv(args.labels);
  if (static_cast<Eigen::Index>(labels.size()) != samples.count())
    throw std::runtime_error("labels row count " + std::to_string(labels.size()) +
                             " does not match sample count " +
                             std::to_string(samples.count()));
  const std::vector<mfa::Flat> flats = mfa::load_flats(args.flats);

  const double error = mfa::msre(samples, labels, flats);

  std::vector<std::int64_t> sizes(flats.size(), 0);
  std::vector<double> residual_sum(flats.size(), 0.0);
  std::vector<double> residual_max(flats.size(), 0.0);
  for (Eigen::Index i = 0; i < samples.count(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    const double residual = mfa::residual_distance(flats[static_cast<std::size_t>(label)],
                                                   samples.data.row(i).transpose());
    ++sizes[static_cast<std::size_t>(label)];
    residual_sum[static_cast<std::size_t>(label)] += residual;
    residual_max[static_cast<std::size_t>(label)] =
        std::max(residual_max[static_cast<std::size_t>(label)], residual);
  }

  json metrics;
  metrics["msre"] = error;
  metrics["sample_count"] = samples.count();
  metrics["cluster_count"] = flats.size();
  json clusters = json::array();
  for (std::size_t c = 0; c < flats.size(); ++c)
    clusters.push_back({{"label", c},
                        {"size", sizes[c]},
                        {"mean_residual", sizes[c] ? residual_sum[c] / double(sizes[c]) : 0.0},
                        {"max_residual", residual_max[c]}});
  metrics["clusters"] = clusters;
  write_json(metrics, args.output);
  std::cerr << "msre " << error << " over " << samples.count() << " samples\n";
  return 0;
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyArgs {
  std::string train_images, train_labels, test_images, test_labels;
  int flats_per_class = 10;
  int k = 20;
  std::int64_t dim = 4;
  std::int64_t cap_per_class = 2000;
  std::int64_t test_cap_per_class = 0;  // 0 = use every test sample
  std::int64_t pca_dims = 100;
  std::string mode = "bound";
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output;
};

double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth) {
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < predicted.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

mfa::SampleSet flatten_class_map(const std::map<int, mfa::SampleSet>& per_class) {
  Eigen::Index total = 0;
  Eigen::Index dim = 0;
  for (const auto& [label, set] : per_class) {
    total += set.count();
    dim = set.dim();
  }
  mfa::SampleSet out;
  out.data.resize(total, dim);
  out.labels.emplace(total);
  Eigen::Index w = 0;
  for (const auto& [label, set] : per_class)
    for (Eigen::Index i = 0; i < set.count(); ++i, ++w) {
      out.data.row(w) = set.data.row(i);
      (*out.labels)[w] = label;
    }
  return out;
}

int cmd_classify(const ClassifyArgs& args) {
  const auto start = Clock::now();
  const mfa::SampleSet train_all = mfa::load_idx(args.train_images, args.train_labels);
  const mfa::SampleSet test_all = mfa::load_idx(args.test_images, args.test_labels);

  const auto train_split = mfa::split_by_class(train_all, args.cap_per_class, args.seed);
  const mfa::SampleSet train = flatten_class_map(train_split);
  mfa::SampleSet test = test_all;
  if (args.test_cap_per_class > 0)
    test = flatten_class_map(
        mfa::split_by_class(test_all, args.test_cap_per_class, args.seed + 500009));

  warn_neighbor_count(args.k, train_split.begin()->second.count());
  std::cerr << "training on " << train.count() << " samples, testing on "
            << test.count() << "\n";

  mfa::TrainConfig config;
  config.flats_per_class = args.flats_per_class;
  config.k = args.k;
  config.d = args.dim;
  config.mode = parse_mode(args.mode);
  config.threads = args.threads;
  const mfa::FlatFeatureModel model = mfa::train_flat_model(train_split, config);

  const mfa::Matrix train_features = mfa::featurize_all(model, train.data, args.threads);
  const mfa::Matrix test_features = mfa::featurize_all(model, test.data, args.threads);
  const Eigen::VectorXi feature_pred =
      mfa::predict_nn_all(train_features, *train.labels, test_features, args.threads);

  const Eigen::VectorXi original_pred =
      mfa::predict_nn_all(train.data, *train.labels, test.data, args.threads);

  const mfa::PcaProjector projector = mfa::pca_fit(train.data, args.pca_dims);
  const Eigen::VectorXi pca_pred =
      mfa::predict_nn_all(mfa::pca_transform(projector, train.data), *train.labels,
                          mfa::pca_transform(projector, test.data), args.threads);

  std::filesystem::create_directories(args.output);
  mfa::save_model(model, std::filesystem::path(args.output) / "model");

  std::ofstream pred_out(std::filesystem::path(args.output) / "predictions.csv");
  if (!pred_out) throw std::runtime_error("cannot write predictions.csv");
  pred_out << "index,true,predicted\n";
  for (Eigen::Index i = 0; i < test.count(); ++i)
    pred_out << i << ',' << (*test.labels)[i] << ',' << feature_pred[i] << '\n';

  json report;
  report["config"] = {{"command", "classify"},
                      {"train_images", args.train_images},
                      {"train_labels", args.train_labels},
                      {"test_images", args.test_images},
                      {"test_labels", args.test_labels},
                      {"flats_per_class", args.flats_per_class},
                      {"k", args.k},
                      {"dim", args.dim},
                      {"cap_per_class", args.cap_per_class},
                      {"test_cap_per_class", args.test_cap_per_class},
                      {"pca_dims", args.pca_dims},
                      {"mode", args.mode},
                      {"seed", args.seed},
                      {"threads", args.threads},
                      {"output", args.output}};
  report["train_count"] = train.count();
  report["test_count"] = test.count();
  report["feature_dim"] = model.feature_dim();
  report["feature_space_accuracy"] = accuracy(feature_pred, *test.labels);
  report["original_space_accuracy"] = accuracy(original_pred, *test.labels);
  report["pca_space_accuracy"] = accuracy(pca_pred, *test.labels);
  report["wall_time_s"] = seconds_since(start);
  write_json(report, (std::filesystem::path(args.output) / "report.json").string());

  std::cerr << "feature space " << report["feature_space_accuracy"] << ", original "
            << report["original_space_accuracy"] << ", pca "
            << report["pca_space_accuracy"] << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::vector<std::int64_t> sizes = {500, 1000, 2000, 4000};
  int trials = 1;
  std::uint64_t seed = 0;
  int k = 15;
  int clusters = 12;
  std::int64_t dim = 2;
  std::string mode = "bound";
  std::string output;
};

int cmd_bench(const BenchArgs& args) {
  if (args.trials < 1) throw std::invalid_argument("bench: trials must be >= 1");
  std::vector<std::int64_t> sizes = args.sizes;
  std::sort(sizes.begin(), sizes.end());

  std::ofstream out(args.output);
  if (!out) throw std::runtime_error("cannot write " + args.output);
  out << "n,seconds\n";
  out.precision(6);

  mfa::AcdtOptions options;
  options.mode = parse_mode(args.mode);
  for (std::int64_t n : sizes) {
    for (int trial = 0; trial < args.trials; ++trial) {
      const std::uint64_t seed =
          args.seed + 7919u * static_cast<std::uint64_t>(trial) + static_cast<std::uint64_t>(n);
      const mfa::SampleSet samples = mfa::gen_swiss_roll(n, 0.0, seed);
      const auto start = Clock::now();
      const mfa::AcdtResult result = mfa::acdt(samples, args.k, args.clusters, args.dim, options);
      const double elapsed = seconds_since(start);
      out << n << ',' << std::fixed << elapsed << '\n';
      out.flush();
      std::cerr << "n=" << n << " trial=" << trial << " " << elapsed << "s ("
                << result.partition.cluster_count() << " clusters)\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold approximation with low-dimensional flats"};
  app.require_subcommand(1);

  GenerateArgs generate_args;
  CLI::App* generate = app.add_subcommand("generate", "Generate a synthetic manifold sample");
  generate->add_option("--kind", generate_args.kind, "swiss-roll or s-curve");
  generate->add_option("--count", generate_args.count, "number of samples")->check(CLI::PositiveNumber);
  generate->add_option("--noise", generate_args.noise, "Gaussian noise sigma")->check(CLI::NonNegativeNumber);
  generate->add_option("--seed", generate_args.seed, "random seed (default 0)");
  generate->add_option("--output", generate_args.output, "output file")->required();
  generate->add_option("--format", generate_args.format, "csv or raw-f64");

  ApproximateArgs approx_args;
  CLI::App* approximate = app.add_subcommand("approximate", "Cluster samples and fit flats");
  approximate->add_option("--input", approx_args.input, "input sample file")->required();
  approximate->add_option("--format", approx_args.format, "csv or raw-f64");
  approximate->add_option("--k", approx_args.k, "neighbors per sample")->check(CLI::PositiveNumber);
  approximate->add_option("--clusters", approx_args.clusters, "target cluster count")->check(CLI::PositiveNumber);
  approximate->add_option("--dim", approx_args.dim, "flat dimension")->check(CLI::PositiveNumber);
  approximate->add_option("--mode", approx_args.mode, "bound or exact");
  approximate->add_option("--seed", approx_args.seed, "random seed (default 0)");
  approximate->add_option("--threads", approx_args.threads, "worker threads (0 = auto)");
  approximate->add_option("--labels-out", approx_args.labels_out, "labels CSV")->required();
  approximate->add_option("--flats-out", approx_args.flats_out, "flats directory");
  approximate->add_option("--manifest-out", approx_args.manifest_out, "manifest JSON")->required();
  approximate->add_option("--dump-graph", approx_args.dump_graph, "edge list dump");

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Recompute metrics from artifacts");
  evaluate->add_option("--input", eval_args.input, "input sample file")->required();
  evaluate->add_option("--format", eval_args.format, "csv or raw-f64");
  evaluate->add_option("--labels", eval_args.labels, "labels CSV")->required();
  evaluate->add_option("--flats", eval_args.flats, "flats directory")->required();
  evaluate->add_option("--output", eval_args.output, "metrics JSON")->required();

  ClassifyArgs classify_args;
  CLI::App* classify = app.add_subcommand("classify", "Flat-feature digit classification");
  classify->add_option("--train-images", classify_args.train_images)->required();
  classify->add_option("--train-labels", classify_args.train_labels)->required();
  classify->add_option("--test-images", classify_args.test_images)->required();
  classify->add_option("--test-labels", classify_args.test_labels)->required();
  classify->add_option("--flats-per-class", classify_args.flats_per_class)->check(CLI::PositiveNumber);
  classify->add_option("--k", classify_args.k)->check(CLI::PositiveNumber);
  classify->add_option("--dim", classify_args.dim)->check(CLI::PositiveNumber);
  classify->add_option("--cap-per-class", classify_args.cap_per_class)->check(CLI::PositiveNumber);
  classify->add_option("--test-cap-per-class", classify_args.test_cap_per_class)->check(CLI::NonNegativeNumber);
  classify->add_option("--pca-dims", classify_args.pca_dims)->check(CLI::PositiveNumber);
  classify->add_option("--mode", classify_args.mode, "bound or exact");
  classify->add_option("--seed", classify_args.seed, "random seed (default 0)");
  classify->add_option("--threads", classify_args.threads, "worker threads (0 = auto)");
  classify->add_option("--output", classify_args.output, "output directory")->required();

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Time the pipeline on growing Swiss rolls");
  bench->add_option("--sizes", bench_args.sizes, "sample counts")->delimiter(',');
  bench->add_option("--trials", bench_args.trials, "trials per size")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_args.seed, "random seed (default 0)");
  bench->add_option("--k", bench_args.k)->check(CLI::PositiveNumber);
  bench->add_option("--clusters", bench_args.clusters)->check(CLI::PositiveNumber);
  bench->add_option("--dim", bench_args.dim)->check(CLI::PositiveNumber);
  bench->add_option("--mode", bench_args.mode, "bound or exact");
  bench->add_option("--output", bench_args.output, "timing CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) return cmd_generate(generate_args);
    if (*approximate) return cmd_approximate(approx_args);
    if (*evaluate) return cmd_evaluate(eval_args);
    if (*classify) return cmd_classify(classify_args);
    if (*bench) return cmd_bench(bench_args);
  } catch (const mfa::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
