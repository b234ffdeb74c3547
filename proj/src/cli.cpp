#include "slk/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>

#include "slk/error.hpp"
#include "slk/fewshot.hpp"
#include "slk/metrics.hpp"
#include "slk/parallel.hpp"
#include "slk/seeding.hpp"

namespace slk::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

Algorithm parse_algorithm(std::string_view name) {
  if (name == "kmeans") return Algorithm::KMeans;
  if (name == "kmodes") return Algorithm::KModes;
  if (name == "slk-means") return Algorithm::SlkMeans;
  if (name == "slk-ms") return Algorithm::SlkMs;
  throw Error(ErrorCode::Config, "unknown algorithm '" + std::string(name) + "'");
}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::KMeans: return "kmeans";
    case Algorithm::KModes: return "kmodes";
    case Algorithm::SlkMeans: return "slk-means";
    case Algorithm::SlkMs: return "slk-ms";
  }
  return "?";
}

std::string to_string(Command command) {
  switch (command) {
    case Command::Cluster: return "cluster";
    case Command::Fewshot: return "fewshot";
    case Command::Eval: return "eval";
    case Command::Trace: return "trace";
    case Command::Synth: return "synth";
  }
  return "?";
}

PrototypeRule rule_of(Algorithm algo) {
  return algo == Algorithm::KMeans || algo == Algorithm::SlkMeans ? PrototypeRule::Means
                                                                  : PrototypeRule::Modes;
}

namespace {

bool is_baseline(Algorithm algo) { return algo == Algorithm::KMeans || algo == Algorithm::KModes; }

void require_path(const fs::path& path, const char* flag) {
  if (path.empty()) throw Error(ErrorCode::Config, std::string(flag) + " is required");
}

}  // namespace

void RunConfig::resolve() {
  if (is_baseline(algorithm) && lambda && *lambda != 0.0)
    throw Error(ErrorCode::Config, to_string(algorithm) + " requires lambda = 0");
  if (!lambda) lambda = is_baseline(algorithm) ? 0.0 : 1.0;
  if (!std::isfinite(*lambda) || *lambda < 0.0) throw Error(ErrorCode::Config, "lambda must be finite and >= 0");
  if (!rho) rho = command == Command::Fewshot ? kDefaultRho : 5;
  if (*rho < 1) throw Error(ErrorCode::Config, "rho must be >= 1");
  if (!std::isfinite(delta) || delta < 0.0) throw Error(ErrorCode::Config, "delta must be finite and >= 0");
  if (threads < 0) throw Error(ErrorCode::Config, "threads must be >= 0");
  if (!(inner_tol > 0.0) || !(outer_tol > 0.0)) throw Error(ErrorCode::Config, "tolerances must be > 0");
  if (inner_max < 1 || outer_max < 1) throw Error(ErrorCode::Config, "iteration caps must be >= 1");
  if (format != "auto") parse_feature_format(format);

  switch (command) {
    case Command::Cluster:
    case Command::Trace:
      require_path(features, "--features");
      if (k < 1) throw Error(ErrorCode::Config, "--k must be >= 1");
      break;
    case Command::Fewshot:
      require_path(features, "--features");
      require_path(episodes, "--episodes");
      break;
    case Command::Eval:
      require_path(predictions, "--pred");
      require_path(labels, "--labels");
      break;
    case Command::Synth:
      if (synth_kind != "fewshot" && synth_kind != "blobs")
        throw Error(ErrorCode::Config, "--kind must be fewshot or blobs");
      if (synth_count < 1 || way < 1 || shot < 1 || query < 1 || dim < 1)
        throw Error(ErrorCode::Config, "synthetic counts must be >= 1");
      if (!std::isfinite(separation) || separation < 0.0)
        throw Error(ErrorCode::Config, "--separation must be finite and >= 0");
      break;
  }
}

SolverConfig RunConfig::solver_config() const {
  SolverConfig cfg;
  cfg.lambda = lambda.value_or(0.0);
  cfg.rule = rule_of(algorithm);
  cfg.inner_tol = inner_tol;
  cfg.inner_max = inner_max;
  cfg.outer_tol = outer_tol;
  cfg.outer_max = outer_max;
  cfg.seed = seed;
  return cfg;
}

namespace {

json config_object(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["algorithm"] = to_string(c.algorithm);
  j["features"] = c.features.string();
  j["labels"] = c.labels.string();
  j["predictions"] = c.predictions.string();
  j["episodes"] = c.episodes.string();
  j["base_mean"] = c.base_mean.string();
  j["out_dir"] = c.out_dir.string();
  j["format"] = c.format;
  j["csv_header"] = c.csv_header;
  j["k"] = c.k;
  j["lambda"] = c.lambda.value_or(0.0);
  j["rho"] = c.rho.value_or(0);
  j["delta"] = c.delta_auto ? json("auto") : json(c.delta);
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["inner_tol"] = c.inner_tol;
  j["outer_tol"] = c.outer_tol;
  j["inner_max"] = c.inner_max;
  j["outer_max"] = c.outer_max;
  j["symmetrize"] = to_string(c.symmetrize);
  j["strict"] = c.strict;
  j["write_soft"] = c.write_soft;
  j["cl2"] = c.cl2;
  j["bias"] = c.bias;
  if (c.command == Command::Synth) {
    j["synth_kind"] = c.synth_kind;
    j["synth_count"] = c.synth_count;
    j["way"] = c.way;
    j["shot"] = c.shot;
    j["query"] = c.query;
    j["dim"] = c.dim;
    j["separation"] = c.separation;
  }
  return j;
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Applies a previously written config.json; flags given on the command line
// take precedence because they are parsed afterwards.
void apply_config_file(const fs::path& path, RunConfig& c) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, "cannot parse config " + path.string() + ": " + e.what());
  }
  try {
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("features")) c.features = j.at("features").get<std::string>();
    if (j.contains("labels")) c.labels = j.at("labels").get<std::string>();
    if (j.contains("predictions")) c.predictions = j.at("predictions").get<std::string>();
    if (j.contains("episodes")) c.episodes = j.at("episodes").get<std::string>();
    if (j.contains("base_mean")) c.base_mean = j.at("base_mean").get<std::string>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    read_field(j, "format", c.format);
    read_field(j, "csv_header", c.csv_header);
    read_field(j, "k", c.k);
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("rho") && j.at("rho").get<std::size_t>() > 0) c.rho = j.at("rho").get<std::size_t>();
    if (j.contains("delta")) {
      if (j.at("delta").is_string()) {
        c.delta_auto = j.at("delta").get<std::string>() == "auto";
        if (!c.delta_auto) throw Error(ErrorCode::Config, "delta must be a number or \"auto\"");
      } else {
        c.delta = j.at("delta").get<double>();
        c.delta_auto = false;
      }
    }
    read_field(j, "seed", c.seed);
    read_field(j, "threads", c.threads);
    read_field(j, "inner_tol", c.inner_tol);
    read_field(j, "outer_tol", c.outer_tol);
    read_field(j, "inner_max", c.inner_max);
    read_field(j, "outer_max", c.outer_max);
    if (j.contains("symmetrize")) c.symmetrize = parse_symmetrize_mode(j.at("symmetrize").get<std::string>());
    read_field(j, "strict", c.strict);
    read_field(j, "write_soft", c.write_soft);
    read_field(j, "cl2", c.cl2);
    read_field(j, "bias", c.bias);
    read_field(j, "synth_kind", c.synth_kind);
    read_field(j, "synth_count", c.synth_count);
    read_field(j, "way", c.way);
    read_field(j, "shot", c.shot);
    read_field(j, "query", c.query);
    read_field(j, "dim", c.dim);
    read_field(j, "separation", c.separation);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, "bad config field in " + path.string() + ": " + e.what());
  }
}

FeatureFormat feature_format(const RunConfig& c, const fs::path& path) {
  return c.format == "auto" ? format_from_path(path) : parse_feature_format(c.format);
}

FeatureMatrix read_features(const RunConfig& c) {
  return load_features(c.features, feature_format(c, c.features), CsvOptions{c.csv_header});
}

std::optional<LabelVector> read_truth(const RunConfig& c, std::size_t n_points) {
  if (c.labels.empty()) return std::nullopt;
  LabelVector truth = load_labels(c.labels);
  if (truth.size() != n_points)
    throw Error(ErrorCode::LengthMismatch, "label file has " + std::to_string(truth.size()) +
                                               " entries but features have " + std::to_string(n_points) +
                                               " rows");
  return truth;
}

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

void write_config(const RunConfig& c) {
  fs::create_directories(c.out_dir);
  write_text_file(c.out_dir / "config.json", config_json(c));
}

int finish_status(const RunConfig& c, const std::vector<std::string>& warnings, std::ostream& out) {
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  return c.strict && !warnings.empty() ? kExitWarning : kExitOk;
}

struct ClusterRun {
  SolveResult result;
  std::optional<double> nmi;
  std::optional<double> acc;
  double sigma2 = 0.0;
  double delta = 0.0;
  std::size_t graph_entries = 0;
};

ClusterRun run_clustering(const RunConfig& c) {
  const FeatureMatrix x = read_features(c);
  const std::optional<LabelVector> truth = read_truth(c, x.n_points());
  if (c.k > x.n_points())
    throw Error(ErrorCode::InvalidArgument, "k = " + std::to_string(c.k) + " exceeds the number of points");

  ClusterRun run;
  SolverConfig cfg = c.solver_config();
  SparseAffinity graph = SparseAffinity::empty(x.n_points());
  if (cfg.lambda > 0.0 || cfg.rule == PrototypeRule::Modes) {
    const NeighborLists neighbors = knn_search(x, *c.rho);
    if (cfg.rule == PrototypeRule::Modes) cfg.sigma2 = estimate_sigma2(neighbors).sigma2;
    if (cfg.lambda > 0.0) {
      graph = symmetrize(knn_graph(neighbors), c.symmetrize);
      run.delta = c.delta_auto ? gershgorin_shift(graph) : c.delta;
      graph = graph.with_diag_shift(run.delta);
    }
  }
  run.sigma2 = cfg.sigma2;
  run.graph_entries = graph.triplets().size();

  const Prototypes init = kmeanspp_seeds(x, c.k, c.seed, cfg.rule);
  run.result = solve(x, graph, init, cfg);
  if (truth) {
    const LabelVector pred = run.result.assignment.hard_labels();
    run.nmi = nmi(pred, *truth);
    run.acc = accuracy_hungarian(pred, *truth);
  }
  return run;
}

json report_object(const ClusterRun& run) {
  const SolveReport& r = run.result.report;
  json j;
  if (run.nmi) j["nmi"] = *run.nmi;
  if (run.acc) j["acc"] = *run.acc;
  j["objective"] = r.discrete_objective;
  j["relaxed_final"] = r.relaxed_trace.empty() ? 0.0 : r.relaxed_trace.back();
  j["outer_iters"] = r.outer_iters;
  j["inner_iters_total"] = r.inner_iters_total;
  j["converged"] = r.converged;
  j["sigma2"] = run.sigma2;
  j["delta"] = run.delta;
  j["graph_entries"] = run.graph_entries;
  j["warnings"] = r.warnings;
  j["relaxed_trace"] = r.relaxed_trace;
  return j;
}

struct EpisodeFile {
  std::string id;
  fs::path path;
};

std::vector<EpisodeFile> list_episodes(const fs::path& source) {
  std::vector<EpisodeFile> out;
  if (fs::is_directory(source)) {
    for (const auto& entry : fs::directory_iterator(source))
      if (entry.is_regular_file() && entry.path().extension() == ".task")
        out.push_back({entry.path().stem().string(), entry.path()});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
  }
  // A list file: one task path per line, relative to the list's directory.
  std::istringstream lines(read_text_file(source));
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fs::path p(line);
    if (p.is_relative()) p = source.parent_path() / p;
    out.push_back({p.stem().string(), p});
  }
  return out;
}

std::vector<double> read_base_mean(const RunConfig& c, std::size_t dim) {
  const FeatureMatrix m = load_features(c.base_mean, feature_format(c, c.base_mean), CsvOptions{c.csv_header});
  if (m.n_points() != 1 || m.n_dims() != dim)
    throw Error(ErrorCode::LengthMismatch, "base mean must be a single row of length n_dims");
  const auto r = m.row(0);
  return {r.begin(), r.end()};
}

}  // namespace

std::string config_json(const RunConfig& config) { return config_object(config).dump(2) + "\n"; }

int cmd_cluster(const RunConfig& c, std::ostream& out) {
  const ClusterRun run = run_clustering(c);
  fs::create_directories(c.out_dir);
  AssignmentOutput assignments;
  assignments.write_soft = c.write_soft;
  save_assignments(run.result.assignment, c.out_dir / "assignments.csv", assignments);
  save_trace_csv(run.result.report, c.out_dir / "trace.csv");
  const json report = report_object(run);
  write_json(c.out_dir / "report.json", report);
  write_config(c);
  out << "objective " << format_double(run.result.report.discrete_objective) << "\n";
  if (run.nmi) out << "nmi " << format_double(*run.nmi) << "\n";
  if (run.acc) out << "acc " << format_double(*run.acc) << "\n";
  return finish_status(c, run.result.report.warnings, out);
}

int cmd_trace(const RunConfig& c, std::ostream& out) {
  const ClusterRun run = run_clustering(c);
  fs::create_directories(c.out_dir);
  save_trace_csv(run.result.report, c.out_dir / "trace.csv");
  write_config(c);
  out << format_trace_csv(run.result.report);
  return finish_status(c, run.result.report.warnings, out);
}

int cmd_fewshot(const RunConfig& c, std::ostream& out) {
  const FeatureMatrix x = read_features(c);
  const std::optional<LabelVector> truth = read_truth(c, x.n_points());
  const std::vector<EpisodeFile> files = list_episodes(c.episodes);
  if (files.empty()) throw Error(ErrorCode::Io, "no episode files found in " + c.episodes.string());

  PreprocessConfig pre;
  pre.apply_cl2 = c.cl2;
  pre.apply_bias = c.bias;
  if (!c.base_mean.empty()) pre.base_mean = read_base_mean(c, x.n_dims());
  const SolverConfig cfg = c.solver_config();
  EpisodeOptions options;
  options.rho = *c.rho;
  options.symmetrize = c.symmetrize;
  options.diag_shift = c.delta;
  options.auto_diag_shift = c.delta_auto;

  std::ostringstream episodes_csv, predictions_csv;
  episodes_csv << "episode_id,n_queries,accuracy,wall_time,outer_iters,converged\n";
  predictions_csv << "episode_id,point,label\n";
  std::vector<TaskOutcome> outcomes;
  std::vector<std::string> warnings;
  double total_time = 0.0;

  for (const auto& file : files) {
    const TaskSpec task = load_task(file.path, x.n_points());
    std::vector<int> query_truth;
    if (truth)
      for (std::size_t q : task.queries) query_truth.push_back((*truth)[q]);
    const EpisodeResult r =
        run_episode(task, x, pre, cfg, options,
                    truth ? std::optional<std::span<const int>>(query_truth) : std::nullopt);
    total_time += r.wall_time;

    episodes_csv << file.id << ',' << task.queries.size() << ','
                 << (r.accuracy ? format_double(*r.accuracy) : std::string("n/a")) << ','
                 << format_double(r.wall_time) << ',' << r.solve_report.outer_iters << ','
                 << (r.solve_report.converged ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < task.queries.size(); ++i)
      predictions_csv << file.id << ',' << task.queries[i] << ',' << r.query_labels[i] << '\n';
    if (truth) {
      TaskOutcome o;
      o.total = task.queries.size();
      for (std::size_t i = 0; i < task.queries.size(); ++i)
        if (r.query_labels[i] == query_truth[i]) ++o.correct;
      outcomes.push_back(o);
    }
    for (const auto& w : r.solve_report.warnings) warnings.push_back(file.id + ": " + w);
  }

  const std::optional<AccuracySummary> summary =
      outcomes.empty() ? std::nullopt : fewshot_accuracy(outcomes);
  json s;
  s["n_episodes"] = files.size();
  std::string accuracy_line = "accuracy n/a\n";
  if (summary) {
    s["accuracy"] = summary->mean;
    s["ci95"] = summary->ci95;
    s["n_scored"] = summary->n_tasks;
    accuracy_line = "accuracy " + format_double(summary->mean) + " +- " + format_double(summary->ci95) + " over " +
                    std::to_string(summary->n_tasks) + " episodes\n";
  } else {
    s["accuracy"] = "n/a";
    s["ci95"] = "n/a";
    s["n_scored"] = 0;
  }
  s["mean_wall_time"] = total_time / static_cast<double>(files.size());
  s["n_warnings"] = warnings.size();

  fs::create_directories(c.out_dir);
  write_text_file(c.out_dir / "episodes.csv", episodes_csv.str());
  write_text_file(c.out_dir / "predictions.csv", predictions_csv.str());
  write_json(c.out_dir / "summary.json", s);
  write_config(c);

  out << accuracy_line;
  out << "mean_wall_time " << format_double(total_time / static_cast<double>(files.size())) << "\n";
  return finish_status(c, warnings, out);
}

// Accepts a plain label file or an assignments CSV with a `point,label` header.
LabelVector load_predictions(const fs::path& path) {
  const std::string text = read_text_file(path);
  if (text.rfind("point,label", 0) != 0) return parse_labels(text);
  std::istringstream in(text);
  std::string line, labels;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto first = line.find(',');
    if (first == std::string::npos) throw Error(ErrorCode::Parse, "assignment row needs point,label");
    const auto second = line.find(',', first + 1);
    labels += line.substr(first + 1, second == std::string::npos ? std::string::npos : second - first - 1) + "\n";
  }
  return parse_labels(labels);
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const LabelVector pred = load_predictions(c.predictions);
  const LabelVector truth = load_labels(c.labels);
  if (pred.size() != truth.size())
    throw Error(ErrorCode::LengthMismatch, "prediction and truth files differ in length");
  json j;
  j["n"] = pred.size();
  j["nmi"] = nmi(pred, truth);
  j["acc"] = accuracy_hungarian(pred, truth);
  out << j.dump() << "\n";
  return kExitOk;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  fs::create_directories(c.out_dir);
  const FeatureFormat fmt = c.format == "auto" ? FeatureFormat::Csv : parse_feature_format(c.format);
  const fs::path features_path = c.out_dir / (fmt == FeatureFormat::Csv ? "features.csv" : "features.slkb");

  if (c.synth_kind == "blobs") {
    const LabeledPoints blobs = generate_gaussian_blobs(c.way, c.synth_count, c.dim, c.separation, 1.0, c.seed);
    save_features(blobs.features, features_path, fmt);
    save_labels(blobs.truth, c.out_dir / "labels.txt");
    write_config(c);
    out << "wrote " << blobs.features.n_points() << " points to " << features_path.string() << "\n";
    return kExitOk;
  }

  // Episodes are concatenated into one feature file; each task refers to its
  // own block of rows.
  const std::size_t per_episode = c.way * (c.shot + c.query);
  Matrix all(per_episode * c.synth_count, c.dim);
  std::vector<int> truth;
  truth.reserve(all.rows());
  const fs::path task_dir = c.out_dir / "tasks";
  fs::create_directories(task_dir);
  const std::size_t width = std::to_string(c.synth_count - 1).size();
  for (std::size_t e = 0; e < c.synth_count; ++e) {
    const LabeledEpisode ep = generate_synthetic_episode(c.way, c.shot, c.query, c.dim, c.separation, c.seed + e);
    const std::size_t offset = e * per_episode;
    for (std::size_t p = 0; p < per_episode; ++p) {
      const auto src = ep.features.row(p);
      std::copy(src.begin(), src.end(), all.row(offset + p).begin());
      truth.push_back(ep.truth[p]);
    }
    TaskSpec task = ep.task;
    for (auto& s : task.support) s.point += offset;
    for (auto& q : task.queries) q += offset;
    std::string id = std::to_string(e);
    id.insert(0, width - id.size(), '0');
    save_task(task, task_dir / ("episode_" + id + ".task"));
  }
  save_features(FeatureMatrix(std::move(all)), features_path, fmt);
  save_labels(truth, c.out_dir / "labels.txt");
  write_config(c);
  out << "wrote " << c.synth_count << " episodes to " << task_dir.string() << "\n";
  return kExitOk;
}

namespace {

void add_common(CLI::App* sub, RunConfig& c, std::string& algo, std::string& sym, std::string& delta) {
  sub->add_option("--features", c.features, "feature matrix (csv or slkbin)");
  sub->add_option("--labels", c.labels, "ground-truth labels, one per line");
  sub->add_option("--format", c.format, "feature format: auto, csv, slkbin");
  sub->add_flag("--header", c.csv_header, "CSV feature files have a header row");
  sub->add_option("--algo", algo, "kmeans, kmodes, slk-means, slk-ms");
  sub->add_option("--lambda", c.lambda, "Laplacian weight (default 1 for slk-*, 0 otherwise)");
  sub->add_option("--rho", c.rho, "neighbours per point in the kNN graph");
  sub->add_option("--delta", delta, "diagonal shift added to the affinity, or 'auto'");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  sub->add_option("--out-dir", c.out_dir, "output directory");
  sub->add_option("--inner-tol", c.inner_tol, "relative tolerance of the assignment sweeps");
  sub->add_option("--outer-tol", c.outer_tol, "relative tolerance of the outer loop");
  sub->add_option("--inner-max", c.inner_max, "cap on assignment sweeps per block");
  sub->add_option("--outer-max", c.outer_max, "cap on outer iterations");
  sub->add_option("--sym", sym, "graph symmetrization: max, mean, none");
  sub->add_flag("--strict", c.strict, "exit with status 3 when numerical warnings occur");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::string algo, sym, delta, config_path;

  CLI::App app{"Scalable Laplacian K-modes clustering and few-shot inference", "slk"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", config_path, "read settings from a config.json written by a previous run");

  CLI::App* cluster = app.add_subcommand("cluster", "cluster a feature matrix");
  CLI::App* trace = app.add_subcommand("trace", "export the relaxed-objective trace of a clustering run");
  CLI::App* fewshot = app.add_subcommand("fewshot", "run a batch of few-shot episodes");
  CLI::App* eval = app.add_subcommand("eval", "score predicted labels against ground truth");
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic data set");

  for (CLI::App* sub : {cluster, trace}) {
    add_common(sub, c, algo, sym, delta);
    sub->add_option("--k", c.k, "number of clusters");
    sub->add_flag("--soft", c.write_soft, "also write the soft assignment columns");
  }
  add_common(fewshot, c, algo, sym, delta);
  fewshot->add_option("--episodes", c.episodes, "directory of .task files or a list file");
  fewshot->add_option("--base-mean", c.base_mean, "single-row mean of base-class features");
  fewshot->add_flag("--cl2", c.cl2, "centre on the base mean and L2-normalize");
  fewshot->add_flag("--bias", c.bias, "shift queries toward the support mean");

  eval->add_option("--pred", c.predictions, "predicted labels");
  eval->add_option("--labels", c.labels, "ground-truth labels");

  synth->add_option("--kind", c.synth_kind, "fewshot or blobs");
  synth->add_option("--count", c.synth_count, "episodes (fewshot) or points per blob (blobs)");
  synth->add_option("--way", c.way, "classes per episode, or number of blobs");
  synth->add_option("--shot", c.shot, "support samples per class");
  synth->add_option("--query", c.query, "queries per class");
  synth->add_option("--dim", c.dim, "feature dimension");
  synth->add_option("--separation", c.separation, "radius of the class-centre sphere");
  synth->add_option("--seed", c.seed, "random seed");
  synth->add_option("--out-dir", c.out_dir, "output directory");
  synth->add_option("--format", c.format, "feature format: auto, csv, slkbin");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    // The config file is applied first so explicit flags override it.
    for (std::size_t i = 1; i + 1 < args.size(); ++i)
      if (args[i] == "--config") apply_config_file(args[i + 1], c);
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (!algo.empty()) c.algorithm = parse_algorithm(algo);
    if (!sym.empty()) c.symmetrize = parse_symmetrize_mode(sym);
    if (!delta.empty()) {
      if (delta == "auto") {
        c.delta_auto = true;
      } else {
        std::size_t used = 0;
        try {
          c.delta = std::stod(delta, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != delta.size()) throw Error(ErrorCode::Config, "--delta must be a number or 'auto'");
        c.delta_auto = false;
      }
    }
    if (cluster->parsed()) c.command = Command::Cluster;
    if (trace->parsed()) c.command = Command::Trace;
    if (fewshot->parsed()) c.command = Command::Fewshot;
    if (eval->parsed()) c.command = Command::Eval;
    if (synth->parsed()) c.command = Command::Synth;
    c.resolve();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    set_thread_count(c.threads);
    switch (c.command) {
      case Command::Cluster: return cmd_cluster(c, out);
      case Command::Trace: return cmd_trace(c, out);
      case Command::Fewshot: return cmd_fewshot(c, out);
      case Command::Eval: return cmd_eval(c, out);
      case Command::Synth: return cmd_synth(c, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::Config ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace slk::cli
