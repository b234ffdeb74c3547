#include "slk/fewshot.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "slk/error.hpp"

namespace slk {

FeatureMatrix cl2_normalize(const FeatureMatrix& features, std::span<const double> base_mean) {
  if (!base_mean.empty() && base_mean.size() != features.n_dims())
    throw Error(ErrorCode::LengthMismatch, "base mean length does not match n_dims");
  Matrix out = features.matrix();
  for (std::size_t p = 0; p < out.rows(); ++p) {
    auto r = out.row(p);
    if (!base_mean.empty())
      for (std::size_t j = 0; j < r.size(); ++j) r[j] -= base_mean[j];
    double norm2 = 0.0;
    for (double v : r) norm2 += v * v;
    if (norm2 == 0.0) throw Error(ErrorCode::ZeroVector, "centred feature row has zero norm", p);
    const double norm = std::sqrt(norm2);
    for (double& v : r) v /= norm;
  }
  return FeatureMatrix(std::move(out));
}

FeatureMatrix bias_correct(const TaskSpec& task, const FeatureMatrix& features) {
  task.validate(features.n_points());
  if (task.queries.empty()) return features;
  const std::size_t d = features.n_dims();
  std::vector<double> support_mean(d, 0.0), query_mean(d, 0.0);
  for (const auto& s : task.support) {
    const auto r = features.row(s.point);
    for (std::size_t j = 0; j < d; ++j) support_mean[j] += r[j];
  }
  for (std::size_t q : task.queries) {
    const auto r = features.row(q);
    for (std::size_t j = 0; j < d; ++j) query_mean[j] += r[j];
  }
  std::vector<double> shift(d);
  for (std::size_t j = 0; j < d; ++j)
    shift[j] = support_mean[j] / static_cast<double>(task.support.size()) -
               query_mean[j] / static_cast<double>(task.queries.size());
  Matrix out = features.matrix();
  for (std::size_t q : task.queries) {
    auto r = out.row(q);
    for (std::size_t j = 0; j < d; ++j) r[j] += shift[j];
  }
  return FeatureMatrix(std::move(out));
}

Prototypes init_prototypes(const TaskSpec& task, const FeatureMatrix& features, PrototypeRule rule) {
  task.validate(features.n_points());
  Prototypes out{Matrix(task.k_way, features.n_dims()), rule};
  std::vector<std::size_t> counts(task.k_way, 0);
  for (const auto& s : task.support) {
    auto m = out.values.row(static_cast<std::size_t>(s.cls));
    const auto x = features.row(s.point);
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += x[j];
    ++counts[static_cast<std::size_t>(s.cls)];
  }
  for (std::size_t k = 0; k < task.k_way; ++k)
    for (double& v : out.values.row(k)) v /= static_cast<double>(counts[k]);
  return out;
}

EpisodeResult run_episode(const TaskSpec& task, const FeatureMatrix& features,
                          const PreprocessConfig& preprocess, const SolverConfig& config,
                          const EpisodeOptions& options, std::optional<std::span<const int>> query_truth) {
  const auto started = std::chrono::steady_clock::now();
  task.validate(features.n_points());
  {
    // The kernel width is estimated per episode, so only the other fields are checked here.
    SolverConfig probe = config;
    probe.sigma2 = 1.0;
    probe.validate();
  }
  if (query_truth && query_truth->size() != task.queries.size())
    throw Error(ErrorCode::LengthMismatch, "query truth length does not match the query count");

  EpisodeResult result;
  auto finish = [&] {
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
  };
  if (task.queries.empty()) return finish();

  // Local layout: supports first (task order), then queries.
  std::vector<std::size_t> rows;
  rows.reserve(task.support.size() + task.queries.size());
  TaskSpec local{task.k_way, {}, {}};
  for (const auto& s : task.support) {
    local.support.push_back({rows.size(), s.cls});
    rows.push_back(s.point);
  }
  for (std::size_t q : task.queries) {
    local.queries.push_back(rows.size());
    rows.push_back(q);
  }
  FeatureMatrix x = features.select_rows(rows);
  if (preprocess.apply_cl2) {
    const std::span<const double> mean =
        preprocess.base_mean ? std::span<const double>(*preprocess.base_mean) : std::span<const double>{};
    x = cl2_normalize(x, mean);
  }
  if (preprocess.apply_bias) x = bias_correct(local, x);

  const std::size_t n = x.n_points();
  const NeighborLists neighbors = knn_search(x, std::min(options.rho, n - 1));
  const SparseAffinity graph =
      [&] {
        SparseAffinity g = symmetrize(knn_graph(neighbors), options.symmetrize);
        return g.with_diag_shift(options.auto_diag_shift ? gershgorin_shift(g) : options.diag_shift);
      }();

  SolverConfig cfg = config;
  if (cfg.rule == PrototypeRule::Modes) cfg.sigma2 = estimate_sigma2(neighbors).sigma2;

  std::vector<Clamp> clamps;
  for (const auto& s : local.support) clamps.push_back({s.point, s.cls});
  SolveResult solved = solve(x, graph, init_prototypes(local, x, cfg.rule), cfg, clamps);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < local.queries.size(); ++i) {
    const int label = static_cast<int>(argmax(solved.assignment.row(local.queries[i])));
    result.query_labels.push_back(label);
    if (query_truth && (*query_truth)[i] == label) ++correct;
  }
  if (query_truth) result.accuracy = static_cast<double>(correct) / static_cast<double>(local.queries.size());
  result.solve_report = std::move(solved.report);
  return finish();
}

std::vector<int> LabeledEpisode::query_truth() const {
  std::vector<int> out;
  out.reserve(task.queries.size());
  for (std::size_t q : task.queries) out.push_back(truth[q]);
  return out;
}

namespace {

void random_sphere_point(std::mt19937_64& rng, std::normal_distribution<double>& normal, double radius,
                         std::span<double> out) {
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& v : out) {
      v = normal(rng);
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double scale = radius / std::sqrt(norm2);
  for (double& v : out) v *= scale;
}

}  // namespace

LabeledPoints generate_gaussian_blobs(std::size_t k, std::size_t per_class, std::size_t dim,
                                      double separation, double sigma, std::uint64_t seed) {
  if (k < 1 || per_class < 1 || dim < 1) throw Error(ErrorCode::InvalidArgument, "blob counts must be >= 1");
  if (!(separation >= 0.0) || !(sigma >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "blob separation and spread must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix centers(k, dim);
  for (std::size_t c = 0; c < k; ++c) random_sphere_point(rng, normal, separation, centers.row(c));
  Matrix points(k * per_class, dim);
  std::vector<int> truth(k * per_class);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t p = c * per_class + i;
      auto r = points.row(p);
      for (std::size_t j = 0; j < dim; ++j) r[j] = centers(c, j) + sigma * normal(rng);
      truth[p] = static_cast<int>(c);
    }
  return {FeatureMatrix(std::move(points)), std::move(truth)};
}

LabeledEpisode generate_synthetic_episode(std::size_t k_way, std::size_t n_shot, std::size_t n_query,
                                          std::size_t dim, double separation, std::uint64_t seed) {
  if (k_way < 1 || n_shot < 1 || n_query < 1 || dim < 1)
    throw Error(ErrorCode::InvalidArgument, "synthetic episode counts must all be >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw Error(ErrorCode::InvalidArgument, "separation must be finite and >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix centers(k_way, dim);
  for (std::size_t k = 0; k < k_way; ++k) random_sphere_point(rng, normal, separation, centers.row(k));

  const std::size_t n = k_way * (n_shot + n_query);
  Matrix points(n, dim);
  std::vector<int> truth(n);
  TaskSpec task{k_way, {}, {}};
  std::size_t next = 0;
  auto draw = [&](std::size_t k) {
    auto r = points.row(next);
    const auto c = centers.row(k);
    for (std::size_t j = 0; j < dim; ++j) r[j] = c[j] + normal(rng);
    truth[next] = static_cast<int>(k);
    return next++;
  };
  for (std::size_t k = 0; k < k_way; ++k)
    for (std::size_t s = 0; s < n_shot; ++s) task.support.push_back({draw(k), static_cast<int>(k)});
  for (std::size_t k = 0; k < k_way; ++k)
    for (std::size_t q = 0; q < n_query; ++q) task.queries.push_back(draw(k));
  return {FeatureMatrix(std::move(points)), std::move(task), std::move(truth)};
}

EpisodeResult run_labeled_episode(const LabeledEpisode& episode, const PreprocessConfig& preprocess,
                                  const SolverConfig& config, const EpisodeOptions& options) {
  const auto truth = episode.query_truth();
  return run_episode(episode.task, episode.features, preprocess, config, options, std::span<const int>(truth));
}

double mean_accuracy(std::span<const LabeledEpisode> episodes, const PreprocessConfig& preprocess,
                     const SolverConfig& config, const EpisodeOptions& options) {
  if (episodes.empty()) throw Error(ErrorCode::InvalidArgument, "no episodes to evaluate");
  double total = 0.0;
  for (const auto& e : episodes) total += run_labeled_episode(e, preprocess, config, options).accuracy.value_or(0.0);
  return total / static_cast<double>(episodes.size());
}

double tune_lambda(std::span<const double> candidates, std::span<const LabeledEpisode> episodes,
                   const PreprocessConfig& preprocess, const SolverConfig& config,
                   const EpisodeOptions& options) {
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no lambda candidates");
  if (episodes.empty()) throw Error(ErrorCode::InvalidArgument, "no validation episodes");
  double best_lambda = candidates.front();
  double best_acc = -1.0;
  for (double lambda : candidates) {
    SolverConfig cfg = config;
    cfg.lambda = lambda;
    const double acc = mean_accuracy(episodes, preprocess, cfg, options);
    if (acc > best_acc || (acc == best_acc && lambda < best_lambda)) {
      best_acc = acc;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace slk
