#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "slk/affinity.hpp"
#include "slk/features.hpp"
#include "slk/optimizer.hpp"
#include "slk/prototypes.hpp"
#include "slk/task.hpp"

namespace slk {

struct PreprocessConfig {
  std::optional<std::vector<double>> base_mean;  // mean of base-class features
  bool apply_cl2 = false;
  bool apply_bias = false;
};

struct EpisodeOptions {
  std::size_t rho = 3;
  SymmetrizeMode symmetrize = SymmetrizeMode::Max;
  double diag_shift = 0.0;
  bool auto_diag_shift = false;  // use gershgorin_shift of each episode graph
};

struct EpisodeResult {
  std::vector<int> query_labels;
  std::optional<double> accuracy;
  SolveReport solve_report;
  double wall_time = 0.0;  // seconds
};

// (x - base_mean) / ||x - base_mean|| for every row. A missing mean means
// plain L2 normalization. Throws ZeroVector for a row that centres to zero.
FeatureMatrix cl2_normalize(const FeatureMatrix& features, std::span<const double> base_mean);

// Shifts every query row by mean(support rows) - mean(query rows).
FeatureMatrix bias_correct(const TaskSpec& task, const FeatureMatrix& features);

// Per-class mean of the support rows (the row itself for a 1-shot class).
Prototypes init_prototypes(const TaskSpec& task, const FeatureMatrix& features,
                           PrototypeRule rule = PrototypeRule::Means);

// Runs one episode over the support and query rows of `features`:
// preprocessing, rho-NN graph, kernel width (modes rule), support-clamped
// solve, then argmax labels for the queries. `query_truth` holds one class
// per query when accuracy is wanted. The graph size caps rho at N-1.
EpisodeResult run_episode(const TaskSpec& task, const FeatureMatrix& features,
                          const PreprocessConfig& preprocess, const SolverConfig& config,
                          const EpisodeOptions& options = {},
                          std::optional<std::span<const int>> query_truth = std::nullopt);

// Self-contained episode: features, task over them, and one class per row.
struct LabeledEpisode {
  FeatureMatrix features;
  TaskSpec task;
  std::vector<int> truth;

  std::vector<int> query_truth() const;
};

// Gaussian mixture with unit within-class spread. Class centres are uniform
// on the sphere of radius `separation`. Rows are supports (class-major) then
// queries (class-major).
LabeledEpisode generate_synthetic_episode(std::size_t k_way, std::size_t n_shot, std::size_t n_query,
                                          std::size_t dim, double separation, std::uint64_t seed);

struct LabeledPoints {
  FeatureMatrix features;
  std::vector<int> truth;
};

// `per_class` points around each of `k` centres drawn uniformly on the
// sphere of radius `separation`, with isotropic spread `sigma`.
LabeledPoints generate_gaussian_blobs(std::size_t k, std::size_t per_class, std::size_t dim,
                                      double separation, double sigma, std::uint64_t seed);

EpisodeResult run_labeled_episode(const LabeledEpisode& episode, const PreprocessConfig& preprocess,
                                  const SolverConfig& config, const EpisodeOptions& options = {});

double mean_accuracy(std::span<const LabeledEpisode> episodes, const PreprocessConfig& preprocess,
                     const SolverConfig& config, const EpisodeOptions& options = {});

// Candidate with the best mean accuracy; ties go to the smaller lambda.
double tune_lambda(std::span<const double> candidates, std::span<const LabeledEpisode> episodes,
                   const PreprocessConfig& preprocess, const SolverConfig& config,
                   const EpisodeOptions& options = {});

inline constexpr double kDefaultLambdaGrid[] = {0.1, 0.3, 0.5, 0.7, 0.8, 1.0};
inline constexpr std::size_t kDefaultRhoGrid[] = {3, 5, 10};
inline constexpr std::size_t kDefaultRho = 3;

}  // namespace slk
