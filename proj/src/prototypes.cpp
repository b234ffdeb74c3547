#include "slk/prototypes.hpp"

#include <algorithm>
#include <cmath>

#include "slk/error.hpp"

namespace slk {

PrototypeRule parse_prototype_rule(std::string_view name) {
  if (name == "means") return PrototypeRule::Means;
  if (name == "modes") return PrototypeRule::Modes;
  throw Error(ErrorCode::Config, "unknown prototype rule '" + std::string(name) + "'");
}

std::string to_string(PrototypeRule rule) { return rule == PrototypeRule::Means ? "means" : "modes"; }

void Prototypes::validate() const {
  if (k() == 0 || n_dims() == 0) throw Error(ErrorCode::InvalidArgument, "prototypes need k >= 1 and d >= 1");
  for (std::size_t i = 0; i < k(); ++i)
    for (double v : row(i))
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite prototype", i);
}

void ModeSolverConfig::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw Error(ErrorCode::Config, "mode solver sigma^2 must be finite and > 0");
  if (!(tol > 0.0)) throw Error(ErrorCode::Config, "mode solver tolerance must be > 0");
  if (max_iters < 1) throw Error(ErrorCode::Config, "mode solver max_iters must be >= 1");
}

double rbf_affinity(double dist2, double sigma2) {
  return std::exp(std::max(-dist2 / (2.0 * sigma2), kMinKernelExponent));
}

double rbf_affinity(std::span<const double> x, std::span<const double> m, double sigma2) {
  return rbf_affinity(squared_distance(x, m), sigma2);
}

namespace {

void check_shapes(const FeatureMatrix& features, const SoftAssignment& assignment) {
  if (assignment.n_points() != features.n_points())
    throw Error(ErrorCode::LengthMismatch, "assignment and features disagree on n_points");
}

// Returns false when the column has zero mass.
bool weighted_mean(const FeatureMatrix& features, const SoftAssignment& assignment, std::size_t k,
                   std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  double mass = 0.0;
  for (std::size_t p = 0; p < features.n_points(); ++p) {
    const double w = assignment.row(p)[k];
    if (w == 0.0) continue;
    mass += w;
    const auto x = features.row(p);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += w * x[j];
  }
  if (!(mass > 0.0)) return false;
  for (double& v : out) v /= mass;
  return true;
}

}  // namespace

Prototypes update_means(const FeatureMatrix& features, const SoftAssignment& assignment) {
  check_shapes(features, assignment);
  Prototypes out{Matrix(assignment.k(), features.n_dims()), PrototypeRule::Means};
  for (std::size_t k = 0; k < assignment.k(); ++k)
    if (!weighted_mean(features, assignment, k, out.values.row(k)))
      throw Error(ErrorCode::EmptyCluster, "cluster " + std::to_string(k) + " has zero mass");
  return out;
}

Prototypes update_means(const FeatureMatrix& features, const SoftAssignment& assignment,
                        const Prototypes& previous, std::vector<std::size_t>* empty_clusters) {
  check_shapes(features, assignment);
  if (previous.k() != assignment.k() || previous.n_dims() != features.n_dims())
    throw Error(ErrorCode::LengthMismatch, "previous prototypes have the wrong shape");
  Prototypes out{Matrix(assignment.k(), features.n_dims()), PrototypeRule::Means};
  std::vector<std::uint8_t> empty(assignment.k(), 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ik = 0; ik < static_cast<std::ptrdiff_t>(assignment.k()); ++ik) {
    const std::size_t k = static_cast<std::size_t>(ik);
    if (!weighted_mean(features, assignment, k, out.values.row(k))) {
      const auto prev = previous.row(k);
      std::copy(prev.begin(), prev.end(), out.values.row(k).begin());
      empty[k] = 1;
    }
  }
  if (empty_clusters)
    for (std::size_t k = 0; k < empty.size(); ++k)
      if (empty[k]) empty_clusters->push_back(k);
  return out;
}

std::vector<double> meanshift_step(const FeatureMatrix& features, std::span<const double> weights,
                                   std::span<const double> mode, double sigma2, double* kernel_mass) {
  if (weights.size() != features.n_points())
    throw Error(ErrorCode::LengthMismatch, "mean-shift weights do not match n_points");
  if (mode.size() != features.n_dims())
    throw Error(ErrorCode::LengthMismatch, "mean-shift point has the wrong dimension");
  std::vector<double> numer(features.n_dims(), 0.0);
  double denom = 0.0;
  for (std::size_t p = 0; p < features.n_points(); ++p) {
    if (weights[p] == 0.0) continue;
    const auto x = features.row(p);
    const double w = weights[p] * rbf_affinity(x, mode, sigma2);
    denom += w;
    for (std::size_t j = 0; j < numer.size(); ++j) numer[j] += w * x[j];
  }
  if (kernel_mass) *kernel_mass = denom;
  if (!(denom > 0.0)) return std::vector<double>(mode.begin(), mode.end());
  for (double& v : numer) v /= denom;
  return numer;
}

bool ModeUpdate::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; });
}

ModeUpdate update_modes(const FeatureMatrix& features, const SoftAssignment& assignment,
                        const ModeSolverConfig& config, const Prototypes& init) {
  check_shapes(features, assignment);
  config.validate();
  init.validate();
  if (init.k() != assignment.k() || init.n_dims() != features.n_dims())
    throw Error(ErrorCode::LengthMismatch, "initial modes have the wrong shape");
  const std::size_t K = assignment.k();
  ModeUpdate result{Prototypes{init.values, PrototypeRule::Modes},
                    std::vector<std::vector<double>>(K), std::vector<std::size_t>(K, 0),
                    std::vector<bool>(K, false), {}};
  std::vector<std::uint8_t> converged(K, 0);
  std::vector<std::uint8_t> empty(K, 0);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ik = 0; ik < static_cast<std::ptrdiff_t>(K); ++ik) {
    const std::size_t k = static_cast<std::size_t>(ik);
    std::vector<double> weights(features.n_points());
    double column_mass = 0.0;
    for (std::size_t p = 0; p < features.n_points(); ++p) {
      weights[p] = assignment.row(p)[k];
      column_mass += weights[p];
    }
    if (!(column_mass > 0.0)) {
      empty[k] = 1;
      converged[k] = 1;
      continue;
    }
    auto mode_row = result.prototypes.values.row(k);
    std::vector<double> mode(mode_row.begin(), mode_row.end());
    auto& trace = result.mass_traces[k];
    std::size_t iter = 0;
    while (iter < config.max_iters) {
      double mass = 0.0;
      auto next = meanshift_step(features, weights, mode, config.sigma2, &mass);
      trace.push_back(mass);
      ++iter;
      const double step = std::sqrt(squared_distance(next, mode));
      mode = std::move(next);
      if (step < config.tol) {
        converged[k] = 1;
        break;
      }
    }
    double final_mass = 0.0;
    for (std::size_t p = 0; p < features.n_points(); ++p)
      if (weights[p] != 0.0) final_mass += weights[p] * rbf_affinity(features.row(p), mode, config.sigma2);
    trace.push_back(final_mass);
    result.iterations[k] = iter;
    std::copy(mode.begin(), mode.end(), mode_row.begin());
  }
  for (std::size_t k = 0; k < K; ++k) {
    result.converged[k] = converged[k] != 0;
    if (empty[k]) result.empty_clusters.push_back(k);
  }
  return result;
}

Matrix prototype_scores(const FeatureMatrix& features, const Prototypes& prototypes, double sigma2) {
  if (prototypes.n_dims() != features.n_dims())
    throw Error(ErrorCode::LengthMismatch, "prototype and feature dimensions differ");
  if (prototypes.rule == PrototypeRule::Modes && (!(sigma2 > 0.0) || !std::isfinite(sigma2)))
    throw Error(ErrorCode::Config, "modes rule needs sigma^2 > 0");
  const std::size_t N = features.n_points();
  const std::size_t K = prototypes.k();
  Matrix a(N, K);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(N); ++ip) {
    const std::size_t p = static_cast<std::size_t>(ip);
    auto out = a.row(p);
    for (std::size_t k = 0; k < K; ++k) {
      const double d2 = squared_distance(features.row(p), prototypes.row(k));
      out[k] = prototypes.rule == PrototypeRule::Means ? -d2 : rbf_affinity(d2, sigma2);
    }
  }
  return a;
}

}  // namespace slk
