#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slk/assignment.hpp"
#include "slk/features.hpp"
#include "slk/matrix.hpp"

namespace slk {

enum class PrototypeRule { Means, Modes };
PrototypeRule parse_prototype_rule(std::string_view name);
std::string to_string(PrototypeRule rule);

// K x d prototype matrix.
struct Prototypes {
  Matrix values;
  PrototypeRule rule = PrototypeRule::Means;

  std::size_t k() const noexcept { return values.rows(); }
  std::size_t n_dims() const noexcept { return values.cols(); }
  std::span<const double> row(std::size_t k) const { return values.row(k); }

  void validate() const;
};

struct ModeSolverConfig {
  double sigma2 = 1.0;
  double tol = 1e-6;  // stop once ||m_{n+1} - m_n||_2 < tol
  std::size_t max_iters = 100;

  void validate() const;
};

// Gaussian kernel exp(-||x - m||^2 / (2 sigma^2)), with the exponent
// clamped at -700 so weights never underflow to zero.
inline constexpr double kMinKernelExponent = -700.0;
double rbf_affinity(double dist2, double sigma2);
double rbf_affinity(std::span<const double> x, std::span<const double> m, double sigma2);

// Per-cluster weighted means. Throws EmptyCluster for a zero-mass column.
Prototypes update_means(const FeatureMatrix& features, const SoftAssignment& assignment);

// Same, but a zero-mass cluster keeps its row from `previous` and its index
// is appended to `empty_clusters`.
Prototypes update_means(const FeatureMatrix& features, const SoftAssignment& assignment,
                        const Prototypes& previous, std::vector<std::size_t>* empty_clusters);

// One mean-shift step g(m) = sum_p w_p K(x_p,m) x_p / sum_p w_p K(x_p,m).
// `kernel_mass` receives the denominator u(m) when non-null.
std::vector<double> meanshift_step(const FeatureMatrix& features, std::span<const double> weights,
                                   std::span<const double> mode, double sigma2,
                                   double* kernel_mass = nullptr);

struct ModeUpdate {
  Prototypes prototypes;
  // u^n = sum_p s_{p,k} K(x_p, m^n) for every visited iterate m^0, m^1, ...
  std::vector<std::vector<double>> mass_traces;
  std::vector<std::size_t> iterations;
  std::vector<bool> converged;
  std::vector<std::size_t> empty_clusters;

  bool all_converged() const;
};

// Fixed-point iteration m <- g(m) per cluster, started from `init`. Clusters
// are solved in parallel. A zero-mass cluster keeps its initial mode.
ModeUpdate update_modes(const FeatureMatrix& features, const SoftAssignment& assignment,
                        const ModeSolverConfig& config, const Prototypes& init);

// Negated per-point cost used by the assignment update:
//   means: a_{p,k} = -||x_p - m_k||^2
//   modes: a_{p,k} = K(x_p, m_k)
Matrix prototype_scores(const FeatureMatrix& features, const Prototypes& prototypes, double sigma2);

}  // namespace slk
