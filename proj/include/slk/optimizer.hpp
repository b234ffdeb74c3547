#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "slk/affinity.hpp"
#include "slk/assignment.hpp"
#include "slk/features.hpp"
#include "slk/prototypes.hpp"

namespace slk {

// How each outer iteration seeds its inner assignment loop. The first outer
// iteration always starts from softmax(a(M0)).
enum class InnerStart {
  Warm,     // continue from the previous outer iteration's assignment
  Softmax,  // restart from softmax(a) at every outer iteration
};

struct SolverConfig {
  double lambda = 0.0;
  PrototypeRule rule = PrototypeRule::Means;
  double sigma2 = 0.0;  // kernel width for the modes rule; unused for means
  double inner_tol = 1e-6;
  std::size_t inner_max = 100;
  double outer_tol = 1e-6;
  std::size_t outer_max = 100;
  std::uint64_t seed = 0;
  double mode_tol = 1e-6;
  std::size_t mode_max_iters = 100;
  InnerStart inner_start = InnerStart::Warm;

  ModeSolverConfig mode_config() const { return {sigma2, mode_tol, mode_max_iters}; }
  void validate() const;
};

struct SolveReport {
  // R after the initial softmax assignment, then after every outer
  // iteration (S-block followed by the prototype update). The last entry
  // also includes the closing assignment pass.
  std::vector<double> relaxed_trace;
  // Inner sweeps spent in each outer iteration (0 for the initial entry).
  std::vector<std::size_t> inner_trace;
  double discrete_objective = 0.0;
  std::size_t outer_iters = 0;
  std::size_t inner_iters_total = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct SolveResult {
  SoftAssignment assignment;
  Prototypes prototypes;
  SolveReport report;
};

struct InnerResult {
  SoftAssignment assignment;
  std::size_t iterations = 0;
  bool converged = false;
};

// b = W S (+ shift * S), row by row.
Matrix neighbor_votes(const SparseAffinity& graph, const Matrix& rows);
Matrix neighbor_votes(const SparseAffinity& graph, const SoftAssignment& assignment);

// s = softmax(a + lambda * b), computed with the row max subtracted.
void s_inner_update(std::span<const double> scores, std::span<const double> votes, double lambda,
                    std::span<double> out);
std::vector<double> s_inner_update(std::span<const double> scores, std::span<const double> votes,
                                   double lambda);

// Synchronous inner loop on a fixed score matrix: every unclamped row is
// recomputed from votes of the previous iterate until the largest entry
// change drops below inner_tol or inner_max sweeps have run.
InnerResult s_block(const SparseAffinity& graph, const Matrix& scores, const SoftAssignment& start,
                    const SolverConfig& config);
InnerResult s_block(const SparseAffinity& graph, const FeatureMatrix& features,
                    const Prototypes& prototypes, const SoftAssignment& start,
                    const SolverConfig& config);

// R(S, M) = F(S, M) + (lambda/2) * (sum_p (d_p + shift) - sum_{p,q} w'(p,q) s_p.s_q)
//           + sum_p s_p . log s_p,   with w' = W + shift*I and 0 log 0 = 0.
// The Laplacian part is the concave relaxation; at one-hot S it equals
// (lambda/4) * laplacian_quadratic(W, S).
double relaxed_objective(const FeatureMatrix& features, const SparseAffinity& graph,
                         const SoftAssignment& assignment, const Prototypes& prototypes,
                         const SolverConfig& config);

// E(S, M) = F(S, M) + (lambda/4) * laplacian_quadratic(W, S) for one-hot S.
double discrete_objective(const FeatureMatrix& features, const SparseAffinity& graph,
                          const SoftAssignment& hard, const Prototypes& prototypes,
                          const SolverConfig& config);

// Bound on R built at `anchor`:
//   A(S) = sum_p s_p.(log s_p - a_p - lambda b_p(anchor))
//          + (lambda/2) * (sum_p (d_p + shift) + sum_p anchor_p.b_p(anchor)).
// A >= R whenever W + shift*I is psd, with equality at the anchor.
double auxiliary_value(const FeatureMatrix& features, const SparseAffinity& graph,
                       const SoftAssignment& assignment, const SoftAssignment& anchor,
                       const Prototypes& prototypes, const SolverConfig& config);

// Argmax rounding (clamps kept) followed by one prototype refit on the hard
// labels.
struct Rounded {
  SoftAssignment hard;
  Prototypes prototypes;
};
Rounded round_and_refit(const FeatureMatrix& features, const SoftAssignment& assignment,
                        const Prototypes& prototypes, const SolverConfig& config);

struct Clamp {
  std::size_t point = 0;
  int cls = 0;
};

// Alternates S-blocks and prototype updates, starting from softmax(a(M0)) on
// unclamped rows. The returned assignment is the S-block solution for the
// returned prototypes.
SolveResult solve(const FeatureMatrix& features, const SparseAffinity& graph, const Prototypes& init,
                  const SolverConfig& config, std::span<const Clamp> clamps = {});

// Same loop from an explicit starting assignment (its clamps are honoured).
SolveResult solve_from(const FeatureMatrix& features, const SparseAffinity& graph,
                       const SoftAssignment& start, const Prototypes& init, const SolverConfig& config);

// CSV "iteration,relaxed_objective,inner_iters".
std::string format_trace_csv(const SolveReport& report);
void save_trace_csv(const SolveReport& report, const std::filesystem::path& path);

}  // namespace slk
