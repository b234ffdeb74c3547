#include "slk/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slk/data_io.hpp"
#include "slk/error.hpp"

namespace slk {

namespace {

constexpr double kMonotoneSlack = 1e-9;

void check_problem(const FeatureMatrix& features, const SparseAffinity& graph,
                   const SoftAssignment& assignment, const Prototypes& prototypes) {
  if (graph.n_points() != features.n_points())
    throw Error(ErrorCode::LengthMismatch, "graph and features disagree on n_points");
  if (assignment.n_points() != features.n_points())
    throw Error(ErrorCode::LengthMismatch, "assignment and features disagree on n_points");
  if (assignment.k() != prototypes.k())
    throw Error(ErrorCode::LengthMismatch, "assignment and prototypes disagree on k");
  if (prototypes.n_dims() != features.n_dims())
    throw Error(ErrorCode::LengthMismatch, "prototype and feature dimensions differ");
}

double entropy_term(std::span<const double> s) {
  double acc = 0.0;
  for (double v : s)
    if (v > 0.0) acc += v * std::log(v);
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// b_p for a single row, reading `rows` as the previous iterate.
void votes_row(const SparseAffinity& graph, const Matrix& rows, std::size_t p, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto cols = graph.neighbors(p);
  const auto ws = graph.neighbor_weights(p);
  for (std::size_t e = 0; e < cols.size(); ++e) {
    const auto sq = rows.row(cols[e]);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += ws[e] * sq[k];
  }
  if (graph.diag_shift() != 0.0) {
    const auto sp = rows.row(p);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += graph.diag_shift() * sp[k];
  }
}

Prototypes with_rule(Prototypes prototypes, PrototypeRule rule) {
  prototypes.rule = rule;
  return prototypes;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::Config, "lambda must be finite and >= 0");
  if (!(inner_tol > 0.0) || !(outer_tol > 0.0) || !(mode_tol > 0.0))
    throw Error(ErrorCode::Config, "tolerances must be > 0");
  if (inner_max < 1 || outer_max < 1 || mode_max_iters < 1)
    throw Error(ErrorCode::Config, "iteration caps must be >= 1");
  if (rule == PrototypeRule::Modes && (!(sigma2 > 0.0) || !std::isfinite(sigma2)))
    throw Error(ErrorCode::Config, "modes rule needs sigma^2 > 0");
}

Matrix neighbor_votes(const SparseAffinity& graph, const Matrix& rows) {
  if (rows.rows() != graph.n_points())
    throw Error(ErrorCode::LengthMismatch, "assignment rows do not match graph size");
  Matrix b(rows.rows(), rows.cols());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(rows.rows()); ++ip)
    votes_row(graph, rows, static_cast<std::size_t>(ip), b.row(static_cast<std::size_t>(ip)));
  return b;
}

Matrix neighbor_votes(const SparseAffinity& graph, const SoftAssignment& assignment) {
  return neighbor_votes(graph, assignment.matrix());
}

void s_inner_update(std::span<const double> scores, std::span<const double> votes, double lambda,
                    std::span<double> out) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = scores[k] + (lambda == 0.0 ? 0.0 : lambda * votes[k]);
    top = std::max(top, out[k]);
  }
  double total = 0.0;
  for (double& v : out) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : out) v /= total;
}

std::vector<double> s_inner_update(std::span<const double> scores, std::span<const double> votes,
                                   double lambda) {
  if (scores.size() != votes.size()) throw Error(ErrorCode::LengthMismatch, "score and vote rows differ");
  std::vector<double> out(scores.size());
  s_inner_update(scores, votes, lambda, out);
  return out;
}

InnerResult s_block(const SparseAffinity& graph, const Matrix& scores, const SoftAssignment& start,
                    const SolverConfig& config) {
  const std::size_t N = start.n_points();
  const std::size_t K = start.k();
  if (scores.rows() != N || scores.cols() != K)
    throw Error(ErrorCode::LengthMismatch, "score matrix does not match assignment shape");
  if (graph.n_points() != N) throw Error(ErrorCode::LengthMismatch, "graph does not match assignment");

  InnerResult result{start, 0, true};
  if (start.clamped_count() == N) return result;

  Matrix current = start.matrix();
  Matrix next = current;
  const std::vector<double> no_votes(K, 0.0);
  const bool coupled = config.lambda != 0.0;
  std::vector<double> row_change(N, 0.0);

  result.converged = false;
  for (std::size_t it = 0; it < config.inner_max; ++it) {
#pragma omp parallel
    {
      std::vector<double> votes(K, 0.0);
#pragma omp for schedule(static)
      for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(N); ++ip) {
        const std::size_t p = static_cast<std::size_t>(ip);
        if (start.is_clamped(p)) {
          row_change[p] = 0.0;
          continue;
        }
        if (coupled) votes_row(graph, current, p, votes);
        auto out = next.row(p);
        s_inner_update(scores.row(p), coupled ? std::span<const double>(votes) : no_votes,
                       config.lambda, out);
        double change = 0.0;
        const auto prev = current.row(p);
        for (std::size_t k = 0; k < K; ++k) change = std::max(change, std::abs(out[k] - prev[k]));
        row_change[p] = change;
      }
    }
    std::swap(current, next);
    ++result.iterations;
    const double max_change = *std::max_element(row_change.begin(), row_change.end());
    // Without coupling the update does not depend on the previous iterate.
    if (!coupled || max_change < config.inner_tol) {
      result.converged = true;
      break;
    }
  }
  for (std::size_t p = 0; p < N; ++p)
    if (!start.is_clamped(p)) result.assignment.set_row(p, current.row(p));
  return result;
}

InnerResult s_block(const SparseAffinity& graph, const FeatureMatrix& features,
                    const Prototypes& prototypes, const SoftAssignment& start,
                    const SolverConfig& config) {
  check_problem(features, graph, start, prototypes);
  return s_block(graph, prototype_scores(features, with_rule(prototypes, config.rule), config.sigma2),
                 start, config);
}

double relaxed_objective(const FeatureMatrix& features, const SparseAffinity& graph,
                         const SoftAssignment& assignment, const Prototypes& prototypes,
                         const SolverConfig& config) {
  check_problem(features, graph, assignment, prototypes);
  const Matrix a = prototype_scores(features, with_rule(prototypes, config.rule), config.sigma2);
  const std::size_t N = assignment.n_points();
  const std::size_t K = assignment.k();
  const bool coupled = config.lambda != 0.0;
  std::vector<double> prototype_part(N), entropy_part(N), coupling_part(N, 0.0);
#pragma omp parallel
  {
    std::vector<double> votes(K);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(N); ++ip) {
      const std::size_t p = static_cast<std::size_t>(ip);
      const auto s = assignment.row(p);
      prototype_part[p] = -dot(s, a.row(p));
      entropy_part[p] = entropy_term(s);
      if (coupled) {
        votes_row(graph, assignment.matrix(), p, votes);
        coupling_part[p] = dot(s, votes);
      }
    }
  }
  double prototype_total = 0.0, entropy_total = 0.0, coupling_total = 0.0;
  for (std::size_t p = 0; p < N; ++p) {
    prototype_total += prototype_part[p];
    entropy_total += entropy_part[p];
    coupling_total += coupling_part[p];
  }
  double laplacian = 0.0;
  if (coupled) {
    const double degree_total = graph.total_degree() + graph.diag_shift() * static_cast<double>(N);
    laplacian = 0.5 * config.lambda * (degree_total - coupling_total);
  }
  return prototype_total + laplacian + entropy_total;
}

double discrete_objective(const FeatureMatrix& features, const SparseAffinity& graph,
                          const SoftAssignment& hard, const Prototypes& prototypes,
                          const SolverConfig& config) {
  check_problem(features, graph, hard, prototypes);
  if (!hard.is_binary())
    throw Error(ErrorCode::InvalidArgument, "discrete objective needs a one-hot assignment");
  const Matrix a = prototype_scores(features, with_rule(prototypes, config.rule), config.sigma2);
  double prototype_total = 0.0;
  for (std::size_t p = 0; p < hard.n_points(); ++p) prototype_total -= a(p, argmax(hard.row(p)));
  if (config.lambda == 0.0) return prototype_total;
  return prototype_total + 0.25 * config.lambda * laplacian_quadratic(graph, hard);
}

double auxiliary_value(const FeatureMatrix& features, const SparseAffinity& graph,
                       const SoftAssignment& assignment, const SoftAssignment& anchor,
                       const Prototypes& prototypes, const SolverConfig& config) {
  check_problem(features, graph, assignment, prototypes);
  check_problem(features, graph, anchor, prototypes);
  const Matrix a = prototype_scores(features, with_rule(prototypes, config.rule), config.sigma2);
  const Matrix b = neighbor_votes(graph, anchor);
  const std::size_t N = assignment.n_points();
  double bound = 0.0;
  double anchor_coupling = 0.0;
  for (std::size_t p = 0; p < N; ++p) {
    const auto s = assignment.row(p);
    bound += entropy_term(s) - dot(s, a.row(p)) - config.lambda * dot(s, b.row(p));
    anchor_coupling += dot(anchor.row(p), b.row(p));
  }
  const double degree_total = graph.total_degree() + graph.diag_shift() * static_cast<double>(N);
  return bound + 0.5 * config.lambda * (degree_total + anchor_coupling);
}

Rounded round_and_refit(const FeatureMatrix& features, const SoftAssignment& assignment,
                        const Prototypes& prototypes, const SolverConfig& config) {
  const auto labels = assignment.hard_labels();
  SoftAssignment hard = SoftAssignment::one_hot(labels, assignment.k());
  for (std::size_t p = 0; p < assignment.n_points(); ++p)
    if (assignment.is_clamped(p)) hard.clamp(p, assignment.clamp_class(p));
  Prototypes refit = config.rule == PrototypeRule::Means
                         ? update_means(features, hard, prototypes, nullptr)
                         : update_modes(features, hard, config.mode_config(), with_rule(prototypes, PrototypeRule::Modes))
                               .prototypes;
  return {std::move(hard), std::move(refit)};
}

SolveResult solve_from(const FeatureMatrix& features, const SparseAffinity& graph,
                       const SoftAssignment& start, const Prototypes& init, const SolverConfig& config) {
  config.validate();
  init.validate();
  check_problem(features, graph, start, init);
  start.validate();

  SolveResult result{start, with_rule(init, config.rule), {}};
  SolveReport& report = result.report;
  SoftAssignment& S = result.assignment;
  Prototypes& M = result.prototypes;

  Matrix a = prototype_scores(features, M, config.sigma2);
  double previous = relaxed_objective(features, graph, S, M, config);
  report.relaxed_trace.push_back(previous);
  report.inner_trace.push_back(0);

  bool warned_inner = false, warned_increase = false, warned_modes = false;
  auto run_s_block = [&](std::size_t outer) {
    InnerResult inner = s_block(graph, a, S, config);
    S = std::move(inner.assignment);
    report.inner_iters_total += inner.iterations;
    if (!inner.converged && !warned_inner) {
      report.warnings.push_back("inner loop reached inner_max at outer iteration " + std::to_string(outer));
      warned_inner = true;
    }
    return inner.iterations;
  };
  auto check_increase = [&](double before, double after, std::size_t outer) {
    if (after > before + kMonotoneSlack * (1.0 + std::abs(before)) && !warned_increase) {
      report.warnings.push_back("relaxed objective increased at outer iteration " + std::to_string(outer) +
                                " (affinity may not be psd; consider a diagonal shift)");
      warned_increase = true;
    }
  };

  for (std::size_t outer = 1; outer <= config.outer_max; ++outer) {
    if (config.inner_start == InnerStart::Softmax && outer > 1) {
      const std::vector<double> zeros(S.k(), 0.0);
      for (std::size_t p = 0; p < S.n_points(); ++p)
        if (!S.is_clamped(p)) S.set_row(p, s_inner_update(a.row(p), zeros, 0.0));
    }
    report.inner_trace.push_back(run_s_block(outer));
    report.outer_iters = outer;

    if (config.rule == PrototypeRule::Means) {
      std::vector<std::size_t> empty;
      M = update_means(features, S, M, &empty);
      for (std::size_t k : empty)
        report.warnings.push_back("empty cluster " + std::to_string(k) + " kept its prototype at outer iteration " +
                                  std::to_string(outer));
    } else {
      ModeUpdate modes = update_modes(features, S, config.mode_config(), M);
      if (!modes.all_converged() && !warned_modes) {
        report.warnings.push_back("mode solver reached max_iters at outer iteration " + std::to_string(outer));
        warned_modes = true;
      }
      for (std::size_t k : modes.empty_clusters)
        report.warnings.push_back("empty cluster " + std::to_string(k) + " kept its prototype at outer iteration " +
                                  std::to_string(outer));
      M = std::move(modes.prototypes);
    }
    a = prototype_scores(features, M, config.sigma2);

    const double current = relaxed_objective(features, graph, S, M, config);
    report.relaxed_trace.push_back(current);
    check_increase(previous, current, outer);
    if (std::abs(current - previous) <= config.outer_tol * std::max(1.0, std::abs(previous))) {
      report.converged = true;
      break;
    }
    previous = current;
  }
  if (!report.converged)
    report.warnings.push_back("outer loop reached outer_max without meeting outer_tol");

  // A last assignment pass against the final prototypes, folded into the
  // final trace entry, so the returned S is the S-block solution for M.
  report.inner_trace.back() += run_s_block(report.outer_iters);
  const double polished = relaxed_objective(features, graph, S, M, config);
  check_increase(report.relaxed_trace.back(), polished, report.outer_iters);
  report.relaxed_trace.back() = polished;

  const Rounded rounded = round_and_refit(features, S, M, config);
  report.discrete_objective = discrete_objective(features, graph, rounded.hard, rounded.prototypes, config);
  return result;
}

SolveResult solve(const FeatureMatrix& features, const SparseAffinity& graph, const Prototypes& init,
                  const SolverConfig& config, std::span<const Clamp> clamps) {
  config.validate();
  init.validate();
  if (init.n_dims() != features.n_dims())
    throw Error(ErrorCode::LengthMismatch, "prototype and feature dimensions differ");
  SoftAssignment start(features.n_points(), init.k());
  const Matrix a = prototype_scores(features, with_rule(init, config.rule), config.sigma2);
  const std::vector<double> zeros(init.k(), 0.0);
  for (std::size_t p = 0; p < features.n_points(); ++p) start.set_row(p, s_inner_update(a.row(p), zeros, 0.0));
  for (const auto& c : clamps) start.clamp(c.point, c.cls);
  return solve_from(features, graph, start, init, config);
}

std::string format_trace_csv(const SolveReport& report) {
  std::string out = "iteration,relaxed_objective,inner_iters\n";
  for (std::size_t i = 0; i < report.relaxed_trace.size(); ++i)
    out += std::to_string(i) + ',' + format_double(report.relaxed_trace[i]) + ',' +
           std::to_string(report.inner_trace[i]) + '\n';
  return out;
}

void save_trace_csv(const SolveReport& report, const std::filesystem::path& path) {
  write_text_file(path, format_trace_csv(report));
}

}  // namespace slk
