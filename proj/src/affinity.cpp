#include "slk/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "slk/data_io.hpp"
#include "slk/error.hpp"

namespace slk {

SparseAffinity::SparseAffinity(std::size_t n_points, std::vector<std::size_t> row_offsets,
                               std::vector<std::uint32_t> col_indices, std::vector<double> weights,
                               bool symmetric, double diag_shift)
    : n_points_(n_points),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      weights_(std::move(weights)),
      diag_shift_(diag_shift),
      symmetric_(symmetric) {
  if (row_offsets_.size() != n_points_ + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != col_indices_.size() || col_indices_.size() != weights_.size())
    throw Error(ErrorCode::InvalidArgument, "inconsistent CSR arrays");
  degrees_.assign(n_points_, 0.0);
  for (std::size_t p = 0; p < n_points_; ++p) {
    if (row_offsets_[p + 1] < row_offsets_[p])
      throw Error(ErrorCode::InvalidArgument, "row offsets must be non-decreasing", p);
    double d = 0.0;
    for (std::size_t e = row_offsets_[p]; e < row_offsets_[p + 1]; ++e) d += weights_[e];
    degrees_[p] = d;
  }
  validate();
}

SparseAffinity SparseAffinity::from_triplets(std::size_t n_points, std::vector<Triplet> triplets,
                                             bool symmetric, double diag_shift) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offsets(n_points + 1, 0);
  std::vector<std::uint32_t> cols;
  std::vector<double> weights;
  cols.reserve(triplets.size());
  weights.reserve(triplets.size());
  for (const auto& t : triplets) {
    if (t.row >= n_points || t.col >= n_points)
      throw Error(ErrorCode::IndexOutOfRange, "edge endpoint out of range", t.row, t.col);
    ++offsets[t.row + 1];
    cols.push_back(static_cast<std::uint32_t>(t.col));
    weights.push_back(t.weight);
  }
  for (std::size_t p = 0; p < n_points; ++p) offsets[p + 1] += offsets[p];
  return SparseAffinity(n_points, std::move(offsets), std::move(cols), std::move(weights), symmetric,
                        diag_shift);
}

SparseAffinity SparseAffinity::empty(std::size_t n_points) {
  return SparseAffinity(n_points, std::vector<std::size_t>(n_points + 1, 0), {}, {}, true, 0.0);
}

void SparseAffinity::validate() const {
  if (!(diag_shift_ >= 0.0) || !std::isfinite(diag_shift_))
    throw Error(ErrorCode::InvalidArgument, "diagonal shift must be finite and >= 0");
  if (n_points_ > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::InvalidArgument, "graph too large for 32-bit column indices");
  for (std::size_t p = 0; p < n_points_; ++p) {
    for (std::size_t e = row_offsets_[p]; e < row_offsets_[p + 1]; ++e) {
      const std::size_t q = col_indices_[e];
      if (q >= n_points_) throw Error(ErrorCode::IndexOutOfRange, "column index out of range", p, q);
      if (q == p) throw Error(ErrorCode::InvalidArgument, "self-loop in affinity graph", p, q);
      if (e > row_offsets_[p] && col_indices_[e - 1] >= q)
        throw Error(ErrorCode::InvalidArgument, "duplicate or unsorted column in row", p, q);
      if (!(weights_[e] >= 0.0) || !std::isfinite(weights_[e]))
        throw Error(ErrorCode::InvalidArgument, "edge weight must be finite and >= 0", p, q);
    }
  }
  if (symmetric_) {
    for (std::size_t p = 0; p < n_points_; ++p)
      for (std::size_t e = row_offsets_[p]; e < row_offsets_[p + 1]; ++e)
        if (weight(col_indices_[e], p) != weights_[e])
          throw Error(ErrorCode::InvalidArgument, "graph flagged symmetric but w(p,q) != w(q,p)", p,
                      col_indices_[e]);
  }
}

double SparseAffinity::weight(std::size_t p, std::size_t q) const {
  const auto cols = neighbors(p);
  const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(q));
  if (it == cols.end() || *it != q) return 0.0;
  return weights_[row_offsets_[p] + static_cast<std::size_t>(it - cols.begin())];
}

double SparseAffinity::total_degree() const {
  double total = 0.0;
  for (double d : degrees_) total += d;
  return total;
}

SparseAffinity SparseAffinity::with_diag_shift(double delta) const {
  SparseAffinity copy = *this;
  copy.diag_shift_ = delta;
  copy.validate();
  return copy;
}

std::vector<Triplet> SparseAffinity::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t p = 0; p < n_points_; ++p)
    for (std::size_t e = row_offsets_[p]; e < row_offsets_[p + 1]; ++e)
      out.push_back({p, col_indices_[e], weights_[e]});
  return out;
}

NeighborLists knn_search(const FeatureMatrix& features, std::size_t rho) {
  const std::size_t n = features.n_points();
  if (rho < 1 || rho >= n)
    throw Error(ErrorCode::InvalidArgument,
                "rho must satisfy 1 <= rho < n_points (rho=" + std::to_string(rho) +
                    ", n_points=" + std::to_string(n) + ")");
  NeighborLists lists{n, rho, std::vector<std::uint32_t>(n * rho), std::vector<double>(n * rho)};
  const std::size_t d = features.n_dims();
  const double* data = features.matrix().values().data();

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(n); ++ip) {
    const std::size_t p = static_cast<std::size_t>(ip);
    // Sorted by (distance, index). Candidates arrive in increasing index, so
    // an equal distance never displaces an existing entry.
    std::uint32_t* best_idx = lists.index.data() + p * rho;
    double* best_d = lists.dist2.data() + p * rho;
    std::size_t filled = 0;
    const double* xp = data + p * d;
    for (std::size_t q = 0; q < n; ++q) {
      if (q == p) continue;
      const double* xq = data + q * d;
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = xp[j] - xq[j];
        dist += diff * diff;
      }
      if (filled == rho && !(dist < best_d[rho - 1])) continue;
      std::size_t pos = filled == rho ? rho - 1 : filled;
      while (pos > 0 && dist < best_d[pos - 1]) {
        best_d[pos] = best_d[pos - 1];
        best_idx[pos] = best_idx[pos - 1];
        --pos;
      }
      best_d[pos] = dist;
      best_idx[pos] = static_cast<std::uint32_t>(q);
      if (filled < rho) ++filled;
    }
  }
  return lists;
}

SparseAffinity knn_graph(const NeighborLists& neighbors) {
  const std::size_t n = neighbors.n_points;
  const std::size_t rho = neighbors.rho;
  std::vector<std::size_t> offsets(n + 1);
  std::vector<std::uint32_t> cols(n * rho);
  for (std::size_t p = 0; p < n; ++p) {
    offsets[p + 1] = (p + 1) * rho;
    auto row = neighbors.of(p);
    std::copy(row.begin(), row.end(), cols.begin() + static_cast<std::ptrdiff_t>(p * rho));
    std::sort(cols.begin() + static_cast<std::ptrdiff_t>(p * rho),
              cols.begin() + static_cast<std::ptrdiff_t>((p + 1) * rho));
  }
  return SparseAffinity(n, std::move(offsets), std::move(cols), std::vector<double>(n * rho, 1.0),
                        false);
}

SparseAffinity knn_graph(const FeatureMatrix& features, std::size_t rho) {
  return knn_graph(knn_search(features, rho));
}

SymmetrizeMode parse_symmetrize_mode(std::string_view name) {
  if (name == "max") return SymmetrizeMode::Max;
  if (name == "mean") return SymmetrizeMode::Mean;
  if (name == "none") return SymmetrizeMode::None;
  throw Error(ErrorCode::Config, "unknown symmetrization mode '" + std::string(name) + "'");
}

std::string to_string(SymmetrizeMode mode) {
  switch (mode) {
    case SymmetrizeMode::Max: return "max";
    case SymmetrizeMode::Mean: return "mean";
    case SymmetrizeMode::None: return "none";
  }
  return "max";
}

SparseAffinity symmetrize(const SparseAffinity& graph, SymmetrizeMode mode) {
  if (mode == SymmetrizeMode::None) return graph;
  const std::size_t n = graph.n_points();
  // Count the union pattern row by row: entries of row p plus the transpose.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto cols = graph.neighbors(p);
    const auto ws = graph.neighbor_weights(p);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      rows[p].emplace_back(cols[e], ws[e]);
      rows[cols[e]].emplace_back(static_cast<std::uint32_t>(p), ws[e]);
    }
  }
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<std::uint32_t> out_cols;
  std::vector<double> out_w;
  for (std::size_t p = 0; p < n; ++p) {
    auto& r = rows[p];
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < r.size();) {
      const std::uint32_t q = r[i].first;
      // At most two contributions per (p,q): w(p,q) and w(q,p).
      const double forward = graph.weight(p, q);
      const double backward = graph.weight(q, p);
      const double w = mode == SymmetrizeMode::Max ? std::max(forward, backward)
                                                   : 0.5 * (forward + backward);
      out_cols.push_back(q);
      out_w.push_back(w);
      while (i < r.size() && r[i].first == q) ++i;
    }
    offsets[p + 1] = out_cols.size();
    std::vector<std::pair<std::uint32_t, double>>().swap(r);
  }
  return SparseAffinity(n, std::move(offsets), std::move(out_cols), std::move(out_w), true,
                        graph.diag_shift());
}

KernelWidth::KernelWidth(double value) : sigma2(value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw Error(ErrorCode::InvalidArgument, "kernel width sigma^2 must be finite and > 0");
}

KernelWidth estimate_sigma2(const NeighborLists& neighbors) {
  double total = 0.0;
  for (double d : neighbors.dist2) total += d;
  if (total <= 0.0)
    throw Error(ErrorCode::DegenerateData, "all neighbour distances are zero; cannot estimate sigma^2");
  return KernelWidth(total / (static_cast<double>(neighbors.n_points) * static_cast<double>(neighbors.rho)));
}

KernelWidth estimate_sigma2(const FeatureMatrix& features, std::size_t rho) {
  return estimate_sigma2(knn_search(features, rho));
}

double laplacian_quadratic(const SparseAffinity& graph, const Matrix& rows) {
  if (rows.rows() != graph.n_points())
    throw Error(ErrorCode::LengthMismatch, "assignment rows do not match graph size");
  std::vector<double> per_row(graph.n_points(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(graph.n_points()); ++ip) {
    const std::size_t p = static_cast<std::size_t>(ip);
    const auto cols = graph.neighbors(p);
    const auto ws = graph.neighbor_weights(p);
    double acc = 0.0;
    for (std::size_t e = 0; e < cols.size(); ++e) acc += ws[e] * squared_distance(rows.row(p), rows.row(cols[e]));
    per_row[p] = acc;
  }
  double total = 0.0;
  for (double v : per_row) total += v;
  return total;
}

double laplacian_quadratic(const SparseAffinity& graph, const SoftAssignment& assignment) {
  return laplacian_quadratic(graph, assignment.matrix());
}

double gershgorin_shift(const SparseAffinity& graph) {
  double best = 0.0;
  for (double d : graph.degrees()) best = std::max(best, d);
  return best;
}

std::string format_graph_triplets(const SparseAffinity& graph) {
  std::string out;
  for (const auto& t : graph.triplets())
    out += std::to_string(t.row) + ' ' + std::to_string(t.col) + ' ' + format_double(t.weight) + '\n';
  return out;
}

void save_graph_triplets(const SparseAffinity& graph, const std::filesystem::path& path) {
  write_text_file(path, format_graph_triplets(graph));
}

}  // namespace slk
