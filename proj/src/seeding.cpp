#include "slk/seeding.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "slk/error.hpp"

namespace slk {

Prototypes kmeanspp_seeds(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                          PrototypeRule rule) {
  const std::size_t n = features.n_points();
  if (k < 1 || k > n) throw Error(ErrorCode::InvalidArgument, "k-means++ needs 1 <= k <= n_points");
  std::mt19937_64 rng(seed);
  Prototypes out{Matrix(k, features.n_dims()), rule};
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  auto place = [&](std::size_t slot, std::size_t point) {
    const auto src = features.row(point);
    std::copy(src.begin(), src.end(), out.values.row(slot).begin());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(n); ++ip) {
      const std::size_t p = static_cast<std::size_t>(ip);
      nearest[p] = std::min(nearest[p], squared_distance(features.row(p), src));
    }
  };

  place(0, std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  for (std::size_t slot = 1; slot < k; ++slot) {
    double total = 0.0;
    for (double d : nearest) total += d;
    std::size_t chosen = 0;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      chosen = n - 1;
      for (std::size_t p = 0; p < n; ++p) {
        target -= nearest[p];
        if (target < 0.0) {
          chosen = p;
          break;
        }
      }
    } else {
      // Every point already coincides with a centre.
      chosen = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    place(slot, chosen);
  }
  return out;
}

}  // namespace slk
