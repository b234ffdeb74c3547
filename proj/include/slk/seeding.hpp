#pragma once

#include <cstddef>
#include <cstdint>

#include "slk/features.hpp"
#include "slk/prototypes.hpp"

namespace slk {

// K-means++ seeding: first centre uniform, then D^2-weighted draws.
// Deterministic for a given seed.
Prototypes kmeanspp_seeds(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                          PrototypeRule rule = PrototypeRule::Means);

}  // namespace slk
