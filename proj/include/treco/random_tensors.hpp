#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "treco/decomposition.hpp"
#include "treco/tensor.hpp"

namespace treco {

/// Stateless seed mixer for deriving independent sub-streams
/// (per trial, per sample, per purpose) from one base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Random tensor of exact Tucker rank `rank` (almost surely): core
/// entries are i.i.d. N(0,1) and factor j holds the first r_j left
/// singular vectors of an n_j x n_j matrix with i.i.d. N(0,1) entries.
/// Deterministic under the seed; draw order is core first (flat,
/// co-lexicographic), then the factor matrices mode by mode
/// (column-major).
std::pair<DenseTensor, TuckerTensor> gen_random_tucker(const Shape& shape,
                                                       const std::vector<index_t>& rank,
                                                       std::uint64_t seed);

/// Random TT tensor: every core entry i.i.d. N(0,1), drawn core by core
/// in flat co-lexicographic order. Bond ranks are exact almost surely.
TTTensor gen_random_tt(const Shape& shape, const std::vector<index_t>& rank, std::uint64_t seed);

/// Random unit-norm tensor of multilinear rank <= r in the given format,
/// the sample distribution used by the TRIP prober.
DenseTensor gen_random_unit(const Shape& shape, const RankTuple& rank, std::uint64_t seed);

/// Dense tensor with i.i.d. N(0,1) entries.
DenseTensor gen_random_dense(const Shape& shape, std::uint64_t seed);

} // namespace treco
