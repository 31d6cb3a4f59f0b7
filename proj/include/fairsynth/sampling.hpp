#pragma once

#include <cstdint>

#include "fairsynth/joint_model.hpp"
#include "fairsynth/schema.hpp"

namespace fairsynth {

/// n i.i.d. rows over the union schema, ancestral order per variant.
/// Deterministic for a fixed (model, n, seed) and independent of thread
/// count: rows are generated in fixed-size chunks, each chunk seeded by
/// derive_seed(seed, "sample_chunk", chunk_index).
DataTable sample(const JointModel& model, std::size_t n, std::uint64_t seed);

}  // namespace fairsynth
