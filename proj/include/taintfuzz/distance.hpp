#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace taintfuzz {

using ByteBuf = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

/// Positions where the two buffers disagree after zero-padding the shorter
/// one to the longer length. Returned indices are strictly increasing.
std::vector<size_t> byte_diff_positions(ByteView x, ByteView y);

/// Collects padded diff positions into `out` until more than `limit` are
/// found. Returns true iff the total diff count is <= limit; on false, `out`
/// holds the first limit+1 positions. Avoids allocation in hot loops.
bool byte_diff_limited(ByteView x, ByteView y, size_t limit,
                       std::vector<size_t>& out);

/// Number of differing positions over the zero-padded pair.
size_t l0_count(ByteView x, ByteView y);

/// Generalized Lp norm of the per-index differences X[i] - Y[i] over the
/// zero-padded pair. p must be 1 or 2.
double lp_norm(ByteView x, ByteView y, int p);

/// Exact integer L1 (sum of absolute byte differences, zero-padded).
uint64_t l1_sum(ByteView x, ByteView y);

/// Levenshtein distance with unit-cost insert/delete/substitute over the
/// unpadded sequences. Inputs above 1 MiB per side are rejected with
/// std::invalid_argument.
size_t edit_distance(ByteView x, ByteView y);

/// Levenshtein distance by banded dynamic programming. `upper_bound` must be
/// a true upper bound on the distance (e.g. total bytes touched by the
/// mutations that produced y from x); the result is then exact.
size_t edit_distance_bounded(ByteView x, ByteView y, size_t upper_bound);

constexpr size_t kMaxDistanceInput = 1u << 20;

/// Exact per-pair perturbation measurement between a seed and one mutant.
struct DistanceReport {
  size_t l0 = 0;
  uint64_t l1 = 0;
  double l2 = 0.0;
  size_t edit = 0;
  size_t pair_count = 1;
};

DistanceReport measure_distance(ByteView seed, ByteView mutant);

/// Same measurement but with a caller-supplied edit-distance bound, for the
/// bulk experiments where the mutation trail is known.
DistanceReport measure_distance_bounded(ByteView seed, ByteView mutant,
                                        size_t edit_upper_bound);

}  // namespace taintfuzz
