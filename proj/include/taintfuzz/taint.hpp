#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "taintfuzz/distance.hpp"
#include "taintfuzz/targets.hpp"

namespace taintfuzz {

/// Parameters of the adaptive mutation threshold k.
struct ThresholdParams {
  // Default calibrated so a 2,603-byte seed with ~50k sampling mutants gets a
  // pre-clamp k of 5.
  double beta = 96.0;
  uint32_t k_min = 1;
  uint32_t k_max_divisor = 32;
};

/// k = clamp(round(beta * seed_len / n_mut), k_min, max(1, seed_len / 32)).
uint32_t adaptive_k(size_t seed_len, size_t n_mut, const ThresholdParams& params);

/// Per-byte cumulative inference counters for one seed.
struct TaintMap {
  std::vector<uint64_t> counts;  // length == owning seed's byte length
  uint64_t samples_seen = 0;
  uint64_t samples_accepted = 0;

  TaintMap() = default;
  explicit TaintMap(size_t seed_len) : counts(seed_len, 0) {}
  void reset(size_t seed_len) {
    counts.assign(seed_len, 0);
    samples_seen = 0;
    samples_accepted = 0;
  }
};

/// True iff the executed frontier-branch id sets differ, or any branch id
/// common to both recorded a different operand value.
bool behavior_differs(const ProgramBehavior& a, const ProgramBehavior& b);

/// One inference step of the sampling phase: counts samples_seen, and when
/// the mutant has at most k byte diffs (all within the seed's length) and a
/// differing behavior, credits every differing position.
void infer_and_accumulate(ByteView seed_bytes, const ProgramBehavior& seed_pb,
                          ByteView mutant, const ProgramBehavior& mutant_pb,
                          uint32_t k, TaintMap& map);

/// Scratch-buffer variant for hot loops; diff_scratch is clobbered.
void infer_and_accumulate(ByteView seed_bytes, const ProgramBehavior& seed_pb,
                          ByteView mutant, const ProgramBehavior& mutant_pb,
                          uint32_t k, TaintMap& map,
                          std::vector<size_t>& diff_scratch);

/// One row per byte index (`index,count`), preceded by a comment header with
/// the seed id, k, and sample counters.
void write_taint_csv(std::ostream& os, const TaintMap& map, uint64_t seed_id,
                     uint32_t k);

}  // namespace taintfuzz
