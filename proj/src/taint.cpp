#include "taintfuzz/taint.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace taintfuzz {

uint32_t adaptive_k(size_t seed_len, size_t n_mut, const ThresholdParams& params) {
  const double raw =
      params.beta * static_cast<double>(seed_len) / static_cast<double>(n_mut);
  const uint64_t rounded = static_cast<uint64_t>(std::llround(raw));
  const uint64_t upper =
      std::max<uint64_t>(1, seed_len / std::max<uint32_t>(1, params.k_max_divisor));
  return static_cast<uint32_t>(
      std::clamp<uint64_t>(rounded, params.k_min, upper));
}

bool behavior_differs(const ProgramBehavior& a, const ProgramBehavior& b) {
  if (a.records == b.records) return false;
  // Same records in a different shape can still be equal behavior: compare
  // the per-branch value sequences.
  std::map<BranchId, std::vector<int64_t>> ma, mb;
  for (const auto& r : a.records) ma[r.branch_id].push_back(r.value);
  for (const auto& r : b.records) mb[r.branch_id].push_back(r.value);
  return ma != mb;
}

void infer_and_accumulate(ByteView seed_bytes, const ProgramBehavior& seed_pb,
                          ByteView mutant, const ProgramBehavior& mutant_pb,
                          uint32_t k, TaintMap& map,
                          std::vector<size_t>& diff) {
  map.samples_seen += 1;
  if (!byte_diff_limited(seed_bytes, mutant, k, diff)) return;
  // Diff indices past the seed length (the mutant grew) would fall outside
  // the counter array; such mutants are rejected.
  for (size_t idx : diff) {
    if (idx >= seed_bytes.size()) return;
  }
  if (!behavior_differs(seed_pb, mutant_pb)) return;
  map.samples_accepted += 1;
  for (size_t idx : diff) map.counts[idx] += 1;
}

void infer_and_accumulate(ByteView seed_bytes, const ProgramBehavior& seed_pb,
                          ByteView mutant, const ProgramBehavior& mutant_pb,
                          uint32_t k, TaintMap& map) {
  std::vector<size_t> diff;
  infer_and_accumulate(seed_bytes, seed_pb, mutant, mutant_pb, k, map, diff);
}

void write_taint_csv(std::ostream& os, const TaintMap& map, uint64_t seed_id,
                     uint32_t k) {
  os << "# seed_id=" << seed_id << " k=" << k
     << " samples_seen=" << map.samples_seen
     << " samples_accepted=" << map.samples_accepted << "\n";
  os << "index,count\n";
  for (size_t i = 0; i < map.counts.size(); ++i) {
    os << i << "," << map.counts[i] << "\n";
  }
}

}  // namespace taintfuzz
