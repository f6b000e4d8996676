#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "taintfuzz/distance.hpp"

namespace taintfuzz {

struct TargetNotFound : std::runtime_error {
  explicit TargetNotFound(const std::string& name)
      : std::runtime_error("unknown target: " + name) {}
};

using BlockId = uint32_t;
using BranchId = uint32_t;

/// AFL-style edge-hit bitmap with 65,536 slots. Hit bits only, no counts.
struct CoverageMap {
  static constexpr size_t kSlots = 65536;
  std::array<uint64_t, kSlots / 64> words{};

  void clear() { words.fill(0); }
  void set(uint32_t slot) { words[slot >> 6] |= 1ull << (slot & 63); }
  bool test(uint32_t slot) const {
    return (words[slot >> 6] >> (slot & 63)) & 1u;
  }
  void merge(const CoverageMap& other) {
    for (size_t i = 0; i < words.size(); ++i) words[i] |= other.words[i];
  }
  size_t count() const;
  bool operator==(const CoverageMap&) const = default;
};

uint32_t edge_slot(BlockId prev, BlockId cur);

struct BehaviorRecord {
  BranchId branch_id;
  int64_t value;
  bool operator==(const BehaviorRecord&) const = default;
};

/// Ordered record of frontier-branch conditional values from one execution.
struct ProgramBehavior {
  std::vector<BehaviorRecord> records;
  void clear() { records.clear(); }
  bool operator==(const ProgramBehavior&) const = default;
};

enum class CmpKind { eq, ne, lt, le, gt, ge };

/// What a branch predicate sees: the input zero-extended to the target's
/// minimum length, plus the pre-extension length.
struct ExecInput {
  ByteView bytes;
  size_t original_len;
};

/// One conditional. The operand function must read only the declared
/// dependency bytes; the branch takes its true edge when
/// `operand(input) CMP 0` holds (operands encode lhs - rhs).
struct BranchSpec {
  BranchId id;
  std::vector<uint32_t> depends;
  std::function<int64_t(const ExecInput&)> operand;
  CmpKind cmp;
  BlockId true_block;
  BlockId false_block;
  int32_t next_on_true;   // branch index, or -1 to halt
  int32_t next_on_false;  // branch index, or -1 to halt
};

constexpr int32_t kHalt = -1;

class SyntheticTarget {
 public:
  SyntheticTarget(std::string name, size_t min_input_len, BlockId entry_block,
                  std::vector<BranchSpec> branches,
                  std::vector<uint32_t> ground_truth_hot_bytes);

  const std::string& name() const { return name_; }
  size_t min_input_len() const { return min_input_len_; }
  BlockId entry_block() const { return entry_block_; }
  const std::vector<BranchSpec>& branches() const { return branches_; }
  const std::vector<uint32_t>& ground_truth_hot_bytes() const {
    return hot_bytes_;
  }

  /// Every edge slot the target can possibly set, from a static walk of the
  /// branch graph assuming both outcomes of every reachable branch are
  /// feasible (true for all built-in targets).
  const std::vector<uint32_t>& all_edge_slots() const { return all_edges_; }

  /// Possible successor edge slots of one branch, across all of its
  /// statically reachable predecessor blocks.
  const std::vector<uint32_t>& candidate_edge_slots(BranchId id) const;

  size_t branch_index(BranchId id) const;

 private:
  std::string name_;
  size_t min_input_len_;
  BlockId entry_block_;
  std::vector<BranchSpec> branches_;
  std::vector<uint32_t> hot_bytes_;
  std::vector<uint32_t> all_edges_;
  std::vector<std::vector<uint32_t>> branch_edges_;  // per branch index
  std::vector<size_t> id_to_index_;
};

/// Set of branch ids whose behavior hooks are enabled.
struct FrontierSet {
  std::vector<uint8_t> mask;  // indexed by branch id
  bool contains(BranchId id) const {
    return id < mask.size() && mask[id] != 0;
  }
  size_t count() const;
  std::vector<BranchId> ids() const;
  static FrontierSet all(const SyntheticTarget& target);
  static FrontierSet none(const SyntheticTarget& target);
};

/// Deterministically evaluates the branch walk, setting edge bits along the
/// taken path and recording (branch id, operand) for executed branches in the
/// frontier. Inputs shorter than min_input_len are zero-extended.
void execute(const SyntheticTarget& target, ByteView input,
             const FrontierSet& frontier, CoverageMap& coverage_out,
             ProgramBehavior& behavior_out);

std::pair<CoverageMap, ProgramBehavior> execute(const SyntheticTarget& target,
                                                ByteView input,
                                                const FrontierSet& frontier);

/// Branch ids with at least one candidate successor edge not yet present in
/// the global coverage.
FrontierSet update_frontier(const SyntheticTarget& target,
                            const CoverageMap& global_coverage);

const SyntheticTarget& find_target(std::string_view name);
const std::vector<SyntheticTarget>& builtin_targets();

}  // namespace taintfuzz
