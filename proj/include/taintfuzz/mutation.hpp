#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taintfuzz/distance.hpp"
#include "taintfuzz/rng.hpp"

namespace taintfuzz {

enum class StackPolicy {
  afl_power_of_two,    // uniform draw from {2,4,8,16,32,64,128}
  afl_plus_plus_range  // uniform draw from [1,16]
};

/// Unit mutation operators. Values are the stable small integers exposed in
/// CLI output and MutationRecord CSV dumps; never reorder.
enum class Op : uint32_t {
  flip_bit = 0,
  flip_byte = 1,
  add_byte = 2,
  sub_byte = 3,
  rand_byte = 4,
  swap_bytes = 5,
  overwrite_fixed = 6,
  overwrite_copy = 7,
  insert_copy = 8,
  insert_rand = 9,
  delete_bytes = 10,
  splice = 11,
};

constexpr uint32_t kOperatorCount = 12;

/// The length-preserving subset used by the distribution experiments.
constexpr std::array<Op, 8> kSubstitutionOps = {
    Op::flip_bit,  Op::flip_byte,  Op::add_byte,        Op::sub_byte,
    Op::rand_byte, Op::swap_bytes, Op::overwrite_fixed, Op::overwrite_copy};

constexpr std::array<Op, 12> kAllOps = {
    Op::flip_bit,      Op::flip_byte,       Op::add_byte,    Op::sub_byte,
    Op::rand_byte,     Op::swap_bytes,      Op::overwrite_fixed,
    Op::overwrite_copy, Op::insert_copy,    Op::insert_rand,
    Op::delete_bytes,  Op::splice};

const char* op_name(Op op);
std::optional<Op> op_from_name(const std::string& name);

/// Maximum number of seed bytes one application of the operator can change
/// (substitution operators only; used to derive diff bounds in tests).
size_t op_max_touched(Op op);

enum class SeedOrigin { initial, mutated, spliced };

struct Seed {
  ByteBuf bytes;  // nonempty
  uint64_t id = 0;
  SeedOrigin origin = SeedOrigin::initial;
};

struct HavocConfig {
  StackPolicy stack_policy = StackPolicy::afl_plus_plus_range;
  std::vector<Op> operator_set{kAllOps.begin(), kAllOps.end()};
  uint64_t rng_seed = 1;
  bool splice_operator_enabled = true;
  // Mutants never grow past this; insert operators that would overflow fall
  // back to a single-byte operator.
  size_t max_mutant_len = kMaxDistanceInput;
};

/// Provenance of one unit mutation. For substitution operators
/// affected_length is the width of the touched window; for insert/delete it
/// is the exact length change.
struct MutationRecord {
  Op op;
  size_t start_position;
  size_t affected_length;
};

uint32_t select_stack(StackPolicy policy, Rng& rng);

/// Start-position distribution hook. draw() must consume exactly one rng
/// value so vanilla and biased mutation stay stream-compatible.
struct PositionDist {
  virtual ~PositionDist() = default;
  virtual size_t draw(size_t n_valid, Rng& rng) const = 0;
};

/// Source of partner seeds for the splice operator.
struct SplicePool {
  virtual ~SplicePool() = default;
  virtual size_t size() const = 0;
  virtual ByteView at(size_t i) const = 0;
};

class HavocEngine {
 public:
  explicit HavocEngine(HavocConfig config);

  /// Non-owning; pass nullptr to detach. Without a pool the splice operator
  /// falls back like any other infeasible operator.
  void set_splice_pool(const SplicePool* pool) { pool_ = pool; }

  /// Applies exactly `stack` unit mutations, each seeded from the previous
  /// buffer (Markov chain). stack must be >= 1 and seed nonempty.
  ByteBuf havoc_mutate(ByteView seed, uint32_t stack, Rng& rng,
                       std::vector<MutationRecord>* records = nullptr) const;

  /// Same process with every start-position draw delegated to `dist`
  /// (nullptr = uniform).
  ByteBuf havoc_mutate_with(ByteView seed, uint32_t stack, Rng& rng,
                            const PositionDist* dist,
                            std::vector<MutationRecord>* records) const;

  const HavocConfig& config() const { return config_; }
  const std::vector<Op>& effective_ops() const { return ops_; }

 private:
  void unit_mutate(ByteBuf& buf, Rng& rng, const PositionDist* dist,
                   std::vector<MutationRecord>* records) const;

  HavocConfig config_;
  std::vector<Op> ops_;  // operator_set minus splice when disabled
  const SplicePool* pool_ = nullptr;
};

/// One unit mutation on a copy of buf, with default config semantics and no
/// splice pool. buf must be nonempty.
ByteBuf apply_operator(Op op, ByteView buf, Rng& rng,
                       MutationRecord* record = nullptr);

/// Splicing-stage combination: head of `a` up to a split point drawn strictly
/// inside the first/last differing region, then tail of `b`. Returns nullopt
/// when the pair has no usable diff region (caller skips splicing).
std::optional<ByteBuf> splice_seeds(ByteView a, ByteView b, Rng& rng);

}  // namespace taintfuzz
