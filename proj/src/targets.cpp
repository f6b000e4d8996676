#include "taintfuzz/targets.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <set>

namespace taintfuzz {

size_t CoverageMap::count() const {
  size_t total = 0;
  for (uint64_t w : words) total += static_cast<size_t>(std::popcount(w));
  return total;
}

uint32_t edge_slot(BlockId prev, BlockId cur) {
  uint32_t x = prev * 0x9E3779B1u + cur * 0x85EBCA77u;
  x ^= x >> 15;
  x *= 0x2C1B3C6Du;
  x ^= x >> 12;
  return x & 0xFFFFu;
}

SyntheticTarget::SyntheticTarget(std::string name, size_t min_input_len,
                                 BlockId entry_block,
                                 std::vector<BranchSpec> branches,
                                 std::vector<uint32_t> ground_truth_hot_bytes)
    : name_(std::move(name)),
      min_input_len_(min_input_len),
      entry_block_(entry_block),
      branches_(std::move(branches)),
      hot_bytes_(std::move(ground_truth_hot_bytes)) {
  BranchId max_id = 0;
  for (const auto& b : branches_) max_id = std::max(max_id, b.id);
  id_to_index_.assign(max_id + 1, static_cast<size_t>(-1));
  for (size_t i = 0; i < branches_.size(); ++i) {
    if (id_to_index_[branches_[i].id] != static_cast<size_t>(-1)) {
      throw std::invalid_argument("duplicate branch id in target " + name_);
    }
    id_to_index_[branches_[i].id] = i;
  }

  // Static reachability walk: which blocks can precede each branch, assuming
  // both outcomes of every reachable branch are feasible.
  std::vector<std::set<BlockId>> preds(branches_.size());
  std::vector<std::pair<size_t, BlockId>> work;
  if (!branches_.empty()) {
    work.emplace_back(0, entry_block_);
  }
  while (!work.empty()) {
    auto [idx, pred] = work.back();
    work.pop_back();
    if (!preds[idx].insert(pred).second) continue;
    const BranchSpec& b = branches_[idx];
    if (b.next_on_true != kHalt) {
      work.emplace_back(static_cast<size_t>(b.next_on_true), b.true_block);
    }
    if (b.next_on_false != kHalt) {
      work.emplace_back(static_cast<size_t>(b.next_on_false), b.false_block);
    }
  }

  branch_edges_.resize(branches_.size());
  std::set<uint32_t> all;
  for (size_t i = 0; i < branches_.size(); ++i) {
    std::set<uint32_t> slots;
    for (BlockId p : preds[i]) {
      slots.insert(edge_slot(p, branches_[i].true_block));
      slots.insert(edge_slot(p, branches_[i].false_block));
    }
    branch_edges_[i].assign(slots.begin(), slots.end());
    all.insert(slots.begin(), slots.end());
  }
  all_edges_.assign(all.begin(), all.end());
}

size_t SyntheticTarget::branch_index(BranchId id) const {
  if (id >= id_to_index_.size() || id_to_index_[id] == static_cast<size_t>(-1)) {
    throw std::out_of_range("branch id not in target " + name_);
  }
  return id_to_index_[id];
}

const std::vector<uint32_t>& SyntheticTarget::candidate_edge_slots(
    BranchId id) const {
  return branch_edges_[branch_index(id)];
}

size_t FrontierSet::count() const {
  size_t n = 0;
  for (uint8_t m : mask) n += m != 0;
  return n;
}

std::vector<BranchId> FrontierSet::ids() const {
  std::vector<BranchId> out;
  for (BranchId i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

FrontierSet FrontierSet::all(const SyntheticTarget& target) {
  BranchId max_id = 0;
  for (const auto& b : target.branches()) max_id = std::max(max_id, b.id);
  FrontierSet f;
  f.mask.assign(max_id + 1, 0);
  for (const auto& b : target.branches()) f.mask[b.id] = 1;
  return f;
}

FrontierSet FrontierSet::none(const SyntheticTarget& target) {
  FrontierSet f = all(target);
  std::fill(f.mask.begin(), f.mask.end(), 0);
  return f;
}

namespace {

bool branch_taken(int64_t operand, CmpKind cmp) {
  switch (cmp) {
    case CmpKind::eq: return operand == 0;
    case CmpKind::ne: return operand != 0;
    case CmpKind::lt: return operand < 0;
    case CmpKind::le: return operand <= 0;
    case CmpKind::gt: return operand > 0;
    case CmpKind::ge: return operand >= 0;
  }
  return false;
}

}  // namespace

void execute(const SyntheticTarget& target, ByteView input,
             const FrontierSet& frontier, CoverageMap& coverage_out,
             ProgramBehavior& behavior_out) {
  coverage_out.clear();
  behavior_out.clear();

  // Zero-extend short inputs. Built-in targets keep min_input_len small, so a
  // fixed scratch buffer avoids per-execution allocation.
  static thread_local ByteBuf scratch;
  ExecInput ctx{input, input.size()};
  if (input.size() < target.min_input_len()) {
    scratch.assign(target.min_input_len(), 0);
    std::memcpy(scratch.data(), input.data(), input.size());
    ctx.bytes = ByteView(scratch);
  }

  BlockId prev = target.entry_block();
  int32_t idx = target.branches().empty() ? kHalt : 0;
  while (idx != kHalt) {
    const BranchSpec& b = target.branches()[static_cast<size_t>(idx)];
    const int64_t operand = b.operand(ctx);
    const bool taken = branch_taken(operand, b.cmp);
    const BlockId cur = taken ? b.true_block : b.false_block;
    coverage_out.set(edge_slot(prev, cur));
    if (frontier.contains(b.id)) behavior_out.records.push_back({b.id, operand});
    prev = cur;
    idx = taken ? b.next_on_true : b.next_on_false;
  }
}

std::pair<CoverageMap, ProgramBehavior> execute(const SyntheticTarget& target,
                                                ByteView input,
                                                const FrontierSet& frontier) {
  std::pair<CoverageMap, ProgramBehavior> out;
  execute(target, input, frontier, out.first, out.second);
  return out;
}

FrontierSet update_frontier(const SyntheticTarget& target,
                            const CoverageMap& global_coverage) {
  FrontierSet f = FrontierSet::none(target);
  for (const auto& b : target.branches()) {
    for (uint32_t slot : target.candidate_edge_slots(b.id)) {
      if (!global_coverage.test(slot)) {
        f.mask[b.id] = 1;
        break;
      }
    }
  }
  return f;
}

namespace {

// ---- built-in target suite ----------------------------------------------
//
// Block numbering convention: entry block 0; branch i owns true block 2i+1
// and false block 2i+2.

BlockId tb(size_t i) { return static_cast<BlockId>(2 * i + 1); }
BlockId fb(size_t i) { return static_cast<BlockId>(2 * i + 2); }

int64_t read_byte(const ExecInput& in, size_t pos) {
  return static_cast<int64_t>(in.bytes[pos]);
}

uint32_t read_u16le(const ExecInput& in, size_t pos) {
  return static_cast<uint32_t>(in.bytes[pos]) |
         (static_cast<uint32_t>(in.bytes[pos + 1]) << 8);
}

SyntheticTarget make_magic_chain() {
  // Three sequential stages, each comparing a 4-byte window against a magic
  // word as a little-endian u32 (the single-instruction hook of an integer
  // compare: operand = lhs - rhs). Magic words are <first_byte, 0, 0, 0>, so
  // an all-zero input sits one byte away from each gate and every window
  // byte shifts the operand when perturbed. The comparisons run in sequence
  // regardless of outcome; solved gates leave the frontier and stop feeding
  // their windows into the taint signal.
  static constexpr size_t kStages = 3;
  static constexpr std::array<size_t, kStages> kOffsets = {8, 160, 320};
  // small non-power-of-two values: reachable from zero by a byte-arithmetic
  // step but not by a single bit flip
  static constexpr std::array<uint8_t, kStages> kFirstByte = {0x23, 0x1D, 0x0B};
  std::vector<BranchSpec> branches;
  std::vector<uint32_t> hot;
  for (size_t s = 0; s < kStages; ++s) {
    const size_t off = kOffsets[s];
    std::vector<uint32_t> deps;
    for (size_t j = 0; j < 4; ++j) {
      deps.push_back(static_cast<uint32_t>(off + j));
      hot.push_back(static_cast<uint32_t>(off + j));
    }
    const uint8_t first = kFirstByte[s];
    const int32_t next = s + 1 < kStages ? static_cast<int32_t>(s + 1) : kHalt;
    branches.push_back(BranchSpec{
        static_cast<BranchId>(s),
        deps,
        [off, first](const ExecInput& in) {
          uint32_t word = 0;
          for (size_t j = 0; j < 4; ++j) {
            word |= static_cast<uint32_t>(in.bytes[off + j]) << (8 * j);
          }
          return static_cast<int64_t>(word) - static_cast<int64_t>(first);
        },
        CmpKind::eq,
        tb(s),
        fb(s),
        next,
        next,
    });
  }
  return SyntheticTarget("magic_chain", 512, 0, std::move(branches),
                         std::move(hot));
}

SyntheticTarget make_and3() {
  // Three input bytes combined with bitwise AND: flipping one all-zero byte
  // leaves the operand at zero, flipping all three changes it.
  std::vector<BranchSpec> branches;
  branches.push_back(BranchSpec{
      0,
      {4, 5, 6},
      [](const ExecInput& in) {
        return static_cast<int64_t>(in.bytes[4] & in.bytes[5] & in.bytes[6]);
      },
      CmpKind::ne,
      tb(0),
      fb(0),
      kHalt,
      kHalt,
  });
  return SyntheticTarget("and3", 16, 0, std::move(branches), {4, 5, 6});
}

SyntheticTarget make_checksum16() {
  // One gate on a 16-bit additive checksum over the first 64 bytes.
  std::vector<uint32_t> deps(64);
  for (uint32_t i = 0; i < 64; ++i) deps[i] = i;
  std::vector<BranchSpec> branches;
  branches.push_back(BranchSpec{
      0,
      deps,
      [](const ExecInput& in) {
        // target value stays below the 64*255 ceiling so both outcomes are
        // reachable
        uint32_t sum = 0;
        for (size_t i = 0; i < 64; ++i) sum += in.bytes[i];
        return static_cast<int64_t>(sum & 0xFFFF) - 0x1337;
      },
      CmpKind::eq,
      tb(0),
      fb(0),
      kHalt,
      kHalt,
  });
  return SyntheticTarget("checksum16", 192, 0, std::move(branches), deps);
}

SyntheticTarget make_length_gate() {
  // Branches on the pre-extension input length; no byte influences it.
  std::vector<BranchSpec> branches;
  branches.push_back(BranchSpec{
      0,
      {},
      [](const ExecInput& in) {
        return static_cast<int64_t>(in.original_len) - 64;
      },
      CmpKind::ge,
      tb(0),
      fb(0),
      kHalt,
      kHalt,
  });
  return SyntheticTarget("length_gate", 32, 0, std::move(branches), {});
}

SyntheticTarget make_nested_cmp() {
  // Integer comparisons nested four deep on little-endian u16 fields.
  struct Stage {
    size_t off;
    int64_t rhs;
    CmpKind cmp;
  };
  static constexpr std::array<Stage, 4> kStages = {{
      {0, 0x1000, CmpKind::gt},
      {2, 0x2000, CmpKind::gt},
      {4, 0x3000, CmpKind::lt},
      {6, 0x4142, CmpKind::eq},
  }};
  std::vector<BranchSpec> branches;
  std::vector<uint32_t> hot;
  for (size_t s = 0; s < kStages.size(); ++s) {
    const auto stage = kStages[s];
    hot.push_back(static_cast<uint32_t>(stage.off));
    hot.push_back(static_cast<uint32_t>(stage.off + 1));
    branches.push_back(BranchSpec{
        static_cast<BranchId>(s),
        {static_cast<uint32_t>(stage.off), static_cast<uint32_t>(stage.off + 1)},
        [stage](const ExecInput& in) {
          return static_cast<int64_t>(read_u16le(in, stage.off)) - stage.rhs;
        },
        stage.cmp,
        tb(s),
        fb(s),
        s + 1 < kStages.size() ? static_cast<int32_t>(s + 1) : kHalt,
        kHalt,
    });
  }
  return SyntheticTarget("nested_cmp", 160, 0, std::move(branches),
                         std::move(hot));
}

SyntheticTarget make_sparse_hot() {
  // Three single-byte gates read unconditionally, so every execution records
  // all three operands; bytes {4,10,11} among 256 are the only influences.
  struct Gate {
    uint32_t pos;
    uint8_t want;
  };
  static constexpr std::array<Gate, 3> kGates = {{{4, 0xA7}, {10, 0x3C}, {11, 0x9E}}};
  std::vector<BranchSpec> branches;
  std::vector<uint32_t> hot;
  for (size_t s = 0; s < kGates.size(); ++s) {
    const auto gate = kGates[s];
    hot.push_back(gate.pos);
    const int32_t next = s + 1 < kGates.size() ? static_cast<int32_t>(s + 1) : kHalt;
    branches.push_back(BranchSpec{
        static_cast<BranchId>(s),
        {gate.pos},
        [gate](const ExecInput& in) {
          return read_byte(in, gate.pos) - static_cast<int64_t>(gate.want);
        },
        CmpKind::eq,
        tb(s),
        fb(s),
        next,
        next,  // straight-line: the next gate runs either way
    });
  }
  return SyntheticTarget("sparse_hot", 256, 0, std::move(branches),
                         std::move(hot));
}

}  // namespace

const std::vector<SyntheticTarget>& builtin_targets() {
  static const std::vector<SyntheticTarget> targets = [] {
    std::vector<SyntheticTarget> t;
    t.push_back(make_magic_chain());
    t.push_back(make_and3());
    t.push_back(make_checksum16());
    t.push_back(make_length_gate());
    t.push_back(make_nested_cmp());
    t.push_back(make_sparse_hot());
    return t;
  }();
  return targets;
}

const SyntheticTarget& find_target(std::string_view name) {
  for (const auto& t : builtin_targets()) {
    if (t.name() == name) return t;
  }
  throw TargetNotFound(std::string(name));
}

}  // namespace taintfuzz
