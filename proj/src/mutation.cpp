#include "taintfuzz/mutation.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace taintfuzz {

namespace {

constexpr std::array<const char*, kOperatorCount> kOpNames = {
    "FLIP_BIT",       "FLIP_BYTE",      "ADD_BYTE",    "SUB_BYTE",
    "RAND_BYTE",      "SWAP_BYTES",     "OVERWRITE_FIXED",
    "OVERWRITE_COPY", "INSERT_COPY",    "INSERT_RAND", "DELETE_BYTES",
    "SPLICE"};

constexpr uint32_t kArithMax = 35;
constexpr size_t kFixedMaxLen = 4;
constexpr size_t kCopyMaxLen = 64;
constexpr size_t kInsertRandMaxLen = 32;

size_t uniform_pos(size_t n_valid, Rng& rng, const PositionDist* dist) {
  if (dist != nullptr) return dist->draw(n_valid, rng);
  return static_cast<size_t>(rng.below(n_valid));
}

}  // namespace

const char* op_name(Op op) { return kOpNames[static_cast<uint32_t>(op)]; }

std::optional<Op> op_from_name(const std::string& name) {
  for (uint32_t i = 0; i < kOperatorCount; ++i) {
    if (name == kOpNames[i]) return static_cast<Op>(i);
  }
  return std::nullopt;
}

size_t op_max_touched(Op op) {
  switch (op) {
    case Op::flip_bit:
    case Op::flip_byte:
    case Op::add_byte:
    case Op::sub_byte:
    case Op::rand_byte:
      return 1;
    case Op::swap_bytes:
      return 2;
    case Op::overwrite_fixed:
      return kFixedMaxLen;
    case Op::overwrite_copy:
      return kCopyMaxLen;
    default:
      // length-changing operators have no aligned-position bound
      return kMaxDistanceInput;
  }
}

uint32_t select_stack(StackPolicy policy, Rng& rng) {
  if (policy == StackPolicy::afl_power_of_two) {
    static constexpr std::array<uint32_t, 7> kSet = {2, 4, 8, 16, 32, 64, 128};
    return kSet[rng.below(kSet.size())];
  }
  return 1 + static_cast<uint32_t>(rng.below(16));
}

HavocEngine::HavocEngine(HavocConfig config) : config_(std::move(config)) {
  if (config_.operator_set.empty()) {
    throw std::invalid_argument("HavocConfig: operator_set must be nonempty");
  }
  for (Op op : config_.operator_set) {
    if (op == Op::splice && !config_.splice_operator_enabled) continue;
    ops_.push_back(op);
  }
  if (ops_.empty()) {
    throw std::invalid_argument(
        "HavocConfig: operator_set reduces to empty with splice disabled");
  }
}

void HavocEngine::unit_mutate(ByteBuf& buf, Rng& rng, const PositionDist* dist,
                              std::vector<MutationRecord>* records) const {
  Op op = ops_.size() == 1 ? ops_[0] : ops_[rng.below(ops_.size())];
  const size_t n = buf.size();

  // Operators whose preconditions fail fall back to RAND_BYTE before
  // consuming any operator-specific draws.
  switch (op) {
    case Op::swap_bytes:
      if (n < 2) op = Op::rand_byte;
      break;
    case Op::insert_copy:
    case Op::insert_rand:
      if (n + kCopyMaxLen > config_.max_mutant_len) op = Op::rand_byte;
      break;
    case Op::splice:
      if (pool_ == nullptr || pool_->size() == 0) op = Op::rand_byte;
      break;
    default:
      break;
  }

  MutationRecord rec{op, 0, 0};
  switch (op) {
    case Op::flip_bit: {
      const uint32_t bit = static_cast<uint32_t>(rng.below(8));
      const size_t pos = uniform_pos(n, rng, dist);
      buf[pos] ^= static_cast<uint8_t>(1u << bit);
      rec = {op, pos, 1};
      break;
    }
    case Op::flip_byte: {
      const size_t pos = uniform_pos(n, rng, dist);
      buf[pos] ^= 0xFF;
      rec = {op, pos, 1};
      break;
    }
    case Op::add_byte: {
      const uint8_t delta = static_cast<uint8_t>(1 + rng.below(kArithMax));
      const size_t pos = uniform_pos(n, rng, dist);
      buf[pos] = static_cast<uint8_t>(buf[pos] + delta);
      rec = {op, pos, 1};
      break;
    }
    case Op::sub_byte: {
      const uint8_t delta = static_cast<uint8_t>(1 + rng.below(kArithMax));
      const size_t pos = uniform_pos(n, rng, dist);
      buf[pos] = static_cast<uint8_t>(buf[pos] - delta);
      rec = {op, pos, 1};
      break;
    }
    case Op::rand_byte: {
      // xor with a nonzero value guarantees the byte changes
      const uint8_t v = static_cast<uint8_t>(1 + rng.below(255));
      const size_t pos = uniform_pos(n, rng, dist);
      buf[pos] ^= v;
      rec = {op, pos, 1};
      break;
    }
    case Op::swap_bytes: {
      size_t other = static_cast<size_t>(rng.below(n));
      const size_t pos = uniform_pos(n, rng, dist);
      if (other == pos) other = (other + 1) % n;
      std::swap(buf[pos], buf[other]);
      rec = {op, pos, 1};
      break;
    }
    case Op::overwrite_fixed: {
      const size_t len = 1 + rng.below(std::min(kFixedMaxLen, n));
      const uint8_t val = static_cast<uint8_t>(rng.below(256));
      const size_t pos = uniform_pos(n - len + 1, rng, dist);
      std::fill_n(buf.begin() + static_cast<ptrdiff_t>(pos), len, val);
      rec = {op, pos, len};
      break;
    }
    case Op::overwrite_copy: {
      const size_t len = 1 + rng.below(std::min(kCopyMaxLen, n));
      const size_t src = static_cast<size_t>(rng.below(n - len + 1));
      const size_t pos = uniform_pos(n - len + 1, rng, dist);
      std::memmove(buf.data() + pos, buf.data() + src, len);
      rec = {op, pos, len};
      break;
    }
    case Op::insert_copy: {
      const size_t len = 1 + rng.below(std::min(kCopyMaxLen, n));
      const size_t src = static_cast<size_t>(rng.below(n - len + 1));
      const size_t pos = uniform_pos(n, rng, dist);
      ByteBuf window(buf.begin() + static_cast<ptrdiff_t>(src),
                     buf.begin() + static_cast<ptrdiff_t>(src + len));
      buf.insert(buf.begin() + static_cast<ptrdiff_t>(pos), window.begin(),
                 window.end());
      rec = {op, pos, len};
      break;
    }
    case Op::insert_rand: {
      const size_t len = 1 + rng.below(kInsertRandMaxLen);
      const size_t pos = uniform_pos(n, rng, dist);
      ByteBuf fresh(len);
      for (auto& b : fresh) b = static_cast<uint8_t>(rng.below(256));
      buf.insert(buf.begin() + static_cast<ptrdiff_t>(pos), fresh.begin(),
                 fresh.end());
      rec = {op, pos, len};
      break;
    }
    case Op::delete_bytes: {
      const size_t len = 1 + rng.below(std::min(kCopyMaxLen, n));
      const size_t pos = uniform_pos(n - len + 1, rng, dist);
      buf.erase(buf.begin() + static_cast<ptrdiff_t>(pos),
                buf.begin() + static_cast<ptrdiff_t>(pos + len));
      rec = {op, pos, len};
      break;
    }
    case Op::splice: {
      const ByteView partner = pool_->at(rng.below(pool_->size()));
      if (partner.empty()) {
        // degenerate pool entry; treat like a missing pool
        const uint8_t v = static_cast<uint8_t>(1 + rng.below(255));
        const size_t pos = uniform_pos(n, rng, dist);
        buf[pos] ^= v;
        rec = {Op::rand_byte, pos, 1};
        break;
      }
      const size_t len = 1 + rng.below(std::min(n, partner.size()));
      const size_t from = static_cast<size_t>(rng.below(partner.size() - len + 1));
      const size_t pos = uniform_pos(n - len + 1, rng, dist);
      std::memcpy(buf.data() + pos, partner.data() + from, len);
      rec = {op, pos, len};
      break;
    }
  }

  // Seed invariant: buffers are never empty. A delete that consumed the whole
  // buffer is repaired with one random byte.
  if (buf.empty()) buf.push_back(static_cast<uint8_t>(rng.below(256)));

  if (records != nullptr) records->push_back(rec);
}

ByteBuf HavocEngine::havoc_mutate(ByteView seed, uint32_t stack, Rng& rng,
                                  std::vector<MutationRecord>* records) const {
  return havoc_mutate_with(seed, stack, rng, nullptr, records);
}

ByteBuf HavocEngine::havoc_mutate_with(
    ByteView seed, uint32_t stack, Rng& rng, const PositionDist* dist,
    std::vector<MutationRecord>* records) const {
  if (seed.empty()) throw std::invalid_argument("havoc_mutate: empty seed");
  if (stack == 0) throw std::invalid_argument("havoc_mutate: stack must be >= 1");
  ByteBuf buf(seed.begin(), seed.end());
  for (uint32_t i = 0; i < stack; ++i) {
    unit_mutate(buf, rng, dist, records);
  }
  return buf;
}

ByteBuf apply_operator(Op op, ByteView buf, Rng& rng, MutationRecord* record) {
  HavocConfig cfg;
  cfg.operator_set = {op};
  HavocEngine engine(cfg);
  std::vector<MutationRecord> recs;
  ByteBuf out = engine.havoc_mutate(buf, 1, rng, &recs);
  if (record != nullptr) *record = recs.front();
  return out;
}

std::optional<ByteBuf> splice_seeds(ByteView a, ByteView b, Rng& rng) {
  if (a.size() < 2 || b.size() < 2) return std::nullopt;
  const size_t overlap = std::min(a.size(), b.size());

  size_t first = overlap, last = 0;
  for (size_t i = 0; i < overlap; ++i) {
    if (a[i] != b[i]) {
      if (first == overlap) first = i;
      last = i;
    }
  }
  if (first == overlap) return std::nullopt;  // identical over the overlap

  // A length mismatch counts as a trailing difference at the end of the
  // overlap region.
  if (a.size() != b.size()) last = std::max(last, overlap - 1);
  if (last < first + 1) return std::nullopt;  // diff region shorter than 2

  // split strictly after the first diff, at most at the last diff
  const size_t split = first + 1 + static_cast<size_t>(rng.below(last - first));
  ByteBuf out(a.begin(), a.begin() + static_cast<ptrdiff_t>(split));
  out.insert(out.end(), b.begin() + static_cast<ptrdiff_t>(split), b.end());
  return out;
}

}  // namespace taintfuzz
