#include <doctest.h>

#include <algorithm>
#include <set>

#include "taintfuzz/rng.hpp"
#include "taintfuzz/taint.hpp"
#include "taintfuzz/targets.hpp"

using namespace taintfuzz;

namespace {

constexpr size_t kMagicOffsets[] = {8, 160, 320};
constexpr uint8_t kMagicFirst[] = {0x23, 0x1D, 0x0B};
constexpr size_t kMagicStages = 3;
constexpr size_t kMagicLen = 512;

// Input that satisfies every magic_chain gate: stage first bytes at their
// window starts, zeros elsewhere.
ByteBuf magic_chain_solution() {
  ByteBuf input(kMagicLen, 0);
  for (size_t i = 0; i < kMagicStages; ++i) input[kMagicOffsets[i]] = kMagicFirst[i];
  return input;
}

}  // namespace

TEST_CASE("find_target resolves built-ins and rejects unknowns") {
  CHECK(find_target("magic_chain").name() == "magic_chain");
  CHECK(find_target("sparse_hot").min_input_len() == 256);
  CHECK_THROWS_AS(find_target("no_such_target"), TargetNotFound);
}

TEST_CASE("magic_chain solution reaches the deepest edge") {
  const auto& target = find_target("magic_chain");
  const auto [cov, pb] = execute(target, magic_chain_solution(),
                                 FrontierSet::all(target));
  const auto& branches = target.branches();
  const BlockId t_prev = branches[kMagicStages - 2].true_block;
  const BlockId t_last = branches[kMagicStages - 1].true_block;
  CHECK(cov.test(edge_slot(t_prev, t_last)));
  // all gates executed and reported a zero difference
  REQUIRE(pb.records.size() == kMagicStages);
  for (const auto& rec : pb.records) CHECK(rec.value == 0);

  // an all-zero input runs every sequential gate, each one byte short
  const auto [cov0, pb0] = execute(target, ByteBuf(kMagicLen, 0),
                                   FrontierSet::all(target));
  REQUIRE(pb0.records.size() == kMagicStages);
  CHECK(pb0.records[0].value == -0x23);
  CHECK(pb0.records[1].value == -0x1D);
  CHECK(pb0.records[2].value == -0x0B);
  CHECK_FALSE(cov0.test(edge_slot(t_prev, t_last)));
}

TEST_CASE("and3 operand ignores single-byte flips of an all-zero gate") {
  const auto& target = find_target("and3");
  const FrontierSet frontier = FrontierSet::all(target);
  ByteBuf zeros(16, 0);
  const auto [cov_base, pb_base] = execute(target, zeros, frontier);
  REQUIRE(pb_base.records.size() == 1);
  CHECK(pb_base.records[0].value == 0);

  // flipping any one of the three gate bytes leaves the AND at zero
  for (size_t pos : {4, 5, 6}) {
    ByteBuf flipped = zeros;
    flipped[pos] = 0xFF;
    const auto [cov, pb] = execute(target, flipped, frontier);
    CHECK(pb.records[0].value == 0);
    CHECK(cov == cov_base);
  }
  // flipping all three changes the operand and the taken edge
  ByteBuf all = zeros;
  all[4] = all[5] = all[6] = 0xFF;
  const auto [cov, pb] = execute(target, all, frontier);
  CHECK(pb.records[0].value == 0xFF);
  CHECK_FALSE(cov == cov_base);
}

TEST_CASE("execute is deterministic") {
  Rng rng(33);
  for (const auto& target : builtin_targets()) {
    for (int i = 0; i < 20; ++i) {
      ByteBuf input(rng.below(2 * target.min_input_len()) + 1);
      for (auto& b : input) b = static_cast<uint8_t>(rng.below(256));
      const auto first = execute(target, input, FrontierSet::all(target));
      const auto second = execute(target, input, FrontierSet::all(target));
      CHECK(first.first == second.first);
      CHECK(first.second == second.second);
    }
  }
}

TEST_CASE("short inputs are zero-extended") {
  const auto& target = find_target("sparse_hot");
  const FrontierSet frontier = FrontierSet::all(target);
  // a 1-byte input behaves exactly like 256 zeros
  const auto a = execute(target, ByteBuf{0}, frontier);
  const auto b = execute(target, ByteBuf(256, 0), frontier);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("length_gate branches on the pre-extension length") {
  const auto& target = find_target("length_gate");
  const FrontierSet frontier = FrontierSet::all(target);
  const auto small = execute(target, ByteBuf(10, 0), frontier);
  const auto big = execute(target, ByteBuf(100, 0), frontier);
  CHECK(small.second.records[0].value == 10 - 64);
  CHECK(big.second.records[0].value == 100 - 64);
  CHECK_FALSE(small.first == big.first);
}

TEST_CASE("behavior recording honors the frontier set") {
  const auto& target = find_target("sparse_hot");
  const auto none = execute(target, ByteBuf(256, 1), FrontierSet::none(target));
  CHECK(none.second.records.empty());
  FrontierSet only_one = FrontierSet::none(target);
  only_one.mask[1] = 1;
  const auto one = execute(target, ByteBuf(256, 1), only_one);
  REQUIRE(one.second.records.size() == 1);
  CHECK(one.second.records[0].branch_id == 1);
}

TEST_CASE("update_frontier on empty and full coverage") {
  for (const auto& target : builtin_targets()) {
    CoverageMap empty;
    CHECK(update_frontier(target, empty).count() == target.branches().size());
    CoverageMap full;
    for (uint32_t slot : target.all_edge_slots()) full.set(slot);
    CHECK(update_frontier(target, full).count() == 0);
  }
}

TEST_CASE("covered first branch drops out of the magic_chain frontier") {
  const auto& target = find_target("magic_chain");
  CoverageMap cov;
  // cover both sides of branch 0 only
  for (uint32_t slot : target.candidate_edge_slots(0)) cov.set(slot);
  const FrontierSet frontier = update_frontier(target, cov);
  CHECK_FALSE(frontier.contains(0));
  for (BranchId id = 1; id < kMagicStages; ++id) CHECK(frontier.contains(id));

  // direct graph-walk oracle: a branch is frontier iff one of its feasible
  // (pred, successor) edges is uncovered
  for (const auto& b : target.branches()) {
    bool expect = false;
    for (uint32_t slot : target.candidate_edge_slots(b.id)) {
      if (!cov.test(slot)) expect = true;
    }
    CHECK(frontier.contains(b.id) == expect);
  }
}

TEST_CASE("frontier shrinks monotonically as coverage grows") {
  Rng rng(8);
  for (const auto& target : builtin_targets()) {
    CoverageMap cov;
    FrontierSet prev = update_frontier(target, cov);
    for (uint32_t slot : target.all_edge_slots()) {
      cov.set(slot);
      const FrontierSet cur = update_frontier(target, cov);
      for (size_t id = 0; id < cur.mask.size(); ++id) {
        if (cur.mask[id]) CHECK(prev.mask[id]);  // never regains a branch
      }
      prev = cur;
    }
  }
}

TEST_CASE("bytes outside the ground truth never change recorded operands") {
  for (const auto& target : builtin_targets()) {
    const std::set<uint32_t> hot(target.ground_truth_hot_bytes().begin(),
                                 target.ground_truth_hot_bytes().end());
    const FrontierSet frontier = FrontierSet::all(target);
    const ByteBuf base(target.min_input_len(), 0);
    const auto base_run = execute(target, base, frontier);
    // exhaustive over every cold byte and a value sweep
    for (uint32_t pos = 0; pos < target.min_input_len(); ++pos) {
      if (hot.count(pos)) continue;
      for (int v = 1; v < 256; v += 51) {
        ByteBuf perturbed = base;
        perturbed[pos] = static_cast<uint8_t>(v);
        const auto run = execute(target, perturbed, frontier);
        CHECK_FALSE(behavior_differs(base_run.second, run.second));
      }
    }
  }
}

TEST_CASE("static edge slots are collision-free per target") {
  for (const auto& target : builtin_targets()) {
    // the walk enumerates (pred, succ) block pairs; their slots must not
    // alias within one target or coverage reasoning breaks
    std::set<uint32_t> slots(target.all_edge_slots().begin(),
                             target.all_edge_slots().end());
    size_t pairs = 0;
    for (const auto& b : target.branches()) {
      pairs += target.candidate_edge_slots(b.id).size();
    }
    (void)pairs;
    size_t expected = 0;
    for (const auto& b : target.branches()) {
      std::set<uint32_t> per_branch(target.candidate_edge_slots(b.id).begin(),
                                    target.candidate_edge_slots(b.id).end());
      expected += per_branch.size();
    }
    CHECK(slots.size() == expected);
  }
}

TEST_CASE("every statically enumerated edge is actually reachable") {
  // drive each built-in with inputs that force both sides of every branch
  struct Case {
    const char* name;
    std::vector<ByteBuf> inputs;
  };
  std::vector<Case> cases;

  cases.push_back({"and3", {ByteBuf(16, 0), [] {
                              ByteBuf b(16, 0);
                              b[4] = b[5] = b[6] = 0xFF;
                              return b;
                            }()}});
  cases.push_back({"length_gate", {ByteBuf(10, 0), ByteBuf(100, 0)}});
  cases.push_back({"checksum16", {ByteBuf(192, 0), [] {
                                    ByteBuf c(192, 0);
                                    uint32_t want = 0x1337;
                                    for (size_t i = 0; i < 64 && want > 0; ++i) {
                                      const uint8_t put =
                                          static_cast<uint8_t>(std::min<uint32_t>(want, 255));
                                      c[i] = put;
                                      want -= put;
                                    }
                                    return c;
                                  }()}});
  {
    // magic_chain: solution prefixes plus solo-window inputs cover every
    // (prev outcome, next outcome) edge combination of the sequential gates
    std::vector<ByteBuf> inputs;
    const ByteBuf sol = magic_chain_solution();
    inputs.push_back(ByteBuf(kMagicLen, 0));
    for (size_t depth = 1; depth <= kMagicStages; ++depth) {
      ByteBuf partial(kMagicLen, 0);
      for (size_t i = 0; i < depth; ++i) {
        partial[kMagicOffsets[i]] = sol[kMagicOffsets[i]];
      }
      inputs.push_back(partial);
    }
    for (size_t solo = 1; solo < kMagicStages; ++solo) {
      ByteBuf one(kMagicLen, 0);
      one[kMagicOffsets[solo]] = kMagicFirst[solo];
      inputs.push_back(one);
    }
    cases.push_back({"magic_chain", inputs});
  }
  {
    // nested_cmp: gates are >0x1000, >0x2000, <0x3000, ==0x4142 on u16 fields
    auto mk = [](uint16_t a, uint16_t b, uint16_t c, uint16_t d) {
      ByteBuf buf(160, 0);
      const uint16_t vals[] = {a, b, c, d};
      for (size_t i = 0; i < 4; ++i) {
        buf[2 * i] = static_cast<uint8_t>(vals[i] & 0xFF);
        buf[2 * i + 1] = static_cast<uint8_t>(vals[i] >> 8);
      }
      return buf;
    };
    cases.push_back({"nested_cmp",
                     {mk(0, 0, 0, 0), mk(0x2000, 0, 0, 0),
                      mk(0x2000, 0x3000, 0x4000, 0), mk(0x2000, 0x3000, 0, 0),
                      mk(0x2000, 0x3000, 0, 0x4142)}});
  }
  {
    std::vector<ByteBuf> inputs;
    ByteBuf b(256, 0);
    inputs.push_back(b);
    b[4] = 0xA7;
    inputs.push_back(b);
    b[10] = 0x3C;
    inputs.push_back(b);
    b[11] = 0x9E;
    inputs.push_back(b);
    ByteBuf c(256, 0);
    c[10] = 0x3C;
    inputs.push_back(c);
    ByteBuf d(256, 0);
    d[11] = 0x9E;
    d[4] = 0xA7;
    inputs.push_back(d);
    cases.push_back({"sparse_hot", inputs});
  }

  for (const auto& c : cases) {
    const auto& target = find_target(c.name);
    CoverageMap merged;
    for (const auto& input : c.inputs) {
      const auto [cov, pb] = execute(target, input, FrontierSet::none(target));
      merged.merge(cov);
    }
    for (uint32_t slot : target.all_edge_slots()) {
      INFO(c.name << " slot " << slot);
      CHECK(merged.test(slot));
    }
  }
}

TEST_CASE("coverage map counting and merging") {
  CoverageMap a, b;
  a.set(5);
  a.set(700);
  b.set(700);
  b.set(65535);
  CHECK(a.count() == 2);
  a.merge(b);
  CHECK(a.count() == 3);
  CHECK(a.test(65535));
}
