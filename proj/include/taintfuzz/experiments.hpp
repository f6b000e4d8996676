#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "taintfuzz/distance.hpp"
#include "taintfuzz/mutation.hpp"
#include "taintfuzz/stats.hpp"

namespace taintfuzz {

struct CorpusTooSmall : std::runtime_error {
  CorpusTooSmall() : std::runtime_error("experiment needs at least 2 usable seeds") {}
};

/// Per-byte-position event tally.
struct Histogram {
  std::vector<uint64_t> bins;
  uint64_t total_events = 0;
  size_t seed_len = 0;

  bool operator==(const Histogram&) const = default;
};

double coefficient_of_variation(const Histogram& hist);

/// Defaults shared by the distribution experiments: substitution operators
/// and the [1,16] stack policy.
HavocConfig distribution_experiment_config(uint64_t rng_seed);

/// Tally of unit-mutation start positions over `iterations` havoc passes on
/// one seed (substitution operators, vanilla stacks).
Histogram experiment_start_positions(ByteView seed, uint64_t iterations,
                                     uint64_t rng_seed);
Histogram experiment_start_positions(ByteView seed, uint64_t iterations,
                                     const HavocConfig& config);

/// Tally of influenced bytes (positions differing from the seed) over
/// mutants that keep the seed's exact coverage; when k is set, only mutants
/// within k byte diffs count.
Histogram experiment_influenced_bytes(std::string_view target_name,
                                      ByteView seed, uint64_t iterations,
                                      std::optional<uint32_t> k,
                                      uint64_t rng_seed);
Histogram experiment_influenced_bytes(std::string_view target_name,
                                      ByteView seed, uint64_t iterations,
                                      std::optional<uint32_t> k,
                                      const HavocConfig& config);

struct DistanceSummary {
  MetricStats l0, l1, l2, edit;
};

struct StackDistanceRow {
  uint32_t stack;
  DistanceSummary distances;
};

/// Mean/median perturbation distances of `iterations_per_stack` mutants at
/// each fixed havoc stack value.
std::vector<StackDistanceRow> experiment_stack_distance(
    ByteView seed, const std::vector<uint32_t>& stacks,
    uint64_t iterations_per_stack, uint64_t rng_seed);

struct SpliceExperimentResult {
  DistanceSummary normal;          // normal-stage mutants, vanilla stacks
  DistanceSummary splicing_stage;  // mutants of spliced bases, vanilla stacks
  DistanceSummary splice_op;       // stack-1 mutants produced by the splice op
  DistanceSummary other_ops;       // stack-1 mutants from every other op
};

/// Stage and operator comparison over a seed corpus. Throws CorpusTooSmall
/// when fewer than 2 seeds are given or no pair can be spliced.
SpliceExperimentResult experiment_splicing(const std::vector<ByteBuf>& corpus,
                                           uint64_t iterations,
                                           uint64_t rng_seed);

// ---- CSV emission ---------------------------------------------------------

/// `position,count` rows.
void write_histogram_csv(std::ostream& os, const Histogram& hist);

/// `metric,stack,target,mean,stddev,n` rows; each metric also gets a
/// `<metric>_median` row carrying the median in the mean column.
void write_distance_rows(std::ostream& os, const DistanceSummary& summary,
                         const std::string& stack_label,
                         const std::string& target_label);
void write_distance_csv_header(std::ostream& os);

}  // namespace taintfuzz
