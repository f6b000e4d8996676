#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "taintfuzz/biased.hpp"
#include "taintfuzz/mutation.hpp"
#include "taintfuzz/taint.hpp"
#include "taintfuzz/targets.hpp"

namespace taintfuzz {

enum class CampaignMode { vanilla, ztaint };

struct CampaignConfig {
  std::string target_name;
  uint64_t rng_seed = 1;
  uint64_t max_executions = 100000;
  uint32_t mutants_per_seed = 2048;      // N_mut
  double sampling_fraction = 0.5;        // share of mutants used for inference
  ThresholdParams threshold;
  HavocConfig havoc;
  CampaignMode mode = CampaignMode::ztaint;
  bool splicing_stage_enabled = true;
  uint64_t stats_interval = 1000;
};

struct WallEvent {
  uint64_t execution;
  uint64_t edges_covered;
  uint64_t corpus_size;
  uint64_t accepted_samples;

  bool operator==(const WallEvent&) const = default;
};

struct CampaignStats {
  uint64_t executions = 0;
  uint64_t edges_covered = 0;
  uint64_t corpus_size = 0;
  uint64_t accepted_samples = 0;
  // First execution index at which every statically reachable target edge was
  // covered; equals max_executions when the campaign never got there.
  uint64_t executions_to_full_coverage = 0;
  bool full_coverage_reached = false;
  std::vector<WallEvent> wall_events;

  bool operator==(const CampaignStats&) const = default;
};

struct Corpus {
  std::vector<Seed> seeds;
  std::vector<uint64_t> admitted_at_execution;  // parallel to seeds
  CoverageMap global_coverage;
  size_t next_index = 0;
};

struct CampaignResult {
  CampaignStats stats;
  Corpus corpus;
  // Taint state of the last completed sampling phase, for inspection dumps.
  TaintMap last_taint;
  uint64_t last_taint_seed_id = 0;
  uint32_t last_taint_k = 0;
};

/// True iff the run covers any edge the global map has not seen; the caller
/// merges on true.
bool is_interesting(const CoverageMap& run_coverage,
                    const CoverageMap& global_coverage);

CampaignResult run_campaign_full(const CampaignConfig& config,
                                 const std::vector<ByteBuf>& initial_seeds);

CampaignStats run_campaign(const CampaignConfig& config,
                           const std::vector<ByteBuf>& initial_seeds);

/// Stats CSV: `execution,edges_covered,corpus_size,accepted_samples` rows at
/// every stats interval, then a machine-parsable `# final` summary line.
void write_stats_csv(std::ostream& os, const CampaignStats& stats,
                     const CampaignConfig& config);

const char* mode_name(CampaignMode mode);

}  // namespace taintfuzz
