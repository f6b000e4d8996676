#include "taintfuzz/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace taintfuzz {

bool is_interesting(const CoverageMap& run_coverage,
                    const CoverageMap& global_coverage) {
  for (size_t i = 0; i < run_coverage.words.size(); ++i) {
    if (run_coverage.words[i] & ~global_coverage.words[i]) return true;
  }
  return false;
}

const char* mode_name(CampaignMode mode) {
  return mode == CampaignMode::vanilla ? "vanilla" : "ztaint";
}

namespace {

struct CorpusPool final : SplicePool {
  const Corpus* corpus;
  explicit CorpusPool(const Corpus* c) : corpus(c) {}
  size_t size() const override { return corpus->seeds.size(); }
  ByteView at(size_t i) const override { return corpus->seeds[i].bytes; }
};

class CampaignRunner {
 public:
  CampaignRunner(const CampaignConfig& config,
                 const std::vector<ByteBuf>& initial_seeds)
      : config_(config),
        target_(find_target(config.target_name)),
        engine_(config.havoc),
        rng_(config.rng_seed),
        pool_(&result_.corpus) {
    if (config_.max_executions < 1) {
      throw std::invalid_argument("CampaignConfig: max_executions must be >= 1");
    }
    if (config_.mutants_per_seed < 2) {
      throw std::invalid_argument("CampaignConfig: mutants_per_seed must be >= 2");
    }
    if (!(config_.sampling_fraction > 0.0) || config_.sampling_fraction > 1.0) {
      throw std::invalid_argument(
          "CampaignConfig: sampling_fraction must be in (0,1]");
    }
    if (initial_seeds.empty()) {
      throw std::invalid_argument("run_campaign: initial seed list is empty");
    }
    for (const auto& s : initial_seeds) {
      if (s.empty()) {
        throw std::invalid_argument("run_campaign: zero-length initial seed");
      }
    }
    engine_.set_splice_pool(&pool_);
    initial_seeds_ = &initial_seeds;
  }

  CampaignResult run() {
    load_initial_seeds();
    while (!budget_exhausted()) {
      run_pass();
    }
    auto& stats = result_.stats;
    stats.edges_covered = result_.corpus.global_coverage.count();
    stats.corpus_size = result_.corpus.seeds.size();
    if (!stats.full_coverage_reached) {
      stats.executions_to_full_coverage = config_.max_executions;
    }
    return std::move(result_);
  }

 private:
  bool budget_exhausted() const {
    return result_.stats.executions >= config_.max_executions;
  }

  // Executes `input`, accounting for the run and admitting it to the corpus
  // when it covers new edges.
  void run_input(ByteView input, const FrontierSet& frontier,
                 SeedOrigin origin) {
    execute(target_, input, frontier, run_cov_, run_pb_);
    auto& stats = result_.stats;
    stats.executions += 1;
    if (is_interesting(run_cov_, result_.corpus.global_coverage)) {
      result_.corpus.global_coverage.merge(run_cov_);
      Seed seed;
      seed.bytes.assign(input.begin(), input.end());
      seed.id = next_seed_id_++;
      seed.origin = origin;
      result_.corpus.seeds.push_back(std::move(seed));
      result_.corpus.admitted_at_execution.push_back(stats.executions);
      seed_pass_counts_.push_back(0);
      check_full_coverage();
    }
    if (stats.executions % config_.stats_interval == 0) snapshot();
  }

  void check_full_coverage() {
    if (result_.stats.full_coverage_reached) return;
    for (uint32_t slot : target_.all_edge_slots()) {
      if (!result_.corpus.global_coverage.test(slot)) return;
    }
    result_.stats.full_coverage_reached = true;
    result_.stats.executions_to_full_coverage = result_.stats.executions;
  }

  void snapshot() {
    const auto& stats = result_.stats;
    result_.stats.wall_events.push_back({stats.executions,
                                         result_.corpus.global_coverage.count(),
                                         result_.corpus.seeds.size(),
                                         stats.accepted_samples});
  }

  void load_initial_seeds() {
    FrontierSet frontier = FrontierSet::all(target_);
    for (const auto& bytes : *initial_seeds_) {
      if (budget_exhausted()) return;
      run_input(bytes, frontier, SeedOrigin::initial);
    }
    if (result_.corpus.seeds.empty()) {
      // Every target sets at least one edge, so the first seed is always
      // admitted; guard anyway to keep the scheduler total.
      throw std::logic_error("no initial seed produced coverage");
    }
  }

  void run_pass() {
    auto& corpus = result_.corpus;
    const size_t seed_idx = corpus.next_index % corpus.seeds.size();
    corpus.next_index += 1;
    const uint64_t pass_no = seed_pass_counts_[seed_idx]++;

    // Splicing stage on every other pass over a seed, once two corpus seeds
    // exist. The spliced seed replaces the initial seed for the whole pass.
    ByteBuf base = corpus.seeds[seed_idx].bytes;
    bool spliced = false;
    if (config_.splicing_stage_enabled && corpus.seeds.size() >= 2 &&
        pass_no % 2 == 1) {
      const size_t partner =
          (seed_idx + 1 + rng_.below(corpus.seeds.size() - 1)) %
          corpus.seeds.size();
      if (auto merged =
              splice_seeds(base, corpus.seeds[partner].bytes, rng_)) {
        base = std::move(*merged);
        spliced = true;
      }
    }
    const SeedOrigin origin = spliced ? SeedOrigin::spliced : SeedOrigin::mutated;

    const FrontierSet frontier = update_frontier(target_, corpus.global_coverage);
    run_input(base, frontier, origin);
    if (budget_exhausted()) return;
    const ProgramBehavior base_pb = run_pb_;

    const uint32_t n_sampling = std::max<uint32_t>(
        1, static_cast<uint32_t>(std::floor(config_.sampling_fraction *
                                            config_.mutants_per_seed)));
    const uint32_t n_biased = config_.mutants_per_seed - n_sampling;

    const bool ztaint = config_.mode == CampaignMode::ztaint;
    const uint32_t k = adaptive_k(base.size(), n_sampling, config_.threshold);
    TaintMap taint(base.size());

    // Phase 1: vanilla havoc with zero-execution inference riding along.
    for (uint32_t i = 0; i < n_sampling && !budget_exhausted(); ++i) {
      const uint32_t stack = select_stack(config_.havoc.stack_policy, rng_);
      mutant_ = engine_.havoc_mutate(base, stack, rng_, nullptr);
      run_input(mutant_, frontier, origin);
      if (ztaint) {
        infer_and_accumulate(base, base_pb, mutant_, run_pb_, k, taint,
                             diff_scratch_);
      }
    }
    if (ztaint) result_.stats.accepted_samples += taint.samples_accepted;

    // Phase 2: biased havoc over the inferred counters (plain havoc in
    // vanilla mode).
    if (ztaint) {
      BiasedSampler sampler(taint);
      for (uint32_t i = 0; i < n_biased && !budget_exhausted(); ++i) {
        const uint32_t stack = select_stack(config_.havoc.stack_policy, rng_);
        mutant_ = biased_havoc_mutate(engine_, base, sampler, stack, rng_);
        run_input(mutant_, frontier, origin);
      }
      result_.last_taint = std::move(taint);
      result_.last_taint_seed_id = corpus.seeds[seed_idx].id;
      result_.last_taint_k = k;
    } else {
      for (uint32_t i = 0; i < n_biased && !budget_exhausted(); ++i) {
        const uint32_t stack = select_stack(config_.havoc.stack_policy, rng_);
        mutant_ = engine_.havoc_mutate(base, stack, rng_, nullptr);
        run_input(mutant_, frontier, origin);
      }
    }
  }

  CampaignConfig config_;
  const SyntheticTarget& target_;
  HavocEngine engine_;
  Rng rng_;
  CampaignResult result_;
  CorpusPool pool_;
  const std::vector<ByteBuf>* initial_seeds_ = nullptr;
  std::vector<uint64_t> seed_pass_counts_;
  uint64_t next_seed_id_ = 0;

  // per-execution scratch
  CoverageMap run_cov_;
  ProgramBehavior run_pb_;
  ByteBuf mutant_;
  std::vector<size_t> diff_scratch_;
};

}  // namespace

CampaignResult run_campaign_full(const CampaignConfig& config,
                                 const std::vector<ByteBuf>& initial_seeds) {
  CampaignRunner runner(config, initial_seeds);
  return runner.run();
}

CampaignStats run_campaign(const CampaignConfig& config,
                           const std::vector<ByteBuf>& initial_seeds) {
  return run_campaign_full(config, initial_seeds).stats;
}

void write_stats_csv(std::ostream& os, const CampaignStats& stats,
                     const CampaignConfig& config) {
  os << "execution,edges_covered,corpus_size,accepted_samples\n";
  for (const auto& ev : stats.wall_events) {
    os << ev.execution << "," << ev.edges_covered << "," << ev.corpus_size
       << "," << ev.accepted_samples << "\n";
  }
  os << "# final target=" << config.target_name
     << " mode=" << mode_name(config.mode)
     << " executions=" << stats.executions
     << " edges_covered=" << stats.edges_covered
     << " corpus_size=" << stats.corpus_size
     << " accepted_samples=" << stats.accepted_samples
     << " executions_to_full_coverage=" << stats.executions_to_full_coverage
     << " full_coverage_reached=" << (stats.full_coverage_reached ? 1 : 0)
     << "\n";
}

}  // namespace taintfuzz
