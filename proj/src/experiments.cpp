#include "taintfuzz/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "taintfuzz/targets.hpp"

namespace taintfuzz {

double coefficient_of_variation(const Histogram& hist) {
  if (hist.bins.empty()) return 0.0;
  double sum = 0;
  for (uint64_t b : hist.bins) sum += static_cast<double>(b);
  const double mean = sum / static_cast<double>(hist.bins.size());
  if (mean == 0.0) return 0.0;
  double sq = 0;
  for (uint64_t b : hist.bins) {
    const double d = static_cast<double>(b) - mean;
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(hist.bins.size())) / mean;
}

HavocConfig distribution_experiment_config(uint64_t rng_seed) {
  HavocConfig cfg;
  cfg.stack_policy = StackPolicy::afl_plus_plus_range;
  cfg.operator_set.assign(kSubstitutionOps.begin(), kSubstitutionOps.end());
  cfg.rng_seed = rng_seed;
  cfg.splice_operator_enabled = false;
  return cfg;
}

Histogram experiment_start_positions(ByteView seed, uint64_t iterations,
                                     const HavocConfig& config) {
  if (iterations < 1) {
    throw std::invalid_argument("experiment_start_positions: iterations >= 1");
  }
  HavocEngine engine(config);
  Rng rng(config.rng_seed);
  Histogram hist;
  hist.seed_len = seed.size();
  hist.bins.assign(seed.size(), 0);

  std::vector<MutationRecord> records;
  for (uint64_t i = 0; i < iterations; ++i) {
    const uint32_t stack = select_stack(config.stack_policy, rng);
    records.clear();
    (void)engine.havoc_mutate(seed, stack, rng, &records);
    for (const auto& rec : records) {
      if (rec.start_position < hist.bins.size()) {
        hist.bins[rec.start_position] += 1;
      }
      hist.total_events += 1;
    }
  }
  return hist;
}

Histogram experiment_start_positions(ByteView seed, uint64_t iterations,
                                     uint64_t rng_seed) {
  return experiment_start_positions(seed, iterations,
                                    distribution_experiment_config(rng_seed));
}

Histogram experiment_influenced_bytes(std::string_view target_name,
                                      ByteView seed, uint64_t iterations,
                                      std::optional<uint32_t> k,
                                      const HavocConfig& config) {
  if (iterations < 1) {
    throw std::invalid_argument("experiment_influenced_bytes: iterations >= 1");
  }
  const SyntheticTarget& target = find_target(target_name);
  HavocEngine engine(config);
  Rng rng(config.rng_seed);

  const FrontierSet frontier = FrontierSet::none(target);
  CoverageMap seed_cov, run_cov;
  ProgramBehavior pb;
  execute(target, seed, frontier, seed_cov, pb);

  Histogram hist;
  hist.seed_len = seed.size();
  hist.bins.assign(seed.size(), 0);

  ByteBuf mutant;
  std::vector<size_t> diff;
  for (uint64_t i = 0; i < iterations; ++i) {
    const uint32_t stack = select_stack(config.stack_policy, rng);
    mutant = engine.havoc_mutate(seed, stack, rng, nullptr);
    execute(target, mutant, frontier, run_cov, pb);
    // only mutants that keep the seed's exact execution path count
    if (!(run_cov == seed_cov)) continue;
    diff.clear();
    const size_t n = std::max(seed.size(), mutant.size());
    for (size_t j = 0; j < n; ++j) {
      const uint8_t sv = j < seed.size() ? seed[j] : 0;
      const uint8_t mv = j < mutant.size() ? mutant[j] : 0;
      if (sv != mv) diff.push_back(j);
    }
    if (k && diff.size() > *k) continue;
    hist.total_events += 1;
    for (size_t j : diff) {
      if (j < hist.bins.size()) hist.bins[j] += 1;
    }
  }
  return hist;
}

Histogram experiment_influenced_bytes(std::string_view target_name,
                                      ByteView seed, uint64_t iterations,
                                      std::optional<uint32_t> k,
                                      uint64_t rng_seed) {
  return experiment_influenced_bytes(target_name, seed, iterations, k,
                                     distribution_experiment_config(rng_seed));
}

namespace {

struct DistanceAccumulator {
  std::vector<double> l0, l1, l2, edit;

  void add(const DistanceReport& r) {
    l0.push_back(static_cast<double>(r.l0));
    l1.push_back(static_cast<double>(r.l1));
    l2.push_back(r.l2);
    edit.push_back(static_cast<double>(r.edit));
  }
  size_t size() const { return l0.size(); }
  DistanceSummary summary() const {
    return {summarize(l0), summarize(l1), summarize(l2), summarize(edit)};
  }
};

size_t records_edit_bound(const std::vector<MutationRecord>& records) {
  size_t bound = 0;
  for (const auto& rec : records) bound += rec.affected_length;
  // the empty-buffer repair byte can add one more edit
  return bound + records.size();
}

struct VectorPool final : SplicePool {
  const std::vector<ByteBuf>* seeds;
  explicit VectorPool(const std::vector<ByteBuf>* s) : seeds(s) {}
  size_t size() const override { return seeds->size(); }
  ByteView at(size_t i) const override { return (*seeds)[i]; }
};

}  // namespace

std::vector<StackDistanceRow> experiment_stack_distance(
    ByteView seed, const std::vector<uint32_t>& stacks,
    uint64_t iterations_per_stack, uint64_t rng_seed) {
  if (stacks.empty()) {
    throw std::invalid_argument("experiment_stack_distance: stacks nonempty");
  }
  for (uint32_t s : stacks) {
    if (s < 1) throw std::invalid_argument("experiment_stack_distance: stack >= 1");
  }
  HavocConfig cfg;
  cfg.rng_seed = rng_seed;
  cfg.splice_operator_enabled = false;  // no corpus in this experiment
  HavocEngine engine(cfg);
  Rng rng(rng_seed);

  std::vector<StackDistanceRow> rows;
  std::vector<MutationRecord> records;
  for (uint32_t stack : stacks) {
    DistanceAccumulator acc;
    for (uint64_t i = 0; i < iterations_per_stack; ++i) {
      records.clear();
      const ByteBuf mutant = engine.havoc_mutate(seed, stack, rng, &records);
      acc.add(measure_distance_bounded(seed, mutant, records_edit_bound(records)));
    }
    rows.push_back({stack, acc.summary()});
  }
  return rows;
}

SpliceExperimentResult experiment_splicing(const std::vector<ByteBuf>& corpus,
                                           uint64_t iterations,
                                           uint64_t rng_seed) {
  if (corpus.size() < 2) throw CorpusTooSmall();

  HavocConfig normal_cfg;
  normal_cfg.rng_seed = rng_seed;
  normal_cfg.splice_operator_enabled = false;
  HavocEngine normal_engine(normal_cfg);

  HavocConfig op_cfg;
  op_cfg.rng_seed = rng_seed;
  op_cfg.splice_operator_enabled = true;
  HavocEngine op_engine(op_cfg);
  VectorPool pool(&corpus);
  op_engine.set_splice_pool(&pool);

  Rng rng(rng_seed);
  DistanceAccumulator normal_acc, stage_acc, splice_acc, other_acc;
  std::vector<MutationRecord> records;

  // (a) normal stage vs splicing stage under vanilla stacks, distances
  // measured against the pass's initial seed
  uint64_t feasible_splices = 0;
  for (uint64_t i = 0; i < iterations; ++i) {
    const ByteBuf& seed = corpus[i % corpus.size()];
    const uint32_t stack = select_stack(StackPolicy::afl_plus_plus_range, rng);

    records.clear();
    ByteBuf mutant = normal_engine.havoc_mutate(seed, stack, rng, &records);
    normal_acc.add(measure_distance(seed, mutant));

    const size_t partner_idx =
        (i % corpus.size() + 1 + rng.below(corpus.size() - 1)) % corpus.size();
    auto spliced = splice_seeds(seed, corpus[partner_idx], rng);
    if (!spliced) continue;  // identical pair: skip splicing for this pass
    feasible_splices += 1;
    mutant = normal_engine.havoc_mutate(*spliced, stack, rng, nullptr);
    stage_acc.add(measure_distance(seed, mutant));
  }
  if (feasible_splices == 0) throw CorpusTooSmall();

  // (b) splice operator vs all other operators at havoc stack 1
  for (uint64_t i = 0; i < iterations; ++i) {
    const ByteBuf& seed = corpus[i % corpus.size()];
    records.clear();
    const ByteBuf mutant = op_engine.havoc_mutate(seed, 1, rng, &records);
    const DistanceReport report = measure_distance(seed, mutant);
    if (records.front().op == Op::splice) {
      splice_acc.add(report);
    } else {
      other_acc.add(report);
    }
  }

  return {normal_acc.summary(), stage_acc.summary(), splice_acc.summary(),
          other_acc.summary()};
}

void write_histogram_csv(std::ostream& os, const Histogram& hist) {
  os << "position,count\n";
  for (size_t i = 0; i < hist.bins.size(); ++i) {
    os << i << "," << hist.bins[i] << "\n";
  }
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_metric_row(std::ostream& os, const char* metric,
                      const std::string& stack, const std::string& target,
                      const MetricStats& stats) {
  os << metric << "," << stack << "," << target << "," << fmt_double(stats.mean)
     << "," << fmt_double(stats.stddev) << "," << stats.n << "\n";
  os << metric << "_median," << stack << "," << target << ","
     << fmt_double(stats.median) << "," << fmt_double(stats.stddev) << ","
     << stats.n << "\n";
}

}  // namespace

void write_distance_csv_header(std::ostream& os) {
  os << "metric,stack,target,mean,stddev,n\n";
}

void write_distance_rows(std::ostream& os, const DistanceSummary& summary,
                         const std::string& stack_label,
                         const std::string& target_label) {
  write_metric_row(os, "l0", stack_label, target_label, summary.l0);
  write_metric_row(os, "l1", stack_label, target_label, summary.l1);
  write_metric_row(os, "l2", stack_label, target_label, summary.l2);
  write_metric_row(os, "edit", stack_label, target_label, summary.edit);
}

}  // namespace taintfuzz
