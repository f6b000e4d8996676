#include <doctest.h>

#include <set>
#include <sstream>

#include "taintfuzz/campaign.hpp"

using namespace taintfuzz;

namespace {

CampaignConfig small_config(const std::string& target, CampaignMode mode,
                            uint64_t rng_seed) {
  CampaignConfig cfg;
  cfg.target_name = target;
  cfg.rng_seed = rng_seed;
  cfg.havoc.rng_seed = rng_seed;
  cfg.max_executions = 6000;
  cfg.mutants_per_seed = 128;
  cfg.mode = mode;
  return cfg;
}

}  // namespace

TEST_CASE("is_interesting detects new bits only") {
  CoverageMap run, global;
  CHECK_FALSE(is_interesting(run, global));
  run.set(100);
  CHECK(is_interesting(run, global));
  global.merge(run);
  CHECK_FALSE(is_interesting(run, global));  // subset after merge
  CoverageMap disjoint;
  disjoint.set(4000);
  CHECK(is_interesting(disjoint, global));
  // merge-then-requery: repeating the same run stays uninteresting
  global.merge(disjoint);
  CHECK_FALSE(is_interesting(disjoint, global));
}

TEST_CASE("campaign rejects bad configurations") {
  CampaignConfig cfg = small_config("and3", CampaignMode::ztaint, 1);
  cfg.max_executions = 0;
  CHECK_THROWS_AS(run_campaign(cfg, {ByteBuf(16, 0)}), std::invalid_argument);

  cfg = small_config("and3", CampaignMode::ztaint, 1);
  CHECK_THROWS_AS(run_campaign(cfg, {}), std::invalid_argument);
  CHECK_THROWS_AS(run_campaign(cfg, {ByteBuf{}}), std::invalid_argument);

  cfg.mutants_per_seed = 1;
  CHECK_THROWS_AS(run_campaign(cfg, {ByteBuf(16, 0)}), std::invalid_argument);

  cfg = small_config("missing_target", CampaignMode::ztaint, 1);
  CHECK_THROWS_AS(run_campaign(cfg, {ByteBuf(16, 0)}), TargetNotFound);
}

TEST_CASE("identical config and rng seed reproduce the whole campaign") {
  for (CampaignMode mode : {CampaignMode::vanilla, CampaignMode::ztaint}) {
    const CampaignConfig cfg = small_config("sparse_hot", mode, 77);
    const CampaignStats a = run_campaign(cfg, {ByteBuf(256, 0)});
    const CampaignStats b = run_campaign(cfg, {ByteBuf(256, 0)});
    CHECK(a == b);
    CHECK(a.executions == cfg.max_executions);
  }
}

TEST_CASE("executions count seed runs plus mutant runs exactly") {
  // budget sized to an exact number of passes: 1 initial seed run, then each
  // pass is 1 base run + mutants_per_seed mutants, with no corpus growth on
  // length_gate after the first two seeds
  CampaignConfig cfg = small_config("and3", CampaignMode::ztaint, 5);
  cfg.splicing_stage_enabled = false;
  cfg.max_executions = 1 + 3 * (1 + cfg.mutants_per_seed);
  const CampaignStats stats = run_campaign(cfg, {ByteBuf(16, 0)});
  CHECK(stats.executions == cfg.max_executions);
  // wall events land exactly at the stats interval
  for (size_t i = 0; i < stats.wall_events.size(); ++i) {
    CHECK(stats.wall_events[i].execution == (i + 1) * cfg.stats_interval);
  }
  // edge counts along the log never decrease
  for (size_t i = 1; i < stats.wall_events.size(); ++i) {
    CHECK(stats.wall_events[i].edges_covered >=
          stats.wall_events[i - 1].edges_covered);
  }
}

TEST_CASE("replaying the corpus reconstructs the global coverage exactly") {
  const CampaignConfig cfg = small_config("magic_chain", CampaignMode::ztaint, 9);
  const CampaignResult result = run_campaign_full(cfg, {ByteBuf(256, 0)});
  const auto& target = find_target(cfg.target_name);
  CoverageMap replayed;
  for (const auto& seed : result.corpus.seeds) {
    const auto [cov, pb] =
        execute(target, seed.bytes, FrontierSet::none(target));
    replayed.merge(cov);
  }
  CHECK(replayed == result.corpus.global_coverage);
  CHECK(result.stats.edges_covered == replayed.count());
  CHECK(result.stats.corpus_size == result.corpus.seeds.size());
  // seed ids are unique
  std::set<uint64_t> ids;
  for (const auto& seed : result.corpus.seeds) ids.insert(seed.id);
  CHECK(ids.size() == result.corpus.seeds.size());
}

TEST_CASE("vanilla mode skips the taint machinery") {
  const CampaignConfig cfg = small_config("sparse_hot", CampaignMode::vanilla, 3);
  const CampaignStats stats = run_campaign(cfg, {ByteBuf(256, 0)});
  CHECK(stats.accepted_samples == 0);
}

TEST_CASE("ztaint mode accumulates accepted samples on sparse_hot") {
  const CampaignConfig cfg = small_config("sparse_hot", CampaignMode::ztaint, 3);
  const CampaignStats stats = run_campaign(cfg, {ByteBuf(256, 0)});
  CHECK(stats.accepted_samples > 0);
}

TEST_CASE("full coverage execution index is recorded or censored") {
  // and3 has a single 3-byte AND gate; a tiny budget cannot flip it
  CampaignConfig cfg = small_config("and3", CampaignMode::vanilla, 11);
  cfg.max_executions = 300;
  const CampaignStats stats = run_campaign(cfg, {ByteBuf(16, 0)});
  if (stats.full_coverage_reached) {
    CHECK(stats.executions_to_full_coverage <= cfg.max_executions);
  } else {
    CHECK(stats.executions_to_full_coverage == cfg.max_executions);
  }

  // length_gate is fully covered by two inputs of different lengths, which
  // insert/delete mutations produce almost immediately
  CampaignConfig lg = small_config("length_gate", CampaignMode::vanilla, 11);
  lg.max_executions = 3000;
  const CampaignStats lg_stats = run_campaign(lg, {ByteBuf(100, 0)});
  CHECK(lg_stats.full_coverage_reached);
  CHECK(lg_stats.executions_to_full_coverage < lg.max_executions);
}

TEST_CASE("stats CSV has the pinned columns and a parsable final line") {
  const CampaignConfig cfg = small_config("sparse_hot", CampaignMode::ztaint, 21);
  const CampaignStats stats = run_campaign(cfg, {ByteBuf(256, 0)});
  std::ostringstream os;
  write_stats_csv(os, stats, cfg);
  const std::string text = os.str();
  CHECK(text.rfind("execution,edges_covered,corpus_size,accepted_samples\n", 0) == 0);
  CHECK(text.find("# final target=sparse_hot mode=ztaint ") != std::string::npos);
  CHECK(text.find("executions_to_full_coverage=") != std::string::npos);
}
