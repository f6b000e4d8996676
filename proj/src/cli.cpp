#include "taintfuzz/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "taintfuzz/campaign.hpp"
#include "taintfuzz/experiments.hpp"
#include "taintfuzz/stats.hpp"
#include "taintfuzz/targets.hpp"

namespace taintfuzz::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ByteBuf read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  return ByteBuf(std::istreambuf_iterator<char>(in),
                 std::istreambuf_iterator<char>());
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + out_path);
  out << text;
}

ByteBuf pseudorandom_seed(size_t len, uint64_t rng_seed) {
  Rng rng(rng_seed ^ 0x5EEDB10B5ULL);
  ByteBuf out(len);
  for (auto& b : out) b = static_cast<uint8_t>(rng.below(256));
  return out;
}

// Common options shared by every experiment subcommand.
struct CommonOpts {
  uint64_t rng_seed = 1;
  std::string out;
  std::string target;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_target) {
  cmd->add_option("--rng-seed", opts.rng_seed, "deterministic RNG seed");
  cmd->add_option("--out", opts.out, "output CSV path (default stdout)");
  if (with_target) {
    cmd->add_option("--target", opts.target, "synthetic target name");
  }
}

struct SeedOpts {
  std::string seed_file;
  size_t seed_len = 0;
};

ByteBuf resolve_seed(const SeedOpts& opts, size_t default_len,
                     uint64_t rng_seed, bool zeros) {
  if (!opts.seed_file.empty()) return read_file(opts.seed_file);
  const size_t len = opts.seed_len > 0 ? opts.seed_len : default_len;
  if (zeros) return ByteBuf(len, 0);
  return pseudorandom_seed(len, rng_seed);
}

// ---- fuzz -----------------------------------------------------------------

int cmd_fuzz(const CommonOpts& common, const std::vector<std::string>& seeds,
             size_t zero_seed_len, const std::string& mode,
             const std::string& stack_policy, uint64_t max_execs,
             uint32_t mutants_per_seed, double sampling_fraction, double beta,
             bool no_splicing, const std::string& corpus_out,
             const std::string& taint_out) {
  CampaignConfig cfg;
  cfg.target_name = common.target;
  cfg.rng_seed = common.rng_seed;
  cfg.max_executions = max_execs;
  cfg.mutants_per_seed = mutants_per_seed;
  cfg.sampling_fraction = sampling_fraction;
  cfg.threshold.beta = beta;
  cfg.splicing_stage_enabled = !no_splicing;
  cfg.havoc.rng_seed = common.rng_seed;
  if (mode == "vanilla") {
    cfg.mode = CampaignMode::vanilla;
  } else if (mode == "ztaint") {
    cfg.mode = CampaignMode::ztaint;
  } else {
    throw UsageError("mode must be vanilla or ztaint");
  }
  if (stack_policy == "afl") {
    cfg.havoc.stack_policy = StackPolicy::afl_power_of_two;
  } else if (stack_policy == "aflpp") {
    cfg.havoc.stack_policy = StackPolicy::afl_plus_plus_range;
  } else {
    throw UsageError("stack policy must be afl or aflpp");
  }

  const SyntheticTarget& target = find_target(cfg.target_name);
  std::vector<ByteBuf> initial;
  for (const auto& path : seeds) initial.push_back(read_file(path));
  if (initial.empty()) {
    const size_t len = zero_seed_len > 0 ? zero_seed_len : target.min_input_len();
    initial.emplace_back(len, 0);
  }

  const CampaignResult result = run_campaign_full(cfg, initial);

  std::ostringstream stats_csv;
  write_stats_csv(stats_csv, result.stats, cfg);
  write_text(common.out, stats_csv.str());

  if (!corpus_out.empty()) {
    fs::create_directories(corpus_out);
    for (size_t i = 0; i < result.corpus.seeds.size(); ++i) {
      const Seed& seed = result.corpus.seeds[i];
      char name[64];
      std::snprintf(name, sizeof(name), "id_%llu_exec_%llu",
                    static_cast<unsigned long long>(seed.id),
                    static_cast<unsigned long long>(
                        result.corpus.admitted_at_execution[i]));
      std::ofstream out(fs::path(corpus_out) / name, std::ios::binary);
      out.write(reinterpret_cast<const char*>(seed.bytes.data()),
                static_cast<std::streamsize>(seed.bytes.size()));
    }
  }
  if (!taint_out.empty()) {
    std::ostringstream taint_csv;
    write_taint_csv(taint_csv, result.last_taint, result.last_taint_seed_id,
                    result.last_taint_k);
    write_text(taint_out, taint_csv.str());
  }
  return kExitOk;
}

// ---- experiments ----------------------------------------------------------

int cmd_sample_start(const CommonOpts& common, const SeedOpts& seed_opts,
                     uint64_t iterations) {
  const ByteBuf seed = resolve_seed(seed_opts, 1000, common.rng_seed, false);
  const Histogram hist =
      experiment_start_positions(seed, iterations, common.rng_seed);
  std::ostringstream csv;
  write_histogram_csv(csv, hist);
  write_text(common.out, csv.str());
  return kExitOk;
}

int cmd_sample_influence(const CommonOpts& common, const SeedOpts& seed_opts,
                         uint64_t iterations, int64_t k) {
  const SyntheticTarget& target = find_target(common.target);
  // content-rich default seed: copy operators need structure to move around
  const ByteBuf seed =
      resolve_seed(seed_opts, target.min_input_len(), common.rng_seed, false);
  std::optional<uint32_t> threshold;
  if (k >= 0) threshold = static_cast<uint32_t>(k);
  const Histogram hist = experiment_influenced_bytes(
      common.target, seed, iterations, threshold, common.rng_seed);
  std::ostringstream csv;
  write_histogram_csv(csv, hist);
  write_text(common.out, csv.str());
  return kExitOk;
}

int cmd_stack_distance(const CommonOpts& common, const SeedOpts& seed_opts,
                       const std::vector<uint32_t>& stacks,
                       uint64_t iterations) {
  const ByteBuf seed = resolve_seed(seed_opts, 1000, common.rng_seed, false);
  const auto rows =
      experiment_stack_distance(seed, stacks, iterations, common.rng_seed);
  std::ostringstream csv;
  write_distance_csv_header(csv);
  const std::string label = "seedlen" + std::to_string(seed.size());
  for (const auto& row : rows) {
    write_distance_rows(csv, row.distances, std::to_string(row.stack), label);
  }
  write_text(common.out, csv.str());
  return kExitOk;
}

int cmd_splice_distance(const CommonOpts& common, const std::string& corpus_dir,
                        uint32_t gen_corpus, uint64_t iterations) {
  std::vector<ByteBuf> corpus;
  if (!corpus_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(corpus_dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) corpus.push_back(read_file(f));
  } else {
    Rng rng(common.rng_seed ^ 0xC0DE5EED);
    for (uint32_t i = 0; i < gen_corpus; ++i) {
      const size_t len = 200 + rng.below(400);
      ByteBuf seed(len);
      for (auto& b : seed) b = static_cast<uint8_t>(rng.below(256));
      corpus.push_back(std::move(seed));
    }
  }
  const SpliceExperimentResult result =
      experiment_splicing(corpus, iterations, common.rng_seed);
  std::ostringstream csv;
  write_distance_csv_header(csv);
  write_distance_rows(csv, result.normal, "vanilla", "normal_stage");
  write_distance_rows(csv, result.splicing_stage, "vanilla", "splicing_stage");
  write_distance_rows(csv, result.splice_op, "1", "splice_op");
  write_distance_rows(csv, result.other_ops, "1", "other_ops");
  write_text(common.out, csv.str());
  return kExitOk;
}

// ---- compare ---------------------------------------------------------------

std::vector<std::string> expand_csv_set(const std::string& spec) {
  std::vector<std::string> paths;
  if (fs::is_directory(spec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(spec)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) paths.push_back(f.string());
    return paths;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) paths.push_back(item);
  }
  return paths;
}

struct FinalLine {
  std::string target;
  std::string mode;
  std::map<std::string, double> metrics;
};

FinalLine parse_final_line(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::string line, final_line;
  while (std::getline(in, line)) {
    if (line.rfind("# final ", 0) == 0) final_line = line;
  }
  if (final_line.empty()) {
    throw UsageError("no '# final' summary line in " + path);
  }
  FinalLine out;
  std::stringstream ss(final_line.substr(8));
  std::string token;
  while (ss >> token) {
    const size_t eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "target") {
      out.target = value;
    } else if (key == "mode") {
      out.mode = value;
    } else {
      out.metrics[key] = std::stod(value);
    }
  }
  return out;
}

int cmd_compare(const CommonOpts& common, const std::string& a_spec,
                const std::string& b_spec, const std::string& metric,
                const std::string& alternative) {
  Alternative alt;
  if (alternative == "two-sided") alt = Alternative::two_sided;
  else if (alternative == "less") alt = Alternative::less;
  else if (alternative == "greater") alt = Alternative::greater;
  else throw UsageError("alternative must be two-sided, less, or greater");

  const auto a_paths = expand_csv_set(a_spec);
  const auto b_paths = expand_csv_set(b_spec);
  if (a_paths.empty() || b_paths.empty()) {
    throw UsageError("compare: both sets need at least one stats CSV");
  }
  std::vector<double> a_vals, b_vals;
  std::string target = "-";
  for (const auto& path : a_paths) {
    const FinalLine fl = parse_final_line(path);
    if (!fl.metrics.count(metric)) throw UsageError("metric " + metric + " not in " + path);
    a_vals.push_back(fl.metrics.at(metric));
    if (!fl.target.empty()) target = fl.target;
  }
  for (const auto& path : b_paths) {
    const FinalLine fl = parse_final_line(path);
    if (!fl.metrics.count(metric)) throw UsageError("metric " + metric + " not in " + path);
    b_vals.push_back(fl.metrics.at(metric));
  }

  const MannWhitneyResult result = mann_whitney_u(a_vals, b_vals, alt);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "target,U,p,significant\n%s,%.6f,%.9e,%s\n",
                target.c_str(), result.u, result.p,
                result.p < 0.05 ? "true" : "false");
  write_text(common.out, buf);
  return kExitOk;
}

int cmd_targets(const CommonOpts& common) {
  std::ostringstream os;
  os << "name,min_input_len,branch_count,hot_bytes\n";
  for (const auto& t : builtin_targets()) {
    os << t.name() << "," << t.min_input_len() << "," << t.branches().size()
       << ",";
    const auto& hot = t.ground_truth_hot_bytes();
    for (size_t i = 0; i < hot.size(); ++i) {
      os << (i ? " " : "") << hot[i];
    }
    os << "\n";
  }
  write_text(common.out, os.str());
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"havoc-mode fuzzing library with taint-guided mutation"};
  app.require_subcommand(1);

  CommonOpts fuzz_opts, start_opts, influence_opts, stackd_opts, splice_opts,
      compare_opts, targets_opts;

  // fuzz
  auto* fuzz = app.add_subcommand("fuzz", "run a fuzzing campaign");
  add_common(fuzz, fuzz_opts, true);
  std::vector<std::string> fuzz_seeds;
  size_t fuzz_zero_len = 0;
  std::string fuzz_mode = "ztaint";
  std::string fuzz_policy = "aflpp";
  uint64_t fuzz_max_execs = 100000;
  uint32_t fuzz_mutants = 2048;
  double fuzz_fraction = 0.5;
  double fuzz_beta = 96.0;
  bool fuzz_no_splicing = false;
  std::string fuzz_corpus_out, fuzz_taint_out;
  fuzz->add_option("--seed-file", fuzz_seeds, "initial seed file(s)");
  fuzz->add_option("--zero-seed-len", fuzz_zero_len,
                   "length of the default all-zero seed");
  fuzz->add_option("--mode", fuzz_mode, "vanilla | ztaint");
  fuzz->add_option("--stack-policy", fuzz_policy, "afl | aflpp");
  fuzz->add_option("--max-execs", fuzz_max_execs, "execution budget");
  fuzz->add_option("--mutants-per-seed", fuzz_mutants, "mutants per seed pass");
  fuzz->add_option("--sampling-fraction", fuzz_fraction,
                   "share of mutants used for taint sampling");
  fuzz->add_option("--beta", fuzz_beta, "adaptive threshold scaling factor");
  fuzz->add_flag("--no-splicing", fuzz_no_splicing, "disable the splicing stage");
  fuzz->add_option("--corpus-out", fuzz_corpus_out, "directory for corpus files");
  fuzz->add_option("--taint-out", fuzz_taint_out, "CSV dump of the last taint map");

  // sample-start
  auto* start = app.add_subcommand(
      "sample-start", "start-position distribution of havoc mutations");
  add_common(start, start_opts, false);
  SeedOpts start_seed;
  uint64_t start_iters = 100000;
  start->add_option("--seed-file", start_seed.seed_file, "seed file");
  start->add_option("--seed-len", start_seed.seed_len,
                    "generated seed length (default 1000)");
  start->add_option("--iterations", start_iters, "havoc passes");

  // sample-influence
  auto* influence = app.add_subcommand(
      "sample-influence", "influenced-byte distribution on one target");
  add_common(influence, influence_opts, true);
  SeedOpts influence_seed;
  uint64_t influence_iters = 200000;
  int64_t influence_k = -1;
  influence->add_option("--seed-file", influence_seed.seed_file, "seed file");
  influence->add_option("--seed-len", influence_seed.seed_len,
                        "zero-seed length (default target minimum)");
  influence->add_option("--iterations", influence_iters, "mutants to generate");
  influence->add_option("--k", influence_k, "byte-diff threshold (unset = none)");

  // stack-distance
  auto* stackd = app.add_subcommand(
      "stack-distance", "perturbation distance vs havoc stack size");
  add_common(stackd, stackd_opts, false);
  SeedOpts stackd_seed;
  std::vector<uint32_t> stackd_stacks = {1, 2, 4, 8, 16};
  uint64_t stackd_iters = 10000;
  stackd->add_option("--seed-file", stackd_seed.seed_file, "seed file");
  stackd->add_option("--seed-len", stackd_seed.seed_len,
                     "generated seed length (default 1000)");
  stackd->add_option("--stacks", stackd_stacks, "stack sizes to measure");
  stackd->add_option("--iterations", stackd_iters, "mutants per stack size");

  // splice-distance
  auto* spliced = app.add_subcommand(
      "splice-distance", "splicing stage and operator distance comparison");
  add_common(spliced, splice_opts, false);
  std::string splice_corpus_dir;
  uint32_t splice_gen = 6;
  uint64_t splice_iters = 10000;
  spliced->add_option("--corpus", splice_corpus_dir, "corpus directory");
  spliced->add_option("--gen-corpus", splice_gen,
                      "number of generated random seeds when no corpus given");
  spliced->add_option("--iterations", splice_iters, "mutants per comparison");

  // compare
  auto* compare = app.add_subcommand(
      "compare", "Mann-Whitney U over two sets of campaign stats CSVs");
  add_common(compare, compare_opts, false);
  std::string cmp_a, cmp_b, cmp_metric = "executions_to_full_coverage";
  std::string cmp_alt = "two-sided";
  compare->add_option("--a", cmp_a, "first set: directory or comma list")
      ->required();
  compare->add_option("--b", cmp_b, "second set: directory or comma list")
      ->required();
  compare->add_option("--metric", cmp_metric, "summary metric to compare");
  compare->add_option("--alternative", cmp_alt, "two-sided | less | greater");

  // targets
  auto* targets = app.add_subcommand("targets", "list built-in targets");
  add_common(targets, targets_opts, false);

  std::vector<std::string> argv(args);
  try {
    app.parse(argv.empty() ? std::vector<std::string>{}
                           : std::vector<std::string>(argv.rbegin(), argv.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fuzz->parsed()) {
      if (fuzz_opts.target.empty()) throw UsageError("fuzz: --target required");
      return cmd_fuzz(fuzz_opts, fuzz_seeds, fuzz_zero_len, fuzz_mode,
                      fuzz_policy, fuzz_max_execs, fuzz_mutants, fuzz_fraction,
                      fuzz_beta, fuzz_no_splicing, fuzz_corpus_out,
                      fuzz_taint_out);
    }
    if (start->parsed()) return cmd_sample_start(start_opts, start_seed, start_iters);
    if (influence->parsed()) {
      if (influence_opts.target.empty()) {
        throw UsageError("sample-influence: --target required");
      }
      return cmd_sample_influence(influence_opts, influence_seed,
                                  influence_iters, influence_k);
    }
    if (stackd->parsed()) {
      return cmd_stack_distance(stackd_opts, stackd_seed, stackd_stacks,
                                stackd_iters);
    }
    if (spliced->parsed()) {
      return cmd_splice_distance(splice_opts, splice_corpus_dir, splice_gen,
                                 splice_iters);
    }
    if (compare->parsed()) {
      return cmd_compare(compare_opts, cmp_a, cmp_b, cmp_metric, cmp_alt);
    }
    if (targets->parsed()) return cmd_targets(targets_opts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TargetNotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CorpusTooSmall& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace taintfuzz::cli
