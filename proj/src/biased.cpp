#include "taintfuzz/biased.hpp"

#include <algorithm>
#include <stdexcept>

namespace taintfuzz {

namespace {

std::vector<uint64_t> prefix_sums(const std::vector<uint64_t>& counts) {
  std::vector<uint64_t> cum(counts.size());
  uint64_t running = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    running += counts[i];
    cum[i] = running;
  }
  return cum;
}

}  // namespace

BiasedSampler::BiasedSampler(const TaintMap& map)
    : BiasedSampler(map.counts) {}

BiasedSampler::BiasedSampler(const std::vector<uint64_t>& counts)
    : cumulative_(prefix_sums(counts)),
      total_(cumulative_.empty() ? 0 : cumulative_.back()) {
  if (cumulative_.empty()) {
    throw std::invalid_argument("BiasedSampler: empty count array");
  }
}

size_t BiasedSampler::index(Rng& rng) const {
  if (total_ == 0) return static_cast<size_t>(rng.below(cumulative_.size()));
  const uint64_t r = rng.below(total_);
  // first position whose cumulative weight exceeds r
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
  return static_cast<size_t>(it - cumulative_.begin());
}

size_t BiasedSampler::draw(size_t n_valid, Rng& rng) const {
  if (total_ == 0) return static_cast<size_t>(rng.below(n_valid));
  return index(rng) % n_valid;
}

size_t biased_index(const BiasedSampler& sampler, Rng& rng) {
  return sampler.index(rng);
}

ByteBuf biased_havoc_mutate(const HavocEngine& engine, ByteView seed,
                            const BiasedSampler& sampler, uint32_t stack,
                            Rng& rng, std::vector<MutationRecord>* records) {
  return engine.havoc_mutate_with(seed, stack, rng, &sampler, records);
}

}  // namespace taintfuzz
