#pragma once

#include <cstdint>
#include <vector>

#include "taintfuzz/mutation.hpp"
#include "taintfuzz/taint.hpp"

namespace taintfuzz {

/// Weighted start-position sampler over a TaintMap: position i is drawn with
/// probability counts[i] / total. Immutable after construction; rebuild when
/// the underlying TaintMap changes.
class BiasedSampler final : public PositionDist {
 public:
  explicit BiasedSampler(const TaintMap& map);
  explicit BiasedSampler(const std::vector<uint64_t>& counts);

  size_t size() const { return cumulative_.size(); }
  uint64_t total() const { return total_; }

  /// Index in [0, size()) with probability counts[i]/total; uniform when all
  /// counts are zero. Consumes exactly one rng draw.
  size_t index(Rng& rng) const;

  /// PositionDist hook used during biased havoc: draws over the seed-length
  /// distribution, then reduces modulo the number of currently valid start
  /// positions (buffers change length mid-stack). Zero-total sampling is a
  /// plain uniform draw over the valid positions, matching the vanilla path
  /// draw for draw.
  size_t draw(size_t n_valid, Rng& rng) const override;

 private:
  std::vector<uint64_t> cumulative_;  // nondecreasing; back() == total_
  uint64_t total_ = 0;
};

/// Eq-style probability draw over the sampler's full index range.
size_t biased_index(const BiasedSampler& sampler, Rng& rng);

/// Havoc with every operator start-position draw taken from the sampler.
/// Operator choice and all non-positional randomness stay uniform.
ByteBuf biased_havoc_mutate(const HavocEngine& engine, ByteView seed,
                            const BiasedSampler& sampler, uint32_t stack,
                            Rng& rng,
                            std::vector<MutationRecord>* records = nullptr);

}  // namespace taintfuzz
