#include "taintfuzz/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace taintfuzz {

namespace {

uint8_t padded_at(ByteView v, size_t i) { return i < v.size() ? v[i] : 0; }

}  // namespace

std::vector<size_t> byte_diff_positions(ByteView x, ByteView y) {
  const size_t n = std::max(x.size(), y.size());
  std::vector<size_t> out;
  for (size_t i = 0; i < n; ++i) {
    if (padded_at(x, i) != padded_at(y, i)) out.push_back(i);
  }
  return out;
}

bool byte_diff_limited(ByteView x, ByteView y, size_t limit,
                       std::vector<size_t>& out) {
  out.clear();
  const size_t n = std::max(x.size(), y.size());
  for (size_t i = 0; i < n; ++i) {
    if (padded_at(x, i) != padded_at(y, i)) {
      out.push_back(i);
      if (out.size() > limit) return false;
    }
  }
  return true;
}

size_t l0_count(ByteView x, ByteView y) {
  const size_t n = std::max(x.size(), y.size());
  size_t count = 0;
  for (size_t i = 0; i < n; ++i) {
    count += padded_at(x, i) != padded_at(y, i);
  }
  return count;
}

uint64_t l1_sum(ByteView x, ByteView y) {
  const size_t n = std::max(x.size(), y.size());
  uint64_t sum = 0;
  for (size_t i = 0; i < n; ++i) {
    sum += static_cast<uint64_t>(
        std::abs(static_cast<int>(padded_at(x, i)) - static_cast<int>(padded_at(y, i))));
  }
  return sum;
}

double lp_norm(ByteView x, ByteView y, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("lp_norm: p must be 1 or 2");
  if (p == 1) return static_cast<double>(l1_sum(x, y));
  const size_t n = std::max(x.size(), y.size());
  uint64_t sumsq = 0;
  for (size_t i = 0; i < n; ++i) {
    const int d = static_cast<int>(padded_at(x, i)) - static_cast<int>(padded_at(y, i));
    sumsq += static_cast<uint64_t>(d) * static_cast<uint64_t>(d);
  }
  return std::sqrt(static_cast<double>(sumsq));
}

namespace {

constexpr size_t kInf = std::numeric_limits<size_t>::max() / 4;

// Banded Levenshtein over the given (already trimmed) views. Returns the
// exact distance if it is <= band, otherwise some value > band.
size_t banded_levenshtein(ByteView x, ByteView y, size_t band) {
  const size_t n = x.size();
  const size_t m = y.size();
  if (n == 0) return m;
  if (m == 0) return n;
  const size_t diff = n > m ? n - m : m - n;
  if (diff > band) return band + 1;

  // Row window: cells j in [lo, hi] of each DP row i, where |j - i| <= band.
  std::vector<size_t> prev(2 * band + 2, kInf);
  std::vector<size_t> cur(2 * band + 2, kInf);

  auto lo_of = [&](size_t i) { return i > band ? i - band : 0; };
  auto hi_of = [&](size_t i) { return std::min(m, i + band); };

  for (size_t j = lo_of(0); j <= hi_of(0); ++j) prev[j - lo_of(0)] = j;

  for (size_t i = 1; i <= n; ++i) {
    const size_t lo = lo_of(i);
    const size_t hi = hi_of(i);
    const size_t plo = lo_of(i - 1);
    for (size_t j = lo; j <= hi; ++j) {
      size_t best = kInf;
      if (j > 0) {
        // substitution / match
        if (j - 1 >= plo && j - 1 <= hi_of(i - 1)) {
          const size_t sub = prev[j - 1 - plo] + (x[i - 1] != y[j - 1] ? 1 : 0);
          best = std::min(best, sub);
        }
        // insertion into x (left neighbor in current row)
        if (j - 1 >= lo) best = std::min(best, cur[j - 1 - lo] + 1);
      } else {
        best = std::min(best, i);
      }
      // deletion from x (cell above)
      if (j >= plo && j <= hi_of(i - 1)) best = std::min(best, prev[j - plo] + 1);
      cur[j - lo] = best;
    }
    std::swap(prev, cur);
  }
  return prev[m - lo_of(n)];
}

// Strips the common prefix and suffix; mutates the views in place.
void trim_common(ByteView& x, ByteView& y) {
  size_t pre = 0;
  const size_t minlen = std::min(x.size(), y.size());
  while (pre < minlen && x[pre] == y[pre]) ++pre;
  size_t suf = 0;
  while (suf < minlen - pre && x[x.size() - 1 - suf] == y[y.size() - 1 - suf]) ++suf;
  x = x.subspan(pre, x.size() - pre - suf);
  y = y.subspan(pre, y.size() - pre - suf);
}

}  // namespace

size_t edit_distance(ByteView x, ByteView y) {
  if (x.size() > kMaxDistanceInput || y.size() > kMaxDistanceInput) {
    throw std::invalid_argument("edit_distance: input exceeds 1 MiB cap");
  }
  trim_common(x, y);
  if (x.empty()) return y.size();
  if (y.empty()) return x.size();

  const size_t worst = std::max(x.size(), y.size());
  size_t band = std::max<size_t>(16, x.size() > y.size() ? x.size() - y.size()
                                                         : y.size() - x.size());
  for (;;) {
    band = std::min(band, worst);
    const size_t d = banded_levenshtein(x, y, band);
    if (d <= band || band == worst) return d;
    band *= 2;
  }
}

size_t edit_distance_bounded(ByteView x, ByteView y, size_t upper_bound) {
  if (x.size() > kMaxDistanceInput || y.size() > kMaxDistanceInput) {
    throw std::invalid_argument("edit_distance: input exceeds 1 MiB cap");
  }
  trim_common(x, y);
  if (x.empty()) return y.size();
  if (y.empty()) return x.size();
  const size_t worst = std::max(x.size(), y.size());
  const size_t band = std::min(std::max<size_t>(upper_bound, 1), worst);
  const size_t d = banded_levenshtein(x, y, band);
  // A valid upper bound keeps the optimal path inside the band.
  return d;
}

DistanceReport measure_distance(ByteView seed, ByteView mutant) {
  DistanceReport r;
  r.l0 = l0_count(seed, mutant);
  r.l1 = l1_sum(seed, mutant);
  r.l2 = lp_norm(seed, mutant, 2);
  r.edit = edit_distance(seed, mutant);
  return r;
}

DistanceReport measure_distance_bounded(ByteView seed, ByteView mutant,
                                        size_t edit_upper_bound) {
  DistanceReport r;
  r.l0 = l0_count(seed, mutant);
  r.l1 = l1_sum(seed, mutant);
  r.l2 = lp_norm(seed, mutant, 2);
  r.edit = edit_distance_bounded(seed, mutant, edit_upper_bound);
  return r;
}

}  // namespace taintfuzz
