#include "taintfuzz/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace taintfuzz {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

// Twice the U statistic of `a`, computed exactly by pair counting: 2 per
// (a > b) pair, 1 per tie.
uint64_t twice_u(std::span<const double> a, std::span<const double> b) {
  uint64_t u2 = 0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) u2 += 2;
      else if (x == y) u2 += 1;
    }
  }
  return u2;
}

uint64_t binomial(uint32_t n, uint32_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  uint64_t r = 1;
  for (uint32_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

// Permutation distribution of 2U over all ways to assign the combined
// multiset to groups of sizes n and m, conditioned on the observed values.
// Weight of each 2U value is the number of assignments producing it.
std::vector<uint64_t> exact_u2_distribution(std::span<const double> a,
                                            std::span<const double> b) {
  const uint32_t n = static_cast<uint32_t>(a.size());
  const uint32_t m = static_cast<uint32_t>(b.size());
  std::map<double, uint32_t> groups;
  for (double x : a) groups[x] += 1;
  for (double y : b) groups[y] += 1;

  const size_t u2_max = 2ull * n * m;
  // dp[a_used][u2] = weighted count of partial assignments
  std::vector<std::vector<uint64_t>> dp(
      n + 1, std::vector<uint64_t>(u2_max + 1, 0));
  dp[0][0] = 1;
  uint32_t items_before = 0;
  for (const auto& [value, c_g] : groups) {
    (void)value;
    std::vector<std::vector<uint64_t>> next(
        n + 1, std::vector<uint64_t>(u2_max + 1, 0));
    for (uint32_t a_used = 0; a_used <= n; ++a_used) {
      for (size_t u2 = 0; u2 <= u2_max; ++u2) {
        const uint64_t w = dp[a_used][u2];
        if (w == 0) continue;
        const uint32_t b_before = items_before - a_used;
        const uint32_t max_a = std::min(c_g, n - a_used);
        for (uint32_t a_g = 0; a_g <= max_a; ++a_g) {
          const uint32_t b_g = c_g - a_g;
          if (items_before + c_g - a_used - a_g > m) continue;  // B overfull
          const size_t nu2 = u2 + 2ull * a_g * b_before +
                             static_cast<size_t>(a_g) * b_g;
          next[a_used + a_g][nu2] += w * binomial(c_g, a_g);
        }
      }
    }
    dp = std::move(next);
    items_before += c_g;
  }
  return dp[n];
}

MannWhitneyResult exact_mann_whitney(std::span<const double> a,
                                     std::span<const double> b,
                                     Alternative alternative) {
  const uint64_t u2_obs = twice_u(a, b);
  const auto dist = exact_u2_distribution(a, b);
  const uint64_t u2_max = 2ull * a.size() * b.size();

  long double total = 0;
  for (uint64_t w : dist) total += w;
  auto tail_le = [&](uint64_t bound) {
    long double s = 0;
    for (uint64_t u2 = 0; u2 <= std::min<uint64_t>(bound, u2_max); ++u2) s += dist[u2];
    return s;
  };
  auto tail_ge = [&](uint64_t bound) {
    long double s = 0;
    for (uint64_t u2 = bound; u2 <= u2_max; ++u2) s += dist[u2];
    return s;
  };

  long double p = 0;
  switch (alternative) {
    case Alternative::less:
      p = tail_le(u2_obs) / total;
      break;
    case Alternative::greater:
      p = tail_ge(u2_obs) / total;
      break;
    case Alternative::two_sided: {
      const uint64_t lo = std::min(u2_obs, u2_max - u2_obs);
      const uint64_t hi = std::max(u2_obs, u2_max - u2_obs);
      p = (tail_le(lo) + tail_ge(hi)) / total;
      break;
    }
  }
  return {static_cast<double>(u2_obs) / 2.0,
          static_cast<double>(std::min<long double>(p, 1.0L))};
}

MannWhitneyResult approx_mann_whitney(std::span<const double> a,
                                      std::span<const double> b,
                                      Alternative alternative) {
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  const double u = static_cast<double>(twice_u(a, b)) / 2.0;
  const double mu = n * m / 2.0;

  // tie correction over the combined sample
  std::map<double, uint64_t> groups;
  for (double x : a) groups[x] += 1;
  for (double y : b) groups[y] += 1;
  const double big_n = n + m;
  double tie_term = 0;
  for (const auto& [value, t] : groups) {
    (void)value;
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double var = (n * m / 12.0) *
                     ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
  if (var <= 0.0) return {u, 1.0};
  const double sigma = std::sqrt(var);

  double p = 1.0;
  switch (alternative) {
    case Alternative::two_sided: {
      const double z = (std::abs(u - mu) - 0.5) / sigma;
      p = std::min(1.0, 2.0 * normal_sf(std::max(z, 0.0)));
      break;
    }
    case Alternative::less:
      p = 1.0 - normal_sf((u - mu + 0.5) / sigma);
      break;
    case Alternative::greater:
      p = normal_sf((u - mu - 0.5) / sigma);
      break;
  }
  return {u, p};
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> a,
                                 std::span<const double> b,
                                 Alternative alternative) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("mann_whitney_u: samples must be nonempty");
  }
  if (a.size() < 8 && b.size() < 8) {
    return exact_mann_whitney(a, b, alternative);
  }
  return approx_mann_whitney(a, b, alternative);
}

double chi_square_gof_p(std::span<const uint64_t> observed,
                        std::span<const double> expected) {
  if (observed.size() != expected.size()) {
    throw std::invalid_argument("chi_square_gof_p: size mismatch");
  }
  double chi2 = 0.0;
  size_t cells = 0;
  for (size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) {
      if (observed[i] != 0) return 0.0;  // impossible observation
      continue;
    }
    const double d = static_cast<double>(observed[i]) - expected[i];
    chi2 += d * d / expected[i];
    cells += 1;
  }
  if (cells < 2) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(cells - 1));
  return boost::math::cdf(boost::math::complement(dist, chi2));
}

MetricStats summarize(std::vector<double> values) {
  MetricStats s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  s.median = values.size() % 2 == 1
                 ? values[mid]
                 : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

}  // namespace taintfuzz
