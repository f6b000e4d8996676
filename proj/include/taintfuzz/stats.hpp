#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace taintfuzz {

enum class Alternative { two_sided, less, greater };

struct MannWhitneyResult {
  double u;  // U statistic of the first sample
  double p;
};

/// Rank-sum U with midrank tie handling. p is exact (permutation
/// distribution) when both samples have fewer than 8 elements, otherwise a
/// tie-corrected normal approximation with continuity correction.
MannWhitneyResult mann_whitney_u(std::span<const double> a,
                                 std::span<const double> b,
                                 Alternative alternative = Alternative::two_sided);

/// Upper tail of the standard normal distribution.
double normal_sf(double z);

/// Pearson chi-square goodness-of-fit p-value. Cells with zero expectation
/// must hold zero observations and are skipped; df = populated cells - 1.
double chi_square_gof_p(std::span<const uint64_t> observed,
                        std::span<const double> expected);

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;
  double median = 0.0;
  size_t n = 0;
};

MetricStats summarize(std::vector<double> values);

}  // namespace taintfuzz
