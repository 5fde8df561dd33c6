#pragma once

#include "lrnn/matrix.hpp"

#include <optional>
#include <span>
#include <vector>

namespace lrnn {

/// Root mean square prediction error normalized by the target's standard
/// deviation. Errors on a constant target.
double nmrse(std::span<const double> predicted, std::span<const double> target);

/// lambda_appr * sum_t max(0, |o_t - x_t| - eps).
double eps_error_timeavg(std::span<const double> predicted, std::span<const double> target,
                         double eps, double lambda_appr);

/// Gaps (in samples) between consecutive sign changes. Exact zeros take the
/// sign of the next nonzero sample; trailing zeros extend the last segment.
/// Fewer than two crossings give an empty result.
std::vector<int> zero_crossing_distances(std::span<const double> values);

/// Excess kurtosis E[(X-mu)^4]/sigma^4 - 3 with population moments.
/// Requires at least 4 samples and positive variance.
double kurtosis(std::span<const double> samples);

struct LogLogFit {
    double slope = 0.0;
    double r2 = 0.0;
};

/// Histogram of the distances into factor-2 bins [1,2), [2,4), ...; least
/// squares line through (log bin center, log count density) over nonempty
/// bins. Requires >= 4 distinct values and >= 3 nonempty bins.
LogLogFit loglog_slope(const std::vector<int>& distances);

/// Fraction of entries with |entry| < threshold.
double sparsity_fraction(const Matrix& m, double threshold);

struct ZeroCrossingStats {
    std::vector<int> distances;
    std::optional<double> kurtosis;
    std::optional<double> loglog_slope;
    std::optional<double> slope_r2;
};

ZeroCrossingStats zero_crossing_stats(std::span<const double> values);

}  // namespace lrnn
