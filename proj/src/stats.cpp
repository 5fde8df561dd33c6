#include "lrnn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrnn {

double nmrse(std::span<const double> predicted, std::span<const double> target) {
    if (predicted.size() != target.size())
        throw std::invalid_argument("nmrse: length mismatch");
    const std::size_t n = target.size();
    if (n < 2) throw std::invalid_argument("nmrse: need at least 2 samples");

    double mean = 0.0;
    for (double v : target) mean += v;
    mean /= static_cast<double>(n);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = predicted[i] - target[i];
        const double c = target[i] - mean;
        num += e * e;
        den += c * c;
    }
    if (den <= 0.0) throw std::invalid_argument("nmrse: constant target");
    return std::sqrt(num / static_cast<double>(n)) / std::sqrt(den / static_cast<double>(n));
}

double eps_error_timeavg(std::span<const double> predicted, std::span<const double> target,
                         double eps, double lambda_appr) {
    if (predicted.size() != target.size())
        throw std::invalid_argument("eps_error_timeavg: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        s += std::max(0.0, std::abs(predicted[i] - target[i]) - eps);
    return lambda_appr * s;
}

std::vector<int> zero_crossing_distances(std::span<const double> values) {
    const std::size_t n = values.size();
    // Effective sign per sample; zeros inherit the sign of the next nonzero
    // sample, trailing zeros the previous one.
    std::vector<int> sign(n, 0);
    int pending = 0;
    for (std::size_t i = n; i-- > 0;) {
        const int s = values[i] > 0.0 ? 1 : (values[i] < 0.0 ? -1 : 0);
        if (s != 0) pending = s;
        sign[i] = (s != 0) ? s : pending;
    }
    int last = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (sign[i] == 0) sign[i] = last;
        last = sign[i];
    }

    std::vector<int> crossing_at;  // boundary index i between samples i and i+1
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (sign[i] != 0 && sign[i + 1] != 0 && sign[i] != sign[i + 1])
            crossing_at.push_back(static_cast<int>(i));

    std::vector<int> distances;
    if (crossing_at.size() < 2) return distances;
    distances.reserve(crossing_at.size() - 1);
    for (std::size_t k = 1; k < crossing_at.size(); ++k)
        distances.push_back(crossing_at[k] - crossing_at[k - 1]);
    return distances;
}

double kurtosis(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 4) throw std::invalid_argument("kurtosis: need at least 4 samples");
    double mu = 0.0;
    for (double v : samples) mu += v;
    mu /= static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0;
    for (double v : samples) {
        const double d = v - mu;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (m2 <= 0.0) throw std::invalid_argument("kurtosis: zero variance");
    return m4 / (m2 * m2) - 3.0;
}

LogLogFit loglog_slope(const std::vector<int>& distances) {
    if (distances.empty()) throw std::invalid_argument("loglog_slope: no distances");
    {
        std::vector<int> uniq(distances.begin(), distances.end());
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        if (uniq.size() < 4)
            throw std::invalid_argument("loglog_slope: need at least 4 distinct values");
    }

    const int dmax = *std::max_element(distances.begin(), distances.end());
    std::vector<std::size_t> counts;
    for (int lo = 1; lo <= dmax; lo *= 2) counts.push_back(0);
    for (int d : distances) {
        std::size_t bin = 0;
        for (int lo = 1; 2 * lo <= d; lo *= 2) ++bin;
        ++counts[bin];
    }

    // Density per bin: count / (N * width); centers at the geometric mean of
    // the bin edges.
    const double n = static_cast<double>(distances.size());
    std::vector<double> lx, ly;
    double lo = 1.0;
    for (std::size_t b = 0; b < counts.size(); ++b, lo *= 2.0) {
        if (counts[b] == 0) continue;
        const double width = lo;  // [lo, 2lo)
        const double center = lo * std::sqrt(2.0);
        lx.push_back(std::log(center));
        ly.push_back(std::log(static_cast<double>(counts[b]) / (n * width)));
    }
    if (lx.size() < 3)
        throw std::invalid_argument("loglog_slope: fewer than 3 nonempty bins");

    const double m = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
        syy += ly[i] * ly[i];
    }
    const double vxx = sxx - sx * sx / m;
    const double vxy = sxy - sx * sy / m;
    const double vyy = syy - sy * sy / m;

    LogLogFit fit;
    fit.slope = vxy / vxx;
    fit.r2 = (vyy > 0.0) ? (vxy * vxy) / (vxx * vyy) : 1.0;
    return fit;
}

double sparsity_fraction(const Matrix& m, double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("sparsity_fraction: negative threshold");
    std::size_t count = 0;
    for (double v : m.data())
        if (std::abs(v) < threshold) ++count;
    return static_cast<double>(count) / static_cast<double>(m.size());
}

ZeroCrossingStats zero_crossing_stats(std::span<const double> values) {
    ZeroCrossingStats s;
    s.distances = zero_crossing_distances(values);
    if (s.distances.size() >= 4) {
        std::vector<double> d(s.distances.begin(), s.distances.end());
        double m2 = 0.0, mu = 0.0;
        for (double v : d) mu += v;
        mu /= static_cast<double>(d.size());
        for (double v : d) m2 += (v - mu) * (v - mu);
        if (m2 > 0.0) s.kurtosis = kurtosis(d);
    }
    try {
        const LogLogFit fit = loglog_slope(s.distances);
        s.loglog_slope = fit.slope;
        s.slope_r2 = fit.r2;
    } catch (const std::invalid_argument&) {
        // degenerate histogram; slope left unset
    }
    return s;
}

}  // namespace lrnn
