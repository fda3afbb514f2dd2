#pragma once

#include <array>
#include <cstddef>
#include <limits>

#include "tdqn/matrix.hpp"
#include "tdqn/ohlcv.hpp"

namespace tdqn {

inline constexpr std::size_t kFeaturesPerBar = 5;  // open, high, low, close, volume

// Per-column extrema captured on training data; evaluation data is mapped
// with these same bounds so nothing about the future leaks into the inputs.
struct FeatureStats {
    std::array<double, kFeaturesPerBar> min{};
    std::array<double, kFeaturesPerBar> max{};
};

// Daily relative changes of trailing-mean smoothed bar fields. Row i is
// aligned with bar i; rows before first_valid hold zeros and must not be
// read. With filter window w the first defined row is w: the smoothed value
// needs w trailing bars and the change needs the previous smoothed value.
struct FeatureMatrix {
    Matrix values;  // n x kFeaturesPerBar
    std::size_t first_valid = 0;

    std::size_t rows() const { return values.rows(); }
};

namespace detail {

inline double bar_field(const Bar& b, std::size_t f) {
    switch (f) {
        case 0: return b.open;
        case 1: return b.high;
        case 2: return b.low;
        case 3: return b.close;
        default: return b.volume;
    }
}

}  // namespace detail

inline FeatureMatrix compute_raw_features(const OhlcvSeries& series, std::size_t filter_window) {
    require(filter_window >= 1, "filter window must be at least 1");
    require(series.size() > filter_window, "series too short for filter window ", filter_window);
    const std::size_t n = series.size();
    const std::size_t w = filter_window;

    // Trailing means, defined from index w-1 onward.
    Matrix smooth(n, kFeaturesPerBar);
    std::array<double, kFeaturesPerBar> acc{};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < kFeaturesPerBar; ++f) {
            acc[f] += detail::bar_field(series[i], f);
            if (i >= w) acc[f] -= detail::bar_field(series[i - w], f);
            if (i + 1 >= w) smooth(i, f) = acc[f] / static_cast<double>(w);
        }
    }

    FeatureMatrix out;
    out.values.resize(n, kFeaturesPerBar);
    out.first_valid = w;
    for (std::size_t i = w; i < n; ++i) {
        for (std::size_t f = 0; f < kFeaturesPerBar; ++f) {
            double prev = smooth(i - 1, f);
            double cur = smooth(i, f);
            // Zero previous value only happens for all-zero volume stretches;
            // report "no change" rather than dividing by zero.
            out.values(i, f) = prev == 0.0 ? 0.0 : cur / prev - 1.0;
        }
    }
    return out;
}

inline FeatureStats fit_stats(const FeatureMatrix& raw) {
    FeatureStats stats;
    stats.min.fill(std::numeric_limits<double>::infinity());
    stats.max.fill(-std::numeric_limits<double>::infinity());
    for (std::size_t i = raw.first_valid; i < raw.rows(); ++i)
        for (std::size_t f = 0; f < kFeaturesPerBar; ++f) {
            double v = raw.values(i, f);
            stats.min[f] = std::min(stats.min[f], v);
            stats.max[f] = std::max(stats.max[f], v);
        }
    TDQN_INVARIANT(raw.first_valid < raw.rows(), "no valid feature rows to fit");
    return stats;
}

// Affine map sending [min, max] to [-1, 1]. Columns with a degenerate range
// collapse to 0. Values outside the fitted range land outside [-1, 1]; they
// are left alone so evaluation data keeps its scale relative to training.
inline void normalize_features(FeatureMatrix& m, const FeatureStats& stats) {
    for (std::size_t i = m.first_valid; i < m.rows(); ++i)
        for (std::size_t f = 0; f < kFeaturesPerBar; ++f) {
            double span = stats.max[f] - stats.min[f];
            double v = m.values(i, f);
            m.values(i, f) = span == 0.0 ? 0.0 : 2.0 * (v - stats.min[f]) / span - 1.0;
        }
}

inline FeatureMatrix make_features(const OhlcvSeries& series, std::size_t filter_window,
                                   const FeatureStats& stats) {
    FeatureMatrix m = compute_raw_features(series, filter_window);
    normalize_features(m, stats);
    return m;
}

}  // namespace tdqn
