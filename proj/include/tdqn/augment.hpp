#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "tdqn/numfmt.hpp"
#include "tdqn/ohlcv.hpp"
#include "tdqn/rng.hpp"

namespace tdqn {

// Cartesian augmentation menu: every (shift, filter window, noise level)
// combination yields one derived series. The defaults produce 12 variants,
// the first of which (0, 1, 0) is the untouched input.
struct AugmentSpec {
    std::vector<std::size_t> shifts = {0, 1, 2};
    std::vector<std::size_t> filter_windows = {1, 5};
    std::vector<double> noise_sigmas = {0.0, 0.002};  // fraction of price

    void validate() const {
        require(!shifts.empty() && !filter_windows.empty() && !noise_sigmas.empty(),
                "augmentation spec must keep every dimension non-empty");
        for (std::size_t w : filter_windows) require(w >= 1, "filter window must be at least 1");
        for (double s : noise_sigmas) require(s >= 0.0, "noise sigma must be non-negative");
    }

    std::size_t variant_count() const {
        return shifts.size() * filter_windows.size() * noise_sigmas.size();
    }
};

struct AugmentResult {
    std::vector<OhlcvSeries> variants;
    std::size_t clip_warnings = 0;  // noise draws pushed below the price floor
};

namespace detail {

inline OhlcvSeries shift_series(const OhlcvSeries& series, std::size_t days) {
    require(days < series.size(), "shift of ", days, " bars eats the whole series");
    return slice_by_index(series, days, series.size());
}

// Trailing mean over up to `window` bars; early bars use what exists so the
// series keeps its length.
inline OhlcvSeries filter_series(const OhlcvSeries& series, std::size_t window) {
    if (window == 1) return series;
    OhlcvSeries out = series;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::size_t from = i + 1 >= window ? i + 1 - window : 0;
        const double count = static_cast<double>(i - from + 1);
        double o = 0, h = 0, l = 0, c = 0, v = 0;
        for (std::size_t k = from; k <= i; ++k) {
            o += series[k].open;
            h += series[k].high;
            l += series[k].low;
            c += series[k].close;
            v += series[k].volume;
        }
        out[i].open = o / count;
        out[i].high = h / count;
        out[i].low = l / count;
        out[i].close = c / count;
        out[i].volume = v / count;
        repair_bar(out[i]);
    }
    return out;
}

inline double noisy_price(double price, double sigma, Rng& rng, std::size_t& clip_warnings) {
    double perturbed = price * (1.0 + sigma * rng.normal());
    const double floor = price * 1e-3;
    if (perturbed < floor) {
        perturbed = floor;
        ++clip_warnings;
    }
    return perturbed;
}

inline OhlcvSeries noise_series(const OhlcvSeries& series, double sigma, Rng& rng,
                                std::size_t& clip_warnings) {
    if (sigma == 0.0) return series;
    OhlcvSeries out = series;
    for (Bar& b : out.bars) {
        b.open = noisy_price(b.open, sigma, rng, clip_warnings);
        b.high = noisy_price(b.high, sigma, rng, clip_warnings);
        b.low = noisy_price(b.low, sigma, rng, clip_warnings);
        b.close = noisy_price(b.close, sigma, rng, clip_warnings);
        repair_bar(b);
    }
    return out;
}

}  // namespace detail

inline AugmentResult augment(const OhlcvSeries& series, const AugmentSpec& spec,
                             std::uint64_t rng_seed) {
    spec.validate();
    AugmentResult result;
    Rng rng(rng_seed);
    for (std::size_t shift : spec.shifts) {
        OhlcvSeries shifted = detail::shift_series(series, shift);
        for (std::size_t window : spec.filter_windows) {
            OhlcvSeries filtered = detail::filter_series(shifted, window);
            for (double sigma : spec.noise_sigmas) {
                OhlcvSeries variant =
                    detail::noise_series(filtered, sigma, rng, result.clip_warnings);
                variant.name = series.name + "+shift" + std::to_string(shift) + "+filter" +
                               std::to_string(window) + "+noise" + format_double(sigma);
                for (std::size_t i = 0; i < variant.size(); ++i)
                    TDQN_INVARIANT(check_bar(variant[i]).empty(),
                                   "augmentation broke a bar invariant");
                result.variants.push_back(std::move(variant));
            }
        }
    }
    return result;
}

}  // namespace tdqn
