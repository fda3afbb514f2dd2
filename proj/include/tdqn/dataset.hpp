#pragma once

#include <cmath>
#include <cstddef>

#include "tdqn/ohlcv.hpp"

namespace tdqn {

// Chronological split. Bars dated on or before train_end form the training
// set; the validation set is the trailing fraction of that same training
// set (a subset, not a carve-out); bars after train_end are the test set.
struct DatasetSplit {
    OhlcvSeries train;
    OhlcvSeries validation;
    OhlcvSeries test;
};

inline DatasetSplit split_series(const OhlcvSeries& series, const Date& train_end,
                                 double validation_fraction) {
    require(validation_fraction > 0.0 && validation_fraction < 1.0,
            "validation fraction must be in (0, 1), got ", validation_fraction);
    std::size_t train_span = 0;
    while (train_span < series.size() && !(train_end < series[train_span].date)) ++train_span;
    require(train_span > 0, "no bars on or before train end ", to_string(train_end));

    std::size_t val_count = static_cast<std::size_t>(
        std::floor(static_cast<double>(train_span) * validation_fraction));

    DatasetSplit split;
    split.train = slice_by_index(series, 0, train_span);
    split.validation = slice_by_index(series, train_span - val_count, train_span);
    split.test = slice_by_index(series, train_span, series.size());
    return split;
}

// Evaluation runs need warm-up bars in front of the span being scored: the
// observation window and the change filter both look backwards. This glues
// the tail of the preceding span onto the evaluation span.
inline OhlcvSeries with_warmup(const OhlcvSeries& history, const OhlcvSeries& eval,
                               std::size_t warmup_len) {
    require(history.size() >= warmup_len, "not enough history for warm-up: need ", warmup_len,
            " bars, have ", history.size());
    OhlcvSeries out = slice_by_index(history, history.size() - warmup_len, history.size());
    out.name = eval.name;
    if (!out.bars.empty() && !eval.bars.empty())
        require(out.bars.back().date < eval.bars.front().date,
                "warm-up bars must precede the evaluation span");
    out.bars.insert(out.bars.end(), eval.bars.begin(), eval.bars.end());
    return out;
}

}  // namespace tdqn
