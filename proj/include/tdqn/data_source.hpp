#pragma once

#include <string>
#include <vector>

#include <httplib.h>

#include "tdqn/dataset.hpp"
#include "tdqn/fsutil.hpp"
#include "tdqn/ohlcv.hpp"

namespace tdqn {

struct HttpConfig {
    int timeout_seconds = 30;
    int retries = 2;  // additional attempts after the first
};

struct LoadResult {
    OhlcvSeries series;
    std::vector<std::string> warnings;
};

// Fills {ticker}, {start}, {end} placeholders in a source template.
inline std::string expand_source(std::string source, const std::string& ticker,
                                 const Date& start, const Date& end) {
    auto replace_all = [&](const std::string& key, const std::string& value) {
        std::size_t at = 0;
        while ((at = source.find(key, at)) != std::string::npos) {
            source.replace(at, key.size(), value);
            at += value.size();
        }
    };
    replace_all("{ticker}", ticker);
    replace_all("{start}", to_string(start));
    replace_all("{end}", to_string(end));
    return source;
}

inline bool is_http_source(const std::string& source) {
    return source.rfind("http://", 0) == 0 || source.rfind("https://", 0) == 0;
}

inline std::string http_get(const std::string& url, const HttpConfig& cfg) {
    require(url.rfind("https://", 0) != 0,
            "https sources are not supported by this build; serve plain http");
    const std::size_t scheme_len = 7;  // "http://"
    const std::size_t path_at = url.find('/', scheme_len);
    const std::string base = url.substr(0, path_at);
    const std::string path = path_at == std::string::npos ? "/" : url.substr(path_at);

    std::string last_error;
    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
        httplib::Client client(base);
        client.set_connection_timeout(cfg.timeout_seconds, 0);
        client.set_read_timeout(cfg.timeout_seconds, 0);
        auto res = client.Get(path);
        if (res && res->status == 200) return res->body;
        if (res)
            last_error = "status " + std::to_string(res->status);
        else
            last_error = "transport error " + std::to_string(static_cast<int>(res.error()));
    }
    fail("http fetch failed for ", url, " after ", cfg.retries + 1, " attempts: ", last_error);
}

// Loads one instrument from a file path or an http URL (templates allowed in
// both), validates it, and slices it to the requested date range. Ranges
// that reach beyond the available data produce warnings, not errors.
inline LoadResult load_series(const std::string& source_template, const std::string& ticker,
                              const Date& start, const Date& end, const HttpConfig& http = {}) {
    require(!(end < start), "date range out of order");
    const std::string source = expand_source(source_template, ticker, start, end);
    LoadResult result;
    if (is_http_source(source)) {
        result.series = parse_csv(http_get(source, http), source);
    } else {
        result.series = load_csv_file(source);
    }
    result.series.name = ticker.empty() ? source : ticker;
    require(!result.series.empty(), "no bars loaded from ", source);

    const Date first = result.series.bars.front().date;
    const Date last = result.series.bars.back().date;
    if (start < first)
        result.warnings.push_back("requested range starts " + to_string(start) +
                                  " but data starts " + to_string(first));
    if (last < end)
        result.warnings.push_back("requested range ends " + to_string(end) +
                                  " but data ends " + to_string(last));
    result.series = slice_by_date(result.series, start, end);
    require(!result.series.empty(), "no bars inside ", to_string(start), " .. ", to_string(end),
            " from ", source);
    return result;
}

}  // namespace tdqn
