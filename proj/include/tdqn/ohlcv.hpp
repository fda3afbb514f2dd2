#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tdqn/date.hpp"
#include "tdqn/error.hpp"
#include "tdqn/numfmt.hpp"

namespace tdqn {

struct Bar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;

    bool operator==(const Bar&) const = default;
};

struct OhlcvSeries {
    std::string name;  // ticker or fixture label, informational only
    std::vector<Bar> bars;

    std::size_t size() const { return bars.size(); }
    bool empty() const { return bars.empty(); }
    const Bar& operator[](std::size_t i) const { return bars[i]; }
    Bar& operator[](std::size_t i) { return bars[i]; }
};

inline constexpr std::string_view kCsvHeader = "date,open,high,low,close,volume";

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

class ProblemList {
public:
    explicit ProblemList(std::string_view context) : context_(context) {}

    template <typename... Parts>
    void add(std::size_t line_no, Parts&&... parts) {
        ++count_;
        if (count_ > kMaxReported) return;
        std::ostringstream os;
        os << "  line " << line_no << ": ";
        (os << ... << parts);
        lines_.push_back(os.str());
    }

    void raise_if_any() const {
        if (count_ == 0) return;
        std::ostringstream os;
        os << context_ << ": " << count_ << " problem" << (count_ == 1 ? "" : "s") << "\n";
        for (const auto& l : lines_) os << l << "\n";
        if (count_ > kMaxReported) os << "  (" << count_ - kMaxReported << " more not shown)\n";
        throw Error(os.str());
    }

private:
    static constexpr std::size_t kMaxReported = 20;
    std::string context_;
    std::vector<std::string> lines_;
    std::size_t count_ = 0;
};

}  // namespace detail

// Checks one bar in isolation; returns an empty string when it is fine.
inline std::string check_bar(const Bar& b) {
    if (!is_valid(b.date)) return "invalid date";
    if (!(b.open > 0.0) || !(b.high > 0.0) || !(b.low > 0.0) || !(b.close > 0.0))
        return "prices must be positive";
    if (b.low > b.high) return "low above high";
    if (b.low > std::min(b.open, b.close) || b.high < std::max(b.open, b.close))
        return "open/close outside low/high range";
    if (!(b.volume >= 0.0)) return "volume must be non-negative";
    return {};
}

// Re-establishes the high/low envelope after a transform touched the price
// fields. High absorbs everything above it, low everything below.
inline void repair_bar(Bar& b) {
    b.high = std::max({b.high, b.open, b.close, b.low});
    b.low = std::min({b.low, b.open, b.close});
}

// Strict parser for the canonical bar schema. Every problem is collected and
// reported with its line number in a single error.
inline OhlcvSeries parse_csv(std::string_view text, std::string_view context = "ohlcv csv") {
    detail::ProblemList problems(context);
    OhlcvSeries series;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_header = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos)
                                    ? text.substr(pos)
                                    : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != kCsvHeader) {
                problems.add(line_no, "expected header '", kCsvHeader, "', got '", std::string(line), "'");
                problems.raise_if_any();
            }
            saw_header = true;
            continue;
        }
        auto fields = detail::split_fields(line);
        if (fields.size() != 6) {
            problems.add(line_no, "expected 6 fields, got ", fields.size());
            continue;
        }
        Bar bar;
        try {
            bar.date = parse_date(fields[0]);
            bar.open = parse_double(fields[1], "open");
            bar.high = parse_double(fields[2], "high");
            bar.low = parse_double(fields[3], "low");
            bar.close = parse_double(fields[4], "close");
            bar.volume = parse_double(fields[5], "volume");
        } catch (const Error& e) {
            problems.add(line_no, e.what());
            continue;
        }
        if (auto msg = check_bar(bar); !msg.empty()) {
            problems.add(line_no, msg);
            continue;
        }
        if (!series.bars.empty() && !(series.bars.back().date < bar.date)) {
            problems.add(line_no, "dates must be strictly increasing (", to_string(bar.date),
                         " after ", to_string(series.bars.back().date), ")");
            continue;
        }
        series.bars.push_back(bar);
    }
    if (!saw_header) problems.add(1, "missing header");
    problems.raise_if_any();
    return series;
}

inline std::string write_csv(const OhlcvSeries& series) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const Bar& b : series.bars) {
        out += to_string(b.date);
        out += ',';
        out += format_double(b.open);
        out += ',';
        out += format_double(b.high);
        out += ',';
        out += format_double(b.low);
        out += ',';
        out += format_double(b.close);
        out += ',';
        out += format_double(b.volume);
        out += '\n';
    }
    return out;
}

inline OhlcvSeries load_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open '", path, "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    OhlcvSeries series = parse_csv(buf.str(), path);
    series.name = path;
    return series;
}

inline void save_csv_file(const OhlcvSeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write '", path, "'");
    out << write_csv(series);
    require(out.good(), "write failed for '", path, "'");
}

// Inclusive date-range slice.
inline OhlcvSeries slice_by_date(const OhlcvSeries& series, const Date& first, const Date& last) {
    require(!(last < first), "date range out of order: ", to_string(first), " .. ", to_string(last));
    OhlcvSeries out;
    out.name = series.name;
    for (const Bar& b : series.bars)
        if (!(b.date < first) && !(last < b.date)) out.bars.push_back(b);
    return out;
}

inline OhlcvSeries slice_by_index(const OhlcvSeries& series, std::size_t begin, std::size_t end) {
    TDQN_INVARIANT(begin <= end && end <= series.size(), "slice_by_index out of range");
    OhlcvSeries out;
    out.name = series.name;
    out.bars.assign(series.bars.begin() + static_cast<std::ptrdiff_t>(begin),
                    series.bars.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

// Stable content hash: the canonical CSV text is hashed, so any bar change
// shows up and formatting noise does not.
inline std::uint64_t fingerprint(const OhlcvSeries& series) {
    std::string text = write_csv(series);
    return fnv1a64(text.data(), text.size());
}

}  // namespace tdqn
