#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "tdqn/ohlcv.hpp"

using namespace tdqn;

namespace {

const char* kGood =
    "date,open,high,low,close,volume\n"
    "2012-01-03,10,11,9,10.5,1000\n"
    "2012-01-04,10.5,12,10,11,1500\n"
    "2012-01-05,11,11,10,10,900\n";

}  // namespace

TEST_CASE("csv parses valid input") {
    OhlcvSeries s = parse_csv(kGood);
    REQUIRE(s.size() == 3);
    CHECK(s.bars[0].date == parse_date("2012-01-03"));
    CHECK(s.bars[0].open == 10.0);
    CHECK(s.bars[1].high == 12.0);
    CHECK(s.bars[2].volume == 900.0);
}

TEST_CASE("csv tolerates CRLF and trailing blank lines") {
    OhlcvSeries s = parse_csv(
        "date,open,high,low,close,volume\r\n"
        "2012-01-03,10,11,9,10.5,1000\r\n"
        "\n");
    CHECK(s.size() == 1);
}

TEST_CASE("csv rejects a bad header") {
    CHECK_THROWS_WITH(parse_csv("date,open,high,low,close\n"),
                      Catch::Matchers::ContainsSubstring("header"));
}

TEST_CASE("csv lists every problem with line numbers in one error") {
    const std::string bad =
        "date,open,high,low,close,volume\n"
        "2012-01-03,10,11,9,10.5,1000\n"
        "2012-01-02,10,11,9,10.5,1000\n"   // date goes backwards
        "2012-01-05,0,11,9,10.5,1000\n"    // non-positive price
        "2012-01-06,10,8,9,10.5,1000\n"    // high below open
        "2012-01-07,10,11,9,10.5,-5\n";    // negative volume
    try {
        parse_csv(bad);
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("line 4") != std::string::npos);
        CHECK(msg.find("line 5") != std::string::npos);
        CHECK(msg.find("line 6") != std::string::npos);
    }
}

TEST_CASE("csv rejects wrong field counts and bad numbers") {
    CHECK_THROWS_AS(parse_csv("date,open,high,low,close,volume\n2012-01-03,10,11,9,10.5\n"),
                    Error);
    CHECK_THROWS_AS(parse_csv("date,open,high,low,close,volume\n2012-01-03,xx,11,9,10.5,1\n"),
                    Error);
    CHECK_THROWS_AS(parse_csv("date,open,high,low,close,volume\n03/01/2012,10,11,9,10.5,1\n"),
                    Error);
}

TEST_CASE("write then parse round trips") {
    OhlcvSeries s = parse_csv(kGood);
    s.name = "X";
    OhlcvSeries back = parse_csv(write_csv(s));
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.bars[i].date == s.bars[i].date);
        CHECK(back.bars[i].open == s.bars[i].open);
        CHECK(back.bars[i].high == s.bars[i].high);
        CHECK(back.bars[i].low == s.bars[i].low);
        CHECK(back.bars[i].close == s.bars[i].close);
        CHECK(back.bars[i].volume == s.bars[i].volume);
    }
}

TEST_CASE("check_bar flags inconsistent prices") {
    Bar b{parse_date("2012-01-03"), 10, 11, 9, 10.5, 100};
    CHECK(check_bar(b).empty());
    b.high = 10.4;
    CHECK(!check_bar(b).empty());
    b.high = 11;
    b.low = 10.6;
    CHECK(!check_bar(b).empty());
    b.low = -1;
    CHECK(!check_bar(b).empty());
}

TEST_CASE("repair_bar restores price ordering") {
    Bar b{parse_date("2012-01-03"), 10, 9.5, 10.2, 10.5, 100};
    repair_bar(b);
    CHECK(check_bar(b).empty());
    CHECK(b.high >= b.open);
    CHECK(b.high >= b.close);
    CHECK(b.low <= b.open);
    CHECK(b.low <= b.close);
}

TEST_CASE("slice_by_date is inclusive on both ends") {
    OhlcvSeries s = parse_csv(kGood);
    OhlcvSeries mid = slice_by_date(s, parse_date("2012-01-04"), parse_date("2012-01-04"));
    REQUIRE(mid.size() == 1);
    CHECK(mid.bars[0].date == parse_date("2012-01-04"));
    OhlcvSeries all = slice_by_date(s, parse_date("2011-01-01"), parse_date("2013-01-01"));
    CHECK(all.size() == 3);
    CHECK(slice_by_date(s, parse_date("2013-01-01"), parse_date("2014-01-01")).empty());
}

TEST_CASE("slice_by_index takes a half open range") {
    OhlcvSeries s = parse_csv(kGood);
    OhlcvSeries part = slice_by_index(s, 1, 3);
    REQUIRE(part.size() == 2);
    CHECK(part.bars[0].date == parse_date("2012-01-04"));
}

TEST_CASE("fingerprint is stable and content sensitive") {
    OhlcvSeries a = parse_csv(kGood);
    OhlcvSeries b = parse_csv(kGood);
    CHECK(fingerprint(a) == fingerprint(b));
    b.bars[2].close += 0.0001;
    CHECK(fingerprint(a) != fingerprint(b));
}
