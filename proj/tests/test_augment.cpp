#include <catch2/catch_amalgamated.hpp>

#include "tdqn/augment.hpp"

using namespace tdqn;
using Catch::Matchers::WithinRel;

namespace {

OhlcvSeries wave(int n) {
    OhlcvSeries s;
    s.name = "W";
    for (int i = 0; i < n; ++i) {
        Bar b;
        b.date = Date{2012, 1 + i / 28, 1 + i % 28};
        const double p = 100.0 + (i % 7);
        b.open = p;
        b.high = p + 1.0;
        b.low = p - 1.0;
        b.close = p + 0.5;
        b.volume = 1000.0 + i;
        s.bars.push_back(b);
    }
    return s;
}

}  // namespace

TEST_CASE("default augmentation yields 12 variants with the identity first") {
    OhlcvSeries s = wave(40);
    AugmentSpec spec;
    CHECK(spec.variant_count() == 12);
    AugmentResult r = augment(s, spec, 9);
    REQUIRE(r.variants.size() == 12);
    CHECK(r.variants[0].name == "W+shift0+filter1+noise0");
    REQUIRE(r.variants[0].size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(r.variants[0][i].close == s[i].close);
        CHECK(r.variants[0][i].volume == s[i].volume);
    }
}

TEST_CASE("variant order is shift-major, then filter, then noise") {
    AugmentResult r = augment(wave(40), AugmentSpec{}, 9);
    CHECK(r.variants[1].name == "W+shift0+filter1+noise0.002");
    CHECK(r.variants[2].name == "W+shift0+filter5+noise0");
    CHECK(r.variants[3].name == "W+shift0+filter5+noise0.002");
    CHECK(r.variants[4].name == "W+shift1+filter1+noise0");
    CHECK(r.variants[11].name == "W+shift2+filter5+noise0.002");
}

TEST_CASE("shift drops leading bars") {
    AugmentResult r = augment(wave(40), AugmentSpec{}, 9);
    CHECK(r.variants[4].size() == 39);
    CHECK(r.variants[4][0].date == wave(40)[1].date);
    CHECK(r.variants[8].size() == 38);
}

TEST_CASE("filter is a trailing mean with partial windows at the start") {
    OhlcvSeries s = wave(10);
    AugmentSpec spec;
    spec.shifts = {0};
    spec.filter_windows = {3};
    spec.noise_sigmas = {0.0};
    AugmentResult r = augment(s, spec, 1);
    const OhlcvSeries& f = r.variants[0];
    REQUIRE(f.size() == 10);
    CHECK(f[0].close == s[0].close);
    CHECK_THAT(f[1].close, WithinRel((s[0].close + s[1].close) / 2.0, 1e-12));
    CHECK_THAT(f[4].close, WithinRel((s[2].close + s[3].close + s[4].close) / 3.0, 1e-12));
}

TEST_CASE("noise perturbs prices but never volume") {
    OhlcvSeries s = wave(40);
    AugmentSpec spec;
    spec.shifts = {0};
    spec.filter_windows = {1};
    spec.noise_sigmas = {0.002};
    AugmentResult r = augment(s, spec, 5);
    const OhlcvSeries& v = r.variants[0];
    bool price_changed = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        price_changed |= v[i].close != s[i].close;
        CHECK(v[i].volume == s[i].volume);
        CHECK(v[i].date == s[i].date);
        CHECK(check_bar(v[i]).empty());
    }
    CHECK(price_changed);
}

TEST_CASE("augmentation is deterministic per seed") {
    OhlcvSeries s = wave(40);
    AugmentResult a = augment(s, AugmentSpec{}, 9);
    AugmentResult b = augment(s, AugmentSpec{}, 9);
    AugmentResult c = augment(s, AugmentSpec{}, 10);
    REQUIRE(a.variants.size() == b.variants.size());
    for (std::size_t k = 0; k < a.variants.size(); ++k)
        for (std::size_t i = 0; i < a.variants[k].size(); ++i)
            CHECK(a.variants[k][i].close == b.variants[k][i].close);
    bool differs = false;
    for (std::size_t i = 0; i < a.variants[1].size(); ++i)
        differs |= a.variants[1][i].close != c.variants[1][i].close;
    CHECK(differs);
}

TEST_CASE("noise clipping counts floor hits on microscopic prices") {
    OhlcvSeries s = wave(40);
    AugmentSpec spec;
    spec.shifts = {0};
    spec.filter_windows = {1};
    spec.noise_sigmas = {50.0};  // absurd sigma forces clipping
    AugmentResult r = augment(s, spec, 5);
    CHECK(r.clip_warnings > 0);
    for (std::size_t i = 0; i < r.variants[0].size(); ++i)
        CHECK(r.variants[0][i].low > 0.0);
}

TEST_CASE("shift longer than the series is rejected") {
    AugmentSpec spec;
    spec.shifts = {50};
    CHECK_THROWS_AS(augment(wave(40), spec, 1), Error);
}
