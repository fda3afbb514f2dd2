#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <set>

#include "tdqn/replay.hpp"

using namespace tdqn;

namespace {

FeatureMatrix numbered_features(std::size_t rows) {
    FeatureMatrix fm;
    fm.values.resize(rows, kFeaturesPerBar);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < kFeaturesPerBar; ++c)
            fm.values(r, c) = static_cast<double>(r * 10 + c);
    fm.first_valid = 1;
    return fm;
}

Experience exp_at(const FeatureMatrix* fm, std::uint32_t t) {
    Experience e;
    e.features = fm;
    e.t = t;
    e.position = 1;
    e.next_position = -1;
    e.action = kActionShort;
    e.reward = 0.5 * t;
    return e;
}

}  // namespace

TEST_CASE("replay rejects zero capacity") {
    CHECK_THROWS_AS(ReplayMemory(0), Error);
}

TEST_CASE("replay overwrites oldest entries first") {
    FeatureMatrix fm = numbered_features(16);
    ReplayMemory mem(4);
    CHECK(mem.capacity() == 4);
    for (std::uint32_t t = 1; t <= 6; ++t) mem.push(exp_at(&fm, t));

    CHECK(mem.size() == 4);
    CHECK(mem.inserted() == 6);
    std::set<std::uint32_t> kept;
    for (std::size_t i = 0; i < mem.size(); ++i) kept.insert(mem.at(i).t);
    CHECK(kept == std::set<std::uint32_t>{3, 4, 5, 6});
    CHECK(mem.contains_time(&fm, 5));
    CHECK_FALSE(mem.contains_time(&fm, 2));

    FeatureMatrix other = numbered_features(16);
    CHECK_FALSE(mem.contains_time(&other, 5));
}

TEST_CASE("replay keeps every field of a transition") {
    FeatureMatrix fm = numbered_features(16);
    ReplayMemory mem(8);
    Experience e = exp_at(&fm, 7);
    e.terminal = true;
    e.reward = -0.25;
    mem.push(e);

    const Experience& back = mem.at(0);
    CHECK(back.features == &fm);
    CHECK(back.t == 7);
    CHECK(back.position == 1);
    CHECK(back.next_position == -1);
    CHECK(back.action == kActionShort);
    CHECK(back.terminal);
    CHECK(back.reward == -0.25);
}

TEST_CASE("sampling rejects batches the buffer cannot fill") {
    FeatureMatrix fm = numbered_features(16);
    ReplayMemory mem(8);
    Rng rng(1);
    CHECK_THROWS_AS(mem.sample(1, rng), Error);
    mem.push(exp_at(&fm, 1));
    mem.push(exp_at(&fm, 2));
    CHECK_THROWS_AS(mem.sample(3, rng), Error);
    CHECK_THROWS_AS(mem.sample(0, rng), Error);
    CHECK(mem.sample(2, rng).size() == 2);
}

TEST_CASE("a full-size sample is a permutation of the buffer") {
    FeatureMatrix fm = numbered_features(16);
    ReplayMemory mem(8);
    for (std::uint32_t t = 0; t < 8; ++t) mem.push(exp_at(&fm, t));
    Rng rng(3);
    std::vector<Experience> batch = mem.sample(8, rng);
    std::set<std::uint32_t> seen;
    for (const Experience& e : batch) seen.insert(e.t);
    CHECK(seen.size() == 8);
}

TEST_CASE("samples never repeat an index within a batch") {
    FeatureMatrix fm = numbered_features(16);
    ReplayMemory mem(8);
    for (std::uint32_t t = 0; t < 8; ++t) mem.push(exp_at(&fm, t));
    Rng rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<Experience> batch = mem.sample(4, rng);
        std::set<std::uint32_t> seen;
        for (const Experience& e : batch) seen.insert(e.t);
        CHECK(seen.size() == 4);
    }
}

TEST_CASE("sampling is close to uniform") {
    FeatureMatrix fm = numbered_features(16);
    ReplayMemory mem(8);
    for (std::uint32_t t = 0; t < 8; ++t) mem.push(exp_at(&fm, t));
    Rng rng(7);
    std::array<int, 8> counts{};
    const int draws = 2000;
    for (int rep = 0; rep < draws; ++rep)
        for (const Experience& e : mem.sample(2, rng)) ++counts[e.t];
    for (int c : counts) {
        CHECK(c > 400);  // expectation 500
        CHECK(c < 600);
    }
}

TEST_CASE("stored observation references materialize correctly") {
    FeatureMatrix fm = numbered_features(12);
    const std::size_t tau = 2;
    Experience e = exp_at(&fm, 5);

    std::vector<double> obs = build_observation(e.obs(), tau);
    REQUIRE(obs.size() == observation_dim(tau));
    // rows 3, 4, 5 flattened, then the position slot
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < kFeaturesPerBar; ++c)
            CHECK(obs[r * kFeaturesPerBar + c] == static_cast<double>((r + 3) * 10 + c));
    CHECK(obs.back() == 1.0);

    std::vector<double> next = build_observation(e.next_obs(), tau);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < kFeaturesPerBar; ++c)
            CHECK(next[r * kFeaturesPerBar + c] == static_cast<double>((r + 4) * 10 + c));
    CHECK(next.back() == -1.0);
}

TEST_CASE("observation windows with insufficient history are rejected") {
    FeatureMatrix fm = numbered_features(12);
    ObsRef ref{&fm, 2, 1.0};  // needs rows [0, 2] but first_valid is 1
    CHECK_THROWS_AS(build_observation(ref, 2), InvariantError);
    ObsRef tail{&fm, 12, 1.0};  // one past the end
    CHECK_THROWS_AS(build_observation(tail, 2), InvariantError);
}
