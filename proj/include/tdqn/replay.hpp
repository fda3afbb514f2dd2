#pragma once

#include <cstdint>
#include <vector>

#include "tdqn/env.hpp"
#include "tdqn/rng.hpp"

namespace tdqn {

// One stored transition. Observations are kept as (feature matrix, time,
// position) references instead of flat vectors; the matrices live for the
// whole training run, so the memory cost per experience stays constant.
struct Experience {
    const FeatureMatrix* features = nullptr;
    std::uint32_t t = 0;           // o_t ends at this row; o_{t+1} at t + 1
    std::int8_t position = 1;      // ±1 at o_t
    std::int8_t next_position = 1; // ±1 at o_{t+1}
    std::int8_t action = kActionLong;
    bool terminal = false;
    double reward = 0.0;

    ObsRef obs() const { return ObsRef{features, t, static_cast<double>(position)}; }
    ObsRef next_obs() const {
        return ObsRef{features, t + 1, static_cast<double>(next_position)};
    }
};

// FIFO ring buffer with uniform no-replacement batch sampling.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
        require(capacity >= 1, "replay capacity must be at least 1");
        buffer_.reserve(capacity);
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return buffer_.size(); }
    std::uint64_t inserted() const { return inserted_; }

    void push(const Experience& e) {
        if (buffer_.size() < capacity_) {
            buffer_.push_back(e);
        } else {
            buffer_[static_cast<std::size_t>(inserted_ % capacity_)] = e;
        }
        ++inserted_;
    }

    // Oldest-first snapshot order is not exposed; tests reach individual
    // entries through this accessor instead.
    const Experience& at(std::size_t i) const { return buffer_[i]; }

    std::vector<Experience> sample(std::size_t batch, Rng& rng) const {
        require(batch >= 1 && batch <= buffer_.size(), "cannot sample ", batch,
                " experiences from replay of size ", buffer_.size());
        std::vector<std::size_t> picked;
        picked.reserve(batch);
        while (picked.size() < batch) {
            const std::size_t candidate = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(buffer_.size()) - 1));
            bool fresh = true;
            for (std::size_t p : picked)
                if (p == candidate) {
                    fresh = false;
                    break;
                }
            if (fresh) picked.push_back(candidate);
        }
        std::vector<Experience> out;
        out.reserve(batch);
        for (std::size_t p : picked) out.push_back(buffer_[p]);
        return out;
    }

    bool contains_time(const FeatureMatrix* features, std::uint32_t t) const {
        for (const Experience& e : buffer_)
            if (e.features == features && e.t == t) return true;
        return false;
    }

private:
    std::size_t capacity_;
    std::vector<Experience> buffer_;
    std::uint64_t inserted_ = 0;
};

}  // namespace tdqn
