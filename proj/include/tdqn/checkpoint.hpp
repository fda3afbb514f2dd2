#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "tdqn/env.hpp"
#include "tdqn/fsutil.hpp"
#include "tdqn/json_io.hpp"
#include "tdqn/net.hpp"

namespace tdqn {

// Everything needed to evaluate a trained policy elsewhere and to audit the
// run it came from: both networks, optimizer state, rng state, the feature
// normalization captured on the training set, and the environment settings.
struct Checkpoint {
    NetworkParams params;   // policy network (best validation Sharpe)
    NetworkParams target;
    AdamState adam;
    std::string rng_state;
    EnvConfig env;
    std::size_t filter_window = 5;
    FeatureStats stats;
    std::uint64_t seed = 0;
    std::uint64_t data_fingerprint = 0;
};

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'T', 'D', 'Q', 'N', 'C', 'K', 'P', '1'};

template <typename Params, typename Out>
void collect_param_tensors(Params& p, Out& out) {
    for (auto& layer : p.layers) {
        out.push_back(&layer.weight.storage());
        out.push_back(&layer.bias);
        if (layer.has_bn) {
            out.push_back(&layer.bn_scale);
            out.push_back(&layer.bn_shift);
            out.push_back(&layer.bn_run_mean);
            out.push_back(&layer.bn_run_var);
        }
    }
}

template <typename Ckpt>
auto collect_all_tensors(Ckpt& c) {
    using VecPtr = decltype(&c.params.layers[0].bias);
    std::vector<VecPtr> tensors;
    collect_param_tensors(c.params, tensors);
    collect_param_tensors(c.target, tensors);
    for (auto& t : c.adam.m) tensors.push_back(&t);
    for (auto& t : c.adam.v) tensors.push_back(&t);
    return tensors;
}

inline void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t read_u64(const std::string& data, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[at + i])) << (8 * i);
    return v;
}

}  // namespace detail

// Binary layout: 8-byte magic, little-endian u64 header length, JSON header,
// then all tensors as raw little-endian doubles in a canonical order derived
// from the network spec.
inline std::string serialize_checkpoint(const Checkpoint& c) {
    auto tensors = detail::collect_all_tensors(c);
    std::uint64_t total = 0;
    for (const auto* t : tensors) total += t->size();

    json header{{"net", to_json(c.params.spec)},
                {"env", to_json(c.env)},
                {"filter_window", c.filter_window},
                {"stats", to_json(c.stats)},
                {"seed", c.seed},
                {"data_fingerprint", hex64(c.data_fingerprint)},
                {"rng_state", c.rng_state},
                {"adam", json{{"step", c.adam.step},
                              {"beta1", c.adam.beta1},
                              {"beta2", c.adam.beta2},
                              {"epsilon", c.adam.epsilon}}},
                {"tensor_doubles", total}};
    const std::string header_text = header.dump();

    std::string out;
    out.reserve(16 + header_text.size() + total * sizeof(double));
    out.append(detail::kCheckpointMagic, sizeof detail::kCheckpointMagic);
    detail::append_u64(out, header_text.size());
    out += header_text;
    for (const auto* t : tensors) {
        const std::size_t bytes = t->size() * sizeof(double);
        const std::size_t at = out.size();
        out.resize(at + bytes);
        if (bytes > 0) std::memcpy(out.data() + at, t->data(), bytes);
    }
    return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& data, const std::string& what) {
    require(data.size() >= 16, what, ": truncated checkpoint");
    require(std::memcmp(data.data(), detail::kCheckpointMagic, 8) == 0, what,
            ": not a checkpoint file");
    const std::uint64_t header_len = detail::read_u64(data, 8);
    require(data.size() >= 16 + header_len, what, ": truncated checkpoint header");
    json header;
    try {
        header = json::parse(data.substr(16, header_len));
    } catch (const json::exception& e) {
        fail(what, ": bad checkpoint header: ", e.what());
    }

    Checkpoint c;
    NetworkSpec spec;
    auto problems = net_from_json(header.at("net"), spec, "checkpoint.net");
    raise_config_problems(problems);
    problems = env_from_json(header.at("env"), c.env, "checkpoint.env");
    raise_config_problems(problems);
    c.filter_window = header.at("filter_window").get<std::size_t>();
    c.stats = stats_from_json(header.at("stats"));
    c.seed = header.at("seed").get<std::uint64_t>();
    c.data_fingerprint = std::stoull(header.at("data_fingerprint").get<std::string>(), nullptr, 16);
    c.rng_state = header.at("rng_state").get<std::string>();

    c.params = init_xavier(spec, 0);
    c.target = init_xavier(spec, 0);
    c.adam = make_adam_state(c.params);
    c.adam.step = header.at("adam").at("step").get<long long>();
    c.adam.beta1 = header.at("adam").at("beta1").get<double>();
    c.adam.beta2 = header.at("adam").at("beta2").get<double>();
    c.adam.epsilon = header.at("adam").at("epsilon").get<double>();

    auto tensors = detail::collect_all_tensors(c);
    std::uint64_t total = 0;
    for (const auto* t : tensors) total += t->size();
    require(header.at("tensor_doubles").get<std::uint64_t>() == total, what,
            ": tensor count mismatch");
    require(data.size() == 16 + header_len + total * sizeof(double), what,
            ": checkpoint size mismatch");

    std::size_t at = 16 + header_len;
    for (auto* t : tensors) {
        const std::size_t bytes = t->size() * sizeof(double);
        if (bytes > 0) std::memcpy(t->data(), data.data() + at, bytes);
        at += bytes;
    }
    return c;
}

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
    write_file(path, serialize_checkpoint(c));
}

inline Checkpoint load_checkpoint(const std::string& path) {
    return deserialize_checkpoint(read_file(path), path);
}

}  // namespace tdqn
