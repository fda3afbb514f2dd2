#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tdqn/agent.hpp"
#include "tdqn/benchmarks.hpp"
#include "tdqn/metrics.hpp"

namespace tdqn {

using json = nlohmann::json;

// Collects config problems so one error can list all of them.
class ConfigReader {
public:
    ConfigReader(const json& j, std::string scope) : j_(&j), scope_(std::move(scope)) {
        require(j.is_object(), scope_, " must be a JSON object");
    }

    // The reader keeps a pointer to the document, so a temporary would dangle.
    ConfigReader(json&&, std::string) = delete;

    template <typename T>
    void read(const char* key, T& out) {
        known_.push_back(key);
        if (!j_->contains(key)) return;
        try {
            out = j_->at(key).get<T>();
        } catch (const json::exception& e) {
            problems_.push_back(scope_ + "." + key + ": " + e.what());
        }
    }

    void read_date(const char* key, Date& out) {
        std::string text;
        bool had = j_->contains(key);
        read(key, text);
        if (!had || text.empty()) return;
        try {
            out = parse_date(text);
        } catch (const Error& e) {
            problems_.push_back(scope_ + "." + key + ": " + e.what());
        }
    }

    void mark_known(const char* key) { known_.push_back(key); }

    json child(const char* key) {
        known_.push_back(key);
        if (!j_->contains(key)) return json::object();
        const json& c = j_->at(key);
        if (!c.is_object()) {
            problems_.push_back(scope_ + "." + key + ": must be an object");
            return json::object();
        }
        return c;
    }

    void finish() {
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            bool ok = false;
            for (const char* k : known_)
                if (it.key() == k) {
                    ok = true;
                    break;
                }
            if (!ok) problems_.push_back(scope_ + "." + it.key() + ": unknown key");
        }
    }

    void absorb(const std::vector<std::string>& sub) {
        problems_.insert(problems_.end(), sub.begin(), sub.end());
    }

    const std::vector<std::string>& problems() const { return problems_; }

private:
    const json* j_;
    std::string scope_;
    std::vector<const char*> known_;
    std::vector<std::string> problems_;
};

inline void raise_config_problems(const std::vector<std::string>& problems) {
    if (problems.empty()) return;
    std::string msg = "configuration invalid (" + std::to_string(problems.size()) + " problem" +
                      (problems.size() == 1 ? "" : "s") + ")";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw Error(msg);
}

// ---- EnvConfig ----

inline json to_json(const EnvConfig& c) {
    return json{{"cost_rate", c.cost_rate},
                {"epsilon_bound", c.epsilon_bound},
                {"initial_cash", c.initial_cash},
                {"tau", c.tau}};
}

inline std::vector<std::string> env_from_json(const json& j, EnvConfig& c, const std::string& scope) {
    ConfigReader r(j, scope);
    r.read("cost_rate", c.cost_rate);
    r.read("epsilon_bound", c.epsilon_bound);
    r.read("initial_cash", c.initial_cash);
    r.read("tau", c.tau);
    r.finish();
    return r.problems();
}

// ---- NetworkSpec ----

inline json to_json(const NetworkSpec& s) {
    json j{{"hidden", s.hidden},
           {"leaky_slope", s.leaky_slope},
           {"dropout_rate", s.dropout_rate},
           {"l2_coefficient", s.l2_coefficient},
           {"bn_momentum", s.bn_momentum},
           {"bn_epsilon", s.bn_epsilon}};
    if (s.input_dim > 0) j["input_dim"] = s.input_dim;
    if (!s.batch_norm.empty()) {
        json flags = json::array();
        for (std::uint8_t f : s.batch_norm) flags.push_back(f != 0);
        j["batch_norm"] = flags;
    } else {
        j["batch_norm"] = true;
    }
    return j;
}

inline std::vector<std::string> net_from_json(const json& j, NetworkSpec& s, const std::string& scope) {
    ConfigReader r(j, scope);
    r.read("input_dim", s.input_dim);
    r.read("hidden", s.hidden);
    r.read("leaky_slope", s.leaky_slope);
    r.read("dropout_rate", s.dropout_rate);
    r.read("l2_coefficient", s.l2_coefficient);
    r.read("bn_momentum", s.bn_momentum);
    r.read("bn_epsilon", s.bn_epsilon);
    r.mark_known("batch_norm");
    r.finish();
    std::vector<std::string> problems = r.problems();
    if (j.contains("batch_norm")) {
        const json& bn = j.at("batch_norm");
        if (bn.is_boolean()) {
            s.batch_norm.assign(s.hidden.size(), bn.get<bool>() ? 1 : 0);
        } else if (bn.is_array()) {
            s.batch_norm.clear();
            bool ok = true;
            for (const auto& f : bn) {
                if (!f.is_boolean()) {
                    ok = false;
                    break;
                }
                s.batch_norm.push_back(f.get<bool>() ? 1 : 0);
            }
            if (!ok) {
                s.batch_norm.clear();
                problems.push_back(scope + ".batch_norm: must be a bool or an array of bools");
            }
        } else {
            problems.push_back(scope + ".batch_norm: must be a bool or an array of bools");
        }
    }
    return problems;
}

// ---- Hyperparams ----

inline json to_json(const Hyperparams& h) {
    return json{{"gamma", h.gamma},
                {"eps_start", h.eps_start},
                {"eps_end", h.eps_end},
                {"eps_decay_steps", h.eps_decay_steps},
                {"batch_size", h.batch_size},
                {"learn_every", h.learn_every},
                {"target_sync", h.target_sync},
                {"episodes", h.episodes},
                {"replay_capacity", h.replay_capacity},
                {"learning_rate", h.learning_rate},
                {"patience", h.patience},
                {"clip_threshold", h.clip_threshold}};
}

inline std::vector<std::string> hp_from_json(const json& j, Hyperparams& h, const std::string& scope) {
    ConfigReader r(j, scope);
    r.read("gamma", h.gamma);
    r.read("eps_start", h.eps_start);
    r.read("eps_end", h.eps_end);
    r.read("eps_decay_steps", h.eps_decay_steps);
    r.read("batch_size", h.batch_size);
    r.read("learn_every", h.learn_every);
    r.read("target_sync", h.target_sync);
    r.read("episodes", h.episodes);
    r.read("replay_capacity", h.replay_capacity);
    r.read("learning_rate", h.learning_rate);
    r.read("patience", h.patience);
    r.read("clip_threshold", h.clip_threshold);
    r.finish();
    return r.problems();
}

// ---- Pipeline / augmentation ----

inline json to_json(const AugmentSpec& a) {
    return json{{"shifts", a.shifts},
                {"filter_windows", a.filter_windows},
                {"noise_sigmas", a.noise_sigmas}};
}

inline std::vector<std::string> augment_from_json(const json& j, AugmentSpec& a,
                                                  const std::string& scope) {
    ConfigReader r(j, scope);
    r.read("shifts", a.shifts);
    r.read("filter_windows", a.filter_windows);
    r.read("noise_sigmas", a.noise_sigmas);
    r.finish();
    return r.problems();
}

inline json to_json(const PipelineConfig& p) {
    return json{{"filter_window", p.filter_window}, {"augment", to_json(p.augment)}};
}

inline std::vector<std::string> pipeline_from_json(const json& j, PipelineConfig& p,
                                                   const std::string& scope) {
    ConfigReader r(j, scope);
    r.read("filter_window", p.filter_window);
    std::vector<std::string> problems;
    if (j.contains("augment")) {
        json sub = r.child("augment");
        problems = augment_from_json(sub, p.augment, scope + ".augment");
    }
    r.finish();
    std::vector<std::string> own = r.problems();
    own.insert(own.end(), problems.begin(), problems.end());
    return own;
}

// ---- FeatureStats ----

inline json to_json(const FeatureStats& s) {
    return json{{"min", s.min}, {"max", s.max}};
}

inline FeatureStats stats_from_json(const json& j) {
    FeatureStats s;
    require(j.contains("min") && j.contains("max"), "feature stats need 'min' and 'max'");
    auto mins = j.at("min").get<std::vector<double>>();
    auto maxs = j.at("max").get<std::vector<double>>();
    require(mins.size() == kFeaturesPerBar && maxs.size() == kFeaturesPerBar,
            "feature stats must have ", kFeaturesPerBar, " entries per side");
    for (std::size_t i = 0; i < kFeaturesPerBar; ++i) {
        s.min[i] = mins[i];
        s.max[i] = maxs[i];
    }
    return s;
}

// ---- Indicators and episode curves ----

inline json to_json(const Indicator& ind) {
    switch (ind.kind) {
        case Indicator::Kind::Value: return ind.value;
        case Indicator::Kind::Infinite: return "inf";
        default: return nullptr;
    }
}

inline json to_json(const EpisodeStats& e) {
    return json{{"episode", e.episode},
                {"variant", e.variant},
                {"mean_loss", e.mean_loss},
                {"epsilon", e.epsilon},
                {"train_sharpe", to_json(e.train_sharpe)},
                {"validation_sharpe", to_json(e.validation_sharpe)},
                {"test_sharpe", to_json(e.test_sharpe)}};
}

inline json to_json(const CurvePoint& p) {
    return json{{"episode", p.episode}, {"n", p.n},
                {"train", json{{"mean", p.train_mean}, {"sd", p.train_sd}}},
                {"test", json{{"mean", p.test_mean}, {"sd", p.test_sd}}}};
}

}  // namespace tdqn
