#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tdqn/matrix.hpp"
#include "tdqn/rng.hpp"

namespace tdqn {

inline constexpr std::size_t kNumActions = 2;  // short, long

struct NetworkSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;     // widths of hidden layers
    double leaky_slope = 0.01;
    double dropout_rate = 0.2;
    double l2_coefficient = 1e-6;
    std::vector<std::uint8_t> batch_norm;  // per hidden layer; empty = all on
    double bn_momentum = 0.99;
    double bn_epsilon = 1e-5;

    bool layer_has_bn(std::size_t i) const {
        if (batch_norm.empty()) return true;
        return batch_norm[i] != 0;
    }

    void validate() const {
        require(input_dim >= 1, "network input dimension must be at least 1");
        for (std::size_t w : hidden) require(w >= 1, "hidden width must be at least 1");
        require(dropout_rate >= 0.0 && dropout_rate < 1.0, "dropout rate must be in [0, 1)");
        require(leaky_slope > 0.0 && leaky_slope < 1.0, "leaky slope must be in (0, 1)");
        require(l2_coefficient >= 0.0, "l2 coefficient must be non-negative");
        require(batch_norm.empty() || batch_norm.size() == hidden.size(),
                "batch_norm flags must match hidden layer count");
        require(bn_momentum >= 0.0 && bn_momentum < 1.0, "bn momentum must be in [0, 1)");
        require(bn_epsilon > 0.0, "bn epsilon must be positive");
    }

    std::size_t layer_count() const { return hidden.size() + 1; }

    std::size_t layer_in(std::size_t i) const { return i == 0 ? input_dim : hidden[i - 1]; }
    std::size_t layer_out(std::size_t i) const {
        return i == hidden.size() ? kNumActions : hidden[i];
    }
};

// One dense layer; hidden layers may also carry batch-norm parameters.
struct LayerParams {
    Matrix weight;  // [out x in]
    std::vector<double> bias;
    bool has_bn = false;
    std::vector<double> bn_scale;
    std::vector<double> bn_shift;
    std::vector<double> bn_run_mean;
    std::vector<double> bn_run_var;
};

struct NetworkParams {
    NetworkSpec spec;
    std::vector<LayerParams> layers;
};

struct LayerGradients {
    Matrix weight;
    std::vector<double> bias;
    std::vector<double> bn_scale;
    std::vector<double> bn_shift;
};

struct GradientSet {
    std::vector<LayerGradients> layers;
    double global_norm = 0.0;
};

enum class Mode { Train, Eval };

inline NetworkParams init_xavier(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    NetworkParams params;
    params.spec = spec;
    Rng rng(seed);
    for (std::size_t i = 0; i < spec.layer_count(); ++i) {
        LayerParams layer;
        const std::size_t fan_in = spec.layer_in(i);
        const std::size_t fan_out = spec.layer_out(i);
        layer.weight.resize(fan_out, fan_in);
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
        for (double& w : layer.weight.storage()) w = rng.normal(0.0, sd);
        layer.bias.assign(fan_out, 0.0);
        layer.has_bn = i < spec.hidden.size() && spec.layer_has_bn(i);
        if (layer.has_bn) {
            layer.bn_scale.assign(fan_out, 1.0);
            layer.bn_shift.assign(fan_out, 0.0);
            layer.bn_run_mean.assign(fan_out, 0.0);
            layer.bn_run_var.assign(fan_out, 1.0);
        }
        params.layers.push_back(std::move(layer));
    }
    return params;
}

// Everything backward needs from one forward pass. Holding the per-layer
// intermediates makes the gradient exact for whichever mode produced them.
struct LayerCache {
    Matrix input;        // X fed into the linear map
    Matrix bn_hat;       // normalized pre-activation (BN layers only)
    std::vector<double> bn_inv_std;
    Matrix act_input;    // value entering the leaky rectifier
    Matrix dropout_mask; // scaled keep mask (empty when dropout inactive)
};

struct ForwardCache {
    Mode mode = Mode::Eval;
    std::vector<LayerCache> layers;
    Matrix output;  // [batch x kNumActions]
};

namespace detail {

inline void linear_forward(Matrix& out, const Matrix& x, const LayerParams& layer) {
    matmul_tb(out, x, layer.weight);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        double* row = out.row(r);
        for (std::size_t c = 0; c < out.cols(); ++c) row[c] += layer.bias[c];
    }
}

}  // namespace detail

// Runs the network over a batch of rows. Train mode draws dropout masks from
// rng and folds the batch statistics into the running estimates; eval mode
// touches neither and is a pure function of (params, input).
inline const Matrix& forward(NetworkParams& params, const Matrix& input, Mode mode,
                             ForwardCache& cache, Rng* rng = nullptr) {
    const NetworkSpec& spec = params.spec;
    require(input.cols() == spec.input_dim, "input has ", input.cols(),
            " features, network expects ", spec.input_dim);
    require(input.rows() >= 1, "empty batch");
    for (double v : input.storage())
        require(std::isfinite(v), "non-finite network input");
    const bool train = mode == Mode::Train;
    if (train && spec.dropout_rate > 0.0)
        TDQN_INVARIANT(rng != nullptr, "train-mode forward with dropout needs an rng");

    const std::size_t batch = input.rows();
    cache.mode = mode;
    cache.layers.assign(spec.layer_count(), LayerCache{});
    cache.layers[0].input = input;

    for (std::size_t i = 0; i < spec.layer_count(); ++i) {
        LayerParams& layer = params.layers[i];
        LayerCache& lc = cache.layers[i];

        const bool is_output = i + 1 == spec.layer_count();
        Matrix z;
        detail::linear_forward(z, lc.input, layer);
        if (is_output) {
            cache.output = std::move(z);
            break;
        }

        const std::size_t width = z.cols();
        if (layer.has_bn) {
            require(!train || batch >= 2, "train-mode batch norm needs batch size >= 2");
            lc.bn_inv_std.assign(width, 0.0);
            lc.bn_hat.resize(batch, width);
            for (std::size_t c = 0; c < width; ++c) {
                double mean, var;
                if (train) {
                    double sum = 0.0;
                    for (std::size_t r = 0; r < batch; ++r) sum += z(r, c);
                    mean = sum / static_cast<double>(batch);
                    double sq = 0.0;
                    for (std::size_t r = 0; r < batch; ++r) {
                        double d = z(r, c) - mean;
                        sq += d * d;
                    }
                    var = sq / static_cast<double>(batch);
                    layer.bn_run_mean[c] =
                        spec.bn_momentum * layer.bn_run_mean[c] + (1.0 - spec.bn_momentum) * mean;
                    layer.bn_run_var[c] =
                        spec.bn_momentum * layer.bn_run_var[c] + (1.0 - spec.bn_momentum) * var;
                } else {
                    mean = layer.bn_run_mean[c];
                    var = layer.bn_run_var[c];
                }
                const double inv_std = 1.0 / std::sqrt(var + spec.bn_epsilon);
                lc.bn_inv_std[c] = inv_std;
                for (std::size_t r = 0; r < batch; ++r) {
                    double hat = (z(r, c) - mean) * inv_std;
                    lc.bn_hat(r, c) = hat;
                    z(r, c) = layer.bn_scale[c] * hat + layer.bn_shift[c];
                }
            }
        }

        lc.act_input = z;
        for (double& v : z.storage())
            if (v < 0.0) v *= spec.leaky_slope;

        if (train && spec.dropout_rate > 0.0) {
            const double keep = 1.0 - spec.dropout_rate;
            lc.dropout_mask.resize(batch, width);
            double* mask = lc.dropout_mask.data();
            double* val = z.data();
            for (std::size_t k = 0; k < z.size(); ++k) {
                mask[k] = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
                val[k] *= mask[k];
            }
        }

        cache.layers[i + 1].input = std::move(z);
    }
    return cache.output;
}

inline Matrix forward_eval(NetworkParams& params, const Matrix& input) {
    ForwardCache cache;
    forward(params, input, Mode::Eval, cache);
    return cache.output;
}

// Q-values for a single observation, eval mode.
inline void qvalues(NetworkParams& params, const double* obs, double out[kNumActions]) {
    Matrix input(1, params.spec.input_dim);
    for (std::size_t i = 0; i < params.spec.input_dim; ++i) input(0, i) = obs[i];
    ForwardCache cache;
    const Matrix& q = forward(params, input, Mode::Eval, cache);
    out[0] = q(0, 0);
    out[1] = q(0, 1);
}

struct HuberResult {
    double loss = 0.0;
    double derivative = 0.0;
};

inline HuberResult huber_loss(double prediction, double target) {
    const double x = prediction - target;
    HuberResult res;
    if (std::abs(x) <= 1.0) {
        res.loss = 0.5 * x * x;
        res.derivative = x;
    } else {
        res.loss = std::abs(x) - 0.5;
        res.derivative = x > 0.0 ? 1.0 : -1.0;
    }
    return res;
}

inline GradientSet make_gradients(const NetworkParams& params) {
    GradientSet grads;
    grads.layers.resize(params.layers.size());
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const LayerParams& layer = params.layers[i];
        grads.layers[i].weight.resize(layer.weight.rows(), layer.weight.cols());
        grads.layers[i].bias.assign(layer.bias.size(), 0.0);
        if (layer.has_bn) {
            grads.layers[i].bn_scale.assign(layer.bn_scale.size(), 0.0);
            grads.layers[i].bn_shift.assign(layer.bn_shift.size(), 0.0);
        }
    }
    return grads;
}

// Reverse pass from d(loss)/d(output). The cache must come from a forward
// call on the same batch; both train-mode and eval-mode caches are handled,
// differing in how batch-norm distributes gradient across the batch.
inline GradientSet backward(const NetworkParams& params, const ForwardCache& cache,
                            const Matrix& dout) {
    const NetworkSpec& spec = params.spec;
    TDQN_INVARIANT(cache.layers.size() == spec.layer_count(), "cache/params mismatch");
    TDQN_INVARIANT(dout.rows() == cache.output.rows() && dout.cols() == kNumActions,
                   "bad output gradient shape");
    const std::size_t batch = dout.rows();
    const bool train = cache.mode == Mode::Train;

    GradientSet grads = make_gradients(params);
    Matrix dy = dout;    // gradient flowing backwards
    Matrix dx;
    for (std::size_t idx = spec.layer_count(); idx-- > 0;) {
        const LayerParams& layer = params.layers[idx];
        const LayerCache& lc = cache.layers[idx];
        LayerGradients& lg = grads.layers[idx];
        const bool is_output = idx + 1 == spec.layer_count();

        if (!is_output) {
            // Undo dropout, activation, then batch norm.
            if (train && spec.dropout_rate > 0.0) {
                const double* mask = lc.dropout_mask.data();
                double* g = dy.data();
                for (std::size_t k = 0; k < dy.size(); ++k) g[k] *= mask[k];
            }
            {
                const double* a = lc.act_input.data();
                double* g = dy.data();
                for (std::size_t k = 0; k < dy.size(); ++k)
                    if (a[k] < 0.0) g[k] *= spec.leaky_slope;
            }
            if (layer.has_bn) {
                const std::size_t width = dy.cols();
                for (std::size_t c = 0; c < width; ++c) {
                    double sum_dy = 0.0, sum_dy_hat = 0.0;
                    for (std::size_t r = 0; r < batch; ++r) {
                        const double g = dy(r, c);
                        sum_dy += g;
                        sum_dy_hat += g * lc.bn_hat(r, c);
                    }
                    lg.bn_shift[c] = sum_dy;
                    lg.bn_scale[c] = sum_dy_hat;
                    const double scale = layer.bn_scale[c];
                    const double inv_std = lc.bn_inv_std[c];
                    if (train) {
                        const double bf = static_cast<double>(batch);
                        for (std::size_t r = 0; r < batch; ++r) {
                            const double g = dy(r, c);
                            dy(r, c) = scale * inv_std / bf *
                                       (bf * g - sum_dy - lc.bn_hat(r, c) * sum_dy_hat);
                        }
                    } else {
                        for (std::size_t r = 0; r < batch; ++r) dy(r, c) *= scale * inv_std;
                    }
                }
            }
        }

        // Linear piece: dW = dy^T x, db = column sums, dx = dy W.
        matmul_ta(lg.weight, dy, lc.input);
        for (std::size_t r = 0; r < batch; ++r) {
            const double* row = dy.row(r);
            for (std::size_t c = 0; c < dy.cols(); ++c) lg.bias[c] += row[c];
        }
        if (idx > 0) {
            matmul(dx, dy, layer.weight);
            dy = std::move(dx);
        }
    }

    // L2 penalty applies to weight matrices only.
    if (spec.l2_coefficient > 0.0) {
        for (std::size_t i = 0; i < params.layers.size(); ++i) {
            const double* w = params.layers[i].weight.data();
            double* g = grads.layers[i].weight.data();
            for (std::size_t k = 0; k < params.layers[i].weight.size(); ++k)
                g[k] += 2.0 * spec.l2_coefficient * w[k];
        }
    }

    for (std::size_t i = 0; i < grads.layers.size(); ++i) {
        auto check = [&](const double* v, std::size_t n) {
            for (std::size_t k = 0; k < n; ++k)
                require(std::isfinite(v[k]), "non-finite gradient in layer ", i);
        };
        check(grads.layers[i].weight.data(), grads.layers[i].weight.size());
        check(grads.layers[i].bias.data(), grads.layers[i].bias.size());
        check(grads.layers[i].bn_scale.data(), grads.layers[i].bn_scale.size());
        check(grads.layers[i].bn_shift.data(), grads.layers[i].bn_shift.size());
    }
    return grads;
}

struct QLearningLossResult {
    double loss = 0.0;           // mean Huber over the batch plus L2 penalty
    GradientSet grads;
};

// Loss and gradients for a Q-learning batch: per sample only the Q-value of
// the action actually taken is pulled toward its target.
inline QLearningLossResult qlearning_loss(NetworkParams& params, const Matrix& inputs,
                                          const std::vector<int>& actions,
                                          const std::vector<double>& targets, Rng& rng) {
    const std::size_t batch = inputs.rows();
    TDQN_INVARIANT(actions.size() == batch && targets.size() == batch,
                   "batch arrays out of step");
    ForwardCache cache;
    const Matrix& q = forward(params, inputs, Mode::Train, cache, &rng);

    QLearningLossResult res;
    Matrix dout(batch, kNumActions);
    for (std::size_t i = 0; i < batch; ++i) {
        const int a = actions[i];
        TDQN_INVARIANT(a == 0 || a == 1, "bad action index in batch");
        HuberResult h = huber_loss(q(i, static_cast<std::size_t>(a)), targets[i]);
        res.loss += h.loss;
        dout(i, static_cast<std::size_t>(a)) = h.derivative / static_cast<double>(batch);
    }
    res.loss /= static_cast<double>(batch);

    res.grads = backward(params, cache, dout);
    if (params.spec.l2_coefficient > 0.0) {
        double penalty = 0.0;
        for (const LayerParams& layer : params.layers)
            for (double w : layer.weight.storage()) penalty += w * w;
        res.loss += params.spec.l2_coefficient * penalty;
    }
    return res;
}

inline double gradient_norm(const GradientSet& grads) {
    double sq = 0.0;
    auto add = [&](const double* v, std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) sq += v[k] * v[k];
    };
    for (const LayerGradients& lg : grads.layers) {
        add(lg.weight.data(), lg.weight.size());
        add(lg.bias.data(), lg.bias.size());
        add(lg.bn_scale.data(), lg.bn_scale.size());
        add(lg.bn_shift.data(), lg.bn_shift.size());
    }
    return std::sqrt(sq);
}

inline void clip_gradients(GradientSet& grads, double threshold) {
    require(threshold > 0.0, "clip threshold must be positive");
    grads.global_norm = gradient_norm(grads);
    if (grads.global_norm <= threshold) return;
    const double scale = threshold / grads.global_norm;
    auto apply = [&](double* v, std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) v[k] *= scale;
    };
    for (LayerGradients& lg : grads.layers) {
        apply(lg.weight.data(), lg.weight.size());
        apply(lg.bias.data(), lg.bias.size());
        apply(lg.bn_scale.data(), lg.bn_scale.size());
        apply(lg.bn_shift.data(), lg.bn_shift.size());
    }
}

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    long long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

namespace detail {

// Trainable tensors in a fixed traversal order shared by params and grads.
template <typename Params, typename Fn>
void for_each_tensor(Params& params, Fn&& fn) {
    for (auto& layer : params.layers) {
        fn(layer.weight.storage());
        fn(layer.bias);
        fn(layer.bn_scale);
        fn(layer.bn_shift);
    }
}

}  // namespace detail

inline AdamState make_adam_state(const NetworkParams& params) {
    AdamState state;
    detail::for_each_tensor(params, [&](const std::vector<double>& t) {
        state.m.emplace_back(t.size(), 0.0);
        state.v.emplace_back(t.size(), 0.0);
    });
    return state;
}

inline void adam_step(NetworkParams& params, const GradientSet& grads, AdamState& state,
                      double rate) {
    require(rate > 0.0, "learning rate must be positive");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    std::size_t slot = 0;
    std::vector<std::vector<double>*> param_tensors;
    detail::for_each_tensor(params, [&](std::vector<double>& t) { param_tensors.push_back(&t); });
    std::vector<const std::vector<double>*> grad_tensors;
    for (const LayerGradients& lg : grads.layers) {
        grad_tensors.push_back(&lg.weight.storage());
        grad_tensors.push_back(&lg.bias);
        grad_tensors.push_back(&lg.bn_scale);
        grad_tensors.push_back(&lg.bn_shift);
    }
    TDQN_INVARIANT(param_tensors.size() == grad_tensors.size() &&
                       param_tensors.size() == state.m.size(),
                   "optimizer state out of step with parameters");
    for (; slot < param_tensors.size(); ++slot) {
        std::vector<double>& w = *param_tensors[slot];
        const std::vector<double>& g = *grad_tensors[slot];
        std::vector<double>& m = state.m[slot];
        std::vector<double>& v = state.v[slot];
        TDQN_INVARIANT(w.size() == g.size(), "gradient tensor shape mismatch");
        for (std::size_t k = 0; k < w.size(); ++k) {
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            w[k] -= rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

}  // namespace tdqn
