#pragma once

#include <algorithm>
#include <array>
#include <functional>

#include "dodgerl/nn/network.hpp"

namespace dodgerl::nn {

// Scalar probe the checker differentiates. Single head: Q[a]. Dueling:
// Q[a] through the V + A - mean(A) aggregation. Actor-critic: logit[a] + V,
// which exercises both streams at once.
template <typename T>
T head_scalar(const Net<T>& net, const Activations<T>& acts, int action) {
    switch (net.head) {
    case Head::single:
        return raw_q(net, acts)[static_cast<size_t>(action)];
    case Head::dueling:
        return q_values(net, acts)[static_cast<size_t>(action)];
    default:
        return head_vector(net, acts)[static_cast<size_t>(action)] + head_value(net, acts);
    }
}

template <typename T>
std::vector<T> head_scalar_out_grad(const Net<T>& net, int action) {
    const int n = net.num_actions();
    if (net.head == Head::single) {
        std::vector<T> g(static_cast<size_t>(n), T(0));
        g[static_cast<size_t>(action)] = T(1);
        return g;
    }
    std::vector<T> g(static_cast<size_t>(n) + 1, T(0));
    g[0] = T(1);
    if (net.head == Head::dueling) {
        for (int a = 0; a < n; ++a)
            g[static_cast<size_t>(a) + 1] = (a == action ? T(1) : T(0)) - T(1) / static_cast<T>(n);
    } else {
        g[static_cast<size_t>(action) + 1] = T(1);
    }
    return g;
}

// Central finite differences of an arbitrary scalar of the parameters,
// evaluated on a 64-bit network.
template <typename F>
Gradients<double> finite_difference(const Net<double>& net, double h, F&& scalar_of) {
    Gradients<double> num;
    num.zero_like(net);
    Net<double> probe = net;
    auto diff = [&](double& param, double& slot) {
        const double saved = param;
        param = saved + h;
        const double up = scalar_of(probe);
        param = saved - h;
        const double down = scalar_of(probe);
        param = saved;
        slot = (up - down) / (2.0 * h);
    };
    for (size_t l = 0; l < probe.layers.size(); ++l) {
        for (size_t i = 0; i < probe.layers[l].weights.size(); ++i)
            diff(probe.layers[l].weights[i], num.weights[l][i]);
        for (size_t i = 0; i < probe.layers[l].biases.size(); ++i)
            diff(probe.layers[l].biases[i], num.biases[l][i]);
    }
    return num;
}

inline double relative_error(double analytic, double numeric) {
    const double scale = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    return std::fabs(analytic - numeric) / scale;
}

inline double max_relative_error(const Gradients<double>& analytic,
                                 const Gradients<double>& numeric) {
    double worst = 0.0;
    for (size_t l = 0; l < analytic.weights.size(); ++l) {
        for (size_t i = 0; i < analytic.weights[l].size(); ++i)
            worst = std::max(worst, relative_error(analytic.weights[l][i], numeric.weights[l][i]));
        for (size_t i = 0; i < analytic.biases[l].size(); ++i)
            worst = std::max(worst, relative_error(analytic.biases[l][i], numeric.biases[l][i]));
    }
    return worst;
}

// Max relative error between analytic backward() gradients and central
// finite differences of head_scalar, both evaluated on a 64-bit shadow copy.
inline double gradient_check(const Net<float>& net, std::span<const float> input,
                             int action, double h = 1e-3) {
    if (action < 0 || action >= net.num_actions()) throw NetError("action index out of range");
    const Net<double> netd = convert<float, double>(net);
    const std::vector<double> x(input.begin(), input.end());

    const auto acts = forward(netd, std::span<const double>(x));
    const auto analytic = backward(netd, acts, std::span<const double>(
                                                   head_scalar_out_grad<double>(netd, action)));
    const auto numeric = finite_difference(netd, h, [&](const Net<double>& probe) {
        const auto a = forward(probe, std::span<const double>(x));
        return head_scalar(probe, a, action);
    });
    return max_relative_error(analytic, numeric);
}

// True when no relu pre-activation sits within `margin` of its kink, where a
// finite-difference probe of width h would straddle the non-differentiable
// point. Suite drivers resample configurations that fail this.
inline bool safely_differentiable(const Net<float>& net, std::span<const float> input,
                                  double margin = 1e-3) {
    const auto acts = forward(net, input);
    for (size_t l = 0; l < net.layers.size(); ++l) {
        if (net.layers[l].spec.activation != Activation::relu) continue;
        for (float z : acts.pre[l])
            if (std::fabs(static_cast<double>(z)) < margin) return false;
    }
    return true;
}

struct GradcheckHeadResult {
    Head head = Head::single;
    int configs = 0;
    int resampled = 0; // configs redrawn because a relu sat on its kink
    double worst = 0.0;
};

struct GradcheckReport {
    std::array<GradcheckHeadResult, 3> heads;
    double worst = 0.0;
    bool pass(double tolerance = 1e-4) const { return worst < tolerance; }
};

// Randomized sweep over small networks (widths <= 16, at most 3 layers on
// any input-to-output path) comparing backward() against central finite
// differences for every head type. Kink-adjacent draws are resampled so the
// probe width h never straddles a relu corner.
inline GradcheckReport run_gradcheck_suite(uint64_t seed, int configs_per_head = 100,
                                           double h = 1e-3, double margin = 2e-2) {
    if (configs_per_head < 1) throw NetError("configs_per_head must be positive");
    GradcheckReport report;
    Rng rng(seed);

    const auto small = [&] { return 2 + static_cast<int>(rng.below(15)); }; // 2..16
    const auto sample_net = [&](Head head) {
        const int input = 2 + static_cast<int>(rng.below(7));
        const int actions = 2 + static_cast<int>(rng.below(4));
        std::vector<LayerSpec> specs;
        if (head == Head::single) {
            std::vector<int> hidden(rng.below(3)); // depth 1..3
            for (auto& w : hidden) w = small();
            specs = single_stack(input, hidden, actions);
        } else {
            specs = two_stream_stack(input, small(), small(), actions);
        }
        return init_network<float>(specs, head, rng.next_u64());
    };

    const std::array<Head, 3> heads{Head::single, Head::dueling, Head::actor_critic};
    for (size_t hi = 0; hi < heads.size(); ++hi) {
        auto& result = report.heads[hi];
        result.head = heads[hi];
        for (int c = 0; c < configs_per_head; ++c) {
            Net<float> net;
            std::vector<float> x;
            for (int attempt = 0;; ++attempt) {
                if (attempt >= 1000) throw NetError("gradcheck could not find a kink-free draw");
                net = sample_net(heads[hi]);
                x.resize(static_cast<size_t>(net.input_width()));
                for (auto& v : x) v = rng.uniform(-1.0f, 1.0f);
                if (safely_differentiable(net, x, margin)) break;
                ++result.resampled;
            }
            const int action = static_cast<int>(rng.below(static_cast<uint64_t>(net.num_actions())));
            result.worst = std::max(result.worst, gradient_check(net, x, action, h));
            ++result.configs;
        }
        report.worst = std::max(report.worst, result.worst);
    }
    return report;
}

} // namespace dodgerl::nn
