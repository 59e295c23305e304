#pragma once

#include <cmath>

#include "dodgerl/nn/network.hpp"

namespace dodgerl::nn {

// RMSProp accumulator state, shape-aligned with a Net's parameters.
template <typename T>
struct OptState {
    T decay = T(0.95);
    T eps = T(1e-6);
    std::vector<std::vector<T>> acc_w;
    std::vector<std::vector<T>> acc_b;

    static OptState like(const Net<T>& net, T decay = T(0.95), T eps = T(1e-6)) {
        OptState s;
        s.decay = decay;
        s.eps = eps;
        s.acc_w.resize(net.layers.size());
        s.acc_b.resize(net.layers.size());
        for (size_t i = 0; i < net.layers.size(); ++i) {
            s.acc_w[i].assign(net.layers[i].weights.size(), T(0));
            s.acc_b[i].assign(net.layers[i].biases.size(), T(0));
        }
        return s;
    }
};

using OptStatef = OptState<float>;

namespace detail {

template <typename T>
void rmsprop_span(T* p, const T* g, T* acc, size_t n, T decay, T eps, T lr) {
    for (size_t i = 0; i < n; ++i) {
        acc[i] = decay * acc[i] + (T(1) - decay) * g[i] * g[i];
        p[i] -= lr * g[i] / std::sqrt(acc[i] + eps);
    }
}

} // namespace detail

// acc <- decay*acc + (1-decay)*g^2; p <- p - lr*g/sqrt(acc+eps).
// Rejects non-finite gradients before touching any parameter, so an accepted
// step always leaves every parameter finite.
template <typename T>
void rmsprop_step(Net<T>& net, const Gradients<T>& grads, OptState<T>& opt, T lr) {
    if (grads.weights.size() != net.layers.size() || grads.biases.size() != net.layers.size())
        throw NetError("gradient shapes do not match the network");
    for (size_t i = 0; i < net.layers.size(); ++i) {
        if (grads.weights[i].size() != net.layers[i].weights.size() ||
            grads.biases[i].size() != net.layers[i].biases.size())
            throw NetError("gradient shapes do not match the network");
    }
    if (!grads.finite()) throw NetError("non-finite gradient; step rejected");
    for (size_t i = 0; i < net.layers.size(); ++i) {
        detail::rmsprop_span(net.layers[i].weights.data(), grads.weights[i].data(),
                             opt.acc_w[i].data(), net.layers[i].weights.size(), opt.decay,
                             opt.eps, lr);
        detail::rmsprop_span(net.layers[i].biases.data(), grads.biases[i].data(),
                             opt.acc_b[i].data(), net.layers[i].biases.size(), opt.decay,
                             opt.eps, lr);
    }
}

} // namespace dodgerl::nn
