#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dodgerl/rng.hpp"

namespace dodgerl::nn {

enum class Activation : uint8_t { relu = 0, identity = 1 };
enum class Head : uint8_t { single = 0, dueling = 1, actor_critic = 2 };

struct NetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LayerSpec {
    int input_width = 0;
    int output_width = 0;
    Activation activation = Activation::identity;
};

// Dense layer. Weights are row-major with one row per output unit, so the
// inner product over inputs runs over contiguous memory.
template <typename T>
struct Layer {
    LayerSpec spec;
    std::vector<T> weights; // output_width * input_width
    std::vector<T> biases;  // output_width
};

// How a flat layer list maps onto a head:
//
//   single        layers = [chain...]; the last layer emits one Q per action.
//   dueling       layers = [trunk..., value stream..., advantage stream...]
//   actor_critic  layers = [trunk..., value stream..., policy stream...]
//
// Both streams read the trunk output. The value stream ends in exactly one
// unit, the other stream in one unit per action (>= 2), and both streams have
// the same number of layers. Because the value stream ends at width 1 and the
// trunk output is at least 2 wide, the flat list has exactly one point where
// consecutive widths do not chain: the start of the second stream. That makes
// the layout recoverable from the specs alone, which the snapshot format
// relies on.
struct HeadLayout {
    int trunk_len = 0;
    int stream_len = 0; // 0 for single-head networks
};

namespace detail {

inline void check_widths(std::span<const LayerSpec> specs) {
    for (const auto& s : specs) {
        if (s.input_width < 1 || s.output_width < 1)
            throw NetError("layer widths must be >= 1");
    }
}

inline void check_chain(std::span<const LayerSpec> specs, const char* what) {
    for (size_t i = 1; i < specs.size(); ++i) {
        if (specs[i].input_width != specs[i - 1].output_width)
            throw NetError(std::string("layer widths do not chain in ") + what);
    }
}

inline void check_output_layer(const LayerSpec& s, const char* what) {
    if (s.activation != Activation::identity)
        throw NetError(std::string("final layer of ") + what +
                       " must use the identity activation, not relu");
}

} // namespace detail

inline HeadLayout split_layers(std::span<const LayerSpec> specs, Head head) {
    if (specs.empty()) throw NetError("network needs at least one layer");
    detail::check_widths(specs);

    if (head == Head::single) {
        detail::check_chain(specs, "network");
        detail::check_output_layer(specs.back(), "a single-head network");
        return {static_cast<int>(specs.size()), 0};
    }

    // Locate the unique chain break that starts the second stream.
    int brk = -1;
    for (size_t i = 1; i < specs.size(); ++i) {
        if (specs[i].input_width != specs[i - 1].output_width) {
            if (brk >= 0) throw NetError("two-stream network has more than one chain break");
            brk = static_cast<int>(i);
        }
    }
    if (brk < 0) throw NetError("two-stream network is missing its second stream");

    const int n = static_cast<int>(specs.size());
    const int stream_len = n - brk;
    const int trunk_len = brk - stream_len;
    if (trunk_len < 0) throw NetError("streams must have equal depth");

    auto trunk = specs.subspan(0, trunk_len);
    auto value = specs.subspan(trunk_len, stream_len);
    auto other = specs.subspan(brk, stream_len);

    detail::check_chain(trunk, "trunk");
    detail::check_chain(value, "value stream");
    detail::check_chain(other, "second stream");

    const int trunk_out = trunk_len > 0 ? trunk.back().output_width : specs[0].input_width;
    if (trunk_out < 2)
        throw NetError("trunk output must be at least 2 wide in two-stream networks");
    if (value.front().input_width != trunk_out || other.front().input_width != trunk_out)
        throw NetError("both streams must attach to the trunk output width");
    if (value.back().output_width != 1)
        throw NetError("value stream must end in a single unit");
    if (other.back().output_width < 2)
        throw NetError("action stream must end in at least two units");
    detail::check_output_layer(value.back(), "the value stream");
    detail::check_output_layer(other.back(), head == Head::dueling ? "the advantage stream"
                                                                   : "the policy stream");
    return {trunk_len, stream_len};
}

template <typename T>
struct Net {
    Head head = Head::single;
    HeadLayout layout;
    std::vector<Layer<T>> layers;

    int input_width() const { return layers.front().spec.input_width; }

    // The action/policy stream is always last, so this covers every head.
    int num_actions() const { return layers.back().spec.output_width; }

    // Index ranges per segment: trunk [0, trunk_len), value stream
    // [trunk_len, value_end), action/policy stream [value_end, size).
    int trunk_len() const { return layout.trunk_len; }
    int value_end() const { return layout.trunk_len + layout.stream_len; }
    int layer_count() const { return static_cast<int>(layers.size()); }

    size_t param_count() const {
        size_t n = 0;
        for (const auto& l : layers) n += l.weights.size() + l.biases.size();
        return n;
    }

    bool params_finite() const {
        for (const auto& l : layers) {
            for (T w : l.weights)
                if (!std::isfinite(w)) return false;
            for (T b : l.biases)
                if (!std::isfinite(b)) return false;
        }
        return true;
    }
};

using Netf = Net<float>;

// He-style uniform initialization: weights ~ U(-b, b) with b = sqrt(6/fan_in),
// biases zero. Identical seeds give bit-identical parameters.
template <typename T = float>
Net<T> init_network(std::span<const LayerSpec> specs, Head head, uint64_t seed) {
    Net<T> net;
    net.head = head;
    net.layout = split_layers(specs, head);
    net.layers.reserve(specs.size());
    Rng rng(seed);
    for (const auto& spec : specs) {
        Layer<T> layer;
        layer.spec = spec;
        layer.weights.resize(static_cast<size_t>(spec.output_width) * spec.input_width);
        layer.biases.assign(static_cast<size_t>(spec.output_width), T(0));
        const float bound = std::sqrt(6.0f / static_cast<float>(spec.input_width));
        for (auto& w : layer.weights) w = static_cast<T>(rng.uniform(-bound, bound));
        net.layers.push_back(std::move(layer));
    }
    return net;
}

inline Net<float> init_network(std::initializer_list<LayerSpec> specs, Head head,
                               uint64_t seed) {
    return init_network<float>(std::span<const LayerSpec>(specs.begin(), specs.size()),
                               head, seed);
}

// The two stock architectures, expressed as flat spec lists.
inline std::vector<LayerSpec> single_stack(int input, std::span<const int> hidden,
                                           int actions) {
    std::vector<LayerSpec> specs;
    int prev = input;
    for (int h : hidden) {
        specs.push_back({prev, h, Activation::relu});
        prev = h;
    }
    specs.push_back({prev, actions, Activation::identity});
    return specs;
}

inline std::vector<LayerSpec> two_stream_stack(int input, int shared, int stream_hidden,
                                               int actions) {
    return {
        {input, shared, Activation::relu},
        {shared, stream_hidden, Activation::relu},
        {stream_hidden, 1, Activation::identity},
        {shared, stream_hidden, Activation::relu},
        {stream_hidden, actions, Activation::identity},
    };
}

// Per-layer pre-activations and post-activations from one forward pass,
// aligned with Net::layers. Reusable across calls to avoid reallocation in
// training loops.
template <typename T>
struct Activations {
    std::vector<T> input;
    std::vector<std::vector<T>> pre;
    std::vector<std::vector<T>> post;
};

namespace detail {

template <typename T>
void layer_forward(const Layer<T>& layer, std::span<const T> x, std::vector<T>& pre,
                   std::vector<T>& post) {
    const int out = layer.spec.output_width;
    const int in = layer.spec.input_width;
    pre.resize(out);
    post.resize(out);
    const T* w = layer.weights.data();
    for (int o = 0; o < out; ++o) {
        T acc = layer.biases[static_cast<size_t>(o)];
        const T* row = w + static_cast<size_t>(o) * in;
        for (int i = 0; i < in; ++i) acc += row[i] * x[static_cast<size_t>(i)];
        pre[static_cast<size_t>(o)] = acc;
        post[static_cast<size_t>(o)] =
            layer.spec.activation == Activation::relu ? (acc > T(0) ? acc : T(0)) : acc;
    }
}

} // namespace detail

template <typename T>
void forward_into(const Net<T>& net, std::span<const T> input, Activations<T>& acts) {
    if (static_cast<int>(input.size()) != net.input_width())
        throw NetError("input length does not match network input width");
    acts.input.assign(input.begin(), input.end());
    acts.pre.resize(net.layers.size());
    acts.post.resize(net.layers.size());

    std::span<const T> x = acts.input;
    for (int i = 0; i < net.trunk_len(); ++i) {
        detail::layer_forward(net.layers[static_cast<size_t>(i)], x,
                              acts.pre[static_cast<size_t>(i)], acts.post[static_cast<size_t>(i)]);
        x = acts.post[static_cast<size_t>(i)];
    }
    if (net.head == Head::single) return;

    const std::span<const T> trunk_out = x;
    x = trunk_out;
    for (int i = net.trunk_len(); i < net.value_end(); ++i) {
        detail::layer_forward(net.layers[static_cast<size_t>(i)], x,
                              acts.pre[static_cast<size_t>(i)], acts.post[static_cast<size_t>(i)]);
        x = acts.post[static_cast<size_t>(i)];
    }
    x = trunk_out;
    for (int i = net.value_end(); i < net.layer_count(); ++i) {
        detail::layer_forward(net.layers[static_cast<size_t>(i)], x,
                              acts.pre[static_cast<size_t>(i)], acts.post[static_cast<size_t>(i)]);
        x = acts.post[static_cast<size_t>(i)];
    }
}

template <typename T>
Activations<T> forward(const Net<T>& net, std::span<const T> input) {
    Activations<T> acts;
    forward_into(net, input, acts);
    return acts;
}

// Head output accessors. For two-stream heads the canonical raw output vector
// is [value, stream2...]: [V, A_0..A_{n-1}] for dueling and [V, logit_0..]
// for actor-critic. backward() takes its output gradient in the same order.
template <typename T>
std::span<const T> raw_q(const Net<T>& net, const Activations<T>& acts) {
    if (net.head != Head::single) throw NetError("raw_q needs a single-head network");
    return acts.post.back();
}

template <typename T>
T head_value(const Net<T>& net, const Activations<T>& acts) {
    if (net.head == Head::single) throw NetError("head_value needs a two-stream network");
    return acts.post[static_cast<size_t>(net.value_end() - 1)][0];
}

template <typename T>
std::span<const T> head_vector(const Net<T>& net, const Activations<T>& acts) {
    if (net.head == Head::single) throw NetError("head_vector needs a two-stream network");
    return acts.post.back();
}

// Q = V + A - mean(A), applied per action.
template <typename T>
std::vector<T> dueling_aggregate(T value, std::span<const T> advantages) {
    T mean = T(0);
    for (T a : advantages) mean += a;
    mean /= static_cast<T>(advantages.size());
    std::vector<T> q(advantages.size());
    for (size_t i = 0; i < advantages.size(); ++i) q[i] = value + advantages[i] - mean;
    return q;
}

template <typename T>
std::vector<T> q_values(const Net<T>& net, const Activations<T>& acts) {
    switch (net.head) {
    case Head::single: {
        auto q = raw_q(net, acts);
        return std::vector<T>(q.begin(), q.end());
    }
    case Head::dueling:
        return dueling_aggregate(head_value(net, acts), head_vector(net, acts));
    default:
        throw NetError("actor-critic networks have no Q-values");
    }
}

template <typename T>
struct Gradients {
    std::vector<std::vector<T>> weights;
    std::vector<std::vector<T>> biases;

    void zero_like(const Net<T>& net) {
        weights.resize(net.layers.size());
        biases.resize(net.layers.size());
        for (size_t i = 0; i < net.layers.size(); ++i) {
            weights[i].assign(net.layers[i].weights.size(), T(0));
            biases[i].assign(net.layers[i].biases.size(), T(0));
        }
    }

    void scale(T factor) {
        for (auto& w : weights)
            for (auto& v : w) v *= factor;
        for (auto& b : biases)
            for (auto& v : b) v *= factor;
    }

    bool finite() const {
        for (const auto& w : weights)
            for (T v : w)
                if (!std::isfinite(v)) return false;
        for (const auto& b : biases)
            for (T v : b)
                if (!std::isfinite(v)) return false;
        return true;
    }
};

template <typename T>
struct BackwardScratch {
    std::vector<std::vector<T>> delta; // per layer, d(loss)/d(pre-activation)
    std::vector<T> trunk_grad;
};

namespace detail {

// Backpropagate one layer. `delta_post` is d(loss)/d(post-activation) of this
// layer; on return `delta_prev` holds d(loss)/d(post-activation) of the input.
template <typename T>
void layer_backward(const Layer<T>& layer, std::span<const T> x,
                    std::span<const T> pre, std::vector<T>& delta_post,
                    std::vector<T>* delta_prev, std::vector<T>& gw, std::vector<T>& gb,
                    bool accumulate_prev) {
    const int out = layer.spec.output_width;
    const int in = layer.spec.input_width;
    if (layer.spec.activation == Activation::relu) {
        for (int o = 0; o < out; ++o)
            if (pre[static_cast<size_t>(o)] <= T(0)) delta_post[static_cast<size_t>(o)] = T(0);
    }
    if (delta_prev && !accumulate_prev) delta_prev->assign(static_cast<size_t>(in), T(0));
    const T* w = layer.weights.data();
    for (int o = 0; o < out; ++o) {
        const T d = delta_post[static_cast<size_t>(o)];
        gb[static_cast<size_t>(o)] += d;
        T* gw_row = gw.data() + static_cast<size_t>(o) * in;
        const T* w_row = w + static_cast<size_t>(o) * in;
        if (delta_prev) {
            T* dp = delta_prev->data();
            for (int i = 0; i < in; ++i) {
                gw_row[i] += d * x[static_cast<size_t>(i)];
                dp[i] += d * w_row[i];
            }
        } else {
            for (int i = 0; i < in; ++i) gw_row[i] += d * x[static_cast<size_t>(i)];
        }
    }
}

template <typename T>
std::span<const T> layer_input(const Net<T>& net, const Activations<T>& acts, int idx) {
    if (idx == 0 || idx == net.trunk_len() || idx == net.value_end()) {
        const int t = net.trunk_len();
        if (idx == 0 || t == 0) return acts.input;
        return acts.post[static_cast<size_t>(t - 1)];
    }
    return acts.post[static_cast<size_t>(idx - 1)];
}

// Walk one segment [first, last) backwards. `delta_last` seeds the last
// layer; gradients accumulate into `grads`; the gradient w.r.t. the segment
// input is accumulated into `into` when given.
template <typename T>
void segment_backward(const Net<T>& net, const Activations<T>& acts, int first, int last,
                      Gradients<T>& grads, BackwardScratch<T>& ws, std::vector<T>* into) {
    for (int i = last - 1; i >= first; --i) {
        const bool at_first = (i == first);
        std::vector<T>* prev =
            at_first ? into : &ws.delta[static_cast<size_t>(i - 1)];
        detail::layer_backward<T>(net.layers[static_cast<size_t>(i)], layer_input(net, acts, i),
                                  acts.pre[static_cast<size_t>(i)],
                                  ws.delta[static_cast<size_t>(i)], prev,
                                  grads.weights[static_cast<size_t>(i)],
                                  grads.biases[static_cast<size_t>(i)],
                                  at_first && into != nullptr);
    }
}

} // namespace detail

// Reverse-mode gradients for the scalar loss whose output gradient is
// `out_grad`. Expected layout: single head -> d(loss)/dQ per action;
// two-stream heads -> [d(loss)/dV, d(loss)/d(stream2 output)...]. Gradients
// accumulate into `grads`, which must be zeroed or pre-loaded by the caller.
template <typename T>
void backward_into(const Net<T>& net, const Activations<T>& acts,
                   std::span<const T> out_grad, Gradients<T>& grads,
                   BackwardScratch<T>& ws) {
    ws.delta.resize(net.layers.size());
    const int n_layers = net.layer_count();

    if (net.head == Head::single) {
        const int out_w = net.layers.back().spec.output_width;
        if (static_cast<int>(out_grad.size()) != out_w)
            throw NetError("output gradient length mismatch");
        ws.delta[static_cast<size_t>(n_layers - 1)].assign(out_grad.begin(), out_grad.end());
        detail::segment_backward(net, acts, 0, n_layers, grads, ws,
                                 static_cast<std::vector<T>*>(nullptr));
        return;
    }

    const int n_actions = net.num_actions();
    if (static_cast<int>(out_grad.size()) != 1 + n_actions)
        throw NetError("output gradient length mismatch");

    const int trunk_len = net.trunk_len();
    const int value_end = net.value_end();
    const int trunk_out = trunk_len > 0
        ? net.layers[static_cast<size_t>(trunk_len - 1)].spec.output_width
        : net.input_width();

    ws.trunk_grad.assign(static_cast<size_t>(trunk_out), T(0));
    std::vector<T>* join = trunk_len > 0 ? &ws.trunk_grad : nullptr;

    ws.delta[static_cast<size_t>(value_end - 1)].assign(out_grad.begin(), out_grad.begin() + 1);
    detail::segment_backward(net, acts, trunk_len, value_end, grads, ws, join);

    ws.delta[static_cast<size_t>(n_layers - 1)].assign(out_grad.begin() + 1, out_grad.end());
    detail::segment_backward(net, acts, value_end, n_layers, grads, ws, join);

    if (trunk_len > 0) {
        ws.delta[static_cast<size_t>(trunk_len - 1)] = ws.trunk_grad;
        // trunk's last delta is w.r.t. its post-activation; walk the trunk
        detail::segment_backward(net, acts, 0, trunk_len, grads, ws,
                                 static_cast<std::vector<T>*>(nullptr));
    }
}

template <typename T>
Gradients<T> backward(const Net<T>& net, const Activations<T>& acts,
                      std::span<const T> out_grad) {
    Gradients<T> grads;
    grads.zero_like(net);
    BackwardScratch<T> ws;
    backward_into(net, acts, out_grad, grads, ws);
    return grads;
}

template <typename T, typename U>
Net<U> convert(const Net<T>& net) {
    Net<U> out;
    out.head = net.head;
    out.layout = net.layout;
    out.layers.resize(net.layers.size());
    for (size_t i = 0; i < net.layers.size(); ++i) {
        out.layers[i].spec = net.layers[i].spec;
        out.layers[i].weights.assign(net.layers[i].weights.begin(), net.layers[i].weights.end());
        out.layers[i].biases.assign(net.layers[i].biases.begin(), net.layers[i].biases.end());
    }
    return out;
}

template <typename T>
bool operator==(const Net<T>& a, const Net<T>& b) {
    if (a.head != b.head || a.layers.size() != b.layers.size()) return false;
    for (size_t i = 0; i < a.layers.size(); ++i) {
        if (a.layers[i].spec.input_width != b.layers[i].spec.input_width ||
            a.layers[i].spec.output_width != b.layers[i].spec.output_width ||
            a.layers[i].spec.activation != b.layers[i].spec.activation ||
            a.layers[i].weights != b.layers[i].weights ||
            a.layers[i].biases != b.layers[i].biases)
            return false;
    }
    return true;
}

} // namespace dodgerl::nn
