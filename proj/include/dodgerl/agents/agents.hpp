#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dodgerl/nn/gradcheck.hpp"
#include "dodgerl/nn/network.hpp"
#include "dodgerl/nn/rmsprop.hpp"
#include "dodgerl/replay.hpp"
#include "dodgerl/rng.hpp"

namespace dodgerl::agents {

using nn::dueling_aggregate;

enum class AgentKind : uint8_t { dqn = 0, double_dqn = 1, dueling_dqn = 2, a3c = 3 };

inline nn::Head head_for(AgentKind kind) {
    switch (kind) {
    case AgentKind::dueling_dqn: return nn::Head::dueling;
    case AgentKind::a3c: return nn::Head::actor_critic;
    default: return nn::Head::single;
    }
}

inline const char* agent_name(AgentKind kind) {
    switch (kind) {
    case AgentKind::dqn: return "dqn";
    case AgentKind::double_dqn: return "double";
    case AgentKind::dueling_dqn: return "dueling";
    default: return "a3c";
    }
}

// Linear decay from start to end over anneal_steps, constant afterwards.
struct EpsilonSchedule {
    float start = 1.0f;
    float end = 0.1f;
    int64_t anneal_steps = 1;
};

inline float epsilon_at(const EpsilonSchedule& sched, int64_t step) {
    if (step >= sched.anneal_steps) return sched.end;
    const float frac = static_cast<float>(step) / static_cast<float>(sched.anneal_steps);
    return sched.start + (sched.end - sched.start) * frac;
}

inline std::vector<float> softmax(std::span<const float> logits) {
    float peak = logits[0];
    for (float v : logits) peak = std::max(peak, v);
    std::vector<float> p(logits.size());
    float sum = 0.0f;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - peak);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

inline int argmax_lowest_tie(std::span<const float> v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[static_cast<size_t>(i)] > v[static_cast<size_t>(best)]) best = i;
    return best;
}

// Epsilon-greedy over Q for value heads; actor-critic heads sample from the
// softmax of the logits and ignore epsilon. Ties break toward the lowest
// action index. epsilon == 0 consumes no randomness.
inline int select_action(const nn::Netf& net, std::span<const float> state, float epsilon,
                         Rng& rng) {
    const auto acts = nn::forward(net, state);
    if (net.head == nn::Head::actor_critic) {
        const auto p = softmax(nn::head_vector(net, acts));
        double u = rng.real01();
        for (size_t a = 0; a + 1 < p.size(); ++a) {
            u -= p[a];
            if (u < 0.0) return static_cast<int>(a);
        }
        return static_cast<int>(p.size()) - 1;
    }
    if (epsilon > 0.0f && rng.real01() < epsilon)
        return static_cast<int>(rng.below(static_cast<uint32_t>(net.num_actions())));
    const auto q = nn::q_values(net, acts);
    return argmax_lowest_tie(q);
}

// r + gamma * max_a' Q_target(s', a'), with terminal transitions truncated
// to the raw reward.
inline std::vector<float> compute_targets_dqn(std::span<const Transition> batch,
                                              const nn::Netf& target, float gamma) {
    std::vector<float> out;
    out.reserve(batch.size());
    nn::Activations<float> acts;
    for (const auto& t : batch) {
        if (t.terminal) {
            out.push_back(t.reward);
            continue;
        }
        nn::forward_into(target, std::span<const float>(t.next_state), acts);
        const auto q = nn::q_values(target, acts);
        out.push_back(t.reward + gamma * q[static_cast<size_t>(argmax_lowest_tie(q))]);
    }
    return out;
}

// Double DQN target: the online network picks the bootstrap action, the
// target network scores it.
inline std::vector<float> compute_targets_double(std::span<const Transition> batch,
                                                 const nn::Netf& online,
                                                 const nn::Netf& target, float gamma) {
    std::vector<float> out;
    out.reserve(batch.size());
    nn::Activations<float> acts;
    for (const auto& t : batch) {
        if (t.terminal) {
            out.push_back(t.reward);
            continue;
        }
        nn::forward_into(online, std::span<const float>(t.next_state), acts);
        const int pick = argmax_lowest_tie(nn::q_values(online, acts));
        nn::forward_into(target, std::span<const float>(t.next_state), acts);
        out.push_back(t.reward +
                      gamma * nn::q_values(target, acts)[static_cast<size_t>(pick)]);
    }
    return out;
}

struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Online/target network pair plus optimizer state. The target is a frozen
// copy refreshed every target_sync_every accepted steps.
struct TrainState {
    nn::Netf online;
    nn::Netf target;
    nn::OptStatef opt;
    int64_t step = 0;
    float gamma = 0.99f;
    float lr = 0.00025f;
    int64_t target_sync_every = 10000;
    float entropy_weight = 0.01f;

    // reusable scratch, not part of the logical state
    nn::Activations<float> acts;
    nn::Gradients<float> grads;
    nn::BackwardScratch<float> scratch;

    static TrainState make(nn::Netf net, float gamma, float lr, int64_t sync_every,
                           float rms_decay = 0.95f, float rms_eps = 1e-6f,
                           float entropy_weight = 0.01f) {
        TrainState ts;
        ts.target = net;
        ts.online = std::move(net);
        ts.opt = nn::OptStatef::like(ts.online, rms_decay, rms_eps);
        ts.gamma = gamma;
        ts.lr = lr;
        ts.target_sync_every = sync_every;
        ts.entropy_weight = entropy_weight;
        return ts;
    }

    void finish_step() {
        ++step;
        if (target_sync_every > 0 && step % target_sync_every == 0) target = online;
    }
};

namespace detail {

// Output gradient of Q[action] scaled by g, expressed in backward()'s raw
// head layout. For dueling heads the aggregation chain rule gives
// dV = g and dA_j = g * (1{j==action} - 1/n).
inline void q_out_grad(const nn::Netf& net, int action, float g, std::vector<float>& out) {
    const int n = net.num_actions();
    if (net.head == nn::Head::single) {
        out.assign(static_cast<size_t>(n), 0.0f);
        out[static_cast<size_t>(action)] = g;
        return;
    }
    out.assign(static_cast<size_t>(n) + 1, 0.0f);
    out[0] = g;
    const float share = g / static_cast<float>(n);
    for (int j = 0; j < n; ++j)
        out[static_cast<size_t>(j) + 1] = (j == action ? g : 0.0f) - share;
}

} // namespace detail

// One optimizer step on the squared TD error of a batch. The per-sample
// error is clipped to [-1, 1] before backprop; only the taken action's
// output carries gradient. Returns the mean (unclipped) squared TD error.
// A non-finite batch throws TrainError and leaves the state untouched.
inline float train_batch(TrainState& ts, AgentKind kind, std::span<const Transition> batch) {
    if (batch.empty()) throw TrainError("empty training batch");
    if (kind == AgentKind::a3c) throw TrainError("a3c batches go through a3c_update");

    const std::vector<float> targets =
        kind == AgentKind::double_dqn
            ? compute_targets_double(batch, ts.online, ts.target, ts.gamma)
            : compute_targets_dqn(batch, ts.target, ts.gamma);

    ts.grads.zero_like(ts.online);
    std::vector<float> out_grad;
    float loss = 0.0f;
    for (size_t i = 0; i < batch.size(); ++i) {
        nn::forward_into(ts.online, std::span<const float>(batch[i].state), ts.acts);
        const auto q = nn::q_values(ts.online, ts.acts);
        const float delta = q[batch[i].action] - targets[i];
        if (!std::isfinite(delta)) throw TrainError("non-finite TD error; batch skipped");
        loss += delta * delta;
        detail::q_out_grad(ts.online, batch[i].action, std::clamp(delta, -1.0f, 1.0f),
                           out_grad);
        nn::backward_into(ts.online, ts.acts, std::span<const float>(out_grad), ts.grads,
                          ts.scratch);
    }
    ts.grads.scale(1.0f / static_cast<float>(batch.size()));
    nn::rmsprop_step(ts.online, ts.grads, ts.opt, ts.lr);
    ts.finish_step();
    return loss / static_cast<float>(batch.size());
}

struct A3CStats {
    float policy_loss = 0.0f;
    float value_loss = 0.0f;
    float entropy = 0.0f;
};

// Replay-based actor-critic update with a fixed target network for the
// bootstrap value. Per sample, with adv = (terminal ? r : r + g*V_target(s'))
// - V(s) treated as a constant for the policy term:
//   value loss   0.5 * adv^2            (gradient -adv into V)
//   policy loss  -log pi(a|s) * adv - entropy_weight * H(pi)
inline A3CStats a3c_update(TrainState& ts, std::span<const Transition> batch) {
    if (batch.empty()) throw TrainError("empty training batch");
    if (ts.online.head != nn::Head::actor_critic)
        throw TrainError("a3c_update needs an actor-critic head");

    const int n = ts.online.num_actions();
    std::vector<float> targets;
    targets.reserve(batch.size());
    for (const auto& t : batch) {
        if (t.terminal) {
            targets.push_back(t.reward);
        } else {
            nn::forward_into(ts.target, std::span<const float>(t.next_state), ts.acts);
            targets.push_back(t.reward + ts.gamma * nn::head_value(ts.target, ts.acts));
        }
    }

    ts.grads.zero_like(ts.online);
    std::vector<float> out_grad(static_cast<size_t>(n) + 1);
    A3CStats stats;
    for (size_t i = 0; i < batch.size(); ++i) {
        nn::forward_into(ts.online, std::span<const float>(batch[i].state), ts.acts);
        const float v = nn::head_value(ts.online, ts.acts);
        const auto pi = softmax(nn::head_vector(ts.online, ts.acts));
        const float adv = targets[i] - v;
        if (!std::isfinite(adv)) throw TrainError("non-finite advantage; batch skipped");

        float entropy = 0.0f;
        for (float p : pi)
            if (p > 0.0f) entropy -= p * std::log(p);

        const int a = batch[i].action;
        stats.value_loss += 0.5f * adv * adv;
        stats.policy_loss += -std::log(std::max(pi[static_cast<size_t>(a)], 1e-12f)) * adv -
                             ts.entropy_weight * entropy;
        stats.entropy += entropy;

        // d(value loss)/dV = -adv; policy term sees adv as a constant.
        out_grad[0] = -adv;
        for (int k = 0; k < n; ++k) {
            const float pk = pi[static_cast<size_t>(k)];
            const float d_policy = adv * (pk - (k == a ? 1.0f : 0.0f));
            // dH/dlogit_k = -p_k (log p_k + H); loss carries -entropy_weight*H
            const float d_entropy =
                ts.entropy_weight * pk * (std::log(std::max(pk, 1e-12f)) + entropy);
            out_grad[static_cast<size_t>(k) + 1] = d_policy + d_entropy;
        }
        nn::backward_into(ts.online, ts.acts, std::span<const float>(out_grad), ts.grads,
                          ts.scratch);
    }

    const float inv = 1.0f / static_cast<float>(batch.size());
    ts.grads.scale(inv);
    nn::rmsprop_step(ts.online, ts.grads, ts.opt, ts.lr);
    ts.finish_step();
    stats.policy_loss *= inv;
    stats.value_loss *= inv;
    stats.entropy *= inv;
    return stats;
}

// Uniform dispatch for the training loop: value heads use train_batch, the
// actor-critic uses a3c_update. Returns the scalar loss the log records.
inline float train_dispatch(TrainState& ts, AgentKind kind, std::span<const Transition> batch) {
    if (kind == AgentKind::a3c) {
        const auto s = a3c_update(ts, batch);
        return s.policy_loss + s.value_loss;
    }
    return train_batch(ts, kind, batch);
}

} // namespace dodgerl::agents
