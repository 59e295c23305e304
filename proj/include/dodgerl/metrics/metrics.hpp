#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dodgerl/agents/agents.hpp"
#include "dodgerl/arena/arena.hpp"
#include "dodgerl/arena/trajectory.hpp"
#include "dodgerl/nn/network.hpp"
#include "dodgerl/rng.hpp"

namespace dodgerl::metrics {

struct MetricsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fixed evaluation-state pool sampled before training ever starts. `levels`
// records which opponent level produced each state.
struct HoldoutSet {
    uint64_t seed = 0;
    std::vector<std::vector<float>> states;
    std::vector<uint8_t> levels;
};

// Reservoir-sample `n` encoded states from a uniform-random policy played
// across `episodes` episodes at the usual opponent-level mix.
inline HoldoutSet build_holdout(const arena::ArenaConfig& cfg, int n, uint64_t seed,
                                int episodes = 64, double level9_prob = 0.7) {
    if (n < 1) throw MetricsError("holdout size must be positive");
    HoldoutSet hs;
    hs.seed = seed;
    hs.states.reserve(static_cast<size_t>(n));
    hs.levels.reserve(static_cast<size_t>(n));
    Rng rng(seed);
    uint64_t seen = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        const int level = arena::sample_opponent_level(rng, level9_prob);
        auto st = arena::reset(cfg, level, rng.next_u64());
        bool done = false;
        for (int f = 0; f < 3600 && !done; ++f) {
            auto enc = arena::encode_state(st);
            ++seen;
            if (hs.states.size() < static_cast<size_t>(n)) {
                hs.states.push_back(std::move(enc));
                hs.levels.push_back(static_cast<uint8_t>(level));
            } else {
                const uint64_t slot = rng.next_u64() % seen;
                if (slot < static_cast<uint64_t>(n)) {
                    hs.states[static_cast<size_t>(slot)] = std::move(enc);
                    hs.levels[static_cast<size_t>(slot)] = static_cast<uint8_t>(level);
                }
            }
            arena::step(st, static_cast<arena::AgentAction>(rng.below(arena::kNumActions)),
                        &done);
        }
    }
    if (hs.states.size() < static_cast<size_t>(n))
        throw MetricsError("holdout sampling produced fewer states than requested");
    return hs;
}

// Mean over the holdout of max_a Q(s, a); actor-critic networks report the
// mean state value instead.
inline double mean_max_q(const nn::Netf& net, const HoldoutSet& hs) {
    if (hs.states.empty()) throw MetricsError("empty holdout set");
    nn::Activations<float> acts;
    double total = 0.0;
    for (const auto& s : hs.states) {
        nn::forward_into(net, std::span<const float>(s), acts);
        if (net.head == nn::Head::actor_critic) {
            total += nn::head_value(net, acts);
        } else {
            const auto q = nn::q_values(net, acts);
            total += *std::max_element(q.begin(), q.end());
        }
    }
    return total / static_cast<double>(hs.states.size());
}

struct LevelStats {
    int64_t episodes = 0;
    int64_t survived = 0;
    double total_length = 0.0;
    double total_reward = 0.0;
};

struct EvalReport {
    int64_t episodes = 0;
    double mean_length = 0.0;
    double median_length = 0.0;
    double mean_reward = 0.0;
    double survival_rate_60s = 0.0;
    std::map<int, LevelStats> per_level;
    std::vector<int> lengths; // per-episode, for downstream aggregation
};

using Policy = std::function<arena::AgentAction(const arena::ArenaState&, Rng&)>;

struct EvalOptions {
    int level = 9;
    int episodes = 200;
    uint64_t seed = 1;
    int cap_frames = 3600;
    double frame_skip = 0.0;
};

// Run `episodes` capped episodes of `policy` and aggregate the standard
// reporting statistics. Deterministic under (options.seed, policy).
inline EvalReport evaluate_policy(const Policy& policy, const arena::ArenaConfig& cfg,
                                  const EvalOptions& opt,
                                  arena::TrajectoryWriter* recorder = nullptr) {
    if (opt.episodes < 1) throw MetricsError("episode count must be positive");
    EvalReport rep;
    LevelStats& stats = rep.per_level[opt.level];
    Rng rng(opt.seed);
    for (int ep = 0; ep < opt.episodes; ++ep) {
        auto st = arena::reset(cfg, opt.level, rng.next_u64());
        bool done = false;
        double reward = 0.0;
        int frames = 0;
        while (frames < opt.cap_frames && !done) {
            auto action = policy(st, rng);
            action = arena::apply_frame_skip(action, opt.frame_skip, rng);
            const float r = arena::step(st, action, &done);
            reward += r;
            ++frames;
            if (recorder) recorder->row(st, action, r, done);
        }
        ++stats.episodes;
        if (!done) ++stats.survived;
        stats.total_length += frames;
        stats.total_reward += reward;
        rep.lengths.push_back(frames);
    }
    rep.episodes = stats.episodes;
    rep.mean_length = stats.total_length / static_cast<double>(stats.episodes);
    rep.mean_reward = stats.total_reward / static_cast<double>(stats.episodes);
    rep.survival_rate_60s =
        static_cast<double>(stats.survived) / static_cast<double>(stats.episodes);
    auto sorted = rep.lengths;
    std::sort(sorted.begin(), sorted.end());
    const size_t m = sorted.size() / 2;
    rep.median_length = sorted.size() % 2 == 1
                            ? sorted[m]
                            : (sorted[m - 1] + sorted[m]) / 2.0;
    return rep;
}

// Network-backed policy: value heads act epsilon-greedily; the actor-critic
// samples its softmax (or takes the argmax logit when greedy).
inline Policy net_policy(const nn::Netf& net, float epsilon, bool greedy) {
    return [&net, epsilon, greedy](const arena::ArenaState& st, Rng& rng) {
        const auto enc = arena::encode_state(st);
        if (greedy && net.head == nn::Head::actor_critic) {
            const auto acts = nn::forward(net, std::span<const float>(enc));
            const auto logits = nn::head_vector(net, acts);
            return static_cast<arena::AgentAction>(agents::argmax_lowest_tie(logits));
        }
        const float eps = greedy ? 0.0f : epsilon;
        return static_cast<arena::AgentAction>(
            agents::select_action(net, std::span<const float>(enc), eps, rng));
    };
}

inline EvalReport evaluate(const nn::Netf& net, const arena::ArenaConfig& cfg,
                           const EvalOptions& opt, bool greedy, float epsilon = 0.05f,
                           arena::TrajectoryWriter* recorder = nullptr) {
    return evaluate_policy(net_policy(net, epsilon, greedy), cfg, opt, recorder);
}

inline void write_report_csv(const EvalReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MetricsError("cannot open report file: " + path);
    out << "level,episodes,survived,survival_rate_60s,mean_length_frames,mean_reward\n";
    for (const auto& [level, s] : rep.per_level) {
        const double n = static_cast<double>(s.episodes);
        out << level << ',' << s.episodes << ',' << s.survived << ','
            << static_cast<double>(s.survived) / n << ',' << s.total_length / n << ','
            << s.total_reward / n << '\n';
    }
    out << "all," << rep.episodes << ','
        << static_cast<int64_t>(rep.survival_rate_60s * static_cast<double>(rep.episodes) + 0.5)
        << ',' << rep.survival_rate_60s << ',' << rep.mean_length << ',' << rep.mean_reward
        << '\n';
}

inline void print_report(const EvalReport& rep, std::ostream& out) {
    out << "episodes:          " << rep.episodes << '\n'
        << "mean length:       " << rep.mean_length << " frames ("
        << rep.mean_length / 60.0 << " s)\n"
        << "median length:     " << rep.median_length << " frames\n"
        << "mean reward:       " << rep.mean_reward << '\n'
        << "survival (60 s):   " << rep.survival_rate_60s * 100.0 << "%\n";
    for (const auto& [level, s] : rep.per_level)
        out << "  level " << level << ": " << s.survived << '/' << s.episodes
            << " survived, mean length "
            << s.total_length / static_cast<double>(s.episodes) << '\n';
}

} // namespace dodgerl::metrics
