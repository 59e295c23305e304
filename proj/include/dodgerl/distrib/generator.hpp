#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dodgerl/agents/agents.hpp"
#include "dodgerl/arena/arena.hpp"
#include "dodgerl/replay.hpp"
#include "dodgerl/rng.hpp"

namespace dodgerl::distrib {

// Personal rng stream per worker: identical (seed, worker_id) pairs replay
// identically, distinct workers never share a stream.
inline uint64_t worker_seed(uint64_t seed, uint32_t worker_id) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (worker_id + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct GeneratorConfig {
    arena::ArenaConfig arena;
    double level9_prob = 0.7;
    double frame_skip = 0.0;
    int64_t episode_cap = 0; // 0 = episodes end only on terminal
    agents::EpsilonSchedule epsilon;
};

// Rolls gameplay under a frozen policy network. Episodes continue across
// generate() calls; the recorded action is the agent's choice even when
// frame-skip noise drops it in the simulator.
class SampleGenerator {
public:
    SampleGenerator(GeneratorConfig cfg, uint64_t seed, uint32_t worker_id)
        : cfg_(std::move(cfg)), rng_(worker_seed(seed, worker_id)) {}

    std::vector<Transition> generate(const nn::Netf& net, uint64_t model_step, int count) {
        std::vector<Transition> out;
        out.reserve(static_cast<size_t>(count));
        const float eps =
            agents::epsilon_at(cfg_.epsilon, static_cast<int64_t>(model_step));
        for (int i = 0; i < count; ++i) {
            if (!episode_ || episode_->terminal ||
                (cfg_.episode_cap > 0 && episode_frames_ >= cfg_.episode_cap))
                begin_episode();

            Transition t;
            t.state = arena::encode_state(*episode_);
            t.action = static_cast<uint8_t>(
                agents::select_action(net, std::span<const float>(t.state), eps, rng_));
            const auto played = arena::apply_frame_skip(
                static_cast<arena::AgentAction>(t.action), cfg_.frame_skip, rng_);
            bool done = false;
            t.reward = arena::step(*episode_, played, &done);
            t.next_state = arena::encode_state(*episode_);
            t.terminal = done;
            ++episode_frames_;
            ++total_frames_;
            out.push_back(std::move(t));
        }
        return out;
    }

    int64_t total_frames() const { return total_frames_; }

private:
    void begin_episode() {
        const int level = arena::sample_opponent_level(rng_, cfg_.level9_prob);
        episode_ = arena::reset(cfg_.arena, level, rng_.next_u64());
        episode_frames_ = 0;
    }

    GeneratorConfig cfg_;
    Rng rng_;
    std::optional<arena::ArenaState> episode_;
    int64_t episode_frames_ = 0;
    int64_t total_frames_ = 0;
};

} // namespace dodgerl::distrib
