// Plays one arena episode and prints a frame-by-frame ASCII strip, either
// with the built-in perfect-timing policy or a trained snapshot:
//
//   play_episode [level] [seed] [path/to/model.drlm]

#include <iostream>
#include <string>

#include "dodgerl/arena/arena.hpp"
#include "dodgerl/distrib/snapshot.hpp"
#include "dodgerl/metrics/metrics.hpp"

using namespace dodgerl;

namespace {

std::string strip(const arena::ArenaState& st) {
    constexpr int width = 64;
    std::string row(width, '.');
    const auto column = [&](float x) {
        const float half = st.cfg.stage_half_width + st.cfg.offstage_margin;
        int c = static_cast<int>((x + half) / (2 * half) * (width - 1));
        return std::clamp(c, 0, width - 1);
    };
    const bool dodging = st.agent.action_state >= arena::ActionState::dodge_left &&
                         st.agent.action_state <= arena::ActionState::dodge_stand;
    const char agent = dodging ? 'd' : 'A';
    char opp = 'O';
    if (st.brain.phase == arena::OpponentPhase::attacking) opp = '!';
    if (st.brain.phase == arena::OpponentPhase::stunned) opp = '*';
    row[static_cast<size_t>(column(st.opponent.x))] = opp;
    row[static_cast<size_t>(column(st.agent.x))] = agent;
    return row;
}

const char* action_name(arena::AgentAction a) {
    switch (a) {
    case arena::AgentAction::nothing: return "wait";
    case arena::AgentAction::dodge_stand: return "dodge";
    case arena::AgentAction::dodge_left: return "dodge<";
    case arena::AgentAction::dodge_right: return "dodge>";
    default: return "shine";
    }
}

} // namespace

int main(int argc, char** argv) {
    const int level = argc > 1 ? std::stoi(argv[1]) : 9;
    const uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 1;

    metrics::Policy policy;
    if (argc > 3) {
        const auto model = distrib::deserialize_model(distrib::read_file(argv[3]));
        std::cout << "policy: " << agents::agent_name(model.kind) << " snapshot, step "
                  << model.step << "\n";
        policy = metrics::net_policy(model.net, 0.0f, true);
    } else {
        std::cout << "policy: built-in perfect timing\n";
        policy = [](const arena::ArenaState& st, Rng&) { return arena::perfect_timing_policy(st); };
    }

    arena::ArenaConfig cfg;
    arena::ArenaState st = arena::reset(cfg, level, seed);
    Rng policy_rng(seed ^ 0xD0D6E);
    float total = 0.0f;
    bool terminal = false;
    while (!terminal && st.frame < 3600) {
        const arena::AgentAction action = policy(st, policy_rng);
        const float reward = arena::step(st, action, &terminal);
        total += reward;
        if (st.frame % 6 == 0 || terminal)
            std::cout << strip(st) << "  f" << st.frame << " " << action_name(action)
                      << (terminal ? "  [hit]" : "") << "\n";
    }
    std::cout << "level " << level << ", survived " << st.frame << " frames ("
              << st.frame / 60.0 << " s), reward " << total << "\n";
    return 0;
}
