#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dodgerl/rng.hpp"

namespace dodgerl::arena {

struct ArenaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ActionState : uint8_t {
    idle = 0,
    dodge_left = 1,
    dodge_right = 2,
    dodge_stand = 3,
    shine = 4,
    attack_windup = 5,
    attack_active = 6,
    attack_recover = 7,
    hitstun = 8,
};

enum class AgentAction : uint8_t {
    nothing = 0,
    dodge_left = 1,
    dodge_right = 2,
    dodge_stand = 3,
    shine = 4,
};

inline constexpr int kNumActions = 5;

enum class AttackKind : uint8_t { thrust = 0, slash = 1, grab = 2 };

// Frame data for one opponent attack. `trigger_range` is the distance at
// which the opponent commits; `reach` is the hitbox extent while active;
// `lunge` is forward travel per active frame. Grabs power through shine.
struct AttackSpec {
    int windup = 0;
    int active = 0;
    int recover = 0;
    float trigger_range = 0.0f;
    float reach = 0.0f;
    float lunge = 0.0f;
    float damage = 0.0f;
    bool beats_shine = false;
};

// All tunable simulator constants. Defaults approximate published Melee
// frame data where one exists; everything else is this simulator's design.
struct ArenaConfig {
    float stage_half_width = 85.0f;
    float offstage_margin = 10.0f; // |x| beyond half-width + margin ends the episode
    float spawn_x = 40.0f;

    int dodge_frames = 29;
    int iframe_start = 4;
    int iframe_end = 19;
    float dodge_distance = 12.0f;

    int shine_frames = 21;
    int shine_active_start = 1;
    int shine_active_end = 8;
    float shine_radius = 10.0f;
    float shine_push = 15.0f;
    int shine_hitstun = 9;
    float shine_damage = 5.0f;

    float damage_cap = 150.0f;
    int initial_cooldown = 45; // grace period before the opponent's first cycle
    int telegraph_base = 10;   // baseline windup length attacks derive from
};

inline AttackSpec attack_spec(AttackKind kind, const ArenaConfig& cfg) {
    switch (kind) {
    case AttackKind::thrust:
        return {cfg.telegraph_base + 4, 6, 14, 34.0f, 20.0f, 3.0f, 17.0f, false};
    case AttackKind::slash:
        return {cfg.telegraph_base, 8, 12, 12.0f, 14.0f, 0.0f, 12.0f, false};
    default: // grab: shortest windup, shortest reach, ignores shine
        return {cfg.telegraph_base - 3, 4, 16, 7.0f, 9.0f, 0.0f, 5.0f, true};
    }
}

// Script parameters for one difficulty level. Higher levels react faster,
// walk faster, and attack more often; the attack mix stays constant.
struct OpponentProfile {
    int level = 1;
    int reaction_delay = 0;
    int cooldown_min = 0;
    int cooldown_max = 0;
    float approach_speed = 0.0f;
    float p_thrust = 0.45f;
    float p_slash = 0.35f;
    float p_grab = 0.20f;
    int telegraph_frames = 10;
};

inline OpponentProfile opponent_profile(int level, const ArenaConfig& cfg) {
    if (level < 1 || level > 9) throw ArenaError("opponent level must be in [1, 9]");
    OpponentProfile p;
    p.level = level;
    p.reaction_delay = 24 - 2 * level;
    p.cooldown_min = 76 - 6 * level;
    p.cooldown_max = 118 - 8 * level;
    p.approach_speed = 0.40f + 0.15f * static_cast<float>(level);
    p.telegraph_frames = cfg.telegraph_base;
    return p;
}

struct FighterState {
    float x = 0.0f;
    float y = 0.0f;
    float vx = 0.0f;
    float vy = 0.0f;
    ActionState action_state = ActionState::idle;
    int action_frame = 0;
    int facing = 1; // +1 right, -1 left
    bool charging = false;
    bool airborne = false;
    float shield = 60.0f;
    int jumps_used = 0;
    int hitlag = 0;
    float damage = 0.0f;

    bool operator==(const FighterState&) const = default;
};

enum class OpponentPhase : uint8_t { cooling = 0, approaching = 1, aiming = 2, attacking = 3, stunned = 4 };

struct OpponentBrain {
    OpponentPhase phase = OpponentPhase::cooling;
    int timer = 0;        // frames left in cooling/aiming/stunned
    int attack_clock = 0; // frames since the current attack's windup began
    AttackKind attack = AttackKind::thrust;

    bool operator==(const OpponentBrain&) const = default;
};

struct ArenaState {
    ArenaConfig cfg;
    FighterState agent;
    FighterState opponent;
    OpponentBrain brain;
    int64_t frame = 0;
    int opponent_level = 1;
    Rng rng;
    bool terminal = false;
};

inline ArenaState reset(const ArenaConfig& cfg, int level, uint64_t seed) {
    if (level < 1 || level > 9) throw ArenaError("opponent level must be in [1, 9]");
    ArenaState st;
    st.cfg = cfg;
    st.opponent_level = level;
    st.agent.x = -cfg.spawn_x;
    st.agent.facing = 1;
    st.opponent.x = cfg.spawn_x;
    st.opponent.facing = -1;
    st.brain.phase = OpponentPhase::cooling;
    st.brain.timer = cfg.initial_cooldown;
    st.rng = Rng(seed);
    return st;
}

namespace detail {

inline bool is_dodge(ActionState s) {
    return s == ActionState::dodge_left || s == ActionState::dodge_right ||
           s == ActionState::dodge_stand;
}

inline AttackKind pick_attack(const OpponentProfile& prof, Rng& rng) {
    const double u = rng.real01();
    if (u < prof.p_thrust) return AttackKind::thrust;
    if (u < prof.p_thrust + prof.p_slash) return AttackKind::slash;
    return AttackKind::grab;
}

inline int draw_cooldown(const OpponentProfile& prof, Rng& rng) {
    return prof.cooldown_min +
           static_cast<int>(rng.below(static_cast<uint32_t>(
               prof.cooldown_max - prof.cooldown_min + 1)));
}

// One frame of the scripted opponent: cool down, walk into trigger range,
// aim for reaction_delay frames, then run the chosen attack's frame data.
// Movement intent lands in opponent.vx and is applied by the caller.
inline void opponent_think(ArenaState& st) {
    FighterState& opp = st.opponent;
    OpponentBrain& brain = st.brain;
    const OpponentProfile prof = opponent_profile(st.opponent_level, st.cfg);
    const float dx = st.agent.x - opp.x;
    opp.facing = dx < 0.0f ? -1 : 1;
    opp.vx = 0.0f;
    opp.charging = false;

    switch (brain.phase) {
    case OpponentPhase::cooling:
        opp.action_state = ActionState::idle;
        ++opp.action_frame;
        if (--brain.timer <= 0) {
            brain.phase = OpponentPhase::approaching;
            brain.attack = pick_attack(prof, st.rng);
        }
        break;
    case OpponentPhase::approaching: {
        opp.action_state = ActionState::idle;
        ++opp.action_frame;
        const AttackSpec spec = attack_spec(brain.attack, st.cfg);
        if (std::fabs(dx) <= spec.trigger_range) {
            brain.phase = OpponentPhase::aiming;
            brain.timer = prof.reaction_delay;
        } else {
            opp.vx = prof.approach_speed * static_cast<float>(opp.facing);
        }
        break;
    }
    case OpponentPhase::aiming:
        opp.action_state = ActionState::idle;
        ++opp.action_frame;
        if (--brain.timer <= 0) {
            brain.phase = OpponentPhase::attacking;
            brain.attack_clock = 0;
            opp.action_state = ActionState::attack_windup;
            opp.action_frame = 0;
            opp.charging = true;
        }
        break;
    case OpponentPhase::attacking: {
        const AttackSpec spec = attack_spec(brain.attack, st.cfg);
        const int k = ++brain.attack_clock;
        if (k < spec.windup) {
            opp.action_state = ActionState::attack_windup;
            opp.action_frame = k;
            opp.charging = true;
        } else if (k < spec.windup + spec.active) {
            opp.action_state = ActionState::attack_active;
            opp.action_frame = k - spec.windup;
            if (spec.lunge > 0.0f) opp.vx = spec.lunge * static_cast<float>(opp.facing);
        } else if (k < spec.windup + spec.active + spec.recover) {
            opp.action_state = ActionState::attack_recover;
            opp.action_frame = k - spec.windup - spec.active;
        } else {
            brain.phase = OpponentPhase::cooling;
            brain.timer = draw_cooldown(prof, st.rng);
            opp.action_state = ActionState::idle;
            opp.action_frame = 0;
        }
        break;
    }
    case OpponentPhase::stunned:
        opp.action_state = ActionState::hitstun;
        ++opp.action_frame;
        opp.hitlag = std::max(0, opp.hitlag - 1);
        if (--brain.timer <= 0) {
            brain.phase = OpponentPhase::cooling;
            brain.timer = draw_cooldown(prof, st.rng);
            opp.action_state = ActionState::idle;
            opp.action_frame = 0;
            opp.hitlag = 0;
        }
        break;
    }
}

} // namespace detail

// Advance exactly one frame (1/60 s). Frame order: agent action intake
// (ignored while mid-animation), opponent script, movement, shine
// resolution, hit resolution, stage bounds, reward. Reward is 1/60 only
// when the agent ends the frame idle with zero damage; the first hit or
// leaving the stage ends the episode.
inline float step(ArenaState& st, AgentAction action, bool* out_terminal = nullptr) {
    if (st.terminal) throw ArenaError("cannot step a terminal arena state");
    const ArenaConfig& cfg = st.cfg;
    ++st.frame;

    FighterState& agent = st.agent;
    FighterState& opp = st.opponent;

    // intake: only an idle agent can start an action
    if (agent.action_state == ActionState::idle && action != AgentAction::nothing) {
        agent.action_frame = 0;
        switch (action) {
        case AgentAction::dodge_left:
            agent.action_state = ActionState::dodge_left;
            agent.vx = -cfg.dodge_distance / static_cast<float>(cfg.dodge_frames);
            break;
        case AgentAction::dodge_right:
            agent.action_state = ActionState::dodge_right;
            agent.vx = cfg.dodge_distance / static_cast<float>(cfg.dodge_frames);
            break;
        case AgentAction::dodge_stand:
            agent.action_state = ActionState::dodge_stand;
            agent.vx = 0.0f;
            break;
        default:
            agent.action_state = ActionState::shine;
            agent.vx = 0.0f;
            break;
        }
    }

    detail::opponent_think(st);

    agent.x += agent.vx;
    opp.x += opp.vx;
    opp.x = std::clamp(opp.x, -cfg.stage_half_width, cfg.stage_half_width);

    // shine: radius-10 repulsion active on frames 1-8 of the animation;
    // pushes the opponent back and cancels a non-grab active attack
    if (agent.action_state == ActionState::shine &&
        agent.action_frame >= cfg.shine_active_start &&
        agent.action_frame <= cfg.shine_active_end &&
        std::fabs(opp.x - agent.x) <= cfg.shine_radius) {
        const bool grab_armor = opp.action_state == ActionState::attack_active &&
                                attack_spec(st.brain.attack, cfg).beats_shine;
        if (!grab_armor) {
            const float away = opp.x >= agent.x ? 1.0f : -1.0f;
            opp.x = std::clamp(opp.x + cfg.shine_push * away, -cfg.stage_half_width,
                               cfg.stage_half_width);
            if (opp.action_state == ActionState::attack_active) {
                opp.action_state = ActionState::hitstun;
                opp.action_frame = 0;
                opp.hitlag = cfg.shine_hitstun;
                opp.damage = std::min(opp.damage + cfg.shine_damage, cfg.damage_cap);
                st.brain.phase = OpponentPhase::stunned;
                st.brain.timer = cfg.shine_hitstun;
            }
        }
    }

    // hit resolution: an active attack connects unless the agent sits in
    // dodge invulnerability frames
    if (opp.action_state == ActionState::attack_active) {
        const AttackSpec spec = attack_spec(st.brain.attack, cfg);
        if (std::fabs(agent.x - opp.x) <= spec.reach) {
            const bool invulnerable = detail::is_dodge(agent.action_state) &&
                                      agent.action_frame >= cfg.iframe_start &&
                                      agent.action_frame <= cfg.iframe_end;
            if (!invulnerable) {
                agent.damage = std::min(agent.damage + spec.damage, cfg.damage_cap);
                agent.action_state = ActionState::hitstun;
                agent.action_frame = 0;
                agent.hitlag = cfg.shine_hitstun;
                st.terminal = true;
            }
        }
    }

    if (std::fabs(agent.x) > cfg.stage_half_width + cfg.offstage_margin) st.terminal = true;

    float reward = 0.0f;
    if (!st.terminal && agent.action_state == ActionState::idle && agent.damage == 0.0f)
        reward = 1.0f / 60.0f;

    // agent animation bookkeeping at end of frame
    if (detail::is_dodge(agent.action_state) || agent.action_state == ActionState::shine) {
        const int duration =
            agent.action_state == ActionState::shine ? cfg.shine_frames : cfg.dodge_frames;
        if (++agent.action_frame >= duration) {
            agent.action_state = ActionState::idle;
            agent.action_frame = 0;
            agent.vx = 0.0f;
        }
    } else if (agent.action_state == ActionState::idle) {
        ++agent.action_frame;
    }

    if (out_terminal) *out_terminal = st.terminal;
    return reward;
}

inline constexpr int kStateDim = 26;

namespace detail {

inline void encode_fighter(const FighterState& f, std::vector<float>& out) {
    out.push_back(f.x / 100.0f);
    out.push_back(f.y / 50.0f);
    out.push_back(f.vx);
    out.push_back(f.vy);
    out.push_back(static_cast<float>(f.action_state) / 10.0f);
    out.push_back(static_cast<float>(std::min(f.action_frame, 180)) / 60.0f);
    out.push_back(static_cast<float>(f.facing));
    out.push_back(f.charging ? 1.0f : 0.0f);
    out.push_back(f.airborne ? 1.0f : 0.0f);
    out.push_back(f.shield / 60.0f);
    out.push_back(static_cast<float>(f.jumps_used) / 2.0f);
    out.push_back(static_cast<float>(std::min(f.hitlag, 180)) / 60.0f);
    out.push_back(f.damage / 100.0f);
}

} // namespace detail

// Fixed 26-entry feature vector: 13 per fighter, agent first. Order per
// fighter: x/100, y/50, vx, vy, action_state/10, min(action_frame,180)/60,
// facing (+-1), charging, airborne, shield/60, jumps_used/2,
// min(hitlag,180)/60, damage/100. Every entry stays within [-3, 3].
inline std::vector<float> encode_state(const ArenaState& st) {
    std::vector<float> out;
    out.reserve(kStateDim);
    detail::encode_fighter(st.agent, out);
    detail::encode_fighter(st.opponent, out);
    return out;
}

// Level 9 with probability `level9_prob`, the rest spread uniformly over 1-8.
inline int sample_opponent_level(Rng& rng, double level9_prob = 0.7) {
    if (rng.real01() < level9_prob) return 9;
    return 1 + static_cast<int>(rng.below(8));
}

// Emulator input-loss noise: the chosen action is dropped with probability
// p_drop. Disabled (p_drop = 0) consumes no randomness.
inline AgentAction apply_frame_skip(AgentAction action, double p_drop, Rng& rng) {
    if (p_drop <= 0.0) return action;
    return rng.real01() < p_drop ? AgentAction::nothing : action;
}

// Reference policy built from the opponent's telegraphs: standing-dodge the
// instant a windup appears. The dodge invulnerability window covers every
// attack's hit frames, so this survives indefinitely at any level.
inline AgentAction perfect_timing_policy(const ArenaState& st) {
    if (st.agent.action_state != ActionState::idle) return AgentAction::nothing;
    if (st.opponent.action_state == ActionState::attack_windup || st.opponent.charging)
        return AgentAction::dodge_stand;
    return AgentAction::nothing;
}

} // namespace dodgerl::arena
