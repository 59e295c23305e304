#pragma once

#include <fstream>
#include <string>

#include "dodgerl/arena/arena.hpp"

namespace dodgerl::arena {

// Per-frame CSV dump of raw simulator state. Column order is frozen:
// frame, 13 agent fields, 13 opponent fields, action, reward, terminal.
class TrajectoryWriter {
public:
    explicit TrajectoryWriter(const std::string& path) : out_(path) {
        if (!out_) throw ArenaError("cannot open trajectory file: " + path);
        out_ << "frame";
        for (const char* who : {"agent", "opp"})
            out_ << ',' << who << "_x," << who << "_y," << who << "_vx," << who << "_vy,"
                 << who << "_action_state," << who << "_action_frame," << who << "_facing,"
                 << who << "_charging," << who << "_airborne," << who << "_shield," << who
                 << "_jumps_used," << who << "_hitlag," << who << "_damage";
        out_ << ",action,reward,terminal\n";
    }

    void row(const ArenaState& st, AgentAction action, float reward, bool terminal) {
        out_ << st.frame;
        write_fighter(st.agent);
        write_fighter(st.opponent);
        out_ << ',' << static_cast<int>(action) << ',' << reward << ','
             << (terminal ? 1 : 0) << '\n';
    }

private:
    void write_fighter(const FighterState& f) {
        out_ << ',' << f.x << ',' << f.y << ',' << f.vx << ',' << f.vy << ','
             << static_cast<int>(f.action_state) << ',' << f.action_frame << ',' << f.facing
             << ',' << (f.charging ? 1 : 0) << ',' << (f.airborne ? 1 : 0) << ',' << f.shield
             << ',' << f.jumps_used << ',' << f.hitlag << ',' << f.damage;
    }

    std::ofstream out_;
};

} // namespace dodgerl::arena
