#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dodgerl/agents/agents.hpp"
#include "dodgerl/arena/arena.hpp"
#include "dodgerl/distrib/generator.hpp"
#include "dodgerl/distrib/pipeline.hpp"
#include "dodgerl/distrib/worker.hpp"

namespace dodgerl::config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every tunable in one flat bag, pre-filled with the full-scale defaults
// from the training recipe. File keys and CLI flags map onto these 1:1.
struct RunConfig {
    std::string agent = "dueling";
    double gamma = 0.99;
    double lr = 0.00025;
    int64_t batch = 32;
    int64_t replay_capacity = 1000000;
    int64_t replay_warmup = 1600; // 50 * batch
    int64_t target_sync_every = 10000;
    double epsilon_start = 1.0;
    double epsilon_end = 0.1;
    double epsilon_anneal_fraction = 0.25;
    double entropy_weight = 0.01;
    int64_t total_training_steps = 200000;

    int64_t hidden1 = 128; // single-head hidden widths
    int64_t hidden2 = 256;
    int64_t shared_width = 128; // two-stream trunk / stream widths
    int64_t stream_width = 512;

    double level9_prob = 0.7;
    double frame_skip_prob = 0.0;
    int64_t dodge_frames = 29;
    int64_t iframe_start = 4;
    int64_t iframe_end = 19;
    int64_t shine_frames = 21;
    int64_t episode_cap_frames = 0; // training generation only; 0 = uncapped

    int64_t samples_per_upload = 5400;
    int64_t train_batches_per_upload = 100;
    int64_t snapshot_every_uploads = 15;
    std::string listen_address = "127.0.0.1:7777";
    std::string connect_address = "127.0.0.1:7777";
    int64_t workers = 50;
    int64_t worker_id = 1;
    int64_t worker_max_attempts = 8;
    int64_t worker_backoff_ms = 1000;

    int64_t eval_level = 9;
    int64_t eval_episodes = 200;
    double eval_epsilon = 0.05;
    int64_t holdout_size = 1000;

    int64_t seed = 1;
    std::string run_dir;

    std::set<std::string> set_keys; // explicitly assigned via file or flag
};

namespace detail {

inline std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

inline int64_t parse_int(const std::string& key, const std::string& value) {
    int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(key + " expects an integer, got: " + value);
    return out;
}

inline double parse_real(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double out = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError(key + " expects a number, got: " + value);
    }
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        const auto str = [&t](const std::string& key, std::string RunConfig::* member) {
            t[key] = {[member](RunConfig& c, const std::string& v) { c.*member = v; },
                      [member](const RunConfig& c) { return c.*member; }};
        };
        const auto integer = [&t](const std::string& key, int64_t RunConfig::* member) {
            t[key] = {[key, member](RunConfig& c, const std::string& v) {
                          c.*member = parse_int(key, v);
                      },
                      [member](const RunConfig& c) { return std::to_string(c.*member); }};
        };
        const auto real = [&t](const std::string& key, double RunConfig::* member) {
            t[key] = {[key, member](RunConfig& c, const std::string& v) {
                          c.*member = parse_real(key, v);
                      },
                      [member](const RunConfig& c) {
                          std::ostringstream os;
                          os << c.*member;
                          return os.str();
                      }};
        };
        str("agent", &RunConfig::agent);
        real("gamma", &RunConfig::gamma);
        real("lr", &RunConfig::lr);
        integer("batch", &RunConfig::batch);
        integer("replay_capacity", &RunConfig::replay_capacity);
        integer("replay_warmup", &RunConfig::replay_warmup);
        integer("target_sync_every", &RunConfig::target_sync_every);
        real("epsilon_start", &RunConfig::epsilon_start);
        real("epsilon_end", &RunConfig::epsilon_end);
        real("epsilon_anneal_fraction", &RunConfig::epsilon_anneal_fraction);
        real("entropy_weight", &RunConfig::entropy_weight);
        integer("total_training_steps", &RunConfig::total_training_steps);
        integer("hidden1", &RunConfig::hidden1);
        integer("hidden2", &RunConfig::hidden2);
        integer("shared_width", &RunConfig::shared_width);
        integer("stream_width", &RunConfig::stream_width);
        real("level9_prob", &RunConfig::level9_prob);
        real("frame_skip_prob", &RunConfig::frame_skip_prob);
        integer("dodge_frames", &RunConfig::dodge_frames);
        integer("iframe_start", &RunConfig::iframe_start);
        integer("iframe_end", &RunConfig::iframe_end);
        integer("shine_frames", &RunConfig::shine_frames);
        integer("episode_cap_frames", &RunConfig::episode_cap_frames);
        integer("samples_per_upload", &RunConfig::samples_per_upload);
        integer("train_batches_per_upload", &RunConfig::train_batches_per_upload);
        integer("snapshot_every_uploads", &RunConfig::snapshot_every_uploads);
        str("listen_address", &RunConfig::listen_address);
        str("connect_address", &RunConfig::connect_address);
        integer("workers", &RunConfig::workers);
        integer("worker_id", &RunConfig::worker_id);
        integer("worker_max_attempts", &RunConfig::worker_max_attempts);
        integer("worker_backoff_ms", &RunConfig::worker_backoff_ms);
        integer("eval_level", &RunConfig::eval_level);
        integer("eval_episodes", &RunConfig::eval_episodes);
        real("eval_epsilon", &RunConfig::eval_epsilon);
        integer("holdout_size", &RunConfig::holdout_size);
        integer("seed", &RunConfig::seed);
        str("run_dir", &RunConfig::run_dir);
        return t;
    }();
    return table;
}

} // namespace detail

inline std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [key, _] : detail::fields()) keys.push_back(key);
    return keys;
}

inline void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = detail::fields();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key: " + key);
    it->second.set(cfg, value);
    cfg.set_keys.insert(key);
}

// Flat `key = value` lines; `#` starts a comment anywhere on a line.
inline void load_config_text(RunConfig& cfg, const std::string& text,
                             const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) +
                                           ": empty key");
        try {
            apply_key(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    load_config_text(cfg, text.str(), path);
}

inline agents::AgentKind agent_kind(const RunConfig& cfg) {
    if (cfg.agent == "dqn") return agents::AgentKind::dqn;
    if (cfg.agent == "double" || cfg.agent == "double_dqn")
        return agents::AgentKind::double_dqn;
    if (cfg.agent == "dueling" || cfg.agent == "dueling_dqn")
        return agents::AgentKind::dueling_dqn;
    if (cfg.agent == "a3c") return agents::AgentKind::a3c;
    throw ConfigError("agent must be one of dqn, double, dueling, a3c; got: " + cfg.agent);
}

inline void validate(const RunConfig& cfg) {
    const agents::AgentKind kind = agent_kind(cfg);
    const bool single = kind == agents::AgentKind::dqn || kind == agents::AgentKind::double_dqn;

    const auto was_set = [&](const char* key) { return cfg.set_keys.count(key) > 0; };
    if (single) {
        for (const char* key : {"shared_width", "stream_width"})
            if (was_set(key))
                throw ConfigError(std::string(key) +
                                  " applies only to dueling/a3c agents (agent = " +
                                  cfg.agent + ")");
        if (was_set("entropy_weight"))
            throw ConfigError("entropy_weight applies only to the a3c agent");
    } else {
        for (const char* key : {"hidden1", "hidden2"})
            if (was_set(key))
                throw ConfigError(std::string(key) +
                                  " applies only to dqn/double agents (agent = " +
                                  cfg.agent + ")");
        if (kind == agents::AgentKind::dueling_dqn && was_set("entropy_weight"))
            throw ConfigError("entropy_weight applies only to the a3c agent");
    }

    const auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(cfg.gamma >= 0.0 && cfg.gamma < 1.0, "gamma must lie in [0, 1)");
    require(cfg.lr > 0.0, "lr must be positive");
    require(cfg.batch >= 1, "batch must be >= 1");
    require(cfg.replay_capacity >= cfg.batch, "replay_capacity must hold at least one batch");
    require(cfg.replay_warmup >= 0, "replay_warmup must be >= 0");
    require(cfg.target_sync_every >= 1, "target_sync_every must be >= 1");
    require(cfg.epsilon_start >= cfg.epsilon_end && cfg.epsilon_end >= 0.0 &&
                cfg.epsilon_start <= 1.0,
            "epsilon schedule needs 1 >= start >= end >= 0");
    require(cfg.epsilon_anneal_fraction > 0.0 && cfg.epsilon_anneal_fraction <= 1.0,
            "epsilon_anneal_fraction must lie in (0, 1]");
    require(cfg.entropy_weight >= 0.0, "entropy_weight must be >= 0");
    require(cfg.total_training_steps >= 0, "total_training_steps must be >= 0");
    require(cfg.hidden1 >= 1 && cfg.hidden2 >= 1 && cfg.shared_width >= 1 &&
                cfg.stream_width >= 1,
            "network widths must be >= 1");
    require(cfg.level9_prob >= 0.0 && cfg.level9_prob <= 1.0,
            "level9_prob must lie in [0, 1]");
    require(cfg.frame_skip_prob >= 0.0 && cfg.frame_skip_prob <= 1.0,
            "frame_skip_prob must lie in [0, 1]");
    require(cfg.dodge_frames >= 1 && cfg.shine_frames >= 1, "animation lengths must be >= 1");
    require(cfg.iframe_start >= 0 && cfg.iframe_start <= cfg.iframe_end &&
                cfg.iframe_end < cfg.dodge_frames,
            "need 0 <= iframe_start <= iframe_end < dodge_frames");
    require(cfg.episode_cap_frames >= 0, "episode_cap_frames must be >= 0");
    require(cfg.samples_per_upload >= 1, "samples_per_upload must be >= 1");
    require(cfg.train_batches_per_upload >= 0, "train_batches_per_upload must be >= 0");
    require(cfg.snapshot_every_uploads >= 1, "snapshot_every_uploads must be >= 1");
    require(cfg.workers >= 1, "workers must be >= 1");
    require(cfg.worker_id >= 1, "worker_id must be >= 1");
    require(cfg.worker_max_attempts >= 1, "worker_max_attempts must be >= 1");
    require(cfg.worker_backoff_ms >= 0, "worker_backoff_ms must be >= 0");
    require(cfg.eval_level >= 1 && cfg.eval_level <= 9, "eval_level must lie in [1, 9]");
    require(cfg.eval_episodes >= 1, "eval_episodes must be >= 1");
    require(cfg.eval_epsilon >= 0.0 && cfg.eval_epsilon <= 1.0,
            "eval_epsilon must lie in [0, 1]");
    require(cfg.holdout_size >= 1, "holdout_size must be >= 1");
    for (const auto* address : {&cfg.listen_address, &cfg.connect_address}) {
        try {
            distrib::parse_address(*address);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
}

// Flag/file fallback chain for the run directory: explicit value, then the
// DODGE_RL_RUN_DIR environment variable, then ./run.
inline std::string resolve_run_dir(const RunConfig& cfg) {
    if (!cfg.run_dir.empty()) return cfg.run_dir;
    if (const char* env = std::getenv("DODGE_RL_RUN_DIR"); env && *env) return env;
    return "run";
}

inline void echo_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config echo: " + path);
    out << "# effective configuration\n";
    for (const auto& [key, field] : detail::fields()) {
        if (key == "run_dir") {
            out << key << " = " << resolve_run_dir(cfg) << '\n';
        } else {
            out << key << " = " << field.get(cfg) << '\n';
        }
    }
}

inline nn::Netf build_net(const RunConfig& cfg, uint64_t init_seed,
                          int input_dim = arena::kStateDim,
                          int actions = arena::kNumActions) {
    const agents::AgentKind kind = agent_kind(cfg);
    switch (kind) {
    case agents::AgentKind::dqn:
    case agents::AgentKind::double_dqn: {
        const std::vector<int> hidden{static_cast<int>(cfg.hidden1),
                                      static_cast<int>(cfg.hidden2)};
        return nn::init_network<float>(nn::single_stack(input_dim, hidden, actions),
                                       nn::Head::single, init_seed);
    }
    default:
        return nn::init_network<float>(
            nn::two_stream_stack(input_dim, static_cast<int>(cfg.shared_width),
                                 static_cast<int>(cfg.stream_width), actions),
            agents::head_for(kind), init_seed);
    }
}

inline arena::ArenaConfig arena_config(const RunConfig& cfg) {
    arena::ArenaConfig a;
    a.dodge_frames = static_cast<int>(cfg.dodge_frames);
    a.iframe_start = static_cast<int>(cfg.iframe_start);
    a.iframe_end = static_cast<int>(cfg.iframe_end);
    a.shine_frames = static_cast<int>(cfg.shine_frames);
    return a;
}

inline agents::EpsilonSchedule epsilon_schedule(const RunConfig& cfg) {
    agents::EpsilonSchedule s;
    s.start = static_cast<float>(cfg.epsilon_start);
    s.end = static_cast<float>(cfg.epsilon_end);
    s.anneal_steps = std::max<int64_t>(
        1, static_cast<int64_t>(static_cast<double>(cfg.total_training_steps) *
                                cfg.epsilon_anneal_fraction));
    return s;
}

inline distrib::TrainerConfig trainer_config(const RunConfig& cfg, const std::string& run_dir) {
    distrib::TrainerConfig t;
    t.kind = agent_kind(cfg);
    t.gamma = static_cast<float>(cfg.gamma);
    t.lr = static_cast<float>(cfg.lr);
    t.batch = static_cast<int>(cfg.batch);
    t.target_sync_every = cfg.target_sync_every;
    t.entropy_weight = static_cast<float>(cfg.entropy_weight);
    t.replay_capacity = static_cast<size_t>(cfg.replay_capacity);
    t.replay_warmup = static_cast<size_t>(cfg.replay_warmup);
    t.train_batches_per_upload = static_cast<int>(cfg.train_batches_per_upload);
    t.snapshot_every_uploads = static_cast<int>(cfg.snapshot_every_uploads);
    t.total_training_steps = static_cast<uint64_t>(cfg.total_training_steps);
    t.run_dir = run_dir;
    return t;
}

inline distrib::GeneratorConfig generator_config(const RunConfig& cfg) {
    distrib::GeneratorConfig g;
    g.arena = arena_config(cfg);
    g.level9_prob = cfg.level9_prob;
    g.frame_skip = cfg.frame_skip_prob;
    g.episode_cap = cfg.episode_cap_frames;
    g.epsilon = epsilon_schedule(cfg);
    return g;
}

inline distrib::WorkerConfig worker_config(const RunConfig& cfg) {
    distrib::WorkerConfig w;
    w.connect_address = cfg.connect_address;
    w.worker_id = static_cast<uint32_t>(cfg.worker_id);
    w.seed = static_cast<uint64_t>(cfg.seed);
    w.samples_per_upload = static_cast<int>(cfg.samples_per_upload);
    w.gen = generator_config(cfg);
    w.max_attempts = static_cast<int>(cfg.worker_max_attempts);
    w.backoff_initial_ms = static_cast<int>(cfg.worker_backoff_ms);
    return w;
}

// Derived seed streams: worker ids 1..N belong to workers, 0 to the
// trainer's batch sampling; ids >= 100 are reserved for internals.
inline constexpr uint32_t kNetInitStream = 100;
inline constexpr uint32_t kHoldoutStream = 101;
inline constexpr uint32_t kEvalStream = 102;

} // namespace dodgerl::config
