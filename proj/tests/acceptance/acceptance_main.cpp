// Acceptance gate: ten numbered end-to-end checks, one PASS/FAIL line each.
//
//   acceptance            runs every criterion (9 trains three full agents;
//                         expect roughly an hour on one core)
//   acceptance 1 4 7      runs a subset
//
// Exit code 0 iff every selected criterion passes.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "dodgerl/agents/agents.hpp"
#include "dodgerl/arena/arena.hpp"
#include "dodgerl/config.hpp"
#include "dodgerl/distrib/generator.hpp"
#include "dodgerl/distrib/manager.hpp"
#include "dodgerl/distrib/pipeline.hpp"
#include "dodgerl/distrib/snapshot.hpp"
#include "dodgerl/distrib/worker.hpp"
#include "dodgerl/metrics/metrics.hpp"
#include "dodgerl/nn/gradcheck.hpp"
#include "dodgerl/nn/network.hpp"
#include "dodgerl/replay.hpp"
#include "dodgerl/rng.hpp"

namespace fs = std::filesystem;
using namespace dodgerl;
using clock_t_ = std::chrono::steady_clock;

namespace {

double seconds_since(clock_t_::time_point t0) {
    return std::chrono::duration<double>(clock_t_::now() - t0).count();
}

// Collects sub-check failures; the criterion passes when none accumulated.
struct Checker {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& why) {
        if (!ok) failures.push_back(why);
    }
    bool pass() const { return failures.empty(); }
};

struct Verdict {
    bool pass = false;
    std::string summary;
};

Verdict verdict_of(const Checker& c, const std::string& ok_summary) {
    if (c.pass()) return {true, ok_summary};
    std::string why = c.failures.front();
    if (c.failures.size() > 1)
        why += " (+" + std::to_string(c.failures.size() - 1) + " more)";
    return {false, why};
}

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), format, args...);
    return std::string(buf);
}

// ---------------------------------------------------------------- criterion 1

Verdict criterion_1() {
    const auto t0 = clock_t_::now();
    const auto report = nn::run_gradcheck_suite(2026, 100);
    const double secs = seconds_since(t0);

    Checker c;
    for (const auto& head : report.heads)
        c.expect(head.configs == 100, "a head ran fewer than 100 configurations");
    c.expect(report.pass(), fmt("max relative error %.3g is not < 1e-4", report.worst));
    c.expect(secs < 30.0, fmt("suite took %.1f s, budget is 30 s", secs));
    return verdict_of(c, fmt("300 networks, max rel err %.3g, %.1f s", report.worst, secs));
}

// ---------------------------------------------------------------- criterion 2

std::vector<float> one_hot(int i, int n) {
    std::vector<float> v(static_cast<size_t>(n), 0.0f);
    v[static_cast<size_t>(i)] = 1.0f;
    return v;
}

Verdict criterion_2() {
    const auto t0 = clock_t_::now();
    constexpr int kStates = 5, kActions = 2;
    constexpr double kGamma = 0.99;

    // Deterministic chain: action 0 walks left (clamped), action 1 walks
    // right; entering the last state pays 1 and ends the episode.
    const auto step_env = [](int s, int a, int& s2, double& r, bool& term) {
        const int next = a == 0 ? std::max(0, s - 1) : s + 1;
        term = next == kStates - 1;
        r = term ? 1.0 : 0.0;
        s2 = term ? 0 : next;
    };

    // Independent oracle: plain value iteration to fixed point.
    std::vector<double> oracle(kStates * kActions, 0.0);
    for (int it = 0; it < 100000; ++it) {
        double delta = 0.0;
        for (int s = 0; s < kStates - 1; ++s)
            for (int a = 0; a < kActions; ++a) {
                int s2; double r; bool term;
                step_env(s, a, s2, r, term);
                double target = r;
                if (!term) target += kGamma * std::max(oracle[s2 * 2], oracle[s2 * 2 + 1]);
                delta = std::max(delta, std::abs(target - oracle[s * 2 + a]));
                oracle[s * 2 + a] = target;
            }
        if (delta < 1e-13) break;
    }

    ReplayMemory replay(16);
    for (int s = 0; s < kStates - 1; ++s)
        for (int a = 0; a < kActions; ++a) {
            int s2; double r; bool term;
            step_env(s, a, s2, r, term);
            Transition t;
            t.state = one_hot(s, kStates);
            t.action = static_cast<uint8_t>(a);
            t.reward = static_cast<float>(r);
            t.next_state = one_hot(s2, kStates);
            t.terminal = term;
            replay.push(std::move(t));
        }

    auto ts = agents::TrainState::make(
        nn::init_network(nn::single_stack(kStates, {}, kActions), nn::Head::single, 7),
        static_cast<float>(kGamma), 0.01f, 100);
    Rng rng(11);

    const auto max_err = [&] {
        double err = 0.0;
        for (int s = 0; s < kStates - 1; ++s) {
            const auto in = one_hot(s, kStates);
            const auto acts = nn::forward(ts.online, std::span<const float>(in));
            const auto q = nn::q_values(ts.online, acts);
            for (int a = 0; a < kActions; ++a)
                err = std::max(err, std::abs(static_cast<double>(q[static_cast<size_t>(a)]) -
                                             oracle[s * 2 + a]));
        }
        return err;
    };

    int batches = 0;
    double err = max_err();
    while (batches < 20000 && err >= 1e-2) {
        const auto batch = replay.sample(8, rng);
        agents::train_batch(ts, agents::AgentKind::dqn, batch);
        ts.finish_step();
        if (++batches % 250 == 0) err = max_err();
    }
    err = max_err();
    const double secs = seconds_since(t0);

    Checker c;
    c.expect(err < 1e-2, fmt("max-norm gap to value iteration is %.4f after 20000 batches", err));
    c.expect(secs < 120.0, fmt("took %.1f s, budget is 120 s", secs));
    return verdict_of(c, fmt("within %.4f of value iteration after %d batches, %.1f s",
                             err, batches, secs));
}

// ---------------------------------------------------------------- criterion 3

Verdict criterion_3() {
    const auto t0 = clock_t_::now();
    constexpr int kActions = 8;
    constexpr int kSeeds = 20, kBatches = 1500, kBatch = 32, kSync = 50;

    // Single nonterminal state, self-loop, rewards ~ N(0,1): the true Q is
    // identically zero. Transitions stream through a small ring so the noise
    // keeps refreshing; DQN and Double run on identical streams and inits.
    const auto final_max_q = [&](agents::AgentKind rule, int seed) {
        ReplayMemory replay(256);
        std::mt19937_64 gen(static_cast<uint64_t>(seed) * 977);
        std::normal_distribution<float> noise(0.0f, 1.0f);
        auto ts = agents::TrainState::make(
            nn::init_network(nn::single_stack(1, {}, kActions), nn::Head::single,
                             1000 + static_cast<uint64_t>(seed)),
            0.9f, 0.01f, kSync);
        Rng rng(static_cast<uint64_t>(seed) * 31 + 7);
        for (int b = 0; b < kBatches; ++b) {
            for (int a = 0; a < kActions; ++a) {
                Transition t;
                t.state = {1.0f};
                t.action = static_cast<uint8_t>(a);
                t.reward = noise(gen);
                t.next_state = {1.0f};
                t.terminal = false;
                replay.push(std::move(t));
            }
            const auto batch = replay.sample(kBatch, rng);
            agents::train_batch(ts, rule, batch);
            ts.finish_step();
        }
        const std::vector<float> in{1.0f};
        const auto acts = nn::forward(ts.online, std::span<const float>(in));
        const auto q = nn::q_values(ts.online, acts);
        return static_cast<double>(*std::max_element(q.begin(), q.end()));
    };

    int closer = 0, dqn_positive = 0;
    double sum_dqn = 0.0, sum_double = 0.0;
    for (int seed = 1; seed <= kSeeds; ++seed) {
        const double mq_dqn = final_max_q(agents::AgentKind::dqn, seed);
        const double mq_double = final_max_q(agents::AgentKind::double_dqn, seed);
        sum_dqn += mq_dqn;
        sum_double += mq_double;
        if (std::abs(mq_double) < std::abs(mq_dqn)) ++closer;
        if (mq_dqn > 0.0) ++dqn_positive;
    }
    const double mean_dqn = sum_dqn / kSeeds;
    const double mean_double = sum_double / kSeeds;
    const double secs = seconds_since(t0);

    // 15-of-20 one-sided sign test: p = P(Bin(20, 1/2) >= 15) = 0.0207 < 0.05.
    Checker c;
    c.expect(std::abs(mean_double) < std::abs(mean_dqn),
             fmt("double's mean max-Q %.3f is not closer to 0 than dqn's %.3f",
                 mean_double, mean_dqn));
    c.expect(mean_dqn > 0.0, fmt("dqn's mean max-Q %.3f is not positive", mean_dqn));
    c.expect(closer >= 15, fmt("double closer to 0 in only %d/20 seeds (need 15)", closer));
    c.expect(dqn_positive >= 15,
             fmt("dqn max-Q positive in only %d/20 seeds (need 15)", dqn_positive));
    c.expect(secs < 300.0, fmt("took %.1f s, budget is 300 s", secs));
    return verdict_of(c, fmt("mean max-Q dqn %.3f vs double %.3f, closer in %d/20 seeds, %.1f s",
                             mean_dqn, mean_double, closer, secs));
}

// ---------------------------------------------------------------- criterion 4

Verdict criterion_4() {
    Checker c;
    Rng rng(1717);

    // 1000 random (V, A) pairs through the aggregation op (its double
    // instantiation, so rounding cannot mask an identity violation), against
    // an independently summed reference.
    for (int i = 0; i < 1000 && c.pass(); ++i) {
        const int n = 2 + static_cast<int>(rng.below(7));
        const double v = rng.real01() * 8.0 - 4.0;
        std::vector<double> adv(static_cast<size_t>(n));
        for (auto& a : adv) a = rng.real01() * 8.0 - 4.0;

        const auto q = nn::dueling_aggregate<double>(v, adv);
        long double mean = 0.0L;
        for (double a : adv) mean += a;
        mean /= n;
        for (int k = 0; k < n; ++k) {
            const double ref = static_cast<double>(v + adv[static_cast<size_t>(k)] - mean);
            c.expect(std::abs(q[static_cast<size_t>(k)] - ref) <= 1e-6,
                     fmt("aggregation deviates from V + A - mean(A) by %.3g",
                         std::abs(q[static_cast<size_t>(k)] - ref)));
        }
        c.expect(std::max_element(q.begin(), q.end()) - q.begin() ==
                     std::max_element(adv.begin(), adv.end()) - adv.begin(),
                 "argmax(Q) differs from argmax(A)");

        // shifting every advantage by the same constant must not move Q
        const double shift = i % 2 == 0 ? 0.5 : -1.25;
        auto shifted = adv;
        for (auto& a : shifted) a += shift;
        const auto q2 = nn::dueling_aggregate<double>(v, shifted);
        for (int k = 0; k < n; ++k)
            c.expect(std::abs(q2[static_cast<size_t>(k)] - q[static_cast<size_t>(k)]) <= 1e-6,
                     "constant advantage shift changed Q");
    }

    // The same identities on whole dueling networks: Q from the forward pass
    // matches the streams, and biasing the advantage output is invisible.
    for (int i = 0; i < 200 && c.pass(); ++i) {
        const int in = 2 + static_cast<int>(rng.below(5));
        const int actions = 2 + static_cast<int>(rng.below(4));
        auto net = nn::init_network(nn::two_stream_stack(in, 4, 5, actions),
                                    nn::Head::dueling, rng.next_u64());
        std::vector<float> input(static_cast<size_t>(in));
        for (auto& x : input) x = static_cast<float>(rng.real01() * 2.0 - 1.0);

        const auto acts = nn::forward(net, std::span<const float>(input));
        const auto q = nn::q_values(net, acts);
        const float v = nn::head_value(net, acts);
        const auto adv = nn::head_vector(net, acts);
        double mean = 0.0;
        for (float a : adv) mean += a;
        mean /= actions;
        for (int k = 0; k < actions; ++k)
            c.expect(std::abs(q[static_cast<size_t>(k)] -
                              (static_cast<double>(v) + adv[static_cast<size_t>(k)] - mean)) <=
                         1e-6,
                     "network Q deviates from V + A - mean(A)");

        for (auto& b : net.layers.back().biases) b += 0.5f;
        const auto acts2 = nn::forward(net, std::span<const float>(input));
        const auto q2 = nn::q_values(net, acts2);
        for (int k = 0; k < actions; ++k)
            c.expect(std::abs(q2[static_cast<size_t>(k)] - q[static_cast<size_t>(k)]) <= 1e-6,
                     "advantage-output bias shift changed network Q");
        c.expect(agents::argmax_lowest_tie(std::span<const float>(q2)) ==
                     agents::argmax_lowest_tie(std::span<const float>(q)),
                 "advantage-output bias shift changed the greedy action");
    }

    return verdict_of(c, "1000 (V, A) pairs + 200 networks: aggregation, argmax, shift all hold");
}

// ---------------------------------------------------------------- criterion 5

int death_frame(const arena::ArenaConfig& cfg, int level, uint64_t seed) {
    auto st = arena::reset(cfg, level, seed);
    bool terminal = false;
    while (!terminal && st.frame < 10000)
        arena::step(st, arena::AgentAction::nothing, &terminal);
    return static_cast<int>(st.frame);
}

Verdict criterion_5() {
    const arena::ArenaConfig cfg;
    Checker c;

    // (a) idle zero-damage frames pay exactly 1/60; animation frames pay 0
    {
        auto st = arena::reset(cfg, 1, 5);
        bool terminal = false;
        for (int i = 0; i < 30; ++i) {
            const float r = arena::step(st, arena::AgentAction::nothing, &terminal);
            c.expect(r == 1.0f / 60.0f, "idle zero-damage frame did not pay exactly 1/60");
            c.expect(!terminal, "episode ended during the initial cooldown");
        }
        c.expect(arena::step(st, arena::AgentAction::dodge_stand, &terminal) == 0.0f,
                 "dodge animation frame paid a nonzero reward");
    }

    // (b) terminal raised on the first point of damage
    for (uint64_t seed : {1, 2, 3, 4, 5}) {
        auto st = arena::reset(cfg, 9, seed);
        bool terminal = false;
        while (!terminal) {
            c.expect(st.agent.damage == 0.0f, "agent carried damage before the terminal frame");
            arena::step(st, arena::AgentAction::nothing, &terminal);
        }
        c.expect(st.agent.damage > 0.0f, "episode ended without damage");
    }

    // (c) the recorded hit whiffs when its frame falls in dodge i-frames 4-19
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        const int f = death_frame(cfg, 9, seed);
        c.expect(f > 11, "death frame too early to test the dodge window");
        auto st = arena::reset(cfg, 9, seed);
        bool terminal = false;
        while (st.frame < f - 11) arena::step(st, arena::AgentAction::nothing, &terminal);
        arena::step(st, arena::AgentAction::dodge_stand, &terminal);
        for (int k = 0; k < 9 && !terminal; ++k)
            arena::step(st, arena::AgentAction::nothing, &terminal);
        c.expect(!terminal && st.agent.damage == 0.0f,
                 "attack connected inside the i-frame window");
        for (int k = 0; k < 8 && !terminal; ++k)
            arena::step(st, arena::AgentAction::nothing, &terminal);
        c.expect(st.agent.damage == 0.0f, "damage appeared while riding out the i-frames");
    }

    // (d) solvability: the telegraph-reading policy survives a full minute
    //     against level 9
    for (uint64_t seed : {1, 11, 21, 31, 41}) {
        auto st = arena::reset(cfg, 9, seed);
        bool terminal = false;
        for (int i = 0; i < 3600 && !terminal; ++i)
            arena::step(st, arena::perfect_timing_policy(st), &terminal);
        c.expect(!terminal && st.frame == 3600,
                 fmt("perfect-timing policy died at frame %lld seed %llu",
                     static_cast<long long>(st.frame), static_cast<unsigned long long>(seed)));
    }

    // (e) difficulty ordering: mean nothing-policy survival never rises with
    //     level (20 seeds per level)
    double prev = 1e18;
    std::string levels;
    for (int level = 1; level <= 9; ++level) {
        int64_t total = 0;
        for (uint64_t seed = 1; seed <= 20; ++seed) total += death_frame(cfg, level, seed);
        const double mean = static_cast<double>(total) / 20.0;
        c.expect(mean <= prev,
                 fmt("mean survival rose from level %d (%.1f) to %d (%.1f)", level - 1, prev,
                     level, mean));
        prev = mean;
        levels += fmt(level == 1 ? "%.0f" : ">=%.0f", mean);
    }

    return verdict_of(c, "reward, terminal, i-frames, solvability, ordering (" + levels + ")");
}

// ---------------------------------------------------------------- criterion 6

Verdict criterion_6() {
    Rng rng(909);
    int level9 = 0;
    constexpr int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i)
        if (arena::sample_opponent_level(rng, 0.7) == 9) ++level9;
    const double freq = static_cast<double>(level9) / kDraws;

    Checker c;
    c.expect(freq >= 0.69 && freq <= 0.71,
             fmt("level-9 frequency %.4f outside [0.69, 0.71]", freq));
    return verdict_of(c, fmt("level-9 frequency %.4f over %d draws", freq, kDraws));
}

// ---------------------------------------------------------------- criterion 7

nn::Netf random_net(Rng& rng) {
    const int in = 2 + static_cast<int>(rng.below(6));
    const int actions = 2 + static_cast<int>(rng.below(4));
    const uint64_t seed = rng.next_u64();
    switch (rng.below(3)) {
    case 0:
        return nn::init_network<float>(
            nn::single_stack(in, std::vector<int>{3 + static_cast<int>(rng.below(6))}, actions),
            nn::Head::single, seed);
    case 1:
        return nn::init_network<float>(nn::two_stream_stack(in, 4, 5, actions),
                                       nn::Head::dueling, seed);
    default:
        return nn::init_network<float>(nn::two_stream_stack(in, 4, 5, actions),
                                       nn::Head::actor_critic, seed);
    }
}

bool nets_equal(const nn::Netf& a, const nn::Netf& b) {
    if (a.head != b.head || a.layers.size() != b.layers.size()) return false;
    for (size_t i = 0; i < a.layers.size(); ++i)
        if (a.layers[i].weights != b.layers[i].weights || a.layers[i].biases != b.layers[i].biases)
            return false;
    return true;
}

void rehash(std::vector<uint8_t>& data) {
    const uint32_t crc = bytes::crc32_of(std::span(data).first(data.size() - 4));
    for (int i = 0; i < 4; ++i)
        data[data.size() - 4 + static_cast<size_t>(i)] = static_cast<uint8_t>(crc >> (8 * i));
}

Verdict criterion_7() {
    Checker c;

    // byte-identical round trips for 1000 random networks
    Rng rng(404);
    for (int i = 0; i < 1000 && c.pass(); ++i) {
        const auto net = random_net(rng);
        const auto kind = net.head == nn::Head::single      ? agents::AgentKind::dqn
                          : net.head == nn::Head::dueling   ? agents::AgentKind::dueling_dqn
                                                            : agents::AgentKind::a3c;
        const auto bytes1 = distrib::serialize_model(net, kind, static_cast<uint64_t>(i));
        const auto loaded = distrib::deserialize_model(bytes1);
        const auto bytes2 =
            distrib::serialize_model(loaded.net, loaded.kind, loaded.step);
        c.expect(bytes1 == bytes2, "re-serialization is not byte-identical");
        c.expect(nets_equal(net, loaded.net), "parameters changed across the round trip");
        c.expect(loaded.kind == kind && loaded.step == static_cast<uint64_t>(i),
                 "metadata changed across the round trip");
    }

    // every corruption class is rejected
    {
        const auto net = nn::init_network(nn::single_stack(3, std::vector<int>{4}, 2),
                                          nn::Head::single, 12);
        const auto good = distrib::serialize_model(net, agents::AgentKind::dqn, 12);
        int rejected = 0;
        const auto expect_reject = [&](std::vector<uint8_t> bad, const char* what) {
            try {
                distrib::deserialize_model(bad);
                c.expect(false, std::string("accepted a snapshot with ") + what);
            } catch (const std::exception&) {
                ++rejected;
            }
        };
        auto bad = good;
        bad[0] = 'X';
        rehash(bad);
        expect_reject(bad, "a bad magic");
        bad = good;
        bad[4] ^= 0xFF;
        rehash(bad);
        expect_reject(bad, "a bad version");
        bad = good;
        bad[8] = 200;
        rehash(bad);
        expect_reject(bad, "an unknown agent kind");
        bad = good;
        bad[bad.size() / 2] ^= 0x01;
        expect_reject(bad, "a payload bit flip");
        for (const size_t keep : {size_t{0}, size_t{3}, size_t{12}, good.size() - 1})
            expect_reject(std::vector<uint8_t>(good.begin(),
                                               good.begin() + static_cast<ptrdiff_t>(keep)),
                          "a truncation");
        bad = good;
        bad.insert(bad.end() - 4, 0x00);
        rehash(bad);
        expect_reject(bad, "trailing bytes");
        c.expect(rejected == 9, "fewer corruption classes rejected than expected");
    }

    // a 30-upload stub run persists exactly floor(30 / 15) = 2 snapshots
    {
        const auto dir = fs::temp_directory_path() / "dodgerl_accept_c7";
        fs::remove_all(dir);
        distrib::TrainerConfig tc;
        tc.kind = agents::AgentKind::dueling_dqn;
        tc.batch = 8;
        tc.replay_capacity = 4096;
        tc.replay_warmup = 32;
        tc.train_batches_per_upload = 5;
        tc.snapshot_every_uploads = 15;
        tc.run_dir = dir.string();

        const auto net = nn::init_network(
            nn::two_stream_stack(arena::kStateDim, 8, 8, arena::kNumActions), nn::Head::dueling,
            9);
        distrib::TrainerCore core(tc, net, 9);
        distrib::GeneratorConfig gc;
        gc.episode_cap = 120;
        gc.epsilon.anneal_steps = 1000;
        distrib::SampleGenerator gen(gc, 9, 1);

        for (uint32_t u = 1; u <= 30; ++u) {
            distrib::SampleBatchMsg msg;
            msg.worker_id = 1;
            msg.sequence = u;
            msg.samples = gen.generate(net, 0, 40);
            c.expect(core.ingest(msg) == 0, "stub upload was not accepted");
        }
        c.expect(core.uploads() == 30, "upload counter drifted");
        c.expect(core.snapshots_saved() == 2,
                 fmt("saved %lld snapshots, expected 2",
                     static_cast<long long>(core.snapshots_saved())));
        int on_disk = 0;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".drlm") ++on_disk;
        c.expect(on_disk == 2, fmt("%d snapshot files on disk, expected 2", on_disk));
        fs::remove_all(dir);
    }

    return verdict_of(c, "1000 round trips byte-identical, 9 corruption classes rejected, "
                         "30 uploads -> 2 snapshots");
}

// ---------------------------------------------------------------- criterion 8

Verdict criterion_8() {
    distrib::TrainerConfig tc;
    tc.kind = agents::AgentKind::dueling_dqn;
    tc.batch = 8;
    tc.replay_capacity = 4096;
    tc.replay_warmup = 32;
    tc.train_batches_per_upload = 5;
    tc.total_training_steps = 15; // 3 uploads of training

    distrib::GeneratorConfig gc;
    gc.episode_cap = 120;
    gc.epsilon.anneal_steps = 1000;

    const auto net = nn::init_network(
        nn::two_stream_stack(arena::kStateDim, 8, 8, arena::kNumActions), nn::Head::dueling, 31);

    distrib::LocalPipeline local(tc, gc, net, 31, 64);
    local.run();

    distrib::TrainerCore core(tc, net, 31);
    distrib::ManagerOptions mo;
    mo.listen_address = "127.0.0.1:0";
    distrib::Manager mgr(core, mo);
    int code = -1;
    std::thread worker([&, port = mgr.port()] {
        distrib::WorkerConfig wc;
        wc.connect_address = "127.0.0.1:" + std::to_string(port);
        wc.worker_id = 1;
        wc.seed = 31;
        wc.samples_per_upload = 64;
        wc.gen = gc;
        code = distrib::worker_loop(wc);
    });
    mgr.run();
    worker.join();

    Checker c;
    c.expect(code == 0, fmt("networked worker exited with code %d", code));
    c.expect(local.core().uploads() == 3 && core.uploads() == 3,
             fmt("upload counts diverged: local %lld networked %lld",
                 static_cast<long long>(local.core().uploads()),
                 static_cast<long long>(core.uploads())));
    c.expect(core.replay().size() == local.core().replay().size(), "replay sizes differ");
    if (c.pass()) {
        for (size_t i = 0; i < core.replay().size(); ++i)
            if (!(core.replay().at(i) == local.core().replay().at(i))) {
                c.expect(false, fmt("replay slot %zu differs", i));
                break;
            }
    }
    c.expect(*core.published() == *local.core().published(),
             "published model bytes differ after 3 uploads");
    return verdict_of(c, fmt("replays identical across %zu transitions, models byte-equal",
                             core.replay().size()));
}

// ---------------------------------------------------------------- criterion 9

struct TrainedAgent {
    std::string name;
    double survival = 0.0;
    double mean_length = 0.0;
};

TrainedAgent train_and_eval(const std::string& agent, const std::string& desk_cfg) {
    config::RunConfig rc;
    config::load_config_file(rc, desk_cfg);
    config::apply_key(rc, "agent", agent);
    config::validate(rc);

    const auto dir = fs::temp_directory_path() / ("dodgerl_accept_c9_" + agent);
    fs::remove_all(dir);
    fs::create_directories(dir);

    const uint64_t seed = static_cast<uint64_t>(rc.seed);
    auto net = config::build_net(rc, distrib::worker_seed(seed, config::kNetInitStream));
    auto holdout = metrics::build_holdout(config::arena_config(rc),
                                          static_cast<int>(rc.holdout_size),
                                          distrib::worker_seed(seed, config::kHoldoutStream), 64,
                                          rc.level9_prob);

    distrib::LocalPipeline pipe(config::trainer_config(rc, dir.string()),
                                config::generator_config(rc), std::move(net), seed,
                                static_cast<int>(rc.samples_per_upload));
    pipe.core().set_holdout(std::move(holdout));

    const auto t0 = clock_t_::now();
    int64_t last = 0;
    while (!pipe.core().reached_step_target()) {
        pipe.run_one_upload();
        if (pipe.core().uploads() - last >= 200) {
            last = pipe.core().uploads();
            std::printf("    [%s] step %lld/%llu (%.0f s)\n", agent.c_str(),
                        static_cast<long long>(pipe.core().train_state().step),
                        static_cast<unsigned long long>(rc.total_training_steps),
                        seconds_since(t0));
            std::fflush(stdout);
        }
    }
    pipe.core().persist_final();

    metrics::EvalOptions opt;
    opt.level = static_cast<int>(rc.eval_level);
    opt.episodes = static_cast<int>(rc.eval_episodes);
    opt.seed = distrib::worker_seed(seed, config::kEvalStream);
    const auto report =
        metrics::evaluate(pipe.core().train_state().online, config::arena_config(rc), opt,
                          false, static_cast<float>(rc.eval_epsilon));

    std::printf("    [%s] trained %lld steps in %.0f s: survival %.3f, mean length %.1f\n",
                agent.c_str(), static_cast<long long>(pipe.core().train_state().step),
                seconds_since(t0), report.survival_rate_60s, report.mean_length);
    std::fflush(stdout);
    return {agent, report.survival_rate_60s, report.mean_length};
}

Verdict criterion_9(const std::string& desk_cfg) {
    const auto t0 = clock_t_::now();

    config::RunConfig rc;
    config::load_config_file(rc, desk_cfg);
    metrics::EvalOptions opt;
    opt.level = static_cast<int>(rc.eval_level);
    opt.episodes = static_cast<int>(rc.eval_episodes);
    opt.seed = distrib::worker_seed(static_cast<uint64_t>(rc.seed), config::kEvalStream);
    const auto random_report = metrics::evaluate_policy(
        [](const arena::ArenaState&, Rng& rng) {
            return static_cast<arena::AgentAction>(rng.below(arena::kNumActions));
        },
        config::arena_config(rc), opt);
    std::printf("    [random] survival %.3f, mean length %.1f\n",
                random_report.survival_rate_60s, random_report.mean_length);
    std::fflush(stdout);

    const auto dueling = train_and_eval("dueling", desk_cfg);
    const auto double_dqn = train_and_eval("double", desk_cfg);
    const auto dqn = train_and_eval("dqn", desk_cfg);
    const double secs = seconds_since(t0);

    Checker c;
    c.expect(rc.total_training_steps == 200000, "desk config is not the 200k-step profile");
    c.expect(dueling.survival > 0.50,
             fmt("dueling survival %.3f is not > 0.50", dueling.survival));
    c.expect(random_report.survival_rate_60s < 0.05,
             fmt("random baseline survival %.3f is not < 0.05",
                 random_report.survival_rate_60s));
    c.expect(dueling.survival >= 10.0 * random_report.survival_rate_60s,
             fmt("dueling survival %.3f does not exceed 10x the random baseline %.3f",
                 dueling.survival, random_report.survival_rate_60s));
    c.expect(dueling.mean_length > dqn.mean_length,
             fmt("dueling mean length %.1f does not exceed dqn's %.1f", dueling.mean_length,
                 dqn.mean_length));
    c.expect(double_dqn.mean_length > dqn.mean_length,
             fmt("double mean length %.1f does not exceed dqn's %.1f", double_dqn.mean_length,
                 dqn.mean_length));
    c.expect(secs < 4.0 * 3600.0, fmt("took %.0f s, budget is 4 h", secs));
    return verdict_of(
        c, fmt("dueling %.3f survival (random %.3f); mean lengths dueling %.0f / double %.0f / "
               "dqn %.0f; %.0f s",
               dueling.survival, random_report.survival_rate_60s, dueling.mean_length,
               double_dqn.mean_length, dqn.mean_length, secs));
}

// --------------------------------------------------------------- criterion 10

Verdict criterion_10() {
    Checker c;
    const arena::ArenaConfig cfg;
    const uint64_t seed = distrib::worker_seed(1, config::kHoldoutStream);

    const auto a = metrics::build_holdout(cfg, 1000, seed, 64, 0.7);
    const auto b = metrics::build_holdout(cfg, 1000, seed, 64, 0.7);
    const auto other = metrics::build_holdout(cfg, 1000, seed + 1, 64, 0.7);

    c.expect(a.states.size() == 1000, fmt("holdout has %zu states, not 1000", a.states.size()));
    c.expect(a.states == b.states && a.levels == b.levels,
             "same seed produced different holdouts");
    c.expect(a.states != other.states, "different seeds produced identical holdouts");

    const auto net = nn::init_network(
        nn::two_stream_stack(arena::kStateDim, 32, 32, arena::kNumActions), nn::Head::dueling,
        2024);
    const double reported = metrics::mean_max_q(net, a);

    // naive reference: fresh forward pass per state, long-double accumulation
    long double total = 0.0L;
    for (const auto& s : a.states) {
        const auto acts = nn::forward(net, std::span<const float>(s));
        const auto q = nn::q_values(net, acts);
        total += *std::max_element(q.begin(), q.end());
    }
    const double naive = static_cast<double>(total / static_cast<long double>(a.states.size()));
    c.expect(std::abs(reported - naive) <= 1e-6,
             fmt("mean_max_q %.8f deviates from naive recomputation %.8f", reported, naive));

    return verdict_of(c, fmt("holdout of exactly 1000 states reproducible; mean_max_q %.6f "
                             "matches naive recomputation",
                             reported));
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int n = std::atoi(argv[i]);
        if (n < 1 || n > 10) {
            std::fprintf(stderr, "usage: %s [criterion-number ...]\n", argv[0]);
            return 2;
        }
        selected.insert(n);
    }

    const char* desk_env = std::getenv("DODGERL_DESK_CONFIG");
    const std::string desk_cfg = desk_env ? desk_env : DODGERL_DESK_CONFIG;

    int failures = 0, ran = 0;
    const auto run_one = [&](int number, const std::function<Verdict()>& f) {
        if (!selected.empty() && !selected.count(number)) return;
        ++ran;
        Verdict v;
        try {
            v = f();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failures;
        std::printf("CRITERION %d: %s — %s\n", number, v.pass ? "PASS" : "FAIL",
                    v.summary.c_str());
        std::fflush(stdout);
    };

    run_one(1, criterion_1);
    run_one(2, criterion_2);
    run_one(3, criterion_3);
    run_one(4, criterion_4);
    run_one(5, criterion_5);
    run_one(6, criterion_6);
    run_one(7, criterion_7);
    run_one(8, criterion_8);
    run_one(9, [&] { return criterion_9(desk_cfg); });
    run_one(10, criterion_10);

    std::printf("ACCEPTANCE: %d/%d criteria passed\n", ran - failures, ran);
    return failures == 0 ? 0 : 1;
}
