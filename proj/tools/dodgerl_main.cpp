#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dodgerl/arena/trajectory.hpp"
#include "dodgerl/config.hpp"
#include "dodgerl/distrib/manager.hpp"
#include "dodgerl/distrib/worker.hpp"
#include "dodgerl/metrics/holdout_io.hpp"
#include "dodgerl/nn/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace dodgerl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitGradcheck = 3;

std::string kebab(std::string key) {
    for (auto& c : key)
        if (c == '_') c = '-';
    return key;
}

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct CommonArgs {
    std::string config_file;
    std::shared_ptr<Overrides> overrides = std::make_shared<Overrides>();
};

// Every run-config key becomes a --kebab-case flag; flags beat file values.
void add_config_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_file, "flat key = value config file");
    for (const auto& key : config::config_keys()) {
        auto sink = [overrides = args.overrides, key](const std::string& v) {
            overrides->emplace_back(key, v);
        };
        cmd->add_option_function<std::string>("--" + kebab(key), sink, "override " + key);
    }
    const auto alias = [&](const std::string& flag, const std::string& key) {
        auto sink = [overrides = args.overrides, key](const std::string& v) {
            overrides->emplace_back(key, v);
        };
        cmd->add_option_function<std::string>(flag, sink, "alias for --" + kebab(key));
    };
    alias("--steps", "total_training_steps");
    alias("--episodes", "eval_episodes");
    alias("--level", "eval_level");
}

config::RunConfig resolve(const CommonArgs& args) {
    config::RunConfig rc;
    if (!args.config_file.empty()) config::load_config_file(rc, args.config_file);
    for (const auto& [key, value] : *args.overrides) config::apply_key(rc, key, value);
    config::validate(rc);
    return rc;
}

// Run-directory setup shared by train and manager: echo the effective
// configuration and build + persist the fixed holdout set.
struct RunSetup {
    std::string run_dir;
    nn::Netf net;
    metrics::HoldoutSet holdout;
};

RunSetup prepare_run(const config::RunConfig& rc) {
    RunSetup s;
    s.run_dir = config::resolve_run_dir(rc);
    fs::create_directories(s.run_dir);
    config::echo_config(rc, s.run_dir + "/config_effective.cfg");
    s.net = config::build_net(rc, distrib::worker_seed(static_cast<uint64_t>(rc.seed),
                                                       config::kNetInitStream));
    s.holdout = metrics::build_holdout(config::arena_config(rc), static_cast<int>(rc.holdout_size),
                                       distrib::worker_seed(static_cast<uint64_t>(rc.seed),
                                                            config::kHoldoutStream),
                                       64, rc.level9_prob);
    metrics::save_holdout(s.holdout, s.run_dir + "/holdout.drlh");
    return s;
}

void final_eval(const config::RunConfig& rc, const nn::Netf& net, const std::string& run_dir) {
    metrics::EvalOptions opt;
    opt.level = static_cast<int>(rc.eval_level);
    opt.episodes = static_cast<int>(rc.eval_episodes);
    opt.seed = distrib::worker_seed(static_cast<uint64_t>(rc.seed), config::kEvalStream);
    const auto report = metrics::evaluate(net, config::arena_config(rc), opt, false,
                                          static_cast<float>(rc.eval_epsilon));
    metrics::write_report_csv(report, run_dir + "/eval_report.csv");
    metrics::print_report(report, std::cout);
}

int cmd_train(const config::RunConfig& rc) {
    RunSetup s = prepare_run(rc);
    std::cout << "training agent=" << rc.agent << " steps=" << rc.total_training_steps
              << " seed=" << rc.seed << " run_dir=" << s.run_dir << '\n';

    distrib::LocalPipeline pipe(config::trainer_config(rc, s.run_dir),
                                config::generator_config(rc), std::move(s.net),
                                static_cast<uint64_t>(rc.seed),
                                static_cast<int>(rc.samples_per_upload));
    pipe.core().set_holdout(std::move(s.holdout));

    int64_t last_report = 0;
    while (!pipe.core().reached_step_target()) {
        pipe.run_one_upload();
        const auto& core = pipe.core();
        if (core.uploads() - last_report >= 10 || core.reached_step_target()) {
            last_report = core.uploads();
            std::cout << "  upload " << core.uploads() << ": step " << core.train_state().step
                      << "/" << rc.total_training_steps << ", replay " << core.replay().size()
                      << ", snapshots " << core.snapshots_saved() << '\n';
        }
    }
    pipe.core().persist_final();
    std::cout << "training done: " << pipe.core().train_state().step << " steps, "
              << pipe.core().samples_ingested() << " samples, "
              << pipe.core().snapshots_saved() << " snapshots\n";
    final_eval(rc, pipe.core().train_state().online, s.run_dir);
    return kExitOk;
}

int cmd_manager(const config::RunConfig& rc) {
    RunSetup s = prepare_run(rc);
    distrib::TrainerCore core(config::trainer_config(rc, s.run_dir), std::move(s.net),
                              static_cast<uint64_t>(rc.seed));
    core.set_holdout(std::move(s.holdout));

    distrib::ManagerOptions mo;
    mo.listen_address = rc.listen_address;
    distrib::Manager mgr(core, mo);
    std::cout << "manager listening on " << rc.listen_address << " (port " << mgr.port()
              << "), target " << rc.total_training_steps << " steps, run_dir " << s.run_dir
              << '\n';
    mgr.run();
    std::cout << "manager done: " << core.train_state().step << " steps, " << core.uploads()
              << " uploads, " << core.snapshots_saved() << " snapshots\n";
    final_eval(rc, core.train_state().online, s.run_dir);
    return kExitOk;
}

int cmd_worker(const config::RunConfig& rc) {
    distrib::WorkerConfig wc = config::worker_config(rc);
    std::cout << "worker " << wc.worker_id << " connecting to " << wc.connect_address << '\n';
    const int code = distrib::worker_loop(wc);
    switch (code) {
    case 0:
        std::cout << "worker " << wc.worker_id << " finished cleanly\n";
        return kExitOk;
    case 1:
        std::cerr << "worker " << wc.worker_id << ": manager unreachable\n";
        return kExitRuntime;
    default:
        std::cerr << "worker " << wc.worker_id << ": received an unusable model snapshot\n";
        return kExitRuntime;
    }
}

int cmd_eval(const config::RunConfig& rc, const std::string& snapshot_path,
             const std::string& report_path, const std::string& record_path, bool greedy) {
    const auto data = distrib::read_file(snapshot_path);
    const distrib::LoadedModel model = distrib::deserialize_model(data);
    std::cout << "loaded " << agents::agent_name(model.kind) << " snapshot at step "
              << model.step << " from " << snapshot_path << '\n';

    metrics::EvalOptions opt;
    opt.level = static_cast<int>(rc.eval_level);
    opt.episodes = static_cast<int>(rc.eval_episodes);
    opt.seed = distrib::worker_seed(static_cast<uint64_t>(rc.seed), config::kEvalStream);

    std::unique_ptr<arena::TrajectoryWriter> recorder;
    if (!record_path.empty()) recorder = std::make_unique<arena::TrajectoryWriter>(record_path);

    const auto report = metrics::evaluate(model.net, config::arena_config(rc), opt, greedy,
                                          static_cast<float>(rc.eval_epsilon), recorder.get());
    metrics::write_report_csv(report, report_path);
    metrics::print_report(report, std::cout);
    std::cout << "report csv: " << report_path << '\n';
    if (recorder) std::cout << "trajectory: " << record_path << '\n';
    return kExitOk;
}

int cmd_gradcheck(uint64_t seed, int configs) {
    const auto report = nn::run_gradcheck_suite(seed, configs);
    const auto head_name = [](nn::Head h) {
        switch (h) {
        case nn::Head::single: return "single   ";
        case nn::Head::dueling: return "dueling  ";
        default: return "actor+critic";
        }
    };
    for (const auto& r : report.heads)
        std::cout << "head " << head_name(r.head) << "  configs " << r.configs << "  resampled "
                  << r.resampled << "  max rel err " << r.worst << '\n';
    const bool ok = report.pass();
    std::cout << "overall max rel err " << report.worst << " (tolerance 1e-4): "
              << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kExitOk : kExitGradcheck;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dodge-bot reinforcement learning toolkit"};
    app.require_subcommand(1);

    CommonArgs train_args, manager_args, worker_args, eval_args;
    auto* train = app.add_subcommand("train", "train an agent in-process");
    add_config_flags(train, train_args);
    auto* manager = app.add_subcommand("manager", "serve models and train on uploaded samples");
    add_config_flags(manager, manager_args);
    auto* worker = app.add_subcommand("worker", "generate episodes for a manager");
    add_config_flags(worker, worker_args);

    auto* eval = app.add_subcommand("eval", "evaluate a model snapshot");
    add_config_flags(eval, eval_args);
    std::string snapshot_path, record_path, report_path = "eval_report.csv";
    bool greedy = false;
    eval->add_option("--snapshot", snapshot_path, "model snapshot to evaluate")->required();
    eval->add_option("--report", report_path, "where to write the CSV report");
    eval->add_option("--record", record_path, "dump evaluated frames to this CSV");
    eval->add_flag("--greedy", greedy, "act greedily instead of epsilon-greedy");

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the backward pass");
    uint64_t gc_seed = 1;
    int gc_configs = 100;
    gradcheck->add_option("--seed", gc_seed, "suite seed");
    gradcheck->add_option("--configs", gc_configs, "configurations per head")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
        if (train->parsed()) return cmd_train(resolve(train_args));
        if (manager->parsed()) return cmd_manager(resolve(manager_args));
        if (worker->parsed()) return cmd_worker(resolve(worker_args));
        if (eval->parsed())
            return cmd_eval(resolve(eval_args), snapshot_path, report_path, record_path, greedy);
        if (gradcheck->parsed()) return cmd_gradcheck(gc_seed, gc_configs);
        return kExitUsage;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
