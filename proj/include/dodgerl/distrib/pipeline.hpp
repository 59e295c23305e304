#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <unordered_map>

#include "dodgerl/agents/agents.hpp"
#include "dodgerl/distrib/generator.hpp"
#include "dodgerl/distrib/snapshot.hpp"
#include "dodgerl/distrib/wire.hpp"
#include "dodgerl/metrics/metrics.hpp"
#include "dodgerl/replay.hpp"

namespace dodgerl::distrib {

struct TrainerConfig {
    agents::AgentKind kind = agents::AgentKind::dueling_dqn;
    float gamma = 0.99f;
    float lr = 0.00025f;
    int batch = 32;
    int64_t target_sync_every = 10000;
    float entropy_weight = 0.01f;
    float rms_decay = 0.95f;
    float rms_eps = 1e-6f;
    size_t replay_capacity = 1000000;
    size_t replay_warmup = 1600;
    int train_batches_per_upload = 100;
    int snapshot_every_uploads = 15;
    uint64_t total_training_steps = 200000;
    std::string run_dir; // empty disables train_log.csv and snapshot files
};

// The single training context shared by the local pipeline and the manager:
// ingests uploads, deduplicates retransmissions, trains a fixed number of
// batches per accepted upload, publishes snapshots, and writes the metrics
// log. Never touched by more than one thread at a time.
class TrainerCore {
public:
    TrainerCore(const TrainerConfig& cfg, nn::Netf net, uint64_t seed)
        : cfg_(cfg),
          ts_(agents::TrainState::make(std::move(net), cfg.gamma, cfg.lr,
                                       cfg.target_sync_every, cfg.rms_decay, cfg.rms_eps,
                                       cfg.entropy_weight)),
          replay_(cfg.replay_capacity),
          batch_rng_(worker_seed(seed, 0)) {
        if (!cfg_.run_dir.empty()) {
            std::filesystem::create_directories(cfg_.run_dir);
            log_.open(cfg_.run_dir + "/train_log.csv", std::ios::app);
            if (!log_) throw SnapshotError("cannot open train_log.csv in " + cfg_.run_dir);
            if (log_.tellp() == 0)
                log_ << "step,mean_loss,mean_max_q,uploads,wall_seconds\n";
        }
        publish();
    }

    void set_holdout(metrics::HoldoutSet hs) { holdout_ = std::move(hs); }
    const metrics::HoldoutSet* holdout() const {
        return holdout_.states.empty() ? nullptr : &holdout_;
    }

    // Returns the ACK code: 0 accepted, 1 duplicate dropped. Accepting an
    // upload pushes its samples, runs the per-upload training budget, then
    // republishes (and every snapshot_every_uploads-th time, persists).
    uint8_t ingest(const SampleBatchMsg& msg) {
        const auto it = last_seq_.find(msg.worker_id);
        if (it != last_seq_.end() && msg.sequence <= it->second) return 1;
        last_seq_[msg.worker_id] = msg.sequence;

        for (const auto& t : msg.samples) replay_.push(t);
        samples_ingested_ += static_cast<int64_t>(msg.samples.size());
        ++uploads_;

        const double mean_loss = train_budget();
        publish();
        if (cfg_.snapshot_every_uploads > 0 && uploads_ % cfg_.snapshot_every_uploads == 0)
            persist();
        log_row(mean_loss);
        return 0;
    }

    // Final persistence at shutdown: only when the every-N rule has not
    // already covered the latest uploads (keeps the file count at
    // floor(uploads / N) for exact multiples).
    void persist_final() {
        if (cfg_.run_dir.empty()) return;
        if (uploads_ % std::max(1, cfg_.snapshot_every_uploads) != 0 || snapshots_saved_ == 0)
            persist();
    }

    std::shared_ptr<const std::vector<uint8_t>> published() const { return published_; }
    bool reached_step_target() const {
        return cfg_.total_training_steps > 0 &&
               static_cast<uint64_t>(ts_.step) >= cfg_.total_training_steps;
    }

    const agents::TrainState& train_state() const { return ts_; }
    const ReplayMemory& replay() const { return replay_; }
    int64_t uploads() const { return uploads_; }
    int64_t snapshots_saved() const { return snapshots_saved_; }
    int64_t samples_ingested() const { return samples_ingested_; }

private:
    double train_budget() {
        if (replay_.size() < std::max(cfg_.replay_warmup, static_cast<size_t>(cfg_.batch)))
            return 0.0;
        double total = 0.0;
        int done = 0;
        for (int k = 0; k < cfg_.train_batches_per_upload && !reached_step_target(); ++k) {
            const auto batch = replay_.sample(cfg_.batch, batch_rng_);
            try {
                total += agents::train_dispatch(ts_, cfg_.kind, batch);
                ++done;
            } catch (const agents::TrainError& e) {
                std::cerr << "batch skipped: " << e.what() << '\n';
            }
        }
        return done > 0 ? total / done : 0.0;
    }

    void publish() {
        published_ = std::make_shared<const std::vector<uint8_t>>(
            serialize_model(ts_.online, cfg_.kind, static_cast<uint64_t>(ts_.step)));
    }

    void persist() {
        if (cfg_.run_dir.empty()) return;
        write_file(cfg_.run_dir + "/" + model_filename(static_cast<uint64_t>(ts_.step)),
                   *published_);
        ++snapshots_saved_;
    }

    void log_row(double mean_loss) {
        if (!log_.is_open()) return;
        const double q = holdout_.states.empty() ? 0.0 : metrics::mean_max_q(ts_.online, holdout_);
        log_ << ts_.step << ',' << mean_loss << ',' << q << ',' << uploads_ << ','
             << static_cast<double>(samples_ingested_) / 60.0 << '\n';
        log_.flush();
    }

    TrainerConfig cfg_;
    agents::TrainState ts_;
    ReplayMemory replay_;
    Rng batch_rng_;
    metrics::HoldoutSet holdout_;
    std::ofstream log_;
    std::shared_ptr<const std::vector<uint8_t>> published_;
    std::unordered_map<uint32_t, uint32_t> last_seq_;
    int64_t uploads_ = 0;
    int64_t snapshots_saved_ = 0;
    int64_t samples_ingested_ = 0;
};

// Single-process training: an in-process generator plays the role of one
// worker, round-tripping models through the same snapshot bytes the wire
// would carry, so a networked single-worker run ingests identical uploads.
class LocalPipeline {
public:
    LocalPipeline(const TrainerConfig& tcfg, const GeneratorConfig& gcfg, nn::Netf net,
                  uint64_t seed, int samples_per_upload, uint32_t worker_id = 1)
        : core_(tcfg, std::move(net), seed),
          generator_(gcfg, seed, worker_id),
          samples_per_upload_(samples_per_upload),
          worker_id_(worker_id) {}

    TrainerCore& core() { return core_; }
    const TrainerCore& core() const { return core_; }

    void run_one_upload() {
        const LoadedModel model = deserialize_model(*core_.published());
        SampleBatchMsg msg;
        msg.worker_id = worker_id_;
        msg.sequence = ++sequence_;
        msg.model_step = model.step;
        msg.samples = generator_.generate(model.net, model.step, samples_per_upload_);
        core_.ingest(msg);
    }

    void run() {
        while (!core_.reached_step_target()) run_one_upload();
        core_.persist_final();
    }

private:
    TrainerCore core_;
    SampleGenerator generator_;
    int samples_per_upload_;
    uint32_t worker_id_;
    uint32_t sequence_ = 0;
};

} // namespace dodgerl::distrib
