#pragma once

#include <chrono>
#include <optional>
#include <thread>

#include "dodgerl/distrib/generator.hpp"
#include "dodgerl/distrib/snapshot.hpp"
#include "dodgerl/distrib/socket.hpp"

namespace dodgerl::distrib {

struct WorkerConfig {
    std::string connect_address = "127.0.0.1:7777";
    uint32_t worker_id = 1;
    uint64_t seed = 1;
    int samples_per_upload = 5400;
    GeneratorConfig gen;
    int max_attempts = 8;          // consecutive connection failures before giving up
    int backoff_initial_ms = 1000; // doubles per failure
    int backoff_cap_ms = 60000;
};

// The worker side of the protocol: HELLO, then cycles of download-model,
// generate, upload, until the manager answers with SHUTDOWN. An un-ACKed
// upload survives reconnects and is resent under its original sequence
// number, so the manager can drop retransmissions.
//
// Returns 0 on clean shutdown, 1 when the manager stayed unreachable, 2 on
// an unusable model snapshot.
inline int worker_loop(const WorkerConfig& cfg) {
    const Address addr = parse_address(cfg.connect_address);
    SampleGenerator gen(cfg.gen, cfg.seed, cfg.worker_id);
    std::optional<SampleBatchMsg> pending;
    uint32_t sequence = 0;
    int failures = 0;
    int backoff_ms = cfg.backoff_initial_ms;

    const auto note_failure = [&] {
        if (++failures >= cfg.max_attempts) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
        backoff_ms = std::min(backoff_ms * 2, cfg.backoff_cap_ms);
        return false;
    };

    while (true) {
        Socket sock;
        try {
            sock = Socket::connect_to(addr);
        } catch (const SocketError&) {
            if (note_failure()) return 1;
            continue;
        }

        try {
            sock.send_frame(Hello{cfg.worker_id});
            while (true) {
                if (!pending) {
                    sock.send_frame(ModelRequest{});
                    const auto reply = sock.recv_message();
                    if (!reply) break;
                    if (std::holds_alternative<Shutdown>(*reply)) return 0;
                    const auto* model_msg = std::get_if<ModelBytes>(&*reply);
                    if (!model_msg) throw Malformed();
                    const LoadedModel model = deserialize_model(model_msg->snapshot);

                    SampleBatchMsg msg;
                    msg.worker_id = cfg.worker_id;
                    msg.sequence = ++sequence;
                    msg.model_step = model.step;
                    msg.samples =
                        gen.generate(model.net, model.step, cfg.samples_per_upload);
                    pending = std::move(msg);
                }
                sock.send_frame(*pending);
                const auto reply = sock.recv_message();
                if (!reply) break;
                if (std::holds_alternative<Shutdown>(*reply)) return 0;
                if (!std::holds_alternative<Ack>(*reply)) throw Malformed();
                pending.reset();
                failures = 0;
                backoff_ms = cfg.backoff_initial_ms;
            }
        } catch (const SnapshotError&) {
            return 2;
        } catch (const SocketError&) {
        } catch (const ProtocolError&) {
        } catch (const bytes::Truncated&) {
        }
        if (note_failure()) return 1;
    }
}

} // namespace dodgerl::distrib
