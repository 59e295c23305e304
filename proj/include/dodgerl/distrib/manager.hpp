#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "dodgerl/distrib/pipeline.hpp"
#include "dodgerl/distrib/socket.hpp"

namespace dodgerl::distrib {

struct ManagerOptions {
    std::string listen_address = "127.0.0.1:7777";
    int drain_grace_ms = 60000; // wait for workers to see SHUTDOWN before forcing
};

// Serves any number of workers over one listening socket. Each connection
// gets a reader thread that forwards decoded frames into one queue; a single
// service loop (the run() caller) owns the TrainerCore, so ingestion,
// training, and model serving are strictly serialized. A malformed frame
// costs only its own connection.
class Manager {
public:
    Manager(TrainerCore& core, const ManagerOptions& opt)
        : core_(core),
          opt_(opt),
          listener_(Listener::bind_listen(parse_address(opt.listen_address))) {}

    uint16_t port() const { return listener_.port(); }

    // External stop request (otherwise the manager stops once the training
    // step target is reached).
    void stop() {
        {
            std::lock_guard lock(mu_);
            queue_.push_back({0, std::nullopt});
        }
        cv_.notify_all();
    }

    void run() {
        std::thread acceptor([this] { accept_loop(); });

        bool stopping = false;
        auto drain_deadline = std::chrono::steady_clock::time_point::max();
        while (true) {
            Item item;
            {
                std::unique_lock lock(mu_);
                if (!cv_.wait_until(lock, drain_deadline, [&] { return !queue_.empty(); })) {
                    force_close_locked(); // drain grace expired
                    continue;
                }
                item = std::move(queue_.front());
                queue_.pop_front();
            }

            if (item.conn_id == 0) { // external stop request
                if (!stopping) {
                    stopping = true;
                    drain_deadline = begin_stop();
                }
            } else if (!item.msg) {
                drop_connection(item.conn_id);
            } else {
                handle(item.conn_id, *item.msg, stopping);
                if (!stopping && core_.reached_step_target()) {
                    stopping = true;
                    drain_deadline = begin_stop();
                }
            }

            if (stopping) {
                std::lock_guard lock(mu_);
                if (conns_.empty() && queue_.empty()) break;
            }
        }

        acceptor.join();
        core_.persist_final();
    }

private:
    struct Conn {
        uint64_t id = 0;
        Socket sock;
        std::thread reader;
    };
    using ConnPtr = std::shared_ptr<Conn>;

    struct Item {
        uint64_t conn_id = 0;
        std::optional<Message> msg; // empty = connection ended
    };

    void accept_loop() {
        while (true) {
            auto accepted = listener_.accept_once();
            if (!accepted) return; // listener shut down
            auto conn = std::make_shared<Conn>();
            conn->sock = std::move(*accepted);
            {
                std::lock_guard lock(mu_);
                conn->id = next_conn_id_++;
                conns_[conn->id] = conn;
            }
            conn->reader = std::thread([this, conn] { read_loop(conn); });
        }
    }

    void read_loop(const ConnPtr& conn) {
        while (true) {
            Item item{conn->id, std::nullopt};
            try {
                auto msg = conn->sock.recv_message();
                if (msg) item.msg = std::move(*msg);
            } catch (const ProtocolError&) {
            } catch (const bytes::Truncated&) {
            } catch (const SocketError&) {
            }
            const bool ended = !item.msg;
            {
                std::lock_guard lock(mu_);
                queue_.push_back(std::move(item));
            }
            cv_.notify_all();
            if (ended) return;
        }
    }

    void handle(uint64_t conn_id, const Message& msg, bool stopping) {
        ConnPtr conn;
        {
            std::lock_guard lock(mu_);
            const auto it = conns_.find(conn_id);
            if (it == conns_.end()) return;
            conn = it->second;
        }
        try {
            if (std::holds_alternative<Hello>(msg)) return; // registration only
            if (stopping) {
                conn->sock.send_frame(Shutdown{});
                return;
            }
            if (const auto* samples = std::get_if<SampleBatchMsg>(&msg)) {
                const uint8_t code = core_.ingest(*samples);
                if (core_.reached_step_target())
                    conn->sock.send_frame(Shutdown{});
                else
                    conn->sock.send_frame(Ack{code});
            } else if (std::holds_alternative<ModelRequest>(msg)) {
                conn->sock.send_frame(ModelBytes{*core_.published()});
            } else {
                // workers have no business sending MODEL/ACK/SHUTDOWN
                conn->sock.shutdown_both();
            }
        } catch (const SocketError&) {
            conn->sock.shutdown_both(); // reader will surface the disconnect
        }
    }

    // Stop accepting, tell every idle worker to quit on its next request,
    // and start the drain clock.
    std::chrono::steady_clock::time_point begin_stop() {
        listener_.request_stop();
        return std::chrono::steady_clock::now() +
               std::chrono::milliseconds(opt_.drain_grace_ms);
    }

    void force_close_locked() {
        for (auto& [id, conn] : conns_) conn->sock.shutdown_both();
    }

    void drop_connection(uint64_t conn_id) {
        ConnPtr conn;
        {
            std::lock_guard lock(mu_);
            const auto it = conns_.find(conn_id);
            if (it == conns_.end()) return;
            conn = std::move(it->second);
            conns_.erase(it);
        }
        if (conn->reader.joinable()) conn->reader.join();
    }

    TrainerCore& core_;
    ManagerOptions opt_;
    Listener listener_;

    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Item> queue_;
    std::unordered_map<uint64_t, ConnPtr> conns_;
    uint64_t next_conn_id_ = 1;
};

} // namespace dodgerl::distrib
