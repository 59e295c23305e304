#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "dodgerl/distrib/bytes.hpp"
#include "dodgerl/replay.hpp"

namespace dodgerl::distrib {

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Oversize : ProtocolError {
    Oversize() : ProtocolError("frame exceeds 64 MiB limit") {}
};
struct UnknownType : ProtocolError {
    UnknownType() : ProtocolError("unknown message type") {}
};
struct Malformed : ProtocolError {
    Malformed() : ProtocolError("malformed message payload") {}
};

inline constexpr uint32_t kMaxFrameBytes = 64u * 1024u * 1024u;

struct Hello {
    uint32_t worker_id = 0;
    bool operator==(const Hello&) const = default;
};

// One upload of gameplay transitions. `sequence` increments per worker and
// lets the manager drop retransmitted batches after a reconnect.
struct SampleBatchMsg {
    uint32_t worker_id = 0;
    uint32_t sequence = 0;
    uint64_t model_step = 0;
    std::vector<Transition> samples;
    bool operator==(const SampleBatchMsg&) const = default;
};

struct ModelRequest {
    bool operator==(const ModelRequest&) const = default;
};

struct ModelBytes {
    std::vector<uint8_t> snapshot;
    bool operator==(const ModelBytes&) const = default;
};

struct Ack {
    uint8_t code = 0; // 0 = accepted, 1 = duplicate dropped
    bool operator==(const Ack&) const = default;
};

struct Shutdown {
    bool operator==(const Shutdown&) const = default;
};

using Message = std::variant<Hello, SampleBatchMsg, ModelRequest, ModelBytes, Ack, Shutdown>;

namespace wire_type {
inline constexpr uint8_t hello = 1;
inline constexpr uint8_t samples = 2;
inline constexpr uint8_t model_request = 3;
inline constexpr uint8_t model = 4;
inline constexpr uint8_t ack = 5;
inline constexpr uint8_t shutdown = 6;
} // namespace wire_type

// Frame layout: u32 little-endian length (type byte + payload), u8 type,
// payload. encode(HELLO{7}) = 05 00 00 00 | 01 | 07 00 00 00.
inline std::vector<uint8_t> encode_message(const Message& msg) {
    bytes::Writer body;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Hello>) {
                body.u8(wire_type::hello);
                body.u32(m.worker_id);
            } else if constexpr (std::is_same_v<T, SampleBatchMsg>) {
                body.u8(wire_type::samples);
                body.u32(m.worker_id);
                body.u32(m.sequence);
                body.u64(m.model_step);
                body.u32(static_cast<uint32_t>(m.samples.size()));
                const uint32_t dim =
                    m.samples.empty() ? 0 : static_cast<uint32_t>(m.samples[0].state.size());
                body.u32(dim);
                for (const auto& t : m.samples) {
                    for (float v : t.state) body.f32(v);
                    body.u8(t.action);
                    body.f32(t.reward);
                    for (float v : t.next_state) body.f32(v);
                    body.u8(t.terminal ? 1 : 0);
                }
            } else if constexpr (std::is_same_v<T, ModelRequest>) {
                body.u8(wire_type::model_request);
            } else if constexpr (std::is_same_v<T, ModelBytes>) {
                body.u8(wire_type::model);
                body.raw(m.snapshot.data(), m.snapshot.size());
            } else if constexpr (std::is_same_v<T, Ack>) {
                body.u8(wire_type::ack);
                body.u8(m.code);
            } else {
                body.u8(wire_type::shutdown);
            }
        },
        msg);
    if (body.buf.size() > kMaxFrameBytes) throw Oversize();

    bytes::Writer frame;
    frame.u32(static_cast<uint32_t>(body.buf.size()));
    frame.raw(body.buf.data(), body.buf.size());
    return std::move(frame.buf);
}

// Decode the body of one frame (everything after the length prefix). The
// payload must be consumed exactly; leftovers are malformed.
inline Message decode_body(std::span<const uint8_t> body) {
    bytes::Reader r(body);
    const uint8_t type = r.u8();
    Message out;
    switch (type) {
    case wire_type::hello: {
        Hello m;
        m.worker_id = r.u32();
        out = m;
        break;
    }
    case wire_type::samples: {
        SampleBatchMsg m;
        m.worker_id = r.u32();
        m.sequence = r.u32();
        m.model_step = r.u64();
        const uint32_t count = r.u32();
        const uint32_t dim = r.u32();
        if (count > 0 && dim == 0) throw Malformed();
        const uint64_t record_bytes = 8ull * dim + 6; // two f32 vectors + action/reward/terminal
        if (static_cast<uint64_t>(count) * record_bytes != r.remaining()) throw Malformed();
        m.samples.resize(count);
        for (auto& t : m.samples) {
            t.state.resize(dim);
            for (auto& v : t.state) v = r.f32();
            t.action = r.u8();
            t.reward = r.f32();
            t.next_state.resize(dim);
            for (auto& v : t.next_state) v = r.f32();
            t.terminal = r.u8() != 0;
        }
        out = std::move(m);
        break;
    }
    case wire_type::model_request:
        out = ModelRequest{};
        break;
    case wire_type::model: {
        ModelBytes m;
        auto raw = r.raw(r.remaining());
        m.snapshot.assign(raw.begin(), raw.end());
        out = std::move(m);
        break;
    }
    case wire_type::ack: {
        Ack m;
        m.code = r.u8();
        out = m;
        break;
    }
    case wire_type::shutdown:
        out = Shutdown{};
        break;
    default:
        throw UnknownType();
    }
    if (r.remaining() != 0) throw Malformed();
    return out;
}

// Decode one complete frame (length prefix included).
inline Message decode_message(std::span<const uint8_t> frame) {
    bytes::Reader r(frame);
    const uint32_t len = r.u32();
    if (len > kMaxFrameBytes) throw Oversize();
    if (len == 0) throw Malformed();
    if (r.remaining() != len) throw bytes::Truncated();
    return decode_body(r.raw(len));
}

} // namespace dodgerl::distrib
