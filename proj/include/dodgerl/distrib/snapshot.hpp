#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "dodgerl/agents/agents.hpp"
#include "dodgerl/distrib/bytes.hpp"
#include "dodgerl/nn/network.hpp"

namespace dodgerl::distrib {

struct SnapshotError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagic : SnapshotError {
    BadMagic() : SnapshotError("snapshot magic mismatch") {}
};
struct BadVersion : SnapshotError {
    BadVersion() : SnapshotError("unsupported snapshot version") {}
};
struct BadChecksum : SnapshotError {
    BadChecksum() : SnapshotError("snapshot checksum mismatch") {}
};

inline constexpr uint32_t kSnapshotVersion = 1;
inline constexpr char kSnapshotMagic[4] = {'D', 'R', 'L', 'M'};

// Byte layout: "DRLM", u32 version, u8 agent kind, u32 layer count, per
// layer (u32 in, u32 out, u8 activation), u64 training step, all parameters
// as 32-bit little-endian floats (per layer: weights row-major, then
// biases), u32 CRC-32 of everything before it.
inline std::vector<uint8_t> serialize_model(const nn::Netf& net, agents::AgentKind kind,
                                            uint64_t step) {
    bytes::Writer w;
    w.raw(kSnapshotMagic, 4);
    w.u32(kSnapshotVersion);
    w.u8(static_cast<uint8_t>(kind));
    w.u32(static_cast<uint32_t>(net.layers.size()));
    for (const auto& layer : net.layers) {
        w.u32(static_cast<uint32_t>(layer.spec.input_width));
        w.u32(static_cast<uint32_t>(layer.spec.output_width));
        w.u8(static_cast<uint8_t>(layer.spec.activation));
    }
    w.u64(step);
    for (const auto& layer : net.layers) {
        for (float v : layer.weights) w.f32(v);
        for (float v : layer.biases) w.f32(v);
    }
    w.u32(bytes::crc32_of(w.buf));
    return std::move(w.buf);
}

struct LoadedModel {
    nn::Netf net;
    agents::AgentKind kind = agents::AgentKind::dqn;
    uint64_t step = 0;
};

inline LoadedModel deserialize_model(std::span<const uint8_t> data) {
    if (data.size() < 4) throw bytes::Truncated();
    if (std::memcmp(data.data(), kSnapshotMagic, 4) != 0) throw BadMagic();
    if (data.size() < 8) throw bytes::Truncated();

    bytes::Reader r(data);
    r.raw(4);
    if (r.u32() != kSnapshotVersion) throw BadVersion();

    // checksum covers everything up to the final 4 bytes
    if (data.size() < 12) throw bytes::Truncated();
    const uint32_t stored = bytes::Reader(data.subspan(data.size() - 4)).u32();
    if (bytes::crc32_of(data.first(data.size() - 4)) != stored) throw BadChecksum();

    LoadedModel out;
    const uint8_t kind_raw = r.u8();
    if (kind_raw > static_cast<uint8_t>(agents::AgentKind::a3c))
        throw SnapshotError("unknown agent kind in snapshot");
    out.kind = static_cast<agents::AgentKind>(kind_raw);

    const uint32_t layer_count = r.u32();
    if (layer_count == 0 || layer_count > 1024)
        throw SnapshotError("implausible snapshot layer count");
    std::vector<nn::LayerSpec> specs;
    specs.reserve(layer_count);
    for (uint32_t i = 0; i < layer_count; ++i) {
        nn::LayerSpec spec;
        spec.input_width = static_cast<int>(r.u32());
        spec.output_width = static_cast<int>(r.u32());
        const uint8_t act = r.u8();
        if (act > static_cast<uint8_t>(nn::Activation::identity))
            throw SnapshotError("unknown activation in snapshot");
        spec.activation = static_cast<nn::Activation>(act);
        specs.push_back(spec);
    }
    out.step = r.u64();

    out.net.head = agents::head_for(out.kind);
    out.net.layout = nn::split_layers(specs, out.net.head); // validates shape chaining
    out.net.layers.reserve(layer_count);
    for (const auto& spec : specs) {
        nn::Layer<float> layer;
        layer.spec = spec;
        layer.weights.resize(static_cast<size_t>(spec.input_width) *
                             static_cast<size_t>(spec.output_width));
        layer.biases.resize(static_cast<size_t>(spec.output_width));
        for (auto& v : layer.weights) v = r.f32();
        for (auto& v : layer.biases) v = r.f32();
        out.net.layers.push_back(std::move(layer));
    }
    if (r.remaining() != 4) throw SnapshotError("trailing bytes after snapshot payload");
    return out;
}

inline std::string model_filename(uint64_t step) {
    return "model_" + std::to_string(step) + ".drlm";
}

inline void write_file(const std::string& path, std::span<const uint8_t> data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SnapshotError("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw SnapshotError("short write: " + path);
}

inline std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw SnapshotError("cannot open file: " + path);
    const auto size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> data(static_cast<size_t>(size));
    in.read(reinterpret_cast<char*>(data.data()), size);
    if (!in) throw SnapshotError("short read: " + path);
    return data;
}

} // namespace dodgerl::distrib
