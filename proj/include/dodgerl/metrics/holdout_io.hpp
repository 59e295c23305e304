#pragma once

#include <fstream>

#include "dodgerl/distrib/bytes.hpp"
#include "dodgerl/metrics/metrics.hpp"

namespace dodgerl::metrics {

// Holdout file layout (little-endian): "DRLH" magic, u32 version, u64 seed,
// u32 state count, u32 state dim, count*dim f32 states, count u8 levels,
// CRC-32 of everything before the checksum.
inline constexpr uint32_t kHoldoutVersion = 1;
inline constexpr char kHoldoutMagic[4] = {'D', 'R', 'L', 'H'};

inline std::vector<uint8_t> serialize_holdout(const HoldoutSet& hs) {
    bytes::Writer w;
    w.raw(kHoldoutMagic, 4);
    w.u32(kHoldoutVersion);
    w.u64(hs.seed);
    w.u32(static_cast<uint32_t>(hs.states.size()));
    w.u32(hs.states.empty() ? arena::kStateDim
                            : static_cast<uint32_t>(hs.states.front().size()));
    for (const auto& state : hs.states)
        for (const float v : state) w.f32(v);
    for (const int level : hs.levels) w.u8(static_cast<uint8_t>(level));
    w.u32(bytes::crc32_of(w.buf));
    return std::move(w.buf);
}

inline HoldoutSet deserialize_holdout(std::span<const uint8_t> data) {
    if (data.size() < 4 + 4 + 8 + 4 + 4 + 4) throw MetricsError("holdout file truncated");
    bytes::Reader r(data);
    char magic[4];
    std::memcpy(magic, r.raw(4).data(), 4);
    if (std::memcmp(magic, kHoldoutMagic, 4) != 0)
        throw MetricsError("holdout file has wrong magic");
    const uint32_t version = r.u32();
    if (version != kHoldoutVersion)
        throw MetricsError("unsupported holdout version " + std::to_string(version));
    const uint32_t stored_crc = [&] {
        bytes::Reader tail(data.subspan(data.size() - 4));
        return tail.u32();
    }();
    if (bytes::crc32_of(data.first(data.size() - 4)) != stored_crc)
        throw MetricsError("holdout checksum mismatch");

    HoldoutSet hs;
    hs.seed = r.u64();
    const uint32_t count = r.u32();
    const uint32_t dim = r.u32();
    if (count > (1u << 24) || dim == 0 || dim > (1u << 16))
        throw MetricsError("holdout header out of range");
    hs.states.resize(count);
    for (auto& state : hs.states) {
        state.resize(dim);
        for (auto& v : state) v = r.f32();
    }
    hs.levels.resize(count);
    for (auto& level : hs.levels) level = r.u8();
    if (r.pos != data.size() - 4) throw MetricsError("holdout has trailing bytes");
    return hs;
}

inline void save_holdout(const HoldoutSet& hs, const std::string& path) {
    const auto data = serialize_holdout(hs);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MetricsError("cannot write holdout file: " + path);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw MetricsError("short write on holdout file: " + path);
}

inline HoldoutSet load_holdout(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MetricsError("cannot open holdout file: " + path);
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    return deserialize_holdout(data);
}

} // namespace dodgerl::metrics
