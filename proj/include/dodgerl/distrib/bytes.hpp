#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

#include <zlib.h>

namespace dodgerl::bytes {

struct Truncated : std::runtime_error {
    Truncated() : std::runtime_error("byte stream truncated") {}
    explicit Truncated(const std::string& what) : std::runtime_error(what) {}
};

inline uint32_t crc32_of(std::span<const uint8_t> data) {
    return static_cast<uint32_t>(
        ::crc32(0UL, data.data(), static_cast<uInt>(data.size())));
}

// Little-endian append-only buffer.
struct Writer {
    std::vector<uint8_t> buf;

    void u8(uint8_t v) { buf.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
    void raw(const void* data, size_t n) {
        const auto* p = static_cast<const uint8_t*>(data);
        buf.insert(buf.end(), p, p + n);
    }
};

// Little-endian cursor over a byte span; underrun throws Truncated.
struct Reader {
    std::span<const uint8_t> data;
    size_t pos = 0;

    explicit Reader(std::span<const uint8_t> d) : data(d) {}

    size_t remaining() const { return data.size() - pos; }

    void need(size_t n) const {
        if (remaining() < n) throw Truncated();
    }

    uint8_t u8() {
        need(1);
        return data[pos++];
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data[pos++]) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data[pos++]) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::span<const uint8_t> raw(size_t n) {
        need(n);
        auto out = data.subspan(pos, n);
        pos += n;
        return out;
    }
};

} // namespace dodgerl::bytes
