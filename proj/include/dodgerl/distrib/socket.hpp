#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <optional>
#include <string>
#include <utility>

#include "dodgerl/distrib/wire.hpp"

namespace dodgerl::distrib {

struct SocketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Address {
    std::string host;
    uint16_t port = 0;
};

inline Address parse_address(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw SocketError("address must look like host:port, got: " + text);
    Address a;
    a.host = text.substr(0, colon);
    const std::string port_text = text.substr(colon + 1);
    char* end = nullptr;
    const long port = std::strtol(port_text.c_str(), &end, 10);
    if (*end != '\0' || port < 0 || port > 65535)
        throw SocketError("bad port in address: " + text);
    a.port = static_cast<uint16_t>(port);
    return a;
}

// One connected stream. Reads and writes may run on different threads;
// neither side is shared between threads.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            close_fd();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }
    ~Socket() { close_fd(); }

    bool valid() const { return fd_ >= 0; }

    static Socket connect_to(const Address& addr) {
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(addr.port);
        if (inet_pton(AF_INET, addr.host.c_str(), &sa.sin_addr) != 1)
            throw SocketError("cannot parse IPv4 host: " + addr.host);
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw SocketError(std::string("socket(): ") + std::strerror(errno));
        if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
            const int err = errno;
            ::close(fd);
            throw SocketError(std::string("connect(): ") + std::strerror(err));
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return Socket(fd);
    }

    void send_frame(const Message& msg) {
        const auto frame = encode_message(msg);
        size_t sent = 0;
        while (sent < frame.size()) {
            const ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent,
                                     MSG_NOSIGNAL);
            if (n <= 0) {
                if (n < 0 && errno == EINTR) continue;
                throw SocketError(std::string("send(): ") + std::strerror(errno));
            }
            sent += static_cast<size_t>(n);
        }
    }

    // One framed message; empty when the peer closed cleanly between frames.
    // Oversize declared lengths are rejected before any allocation.
    std::optional<Message> recv_message() {
        uint8_t len_bytes[4];
        if (!read_exact(len_bytes, 4, true)) return std::nullopt;
        uint32_t len = 0;
        for (int i = 0; i < 4; ++i) len |= static_cast<uint32_t>(len_bytes[i]) << (8 * i);
        if (len > kMaxFrameBytes) throw Oversize();
        if (len == 0) throw Malformed();
        std::vector<uint8_t> body(len);
        if (!read_exact(body.data(), len, false)) throw bytes::Truncated("peer closed mid-frame");
        return decode_body(body);
    }

    // Unblock any reader; safe to call from another thread.
    void shutdown_both() {
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
    }

private:
    bool read_exact(uint8_t* dst, size_t n, bool eof_ok_at_start) {
        size_t got = 0;
        while (got < n) {
            const ssize_t r = ::recv(fd_, dst + got, n - got, 0);
            if (r == 0) {
                if (got == 0 && eof_ok_at_start) return false;
                throw bytes::Truncated("peer closed mid-frame");
            }
            if (r < 0) {
                if (errno == EINTR) continue;
                throw SocketError(std::string("recv(): ") + std::strerror(errno));
            }
            got += static_cast<size_t>(r);
        }
        return true;
    }

    void close_fd() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    int fd_ = -1;
};

class Listener {
public:
    Listener() = default;
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;
    Listener(Listener&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Listener& operator=(Listener&& other) noexcept {
        if (this != &other) {
            close_fd();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }
    ~Listener() { close_fd(); }

    // Bind with SO_REUSEADDR; port 0 picks an ephemeral port (see port()).
    static Listener bind_listen(const Address& addr, int backlog = 16) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw SocketError(std::string("socket(): ") + std::strerror(errno));
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(addr.port);
        if (inet_pton(AF_INET, addr.host.c_str(), &sa.sin_addr) != 1) {
            ::close(fd);
            throw SocketError("cannot parse IPv4 host: " + addr.host);
        }
        if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0 ||
            ::listen(fd, backlog) != 0) {
            const int err = errno;
            ::close(fd);
            throw SocketError(std::string("bind/listen: ") + std::strerror(err));
        }
        return Listener(fd);
    }

    uint16_t port() const {
        sockaddr_in sa{};
        socklen_t len = sizeof(sa);
        if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) != 0)
            throw SocketError(std::string("getsockname(): ") + std::strerror(errno));
        return ntohs(sa.sin_port);
    }

    // Blocks for the next connection; empty once the listener is shut down.
    std::optional<Socket> accept_once() {
        const int fd = ::accept(fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) return accept_once();
            return std::nullopt;
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return Socket(fd);
    }

    // Unblock accept_once() from another thread.
    void request_stop() {
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
    }

private:
    explicit Listener(int fd) : fd_(fd) {}

    void close_fd() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    int fd_ = -1;
};

} // namespace dodgerl::distrib
