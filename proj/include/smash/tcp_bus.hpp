#pragma once

// TCP transport for the bus: one JSON object per line, UTF-8.
//   frame     = {"t": "<topic>", "p": <payload>, "seq": <n>}
//   subscribe = {"sub": "<pattern>"}
// Remote peers subscribe to and publish on the local bus.

#include "smash/bus.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace smash {

namespace tcp_detail {

inline bool send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

}  // namespace tcp_detail

class TcpBusServer {
public:
    TcpBusServer(Bus& bus, uint16_t port) : bus_(bus) {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw BusError("socket() failed");
        int yes = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(port);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
            ::close(listen_fd_);
            throw BusError("bind() failed for port " + std::to_string(port));
        }
        socklen_t len = sizeof(addr);
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
        if (::listen(listen_fd_, 8) < 0) {
            ::close(listen_fd_);
            throw BusError("listen() failed");
        }
        accept_thread_ = std::thread([this] { accept_loop(); });
    }

    ~TcpBusServer() { stop(); }

    uint16_t port() const { return port_; }

    void stop() {
        bool expected = false;
        if (!stopping_.compare_exchange_strong(expected, true)) return;
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        if (accept_thread_.joinable()) accept_thread_.join();
        std::lock_guard<std::mutex> lock(conns_mutex_);
        for (auto& c : conns_) {
            for (auto id : c->subs) bus_.unsubscribe(id);
            ::shutdown(c->fd, SHUT_RDWR);
            ::close(c->fd);
            if (c->reader.joinable()) c->reader.join();
        }
        conns_.clear();
    }

private:
    struct Connection {
        int fd;
        std::mutex write_mutex;
        std::vector<Bus::SubscriptionId> subs;
        std::thread reader;
    };

    void accept_loop() {
        while (!stopping_) {
            int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) break;
            auto conn = std::make_shared<Connection>();
            conn->fd = fd;
            conn->reader = std::thread([this, conn] { read_loop(conn); });
            std::lock_guard<std::mutex> lock(conns_mutex_);
            conns_.push_back(conn);
        }
    }

    void read_loop(std::shared_ptr<Connection> conn) {
        std::string buffer;
        char chunk[4096];
        while (!stopping_) {
            ssize_t n = ::recv(conn->fd, chunk, sizeof(chunk), 0);
            if (n <= 0) break;
            buffer.append(chunk, static_cast<std::size_t>(n));
            std::size_t pos;
            while ((pos = buffer.find('\n')) != std::string::npos) {
                std::string line = buffer.substr(0, pos);
                buffer.erase(0, pos + 1);
                if (line.empty()) continue;
                handle_frame(conn, line);
            }
        }
    }

    void handle_frame(const std::shared_ptr<Connection>& conn, const std::string& line) {
        Json frame;
        try {
            frame = Json::parse(line);
        } catch (const Json::parse_error&) {
            return;  // drop malformed frames
        }
        if (frame.contains("sub") && frame["sub"].is_string()) {
            std::string pattern = frame["sub"].get<std::string>();
            auto id = bus_.subscribe(pattern, [conn](const BusMessage& m) {
                Json out{{"t", m.topic}, {"p", m.payload}, {"seq", m.seq}};
                std::lock_guard<std::mutex> lock(conn->write_mutex);
                tcp_detail::send_all(conn->fd, out.dump() + "\n");
            });
            conn->subs.push_back(id);
            return;
        }
        if (frame.contains("t") && frame["t"].is_string()) {
            try {
                bus_.publish(frame["t"].get<std::string>(), frame.value("p", Json{}));
            } catch (const BusError&) {
                // malformed remote topic: ignored
            }
        }
    }

    Bus& bus_;
    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::mutex conns_mutex_;
    std::vector<std::shared_ptr<Connection>> conns_;
};

// Minimal client, used by tests and external tools.
class TcpBusClient {
public:
    explicit TcpBusClient(uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw BusError("socket() failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(port);
        if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
            ::close(fd_);
            throw BusError("connect() failed");
        }
    }

    ~TcpBusClient() {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
    }

    void subscribe(const std::string& pattern) {
        Json frame{{"sub", pattern}};
        tcp_detail::send_all(fd_, frame.dump() + "\n");
    }

    void publish(const std::string& topic, Json payload) {
        Json frame{{"t", topic}, {"p", std::move(payload)}};
        tcp_detail::send_all(fd_, frame.dump() + "\n");
    }

    // Blocks until one frame arrives or the timeout elapses.
    bool read_frame(Json& out, std::chrono::milliseconds timeout) {
        auto deadline = std::chrono::steady_clock::now() + timeout;
        while (true) {
            std::size_t pos = buffer_.find('\n');
            if (pos != std::string::npos) {
                std::string line = buffer_.substr(0, pos);
                buffer_.erase(0, pos + 1);
                out = Json::parse(line, nullptr, false);
                if (!out.is_discarded()) return true;
                continue;
            }
            auto remaining = deadline - std::chrono::steady_clock::now();
            if (remaining <= std::chrono::milliseconds(0)) return false;
            timeval tv{};
            auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(remaining).count();
            tv.tv_sec = ms / 1000;
            tv.tv_usec = static_cast<suseconds_t>((ms % 1000) * 1000);
            ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
            char chunk[4096];
            ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
            if (n <= 0) {
                if (errno == EAGAIN || errno == EWOULDBLOCK) return false;
                return false;
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    int fd_ = -1;
    std::string buffer_;
};

}  // namespace smash
