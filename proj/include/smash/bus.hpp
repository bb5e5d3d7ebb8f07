#pragma once

// In-process pub/sub message bus with MQTT-style topic patterns, plus an
// optional TCP transport (newline-delimited JSON frames) for multi-process
// runs.

#include "smash/logic.hpp"

#include "json.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace smash {

using Json = nlohmann::json;

struct BusError : Error {
    using Error::Error;
};

struct BusMessage {
    std::string topic;
    Json payload;
    std::uint64_t seq = 0;  // per-topic, strictly increasing
};

namespace bus_detail {

inline std::vector<std::string> split_topic(std::string_view topic) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= topic.size(); ++i) {
        if (i == topic.size() || topic[i] == '/') {
            out.emplace_back(topic.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace bus_detail

// '+' matches one segment, '#' matches the remainder (last segment only).
inline bool topic_matches(std::string_view pattern, std::string_view topic) {
    auto p = bus_detail::split_topic(pattern);
    auto t = bus_detail::split_topic(topic);
    std::size_t i = 0;
    for (; i < p.size(); ++i) {
        if (p[i] == "#") return i + 1 == p.size();
        if (i >= t.size()) return false;
        if (p[i] != "+" && p[i] != t[i]) return false;
    }
    return i == t.size();
}

// Topics follow the device/agent namespace; anything else is malformed.
inline void validate_topic(std::string_view topic) {
    auto segs = bus_detail::split_topic(topic);
    for (const auto& s : segs)
        if (s.empty() || s.find_first_of("+#") != std::string::npos)
            throw BusError("malformed topic '" + std::string(topic) + "'");
    bool ok = (segs.size() == 4 && segs[0] == "devices" && segs[2] == "properties") ||
              (segs.size() == 3 && segs[0] == "devices" && (segs[2] == "operations" || segs[2] == "signals")) ||
              (segs.size() == 3 && segs[0] == "agent" && segs[2] == "goals");
    if (!ok) throw BusError("malformed topic '" + std::string(topic) + "'");
}

inline void validate_pattern(std::string_view pattern) {
    auto segs = bus_detail::split_topic(pattern);
    if (segs.empty()) throw BusError("empty pattern");
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs[i].empty()) throw BusError("malformed pattern '" + std::string(pattern) + "'");
        if (segs[i] == "#" && i + 1 != segs.size())
            throw BusError("'#' must be the last segment: '" + std::string(pattern) + "'");
    }
}

class Bus {
public:
    using Callback = std::function<void(const BusMessage&)>;
    using SubscriptionId = std::uint64_t;

    // Delivery runs inline under the bus lock: per-topic FIFO order holds
    // even with concurrent publishers, and same-thread devices may publish
    // re-entrantly from their callbacks.
    std::uint64_t publish(const std::string& topic, Json payload) {
        validate_topic(topic);
        std::lock_guard<std::recursive_mutex> lock(mutex_);
        BusMessage msg{topic, std::move(payload), ++seq_[topic]};
        auto subs = subs_;  // subscribers may unsubscribe from callbacks
        for (const auto& sub : subs)
            if (sub.active && topic_matches(sub.pattern, topic)) sub.fn(msg);
        return msg.seq;
    }

    SubscriptionId subscribe(const std::string& pattern, Callback fn) {
        validate_pattern(pattern);
        std::lock_guard<std::recursive_mutex> lock(mutex_);
        subs_.push_back({next_id_, pattern, std::move(fn), true});
        return next_id_++;
    }

    void unsubscribe(SubscriptionId id) {
        std::lock_guard<std::recursive_mutex> lock(mutex_);
        for (auto& sub : subs_)
            if (sub.id == id) sub.active = false;
        std::erase_if(subs_, [](const Subscriber& s) { return !s.active; });
    }

private:
    struct Subscriber {
        SubscriptionId id;
        std::string pattern;
        Callback fn;
        bool active;
    };

    std::recursive_mutex mutex_;
    std::map<std::string, std::uint64_t> seq_;
    std::vector<Subscriber> subs_;
    SubscriptionId next_id_ = 1;
};

// A subscription drained as a queue; the reasoning runtime consumes its
// inbox this way.
class MessageQueue {
public:
    MessageQueue(Bus& bus, const std::string& pattern) : MessageQueue(bus, std::vector<std::string>{pattern}) {}

    MessageQueue(Bus& bus, const std::vector<std::string>& patterns) : bus_(bus) {
        for (const std::string& p : patterns)
            ids_.push_back(bus.subscribe(p, [this](const BusMessage& m) {
                std::lock_guard<std::mutex> lock(mutex_);
                queue_.push_back(m);
                cv_.notify_all();
            }));
    }

    ~MessageQueue() {
        for (auto id : ids_) bus_.unsubscribe(id);
    }

    MessageQueue(const MessageQueue&) = delete;
    MessageQueue& operator=(const MessageQueue&) = delete;

    bool try_pop(BusMessage& out) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (queue_.empty()) return false;
        out = std::move(queue_.front());
        queue_.pop_front();
        return true;
    }

    bool wait_pop(BusMessage& out, std::chrono::milliseconds timeout) {
        std::unique_lock<std::mutex> lock(mutex_);
        if (!cv_.wait_for(lock, timeout, [&] { return !queue_.empty(); })) return false;
        out = std::move(queue_.front());
        queue_.pop_front();
        return true;
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return queue_.size();
    }

private:
    Bus& bus_;
    std::vector<Bus::SubscriptionId> ids_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<BusMessage> queue_;
};

}  // namespace smash
