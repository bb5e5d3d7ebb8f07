#pragma once

// Scripted device artifacts: observable property slots published on the bus,
// operations guarded by per-type transition tables, completion signals, and
// the sofa's weight classifier.

#include "smash/bus.hpp"
#include "smash/logic.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace smash {

// ---------------------------------------------------------------------------
// Weight classifier (sofa): nearest registered profile within tolerance.
// ---------------------------------------------------------------------------

struct WeightClassifier {
    std::map<std::string, double> profiles;  // user id -> reference weight (kg)
    double tolerance = 5.0;
    double vacancy_threshold = 20.0;

    struct Seated {
        std::string user;
    };
    struct Vacant {};
    struct Unknown {};
    using Result = std::variant<Seated, Vacant, Unknown>;

    Result classify(double reading) const {
        if (reading < vacancy_threshold) return Vacant{};
        std::optional<std::string> best;
        double best_dist = 0;
        for (const auto& [user, weight] : profiles) {
            double d = reading > weight ? reading - weight : weight - reading;
            if (!best || d < best_dist) {  // ties resolve to the first user id
                best = user;
                best_dist = d;
            }
        }
        if (best && best_dist <= tolerance) return Seated{*best};
        return Unknown{};
    }
};

// ---------------------------------------------------------------------------
// Transition tables, total over (state, target): every pair yields success
// (possibly a no-op) or an illegal-transition failure.
// ---------------------------------------------------------------------------

enum class DeviceType : uint8_t { tv, phone, pc, sofa, generic };

inline DeviceType parse_device_type(std::string_view s) {
    if (s == "tv") return DeviceType::tv;
    if (s == "phone") return DeviceType::phone;
    if (s == "pc") return DeviceType::pc;
    if (s == "sofa") return DeviceType::sofa;
    if (s == "generic") return DeviceType::generic;
    throw ConfigError("unknown device type '" + std::string(s) + "'");
}

inline const std::vector<std::string>& device_states(DeviceType type) {
    static const std::vector<std::string> tv{"off", "standby", "playing", "mute", "recording"};
    static const std::vector<std::string> phone{"idle", "ringing", "voicemail", "in_call"};
    static const std::vector<std::string> pc{"off", "standby", "on"};
    static const std::vector<std::string> none{};
    switch (type) {
        case DeviceType::tv: return tv;
        case DeviceType::phone: return phone;
        case DeviceType::pc: return pc;
        default: return none;
    }
}

inline bool legal_device_transition(DeviceType type, const std::string& from, const std::string& to) {
    if (from == to) return true;  // no-op
    switch (type) {
        case DeviceType::tv:
            if (to == "off") return true;  // power off from anywhere
            if (from == "off") return to == "standby";
            if (from == "standby") return to == "playing";
            if (from == "playing") return to == "standby" || to == "mute" || to == "recording";
            if (from == "mute") return to == "playing" || to == "recording" || to == "standby";
            if (from == "recording") return to == "playing" || to == "mute" || to == "standby";
            return false;
        case DeviceType::phone:
            if (from == "idle") return to == "ringing" || to == "voicemail" || to == "in_call";
            if (from == "ringing") return to == "in_call" || to == "voicemail" || to == "idle";
            if (from == "voicemail") return to == "ringing" || to == "idle";
            if (from == "in_call") return to == "idle";
            return false;
        case DeviceType::pc:
            if (from == "off") return to == "standby";
            if (from == "standby") return to == "on" || to == "off";
            if (from == "on") return to == "standby" || to == "off";
            return false;
        case DeviceType::sofa:
            return false;  // sensor only
        case DeviceType::generic:
            return true;  // free-form state machine for synthetic scenarios
    }
    return false;
}

// ---------------------------------------------------------------------------
// Device artifact
// ---------------------------------------------------------------------------

struct ExecSignal {
    bool ok = true;
    std::string err;  // unknown_operation | illegal_transition | device_error
};

class Device {
public:
    Device(Bus& bus, std::string id, DeviceType type) : bus_(bus), id_(std::move(id)), type_(type) {
        op_sub_ = bus_.subscribe("devices/" + id_ + "/operations", [this](const BusMessage& m) {
            handle_operation_message(m.payload);
        });
    }

    ~Device() { bus_.unsubscribe(op_sub_); }

    Device(const Device&) = delete;
    Device& operator=(const Device&) = delete;

    const std::string& id() const { return id_; }
    DeviceType type() const { return type_; }

    WeightClassifier& classifier() { return classifier_; }

    // Sets a slot without publishing; used to seed initial state before a run.
    void seed_slot(const std::string& predicate, std::vector<Term> args) {
        slots_[normalize_constant_name(predicate)] = std::move(args);
    }

    // Publishes the current value of every slot, announcing initial state.
    void announce() {
        for (const auto& [pred, args] : slots_) {
            Json payload{{"args", args_json(args)}, {"prev", nullptr}};
            bus_.publish(property_topic(pred), std::move(payload));
        }
    }

    const std::map<std::string, std::vector<Term>>& slots() const { return slots_; }

    std::optional<std::string> status() const {
        auto it = slots_.find("devicestatus");
        if (it == slots_.end() || it->second.size() != 2) return std::nullopt;
        return it->second[1].name;
    }

    // The next operation fails with device_error (fault injection).
    void reject_next() { reject_next_ = true; }

    // Scripted behaviours -----------------------------------------------

    // Incoming call: replaces the pending-call slot beliefs
    // callerType(caller, type) and incomingCall(device, caller).
    void script_incoming_call(const std::string& caller, const std::string& type) {
        set_slot("callertype", {Term::constant(caller), Term::constant(type)});
        set_slot("incomingcall", {Term::constant(id_), Term::constant(caller)});
    }

    // Weight reading: classification drives beSeated / isStand beliefs.
    void script_weight(double reading) {
        auto result = classifier_.classify(reading);
        if (std::holds_alternative<WeightClassifier::Seated>(result)) {
            const auto& user = std::get<WeightClassifier::Seated>(result).user;
            clear_slot("isstand");
            set_slot("beseated", {Term::constant(user), Term::constant(id_)});
            occupant_ = user;
        } else if (std::holds_alternative<WeightClassifier::Vacant>(result)) {
            // vacancy is attributed to the last identified occupant
            if (occupant_) {
                clear_slot("beseated");
                set_slot("isstand", {Term::constant(*occupant_)});
            }
        }
        // unknown: no belief change
    }

    // Direct operation entry point (the bus handler calls this too).
    ExecSignal apply_operation(const std::string& op, const std::vector<std::string>& args) {
        if (reject_next_) {
            reject_next_ = false;
            return {false, "device_error"};
        }
        if (op == "set_status") {
            if (args.size() != 1) return {false, "unknown_operation"};
            return set_status(normalize_constant_name(args[0]));
        }
        if (op == "set_channel" && type_ == DeviceType::tv) {
            if (args.size() != 1) return {false, "unknown_operation"};
            auto st = status();
            if (!st || *st == "off") return {false, "illegal_transition"};
            set_slot("displaying", {Term::constant(id_), Term::constant(args[0])});
            return {true, ""};
        }
        return {false, "unknown_operation"};
    }

    void set_generic_states(std::vector<std::string> states) { generic_states_ = std::move(states); }

private:
    ExecSignal set_status(const std::string& target) {
        auto current = status();
        if (!current) return {false, "unknown_operation"};
        bool legal;
        if (type_ == DeviceType::generic) {
            legal = generic_states_.empty() ||
                    std::find(generic_states_.begin(), generic_states_.end(), target) != generic_states_.end();
        } else {
            const auto& states = device_states(type_);
            if (std::find(states.begin(), states.end(), target) == states.end())
                return {false, "illegal_transition"};
            legal = legal_device_transition(type_, *current, target);
        }
        if (!legal) return {false, "illegal_transition"};
        if (*current != target) {
            set_slot("devicestatus", {Term::constant(id_), Term::constant(target)});
            after_status_change(target);
        }
        return {true, ""};
    }

    void after_status_change(const std::string& now) {
        if (type_ == DeviceType::tv && (now == "off" || now == "standby")) clear_slot("displaying");
        if (type_ == DeviceType::phone && (now == "voicemail" || now == "in_call")) {
            // the pending call has been handled
            clear_slot("incomingcall");
            clear_slot("callertype");
        }
    }

    void handle_operation_message(const Json& payload) {
        std::string op = payload.value("op", "");
        std::vector<std::string> args;
        if (payload.contains("args") && payload["args"].is_array())
            for (const auto& a : payload["args"]) args.push_back(a.is_string() ? a.get<std::string>() : a.dump());
        ExecSignal sig = apply_operation(op, args);
        Json out{{"req", payload.value("req", 0)}, {"ok", sig.ok}};
        if (!sig.ok) out["err"] = sig.err;
        bus_.publish("devices/" + id_ + "/signals", std::move(out));
    }

    std::string property_topic(const std::string& pred) const {
        return "devices/" + id_ + "/properties/" + pred;
    }

    static Json args_json(const std::vector<Term>& args) {
        Json out = Json::array();
        for (const Term& t : args) out.push_back(t.name);
        return out;
    }

    // Every slot change publishes exactly one property message carrying the
    // new and previous argument vectors.
    void set_slot(const std::string& pred, std::vector<Term> args) {
        auto it = slots_.find(pred);
        if (it != slots_.end() && it->second == args) return;  // no change, no publish
        Json payload;
        payload["args"] = args_json(args);
        payload["prev"] = it == slots_.end() ? Json(nullptr) : args_json(it->second);
        slots_[pred] = std::move(args);
        bus_.publish(property_topic(pred), std::move(payload));
    }

    void clear_slot(const std::string& pred) {
        auto it = slots_.find(pred);
        if (it == slots_.end()) return;
        Json payload;
        payload["args"] = nullptr;
        payload["prev"] = args_json(it->second);
        slots_.erase(it);
        bus_.publish(property_topic(pred), std::move(payload));
    }

    Bus& bus_;
    std::string id_;
    DeviceType type_;
    Bus::SubscriptionId op_sub_;
    std::map<std::string, std::vector<Term>> slots_;
    std::vector<std::string> generic_states_;
    WeightClassifier classifier_;
    std::optional<std::string> occupant_;
    bool reject_next_ = false;
};

}  // namespace smash
