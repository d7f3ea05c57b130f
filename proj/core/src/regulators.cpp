#include "ncclock/regulators.hpp"

#include <algorithm>
#include <unordered_map>

#include "ncclock/reclock.hpp"

namespace ncclock {

const char* regulator_kind_name(RegulatorKind kind) { return kind == RegulatorKind::PFR ? "PFR" : "IR"; }

PacketTrace simulate_greedy_source(const LeakyBucket& sigma, const Rational& ell, const Rational& t_start,
                                   const Rational& horizon, int flow, std::uint64_t first_id,
                                   const std::string& clock) {
    if (ell <= 0) throw Error(ErrorKind::InvalidParameter, "packet length must be positive");
    if (sigma.rate < 0) throw Error(ErrorKind::InvalidParameter, "source rate must be >= 0");
    if (sigma.burst < ell) throw Error(ErrorKind::InvalidParameter, "source burst must be >= packet length");
    PacketTrace out{clock, {}};
    std::uint64_t id = first_id;
    for (Rational bits = ell;; bits += ell) {
        Rational t = t_start;
        if (bits > sigma.burst) {
            if (sigma.rate == 0) break;
            t += (bits - sigma.burst) / sigma.rate;
        }
        if (t > horizon) break;
        out.events.push_back({t, Packet{id++, flow, ell}});
    }
    return out;
}

namespace {

PacketTrace validate_script(const PacketTrace& in, const PacketTrace& script) {
    if (script.events.size() != in.events.size())
        throw Error(ErrorKind::InvalidScript, "scripted output must contain every input packet once");
    PacketTrace out{in.clock, {}};
    for (std::size_t i = 0; i < in.events.size(); ++i) {
        const auto& a = in.events[i];
        const auto& d = script.events[i];
        if (d.packet.id != a.packet.id)
            throw Error(ErrorKind::InvalidScript, "scripted output is not FIFO at packet " + std::to_string(a.packet.id));
        if (d.time < a.time)
            throw Error(ErrorKind::InvalidScript, "scripted output is not causal at packet " + std::to_string(a.packet.id));
        if (i > 0 && d.time < script.events[i - 1].time)
            throw Error(ErrorKind::InvalidScript, "scripted output times must be non-decreasing");
        out.events.push_back({d.time, a.packet});
    }
    return out;
}

struct Bucket {
    bool fresh = true;
    Rational level;
    Rational updated;

    Rational level_at(const LeakyBucket& s, const Rational& t) const {
        if (fresh) return s.burst;
        return std::min(s.burst, Rational(level + s.rate * (t - updated)));
    }

    // Earliest time >= start at which `length` bits are available.
    Rational eligible(const LeakyBucket& s, const Rational& start, const Rational& length) const {
        Rational l = level_at(s, start);
        if (l >= length) return start;
        return start + (length - l) / s.rate;
    }

    void take(const LeakyBucket& s, const Rational& t, const Rational& length) {
        level = level_at(s, t) - length;
        updated = t;
        fresh = false;
    }
};

const LeakyBucket& shaping_for(const RegulatorConfig& config, const Packet& p) {
    auto it = config.shaping.find(p.flow);
    if (it == config.shaping.end())
        throw Error(ErrorKind::InvalidParameter, "no shaping curve for flow " + std::to_string(p.flow));
    if (it->second.rate <= 0) throw Error(ErrorKind::InvalidParameter, "regulator rate must be positive");
    if (it->second.burst < p.length)
        throw Error(ErrorKind::InvalidParameter, "regulator burst below packet length for flow " + std::to_string(p.flow));
    return it->second;
}

PacketTrace run_regulator(const PacketTrace& in, const RegulatorConfig& config, const ClockFunction& to_local,
                          const std::string& local_clock, bool interleaved) {
    check_trace(in);
    std::map<int, Bucket> buckets;
    std::map<int, Rational> last_flow_release;
    std::optional<Rational> last_release;
    struct Out {
        Rational time;
        std::size_t index;
    };
    std::vector<Out> releases;
    releases.reserve(in.events.size());
    for (std::size_t i = 0; i < in.events.size(); ++i) {
        const Packet& p = in.events[i].packet;
        const LeakyBucket& s = shaping_for(config, p);
        Rational start = to_local(in.events[i].time);
        if (interleaved) {
            if (last_release && *last_release > start) start = *last_release;
        } else if (auto it = last_flow_release.find(p.flow); it != last_flow_release.end() && it->second > start) {
            start = it->second;
        }
        Bucket& b = buckets[p.flow];
        Rational e = b.eligible(s, start, p.length);
        b.take(s, e, p.length);
        last_release = e;
        last_flow_release[p.flow] = e;
        releases.push_back({e, i});
    }
    std::stable_sort(releases.begin(), releases.end(), [](const Out& a, const Out& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.index < b.index;
    });
    PacketTrace out{local_clock, {}};
    out.events.reserve(releases.size());
    for (const auto& r : releases) out.events.push_back({r.time, in.events[r.index].packet});
    return out;
}

}  // namespace

PacketTrace simulate_element(const PacketTrace& in, const ElementModel& model) {
    check_trace(in);
    if (std::holds_alternative<ZeroDelay>(model)) return in;
    if (const auto* fixed = std::get_if<FixedDelayBound>(&model)) {
        if (fixed->bound < 0) throw Error(ErrorKind::InvalidParameter, "delay bound must be >= 0");
        PacketTrace out = in;
        for (auto& e : out.events) e.time += fixed->bound;
        return out;
    }
    if (const auto* server = std::get_if<RateLatencyServer>(&model)) {
        if (server->latency < 0 || (server->rate && *server->rate <= 0))
            throw Error(ErrorKind::InvalidParameter, "rate-latency server needs R > 0 and T >= 0");
        PacketTrace out{in.clock, {}};
        std::optional<Rational> last;
        for (const auto& e : in.events) {
            // A packet finding the server idle opens a busy period and waits the latency first.
            Rational start = (!last || e.time > *last) ? Rational(e.time + server->latency) : *last;
            Rational done = server->rate ? Rational(start + e.packet.length / *server->rate) : start;
            out.events.push_back({done, e.packet});
            last = done;
        }
        return out;
    }
    return validate_script(in, std::get<ScriptedOutput>(model).output);
}

PacketTrace simulate_pfr(const PacketTrace& in, const RegulatorConfig& config, const ClockFunction& to_local,
                         const std::string& local_clock) {
    return run_regulator(in, config, to_local, local_clock, false);
}

PacketTrace simulate_pfr(const PacketTrace& in, const LeakyBucket& sigma, const ClockFunction& to_local,
                         const std::string& local_clock) {
    RegulatorConfig config;
    for (const auto& e : in.events) config.shaping[e.packet.flow] = sigma;
    return run_regulator(in, config, to_local, local_clock, false);
}

PacketTrace simulate_ir(const PacketTrace& in, const RegulatorConfig& config, const ClockFunction& to_local,
                        const std::string& local_clock) {
    return run_regulator(in, config, to_local, local_clock, true);
}

PacketTrace simulate_regulator(const PacketTrace& in, const RegulatorConfig& config, const ClockFunction& to_local,
                               const std::string& local_clock) {
    return run_regulator(in, config, to_local, local_clock, config.kind == RegulatorKind::IR);
}

namespace {

Rational max_backlog_of(const PacketTrace& in, const PacketTrace& out) {
    struct Ev {
        Rational time;
        Rational bits;
        bool arrival;
    };
    std::vector<Ev> evs;
    for (const auto& e : in.events) evs.push_back({e.time, e.packet.length, true});
    for (const auto& e : out.events) evs.push_back({e.time, e.packet.length, false});
    std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.arrival && !b.arrival;
    });
    Rational backlog = 0;
    Rational best = 0;
    std::size_t i = 0;
    while (i < evs.size()) {
        std::size_t j = i;
        for (; j < evs.size() && evs[j].time == evs[i].time && evs[j].arrival; ++j) backlog += evs[j].bits;
        best = std::max(best, backlog);
        for (; j < evs.size() && evs[j].time == evs[i].time; ++j) backlog -= evs[j].bits;
        i = j;
    }
    return best;
}

}  // namespace

Measurement measure(const PacketTrace& in, const PacketTrace& out, const ClockFunction& in_to_obs,
                    const ClockFunction& out_to_obs) {
    PacketTrace a = map_trace(in, in_to_obs, "observation");
    PacketTrace d = map_trace(out, out_to_obs, "observation");
    if (a.events.size() != d.events.size())
        throw Error(ErrorKind::TraceMismatch, "input and output traces hold different packet counts");
    std::unordered_map<std::uint64_t, const Rational*> departures;
    for (const auto& e : d.events)
        if (!departures.emplace(e.packet.id, &e.time).second)
            throw Error(ErrorKind::TraceMismatch, "packet " + std::to_string(e.packet.id) + " departs twice");
    Measurement m;
    m.max_delay = 0;
    for (const auto& e : a.events) {
        auto it = departures.find(e.packet.id);
        if (it == departures.end())
            throw Error(ErrorKind::TraceMismatch, "packet " + std::to_string(e.packet.id) + " never departs");
        Rational delay = *it->second - e.time;
        if (delay < 0) throw Error(ErrorKind::TraceMismatch, "packet " + std::to_string(e.packet.id) + " departs before arriving");
        m.ids.push_back(e.packet.id);
        m.max_delay = std::max(m.max_delay, delay);
        m.delays.push_back(std::move(delay));
    }
    m.max_backlog = max_backlog_of(a, d);
    return m;
}

Measurement measure(const PacketTrace& in, const PacketTrace& out) {
    return measure(in, out, ClockFunction::identity(), ClockFunction::identity());
}

Rational backlog_at(const PacketTrace& in, const PacketTrace& out, const Rational& t) {
    Rational b = 0;
    for (const auto& e : in.events)
        if (e.time <= t) b += e.packet.length;
    for (const auto& e : out.events)
        if (e.time < t) b -= e.packet.length;
    return b;
}

}  // namespace ncclock
