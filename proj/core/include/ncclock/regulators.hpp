#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ncclock/clocks.hpp"
#include "ncclock/trace.hpp"

namespace ncclock {

struct LeakyBucket {
    Rational rate;
    Rational burst;

    friend bool operator==(const LeakyBucket&, const LeakyBucket&) = default;
};

enum class RegulatorKind { PFR, IR };
const char* regulator_kind_name(RegulatorKind kind);

struct RegulatorConfig {
    RegulatorKind kind = RegulatorKind::PFR;
    std::map<int, LeakyBucket> shaping;
};

struct ZeroDelay {};
struct FixedDelayBound {
    Rational bound;
};
// Infinite rate is encoded by an empty optional.
struct RateLatencyServer {
    std::optional<Rational> rate;
    Rational latency;
};
struct ScriptedOutput {
    PacketTrace output;
};
using ElementModel = std::variant<ZeroDelay, FixedDelayBound, RateLatencyServer, ScriptedOutput>;

// Greedy source: R(t) = floor(gamma_{r,b}(|t - t_start|+) / ell) * ell, one event per increment.
PacketTrace simulate_greedy_source(const LeakyBucket& sigma, const Rational& ell, const Rational& t_start,
                                   const Rational& horizon, int flow = 0, std::uint64_t first_id = 0,
                                   const std::string& clock = "TAI");

// FIFO network element; output keeps the input clock tag.
// FixedDelayBound delays every packet by exactly its bound.
PacketTrace simulate_element(const PacketTrace& in, const ElementModel& model);

// Per-flow regulator running on its local clock; `to_local` maps the input clock to it.
PacketTrace simulate_pfr(const PacketTrace& in, const RegulatorConfig& config, const ClockFunction& to_local,
                         const std::string& local_clock);
PacketTrace simulate_pfr(const PacketTrace& in, const LeakyBucket& sigma, const ClockFunction& to_local,
                         const std::string& local_clock);
// Interleaved regulator: one FIFO queue, the head packet waits for its own flow's bucket.
PacketTrace simulate_ir(const PacketTrace& in, const RegulatorConfig& config, const ClockFunction& to_local,
                        const std::string& local_clock);
PacketTrace simulate_regulator(const PacketTrace& in, const RegulatorConfig& config, const ClockFunction& to_local,
                               const std::string& local_clock);

struct Measurement {
    // Delays in input order of `in`.
    std::vector<std::uint64_t> ids;
    std::vector<Rational> delays;
    Rational max_delay;
    // Bits present at some instant, a packet counting from its arrival up to and including its departure instant.
    Rational max_backlog;
};

// Both traces are first mapped into the observation clock by the given forward maps.
Measurement measure(const PacketTrace& in, const PacketTrace& out, const ClockFunction& in_to_obs,
                    const ClockFunction& out_to_obs);
Measurement measure(const PacketTrace& in, const PacketTrace& out);

// Bits that arrived at or before t minus bits that departed strictly before t.
Rational backlog_at(const PacketTrace& in, const PacketTrace& out, const Rational& t);

}  // namespace ncclock
