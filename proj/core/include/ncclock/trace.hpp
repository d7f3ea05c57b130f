#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ncclock/curves.hpp"
#include "ncclock/rational.hpp"

namespace ncclock {

struct Packet {
    std::uint64_t id = 0;
    int flow = 0;
    Rational length{1};

    friend bool operator==(const Packet&, const Packet&) = default;
};

struct TraceEvent {
    Rational time;
    Packet packet;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

// Packet completions observed with the clock named by `clock`.
struct PacketTrace {
    std::string clock = "TAI";
    std::vector<TraceEvent> events;

    friend bool operator==(const PacketTrace&, const PacketTrace&) = default;
};

// Throws invalid-parameter unless times are non-decreasing and lengths positive.
void check_trace(const PacketTrace& trace);

// Stable merge by time; ties keep the order of `traces`, then the order inside each trace.
PacketTrace merge_traces(const std::vector<PacketTrace>& traces, const std::string& clock);

PacketTrace flow_subtrace(const PacketTrace& trace, int flow);

// Sliding-window check over all event pairs i <= j of one flow:
// sum of lengths in [t_i, t_j] <= alpha(t_j - t_i) taken as a right limit.
bool conforms(const PacketTrace& trace, const PwlCurve& alpha);

enum class EventKind { Arrival, Departure };

struct CsvRow {
    std::string clock;
    Rational time;
    int flow = 0;
    std::uint64_t packet = 0;
    Rational length;
    EventKind event = EventKind::Arrival;
};

void write_trace_csv_header(std::ostream& os);
void write_trace_csv(std::ostream& os, const PacketTrace& trace, EventKind kind);
std::vector<CsvRow> read_trace_csv(std::istream& is);

}  // namespace ncclock
