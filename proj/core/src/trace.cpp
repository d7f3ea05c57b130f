#include "ncclock/trace.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace ncclock {

void check_trace(const PacketTrace& trace) {
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        if (trace.events[i].packet.length <= 0)
            throw Error(ErrorKind::InvalidParameter, "packet length must be positive");
        if (i > 0 && trace.events[i].time < trace.events[i - 1].time)
            throw Error(ErrorKind::InvalidParameter, "trace times must be non-decreasing");
    }
}

PacketTrace merge_traces(const std::vector<PacketTrace>& traces, const std::string& clock) {
    struct Keyed {
        const TraceEvent* event;
        std::size_t source;
        std::size_t index;
    };
    std::vector<Keyed> all;
    for (std::size_t s = 0; s < traces.size(); ++s)
        for (std::size_t i = 0; i < traces[s].events.size(); ++i) all.push_back({&traces[s].events[i], s, i});
    std::stable_sort(all.begin(), all.end(), [](const Keyed& a, const Keyed& b) {
        if (a.event->time != b.event->time) return a.event->time < b.event->time;
        if (a.source != b.source) return a.source < b.source;
        return a.index < b.index;
    });
    PacketTrace out{clock, {}};
    out.events.reserve(all.size());
    for (const auto& k : all) out.events.push_back(*k.event);
    return out;
}

PacketTrace flow_subtrace(const PacketTrace& trace, int flow) {
    PacketTrace out{trace.clock, {}};
    for (const auto& e : trace.events)
        if (e.packet.flow == flow) out.events.push_back(e);
    return out;
}

bool conforms(const PacketTrace& trace, const PwlCurve& alpha) {
    const auto& ev = trace.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        Rational sum = 0;
        for (std::size_t j = i; j < ev.size(); ++j) {
            sum += ev[j].packet.length;
            if (ExtRational(sum) > alpha.right_limit(ev[j].time - ev[i].time)) return false;
        }
    }
    return true;
}

void write_trace_csv_header(std::ostream& os) {
    os << "clock_tag,time_rational,time_float,flow,packet,length_bits,event\n";
}

void write_trace_csv(std::ostream& os, const PacketTrace& trace, EventKind kind) {
    const char* name = kind == EventKind::Arrival ? "arrival" : "departure";
    for (const auto& e : trace.events) {
        std::ostringstream f;
        f << std::setprecision(17) << to_double(e.time);
        os << trace.clock << ',' << to_string(e.time) << ',' << f.str() << ',' << e.packet.flow << ','
           << e.packet.id << ',' << to_string(e.packet.length) << ',' << name << '\n';
    }
}

std::vector<CsvRow> read_trace_csv(std::istream& is) {
    std::vector<CsvRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() != 7) throw Error(ErrorKind::InvalidInput, "trace CSV row needs 7 columns: " + line);
        CsvRow row;
        row.clock = cols[0];
        row.time = parse_rational(cols[1]);
        row.flow = std::stoi(cols[3]);
        row.packet = std::stoull(cols[4]);
        row.length = parse_rational(cols[5]);
        if (cols[6] == "arrival")
            row.event = EventKind::Arrival;
        else if (cols[6] == "departure")
            row.event = EventKind::Departure;
        else
            throw Error(ErrorKind::InvalidInput, "unknown trace event '" + cols[6] + "'");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace ncclock
