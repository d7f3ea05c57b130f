#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncclock/methods.hpp"

namespace ncclock {

struct NetworkElement {
    std::string id;
    ElementModel model;
};

struct NetworkRegulator {
    std::string id;
    RegulatorKind kind = RegulatorKind::PFR;
    HopGrid grid;
};

struct PathRef {
    std::string element;
    std::optional<std::string> regulator;
};

struct NetworkFlow {
    std::string id;
    SourceParams source;
    std::vector<PathRef> path;
};

// None: regulators keep the source shaping curve with no clock-aware correction.
enum class NetworkMethod { None, Cascade, Adam, SyncNonAdapted };
const char* network_method_name(NetworkMethod m);
NetworkMethod parse_network_method(const std::string& name);

struct Network {
    ClockEnvelope envelope;
    std::vector<NetworkElement> elements;
    std::vector<NetworkRegulator> regulators;
    std::vector<NetworkFlow> flows;
    NetworkMethod method = NetworkMethod::Cascade;
};

struct FlowReport {
    std::string id;
    std::vector<PathRef> path;
    // Empty when the flow's delay is unbounded.
    std::optional<PathBound> bound;
};

struct NetworkReport {
    NetworkMethod method;
    ClockEnvelope envelope;
    std::vector<FlowReport> flows;
    std::vector<std::string> warnings;
    // Set when some bound is unbounded or some element is overloaded.
    bool unstable = false;
};

// Element bounds use the FIFO aggregate of every flow crossing the element.
NetworkReport analyze_network(const Network& net);

}  // namespace ncclock
