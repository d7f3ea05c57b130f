#pragma once

#include <string>

#include "json.hpp"
#include "ncclock/clocks.hpp"
#include "ncclock/curves.hpp"
#include "ncclock/methods.hpp"
#include "ncclock/network.hpp"
#include "ncclock/scenarios.hpp"

namespace ncclock::io {

using nlohmann::json;

// Reading functions throw Error(InvalidInput) with a JSON pointer to the offending value.
// Rationals are written as strings; numbers are accepted on input.

Rational rational_from(const json& j, const std::string& ptr);
json rational_to(const Rational& q);
ExtRational ext_rational_from(const json& j, const std::string& ptr);
json ext_rational_to(const ExtRational& e);

PwlCurve curve_from(const json& j, const std::string& ptr = "");
json curve_to(const PwlCurve& c);

ClockEnvelope envelope_from(const json& j, const std::string& ptr = "");
json envelope_to(const ClockEnvelope& env);

ClockFunction clock_from(const json& j, const std::string& ptr = "");
json clock_to(const ClockFunction& d);

ElementModel element_from(const json& j, const std::string& ptr = "");
json element_to(const ElementModel& m);

RoundingGrid grid_from(const json& j, const std::string& ptr = "");
json grid_to(const RoundingGrid& g);

PacketTrace packets_from(const json& j, const std::string& clock, const std::string& ptr);
json packets_to(const PacketTrace& t);

Network network_from(const json& j);
json report_to(const NetworkReport& r);

// Scenario descriptor with an optional delay predicate.
struct ScenarioFile {
    Scenario scenario;
    std::optional<Rational> max_delay_at_most;
    std::optional<Rational> max_delay_at_least;
};
ScenarioFile scenario_from(const json& j);
json scenario_to(const Scenario& s);

}  // namespace ncclock::io
