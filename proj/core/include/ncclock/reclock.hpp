#pragma once

#include <string>

#include "ncclock/clocks.hpp"
#include "ncclock/curves.hpp"
#include "ncclock/trace.hpp"

namespace ncclock {

// Delay bound observed with H_i, re-expressed as a bound in any other clock.
Rational reclock_delay(const Rational& D, const ClockEnvelope& env);

// Trace observed with H_i, re-expressed in H_g, where d = d_{g->i}.
PacketTrace reclock_trace(const PacketTrace& trace, const ClockFunction& d, const std::string& target_clock);
// Forward map: every timestamp t becomes d(t).
PacketTrace map_trace(const PacketTrace& trace, const ClockFunction& d, const std::string& target_clock);

// Generic paths: composition with the envelope bound functions.
PwlCurve reclock_arrival_curve(const PwlCurve& alpha, const ClockEnvelope& env);
PwlCurve reclock_service_curve(const PwlCurve& beta, const ClockEnvelope& env);

// Closed forms for the usual shapes.
PwlCurve reclock_leaky_bucket(const Rational& r, const Rational& b, const ClockEnvelope& env);
PwlCurve reclock_rate_latency(const Rational& R, const Rational& T, const ClockEnvelope& env);
// Service curve of a token-bucket regulator (r, b) running on a foreign clock.
PwlCurve reclock_pfr_service(const Rational& r, const Rational& b, const ClockEnvelope& env);

}  // namespace ncclock
