#include "ncclock/reclock.hpp"

namespace ncclock {

Rational reclock_delay(const Rational& D, const ClockEnvelope& env) {
    if (D < 0) throw Error(ErrorKind::InvalidParameter, "delay bound must be >= 0");
    return envelope_upper(env, D);
}

PacketTrace reclock_trace(const PacketTrace& trace, const ClockFunction& d, const std::string& target_clock) {
    return map_trace(trace, invert(d), target_clock);
}

PacketTrace map_trace(const PacketTrace& trace, const ClockFunction& d, const std::string& target_clock) {
    PacketTrace out{target_clock, {}};
    out.events.reserve(trace.events.size());
    for (const auto& e : trace.events) out.events.push_back({d(e.time), e.packet});
    return out;
}

PwlCurve reclock_arrival_curve(const PwlCurve& alpha, const ClockEnvelope& env) {
    // alpha(upper(0)) > 0 in general, but an arrival curve may always be taken as 0 at 0.
    return compose(alpha, envelope_upper_curve(env)).with_at_zero(Rational(0));
}

PwlCurve reclock_service_curve(const PwlCurve& beta, const ClockEnvelope& env) {
    return compose(beta, envelope_lower_curve(env));
}

PwlCurve reclock_leaky_bucket(const Rational& r, const Rational& b, const ClockEnvelope& env) {
    PwlCurve c = make_leaky_bucket(env.rho * r, b + r * env.eta);
    if (env.delta) c = min_curve(c, make_leaky_bucket(r, b + 2 * r * *env.delta));
    return c;
}

PwlCurve reclock_rate_latency(const Rational& R, const Rational& T, const ClockEnvelope& env) {
    PwlCurve c = make_rate_latency(R / env.rho, env.rho * T + env.eta);
    if (env.delta) c = max_curve(c, make_rate_latency(R, T + 2 * *env.delta));
    return c;
}

PwlCurve reclock_pfr_service(const Rational& r, const Rational& b, const ClockEnvelope& env) {
    PwlCurve c = convolve(make_delta(env.eta), make_leaky_bucket(r / env.rho, b));
    if (env.delta) c = max_curve(c, convolve(make_delta(2 * *env.delta), make_leaky_bucket(r, b)));
    return c;
}

}  // namespace ncclock
