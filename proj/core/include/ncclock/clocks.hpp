#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncclock/curves.hpp"
#include "ncclock/rational.hpp"

namespace ncclock {

struct ClockSpec {
    Rational rho1;
    Rational rho2;
    Rational rho3;
    Rational eta;

    Rational stability() const { return 1 + rho1 + rho2 + rho3; }
};

// Network-wide clock model. Without delta the network is not synchronized.
struct ClockEnvelope {
    Rational rho{1};
    Rational eta{0};
    std::optional<Rational> delta;

    bool synchronized() const { return delta.has_value(); }
    friend bool operator==(const ClockEnvelope&, const ClockEnvelope&) = default;
};

ClockEnvelope make_envelope(const Rational& rho, const Rational& eta, std::optional<Rational> delta = std::nullopt);
ClockEnvelope ideal_envelope();
ClockEnvelope derive_envelope(const std::vector<ClockSpec>& specs);
ClockEnvelope preset_envelope(const std::string& name);
std::vector<std::string> preset_names();

Rational envelope_upper(const ClockEnvelope& env, const Rational& tau);
Rational envelope_lower(const ClockEnvelope& env, const Rational& tau);
// The same bounds as curves on [0, inf), for composition with arrival and service curves.
PwlCurve envelope_upper_curve(const ClockEnvelope& env);
PwlCurve envelope_lower_curve(const ClockEnvelope& env);

struct ClockPoint {
    Rational t;
    Rational d;
    friend bool operator==(const ClockPoint&, const ClockPoint&) = default;
};

// Continuous, strictly increasing piecewise-linear relative time function d_{g->i},
// defined on the whole real line: affine with `head_slope` before the first point
// and with `tail_slope` after the last one.
class ClockFunction {
public:
    ClockFunction();
    ClockFunction(std::vector<ClockPoint> points, Rational head_slope, Rational tail_slope);

    static ClockFunction identity();
    static ClockFunction affine(const Rational& slope, const Rational& offset);

    Rational operator()(const Rational& t) const;
    const std::vector<ClockPoint>& points() const { return points_; }
    const Rational& head_slope() const { return head_slope_; }
    const Rational& tail_slope() const { return tail_slope_; }

    friend bool operator==(const ClockFunction&, const ClockFunction&) = default;

private:
    std::vector<ClockPoint> points_;
    Rational head_slope_{1};
    Rational tail_slope_{1};
};

ClockFunction invert(const ClockFunction& d);
// Apply `first`, then `second`: t -> second(first(t)).
ClockFunction compose(const ClockFunction& first, const ClockFunction& second);

enum class EnvelopeConstraint { Upper, Lower, TimeError };
const char* constraint_name(EnvelopeConstraint c);

struct EnvelopeViolation {
    EnvelopeConstraint constraint;
    Rational s;
    Rational t;
};

struct EnvelopeReport {
    bool valid = true;
    std::optional<EnvelopeViolation> violation;
};

// Exact check of the envelope constraints for all lo <= s <= t <= hi.
EnvelopeReport validate_envelope(const ClockFunction& d, const ClockEnvelope& env, const Rational& lo,
                                 const Rational& hi);

}  // namespace ncclock
