#pragma once

#include <optional>
#include <vector>

#include "ncclock/rational.hpp"

namespace ncclock {

// One affine piece on the half-open interval (start, next start].
// `value` is the right limit at `start`; an infinite value makes the piece +inf.
struct Segment {
    Rational start;
    ExtRational value;
    Rational slope;

    friend bool operator==(const Segment&, const Segment&) = default;
};

// Piecewise-linear function on [0, inf).
//
// Convention: the value at 0 is stored separately and every breakpoint t > 0
// takes the left limit, so gamma_{r,b}(0) = 0, gamma_{r,b}(0+) = b and
// delta_D(D) = 0. The representation is canonical, so equality is structural.
class PwlCurve {
public:
    PwlCurve();
    PwlCurve(Rational at_zero, std::vector<Segment> segments);

    const Rational& at_zero() const { return at_zero_; }
    const std::vector<Segment>& segments() const { return segments_; }

    ExtRational eval(const Rational& t) const;
    ExtRational right_limit(const Rational& t) const;
    // Size of the jump at t = 0.
    ExtRational jump0() const;

    bool is_nondecreasing() const;
    bool is_finite() const;
    // Slope of the unbounded last piece (meaningless if that piece is +inf).
    const Rational& tail_slope() const { return segments_.back().slope; }
    std::vector<Rational> breakpoints() const;

    PwlCurve with_at_zero(Rational v) const;

    friend bool operator==(const PwlCurve&, const PwlCurve&) = default;

private:
    Rational at_zero_;
    std::vector<Segment> segments_;
};

PwlCurve make_leaky_bucket(const Rational& r, const Rational& b);
PwlCurve make_rate_latency(const Rational& R, const Rational& T);
PwlCurve make_delta(const Rational& D);
PwlCurve make_affine(const Rational& slope, const Rational& intercept);
PwlCurve make_zero();

ExtRational eval(const PwlCurve& c, const Rational& t);

PwlCurve min_curve(const PwlCurve& a, const PwlCurve& b);
PwlCurve max_curve(const PwlCurve& a, const PwlCurve& b);
PwlCurve add_curves(const PwlCurve& a, const PwlCurve& b);
PwlCurve convolve(const PwlCurve& a, const PwlCurve& b);
PwlCurve deconvolve(const PwlCurve& a, const PwlCurve& b);
ExtRational horizontal_deviation(const PwlCurve& alpha, const PwlCurve& beta);

// f(g(t)); g must be nondecreasing and nonnegative.
PwlCurve compose(const PwlCurve& f, const PwlCurve& g);
// inf{s >= 0 : beta(s) >= y}; beta nondecreasing with beta(0) >= 0.
PwlCurve pseudo_inverse(const PwlCurve& beta);

}  // namespace ncclock
