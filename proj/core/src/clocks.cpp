#include "ncclock/clocks.hpp"

#include <algorithm>

namespace ncclock {

ClockEnvelope make_envelope(const Rational& rho, const Rational& eta, std::optional<Rational> delta) {
    if (rho < 1) throw Error(ErrorKind::InvalidParameter, "clock stability bound rho must be >= 1");
    if (eta < 0) throw Error(ErrorKind::InvalidParameter, "jitter bound eta must be >= 0");
    if (delta && *delta < 0) throw Error(ErrorKind::InvalidParameter, "time-error bound delta must be >= 0");
    return ClockEnvelope{rho, eta, std::move(delta)};
}

ClockEnvelope ideal_envelope() { return ClockEnvelope{}; }

ClockEnvelope derive_envelope(const std::vector<ClockSpec>& specs) {
    if (specs.empty()) throw Error(ErrorKind::InvalidParameter, "derive_envelope needs at least one clock");
    for (const auto& s : specs)
        if (s.rho1 < 0 || s.rho2 < 0 || s.rho3 < 0 || s.eta < 0)
            throw Error(ErrorKind::InvalidParameter, "clock spec bounds must be >= 0");
    ClockEnvelope env;
    bool first = true;
    for (const auto& i : specs) {
        for (const auto& g : specs) {
            Rational rho = i.stability() * g.stability();
            Rational eta = g.eta * i.stability() + i.eta;
            if (first || rho > env.rho) env.rho = rho;
            if (first || eta > env.eta) env.eta = eta;
            first = false;
        }
    }
    return env;
}

ClockEnvelope preset_envelope(const std::string& name) {
    const Rational rho = parse_rational("1.0002");
    const Rational eta = parse_rational("4e-9");
    if (name == "tsn-nonsync") return make_envelope(rho, eta);
    if (name == "tsn-tight-sync") return make_envelope(rho, eta, parse_rational("1e-6"));
    if (name == "ntp-loose-sync") return make_envelope(rho, eta, parse_rational("0.125"));
    if (name == "ideal") return ideal_envelope();
    throw Error(ErrorKind::InvalidInput, "unknown envelope preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"tsn-nonsync", "tsn-tight-sync", "ntp-loose-sync", "ideal"}; }

Rational envelope_upper(const ClockEnvelope& env, const Rational& tau) {
    Rational v = env.rho * tau + env.eta;
    if (env.delta) v = std::min(v, Rational(tau + 2 * *env.delta));
    return v;
}

Rational envelope_lower(const ClockEnvelope& env, const Rational& tau) {
    Rational v = std::max(Rational(0), Rational((tau - env.eta) / env.rho));
    if (env.delta) v = std::max(v, Rational(tau - 2 * *env.delta));
    return v;
}

PwlCurve envelope_upper_curve(const ClockEnvelope& env) {
    PwlCurve c = make_affine(env.rho, env.eta);
    if (env.delta) c = min_curve(c, make_affine(Rational(1), Rational(2 * *env.delta)));
    return c;
}

PwlCurve envelope_lower_curve(const ClockEnvelope& env) {
    Rational inv = 1 / env.rho;
    PwlCurve c = env.eta == 0
                     ? PwlCurve(Rational(0), {Segment{Rational(0), ExtRational(0), inv}})
                     : PwlCurve(Rational(0), {Segment{Rational(0), ExtRational(0), Rational(0)},
                                              Segment{env.eta, ExtRational(0), inv}});
    if (env.delta) c = max_curve(c, make_affine(Rational(1), Rational(-2 * *env.delta)));
    return c;
}

ClockFunction::ClockFunction() : points_{ClockPoint{Rational(0), Rational(0)}} {}

ClockFunction::ClockFunction(std::vector<ClockPoint> points, Rational head_slope, Rational tail_slope)
    : points_(std::move(points)), head_slope_(std::move(head_slope)), tail_slope_(std::move(tail_slope)) {
    if (points_.empty()) throw Error(ErrorKind::InvalidClock, "clock function needs at least one breakpoint");
    if (head_slope_ <= 0 || tail_slope_ <= 0) throw Error(ErrorKind::InvalidClock, "clock function must be strictly increasing");
    for (std::size_t i = 1; i < points_.size(); ++i)
        if (points_[i].t <= points_[i - 1].t || points_[i].d <= points_[i - 1].d)
            throw Error(ErrorKind::InvalidClock, "clock function must be strictly increasing");
    // Drop breakpoints where the slope does not change.
    std::vector<ClockPoint> kept;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        Rational before = i == 0 ? head_slope_
                                 : Rational((points_[i].d - points_[i - 1].d) / (points_[i].t - points_[i - 1].t));
        Rational after = i + 1 == points_.size()
                             ? tail_slope_
                             : Rational((points_[i + 1].d - points_[i].d) / (points_[i + 1].t - points_[i].t));
        if (before != after) kept.push_back(points_[i]);
    }
    if (kept.empty()) {
        const ClockPoint& p = points_.front();
        kept.push_back({Rational(0), Rational(p.d - head_slope_ * p.t)});
    }
    points_ = std::move(kept);
}

ClockFunction ClockFunction::identity() { return ClockFunction(); }

ClockFunction ClockFunction::affine(const Rational& slope, const Rational& offset) {
    return ClockFunction({ClockPoint{Rational(0), offset}}, slope, slope);
}

Rational ClockFunction::operator()(const Rational& t) const {
    if (t <= points_.front().t) return points_.front().d + head_slope_ * (t - points_.front().t);
    if (t >= points_.back().t) return points_.back().d + tail_slope_ * (t - points_.back().t);
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](const Rational& x, const ClockPoint& p) { return x < p.t; });
    const ClockPoint& b = *it;
    const ClockPoint& a = *std::prev(it);
    return a.d + (b.d - a.d) * (t - a.t) / (b.t - a.t);
}

ClockFunction invert(const ClockFunction& d) {
    std::vector<ClockPoint> pts;
    for (const auto& p : d.points()) pts.push_back({p.d, p.t});
    return ClockFunction(std::move(pts), Rational(1 / d.head_slope()), Rational(1 / d.tail_slope()));
}

ClockFunction compose(const ClockFunction& first, const ClockFunction& second) {
    ClockFunction first_inv = invert(first);
    std::vector<Rational> ts;
    for (const auto& p : first.points()) ts.push_back(p.t);
    for (const auto& p : second.points()) ts.push_back(first_inv(p.t));
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    std::vector<ClockPoint> pts;
    for (const auto& t : ts) pts.push_back({t, second(first(t))});
    return ClockFunction(std::move(pts), Rational(first.head_slope() * second.head_slope()),
                         Rational(first.tail_slope() * second.tail_slope()));
}

const char* constraint_name(EnvelopeConstraint c) {
    switch (c) {
        case EnvelopeConstraint::Upper: return "upper";
        case EnvelopeConstraint::Lower: return "lower";
        case EnvelopeConstraint::TimeError: return "time-error";
    }
    return "unknown";
}

EnvelopeReport validate_envelope(const ClockFunction& d, const ClockEnvelope& env, const Rational& lo,
                                 const Rational& hi) {
    if (hi < lo) throw Error(ErrorKind::DomainError, "empty validation domain");
    std::vector<Rational> ts{lo, hi};
    for (const auto& p : d.points())
        if (p.t > lo && p.t < hi) ts.push_back(p.t);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    // The binding pairs sit on breakpoints, so running extrema over them are exact.
    Rational inv_rho = 1 / env.rho;
    Rational lower_slack = env.eta / env.rho;
    std::size_t arg_min_upper = 0;
    std::size_t arg_max_lower = 0;
    std::vector<Rational> upper(ts.size()), lower(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        Rational v = d(ts[k]);
        upper[k] = v - env.rho * ts[k];
        lower[k] = v - inv_rho * ts[k];
        if (upper[k] - upper[arg_min_upper] > env.eta)
            return {false, EnvelopeViolation{EnvelopeConstraint::Upper, ts[arg_min_upper], ts[k]}};
        if (lower[k] - lower[arg_max_lower] < -lower_slack)
            return {false, EnvelopeViolation{EnvelopeConstraint::Lower, ts[arg_max_lower], ts[k]}};
        if (env.delta && abs(v - ts[k]) > *env.delta)
            return {false, EnvelopeViolation{EnvelopeConstraint::TimeError, ts[k], ts[k]}};
        if (upper[k] < upper[arg_min_upper]) arg_min_upper = k;
        if (lower[k] > lower[arg_max_lower]) arg_max_lower = k;
    }
    return {};
}

}  // namespace ncclock
