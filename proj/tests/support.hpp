#pragma once

// Shared generators and brute-force oracles for the test binaries.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ncclock/clocks.hpp"
#include "ncclock/curves.hpp"
#include "ncclock/rational.hpp"

namespace testsupport {

using ncclock::ExtRational;
using ncclock::PwlCurve;
using ncclock::Rational;
using ncclock::Segment;

// GMP does not canonicalize two-argument construction, and comparisons assume canonical form.
inline Rational frac(long n, long d) {
    Rational q(n, d);
    q.canonicalize();
    return q;
}

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
    // Uniform on a lattice of step 1/den in [lo, hi].
    Rational lattice(long lo, long hi, long den) { return frac(integer(lo * den, hi * den), den); }
    // Positive rational p/q with small terms.
    Rational small_positive(long max_num = 20, long max_den = 8) {
        return frac(integer(1, max_num), integer(1, max_den));
    }
    // 1 + x with x in (0, 1/den_scale], a drift-like stability bound.
    Rational rho(long den_scale = 1000) { return 1 + frac(integer(1, 50), integer(1, 50) * den_scale); }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Nondecreasing curve with breakpoints on the quarter lattice in [0, span], integer slopes and jumps.
// With `allow_inf`, the curve may end in a +inf piece.
inline PwlCurve random_curve(Gen& g, long span = 4, bool allow_inf = false, bool allow_zero_jump = true) {
    std::vector<Rational> starts{Rational(0)};
    for (long k = 1; k <= span * 4; ++k)
        if (g.coin(0.25)) starts.push_back(frac(k, 4));
    Rational at_zero = g.integer(0, 2);
    Rational level = at_zero + (allow_zero_jump ? g.integer(0, 3) : g.integer(1, 3));
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (allow_inf && i > 0 && i + 1 == starts.size() && g.coin(0.3)) {
            segs.push_back({starts[i], ExtRational::infinity(), Rational(0)});
            break;
        }
        Rational slope = g.integer(0, 4);
        segs.push_back({starts[i], ExtRational(level), slope});
        if (i + 1 < starts.size()) level = level + slope * (starts[i + 1] - starts[i]) + g.integer(0, 2);
    }
    return PwlCurve(at_zero, segs);
}

inline std::vector<Rational> lattice_points(const Rational& hi, long den) {
    std::vector<Rational> out;
    Rational step(1, den);
    for (Rational t = 0; t <= hi; t += step) out.push_back(t);
    return out;
}

// Curve value at t approached from the right, by direct evaluation of the segment list.
inline ExtRational right_value(const PwlCurve& c, const Rational& t) {
    const auto& segs = c.segments();
    std::size_t i = 0;
    while (i + 1 < segs.size() && segs[i + 1].start <= t) ++i;
    if (segs[i].value.is_infinite()) return ExtRational::infinity();
    return ExtRational(Rational(segs[i].value.value() + segs[i].slope * (t - segs[i].start)));
}

// Value at t with the left-continuous convention, again by direct scan.
inline ExtRational point_value(const PwlCurve& c, const Rational& t) {
    if (t == 0) return ExtRational(c.at_zero());
    const auto& segs = c.segments();
    std::size_t i = 0;
    while (i + 1 < segs.size() && segs[i + 1].start < t) ++i;
    if (segs[i].value.is_infinite()) return ExtRational::infinity();
    return ExtRational(Rational(segs[i].value.value() + segs[i].slope * (t - segs[i].start)));
}

inline ExtRational ext_min(const ExtRational& a, const ExtRational& b) { return a < b ? a : b; }
inline ExtRational ext_max(const ExtRational& a, const ExtRational& b) { return a < b ? b : a; }

// inf over lattice s in [0, t] of f(s) + g(t - s). Exact for lattice-aligned nondecreasing operands.
inline ExtRational oracle_convolution(const PwlCurve& f, const PwlCurve& g, const Rational& t, long den) {
    ExtRational best = ExtRational::infinity();
    for (const auto& s : lattice_points(t, den)) best = ext_min(best, point_value(f, s) + point_value(g, t - s));
    return best;
}

// sup over lattice u in [0, U] of f(t + u) - g(u), including right limits. Nullopt for +inf.
inline std::optional<Rational> oracle_deconvolution(const PwlCurve& f, const PwlCurve& g, const Rational& t,
                                                    const Rational& U, long den) {
    std::optional<Rational> best;
    for (const auto& u : lattice_points(U, den)) {
        for (int side = 0; side < 2; ++side) {
            ExtRational fv = side ? right_value(f, t + u) : point_value(f, t + u);
            ExtRational gv = side ? right_value(g, u) : point_value(g, u);
            if (gv.is_infinite()) continue;
            if (fv.is_infinite()) return std::nullopt;
            Rational d = fv.value() - gv.value();
            if (!best || d > *best) best = d;
        }
    }
    return best;
}

// Lower pseudo-inverse of beta sampled on a lattice: values and right limits at every lattice point,
// then the crossing is solved inside the first lattice cell that reaches the level.
class InverseOracle {
public:
    InverseOracle(const PwlCurve& beta, const Rational& hi, long den) : den_(den) {
        for (const auto& t : lattice_points(hi, den)) {
            point_.push_back(point_value(beta, t));
            right_.push_back(right_value(beta, t));
        }
    }

    // inf{s : beta(s) >= y}, or inf{s : beta(s) > y} when strict.
    std::optional<Rational> operator()(const Rational& y, bool strict) const {
        auto ok = [&](const ExtRational& v) { return strict ? v > ExtRational(y) : v >= ExtRational(y); };
        if (ok(point_[0])) return Rational(0);
        std::size_t j = 1;
        {
            std::size_t lo = 1, hi = point_.size();
            while (lo < hi) {
                std::size_t mid = (lo + hi) / 2;
                if (ok(point_[mid])) hi = mid;
                else lo = mid + 1;
            }
            j = lo;
        }
        if (j == point_.size()) return std::nullopt;
        Rational a = frac(static_cast<long>(j - 1), den_);
        const ExtRational& ra = right_[j - 1];
        if (ok(ra) || point_[j].is_infinite()) return ok(ra) ? a : frac(static_cast<long>(j), den_);
        Rational step(1, den_);
        Rational slope = (point_[j].value() - ra.value()) / step;
        return a + (y - ra.value()) / slope;
    }

private:
    long den_;
    std::vector<ExtRational> point_, right_;
};

// sup over lattice t in [0, T] of inverse(alpha(t)) - t, with right limits of alpha. Nullopt for +inf.
inline std::optional<Rational> oracle_hdev(const PwlCurve& alpha, const PwlCurve& beta, const Rational& T,
                                           const Rational& hi, long den) {
    InverseOracle inverse(beta, hi, den);
    Rational best = 0;
    for (const auto& t : lattice_points(T, den)) {
        for (int side = 0; side < 2; ++side) {
            ExtRational y = side ? right_value(alpha, t) : point_value(alpha, t);
            if (y.is_infinite()) return std::nullopt;
            auto s = inverse(y.value(), side == 1);
            if (!s) return std::nullopt;
            best = std::max(best, Rational(*s - t));
        }
    }
    return best;
}

// Random clock function d_{g->i} that satisfies the non-synchronized envelope (rho, eta) on [lo, hi]:
// slopes in [1/rho, rho] and no jumps, so eta is not used.
inline ncclock::ClockFunction random_envelope_clock(Gen& g, const Rational& rho, const Rational& lo, const Rational& hi,
                                                    int pieces) {
    std::vector<ncclock::ClockPoint> pts;
    Rational t = lo;
    Rational d = lo + frac(g.integer(-1000, 1000), 1000000);
    pts.push_back({t, d});
    Rational step = (hi - lo) / pieces;
    for (int k = 0; k < pieces; ++k) {
        // Slope drawn from the lattice between 1/rho and rho.
        Rational lo_s = 1 / rho;
        Rational w = frac(g.integer(0, 8), 8);
        Rational slope = lo_s + (rho - lo_s) * w;
        t += step;
        d += slope * step;
        pts.push_back({t, d});
    }
    Rational head = g.coin() ? Rational(1) : rho;
    Rational tail = g.coin() ? Rational(1) : 1 / rho;
    return ncclock::ClockFunction(pts, head, tail);
}

// Clock within delta of TAI with slopes in [1/rho, rho].
inline ncclock::ClockFunction random_sync_clock(Gen& g, const Rational& rho, const Rational& delta, const Rational& hi) {
    std::vector<ncclock::ClockPoint> pts{{0, 0}};
    Rational t = 0, u = 0;
    Rational room = 1 - 1 / rho;
    while (t < hi) {
        Rational dt = frac(g.integer(1, 8), 4);
        Rational step = room * dt * frac(g.integer(-8, 8), 8);
        Rational next = std::clamp(Rational(u + step), Rational(-delta), delta);
        t += dt;
        u = next;
        pts.push_back({t, t + u});
    }
    return ncclock::ClockFunction(pts, 1, 1);
}

}  // namespace testsupport
