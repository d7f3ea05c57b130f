#include "ncclock/curves.hpp"

#include <algorithm>

namespace ncclock {

namespace {

// value(t) = intercept + slope * t, or +inf everywhere.
struct Line {
    bool infinite = false;
    Rational slope;
    Rational intercept;

    Rational at(const Rational& t) const { return intercept + slope * t; }
};

Line infinite_line() {
    Line l;
    l.infinite = true;
    return l;
}

Line line_through(const Rational& t0, const ExtRational& v0, const Rational& slope) {
    if (v0.is_infinite()) return infinite_line();
    return Line{false, slope, v0.value() - slope * t0};
}

// Line restricted to (lo, hi]; a missing bound is unbounded.
struct Piece {
    std::optional<Rational> lo;
    std::optional<Rational> hi;
    Line line;
};

enum class Mode { Min, Max };

std::optional<Rational> next_start(const std::vector<Segment>& segs, std::size_t i) {
    if (i + 1 < segs.size()) return segs[i + 1].start;
    return std::nullopt;
}

ExtRational end_value(const Segment& s, const Rational& end) {
    if (s.value.is_infinite()) return ExtRational::infinity();
    return ExtRational(Rational(s.value.value() + s.slope * (end - s.start)));
}

// Lower (Min) or upper (Max) envelope of the pieces over (0, inf).
PwlCurve envelope(const std::vector<Piece>& pieces, Rational at_zero, Mode mode) {
    std::vector<Rational> points{Rational(0)};
    for (const auto& p : pieces) {
        if (p.lo && *p.lo > 0) points.push_back(*p.lo);
        if (p.hi && *p.hi > 0) points.push_back(*p.hi);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    std::vector<Segment> segs;
    std::vector<const Line*> lines;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const Rational& left = points[k];
        std::optional<Rational> right;
        if (k + 1 < points.size()) right = points[k + 1];

        lines.clear();
        bool any = false;
        bool any_infinite = false;
        for (const auto& p : pieces) {
            bool covers = (!p.lo || *p.lo <= left) && (!p.hi || (right && *p.hi >= *right));
            if (!covers) continue;
            any = true;
            if (p.line.infinite)
                any_infinite = true;
            else
                lines.push_back(&p.line);
        }
        if (mode == Mode::Max && !any)
            throw Error(ErrorKind::UnsupportedOperand, "upper envelope with uncovered interval");
        if ((mode == Mode::Max && any_infinite) || lines.empty()) {
            segs.push_back({left, ExtRational::infinity(), Rational(0)});
            continue;
        }

        std::vector<Rational> cuts{left};
        for (std::size_t i = 0; i < lines.size(); ++i) {
            for (std::size_t j = i + 1; j < lines.size(); ++j) {
                if (lines[i]->slope == lines[j]->slope) continue;
                Rational x = (lines[j]->intercept - lines[i]->intercept) / (lines[i]->slope - lines[j]->slope);
                if (x > left && (!right || x < *right)) cuts.push_back(x);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        for (std::size_t c = 0; c < cuts.size(); ++c) {
            Rational sample;
            if (c + 1 < cuts.size())
                sample = (cuts[c] + cuts[c + 1]) / 2;
            else if (right)
                sample = (cuts[c] + *right) / 2;
            else
                sample = cuts[c] + 1;
            const Line* best = lines.front();
            Rational best_value = best->at(sample);
            for (const Line* l : lines) {
                Rational v = l->at(sample);
                if ((mode == Mode::Min && v < best_value) || (mode == Mode::Max && v > best_value)) {
                    best = l;
                    best_value = v;
                }
            }
            segs.push_back({cuts[c], ExtRational(best->at(cuts[c])), best->slope});
        }
    }
    return PwlCurve(std::move(at_zero), std::move(segs));
}

std::vector<Piece> segment_pieces(const PwlCurve& c) {
    std::vector<Piece> out;
    const auto& segs = c.segments();
    for (std::size_t i = 0; i < segs.size(); ++i)
        out.push_back({segs[i].start, next_start(segs, i), line_through(segs[i].start, segs[i].value, segs[i].slope)});
    return out;
}

void require_nondecreasing(const PwlCurve& c, const char* op) {
    if (!c.is_nondecreasing())
        throw Error(ErrorKind::UnsupportedOperand, std::string(op) + " requires wide-sense increasing operands");
}

std::optional<Rational> add_opt(const std::optional<Rational>& a, const Rational& b) {
    if (!a) return std::nullopt;
    return Rational(*a + b);
}

}  // namespace

PwlCurve::PwlCurve() : PwlCurve(Rational(0), {Segment{Rational(0), ExtRational(0), Rational(0)}}) {}

PwlCurve::PwlCurve(Rational at_zero, std::vector<Segment> segments) : at_zero_(std::move(at_zero)) {
    if (segments.empty() || segments.front().start != 0)
        throw Error(ErrorKind::InvalidParameter, "curve segments must start at 0");
    for (std::size_t i = 1; i < segments.size(); ++i)
        if (segments[i].start <= segments[i - 1].start)
            throw Error(ErrorKind::InvalidParameter, "segment starts must be strictly increasing");

    for (auto& s : segments) {
        if (s.value.is_infinite()) s.slope = 0;
        if (!segments_.empty()) {
            const Segment& last = segments_.back();
            if (last.value.is_infinite()) {
                if (s.value.is_infinite()) continue;
                throw Error(ErrorKind::InvalidParameter, "curve becomes finite after +inf");
            }
            if (s.value.is_finite() && last.slope == s.slope && end_value(last, s.start) == s.value) continue;
        }
        segments_.push_back(std::move(s));
    }
}

ExtRational PwlCurve::eval(const Rational& t) const {
    if (t < 0) throw Error(ErrorKind::DomainError, "curve evaluated at negative time " + to_string(t));
    if (t == 0) return ExtRational(at_zero_);
    auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                               [](const Segment& s, const Rational& x) { return s.start < x; });
    return end_value(*std::prev(it), t);
}

ExtRational PwlCurve::right_limit(const Rational& t) const {
    if (t < 0) throw Error(ErrorKind::DomainError, "curve evaluated at negative time " + to_string(t));
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](const Rational& x, const Segment& s) { return x < s.start; });
    return end_value(*std::prev(it), t);
}

ExtRational PwlCurve::jump0() const {
    if (segments_.front().value.is_infinite()) return ExtRational::infinity();
    return ExtRational(Rational(segments_.front().value.value() - at_zero_));
}

bool PwlCurve::is_nondecreasing() const {
    ExtRational left(at_zero_);
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const Segment& s = segments_[i];
        if (s.value < left) return false;
        if (s.value.is_infinite()) return true;
        if (s.slope < 0) return false;
        if (auto n = next_start(segments_, i)) left = end_value(s, *n);
    }
    return true;
}

bool PwlCurve::is_finite() const { return segments_.back().value.is_finite(); }

std::vector<Rational> PwlCurve::breakpoints() const {
    std::vector<Rational> out;
    for (const auto& s : segments_) out.push_back(s.start);
    return out;
}

PwlCurve PwlCurve::with_at_zero(Rational v) const { return PwlCurve(std::move(v), segments_); }

PwlCurve make_leaky_bucket(const Rational& r, const Rational& b) {
    if (r < 0 || b < 0) throw Error(ErrorKind::InvalidParameter, "leaky bucket needs r >= 0 and b >= 0");
    return PwlCurve(Rational(0), {Segment{Rational(0), ExtRational(b), r}});
}

PwlCurve make_rate_latency(const Rational& R, const Rational& T) {
    if (R < 0 || T < 0) throw Error(ErrorKind::InvalidParameter, "rate-latency needs R >= 0 and T >= 0");
    if (T == 0) return PwlCurve(Rational(0), {Segment{Rational(0), ExtRational(0), R}});
    return PwlCurve(Rational(0), {Segment{Rational(0), ExtRational(0), Rational(0)}, Segment{T, ExtRational(0), R}});
}

PwlCurve make_delta(const Rational& D) {
    if (D < 0) throw Error(ErrorKind::InvalidParameter, "delta needs D >= 0");
    if (D == 0) return PwlCurve(Rational(0), {Segment{Rational(0), ExtRational::infinity(), Rational(0)}});
    return PwlCurve(Rational(0), {Segment{Rational(0), ExtRational(0), Rational(0)},
                                  Segment{D, ExtRational::infinity(), Rational(0)}});
}

PwlCurve make_affine(const Rational& slope, const Rational& intercept) {
    return PwlCurve(intercept, {Segment{Rational(0), ExtRational(intercept), slope}});
}

PwlCurve make_zero() { return PwlCurve(); }

ExtRational eval(const PwlCurve& c, const Rational& t) { return c.eval(t); }

PwlCurve min_curve(const PwlCurve& a, const PwlCurve& b) {
    auto pieces = segment_pieces(a);
    auto more = segment_pieces(b);
    pieces.insert(pieces.end(), more.begin(), more.end());
    return envelope(pieces, std::min(a.at_zero(), b.at_zero()), Mode::Min);
}

PwlCurve max_curve(const PwlCurve& a, const PwlCurve& b) {
    auto pieces = segment_pieces(a);
    auto more = segment_pieces(b);
    pieces.insert(pieces.end(), more.begin(), more.end());
    return envelope(pieces, std::max(a.at_zero(), b.at_zero()), Mode::Max);
}

PwlCurve add_curves(const PwlCurve& a, const PwlCurve& b) {
    std::vector<Rational> points = a.breakpoints();
    for (const auto& p : b.breakpoints()) points.push_back(p);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    auto slope_at = [](const PwlCurve& c, const Rational& t) {
        const auto& segs = c.segments();
        auto it = std::upper_bound(segs.begin(), segs.end(), t,
                                   [](const Rational& x, const Segment& s) { return x < s.start; });
        return std::prev(it)->slope;
    };
    std::vector<Segment> segs;
    for (const auto& p : points) {
        ExtRational v = a.right_limit(p) + b.right_limit(p);
        segs.push_back({p, v, v.is_infinite() ? Rational(0) : Rational(slope_at(a, p) + slope_at(b, p))});
    }
    return PwlCurve(Rational(a.at_zero() + b.at_zero()), std::move(segs));
}

PwlCurve convolve(const PwlCurve& a, const PwlCurve& b) {
    require_nondecreasing(a, "convolution");
    require_nondecreasing(b, "convolution");

    std::vector<Piece> pieces;
    auto with_point = [&pieces](const PwlCurve& seg_curve, const Rational& point_value) {
        const auto& segs = seg_curve.segments();
        for (std::size_t i = 0; i < segs.size(); ++i) {
            Line l = line_through(segs[i].start, segs[i].value, segs[i].slope);
            if (!l.infinite) l.intercept += point_value;
            pieces.push_back({segs[i].start, next_start(segs, i), l});
        }
    };
    with_point(b, a.at_zero());
    with_point(a, b.at_zero());

    const auto& as = a.segments();
    const auto& bs = b.segments();
    for (std::size_t i = 0; i < as.size(); ++i) {
        const Rational& e = as[i].start;
        auto f = next_start(as, i);
        for (std::size_t j = 0; j < bs.size(); ++j) {
            const Rational& c = bs[j].start;
            auto d = next_start(bs, j);
            std::optional<Rational> fd;
            if (f && d) fd = *f + *d;
            if (as[i].value.is_infinite() || bs[j].value.is_infinite()) {
                pieces.push_back({Rational(e + c), fd, infinite_line()});
                continue;
            }
            const Rational& Av = as[i].value.value();
            const Rational& Bv = bs[j].value.value();
            const Rational& sa = as[i].slope;
            const Rational& sb = bs[j].slope;
            // Infimum over the split point sits at an end of its feasible range.
            pieces.push_back({Rational(e + c), add_opt(d, e), Line{false, sb, Av + Bv - sb * (e + c)}});
            pieces.push_back({Rational(e + c), add_opt(f, c), Line{false, sa, Av + Bv - sa * (e + c)}});
            if (d) {
                Rational Bd = Bv + sb * (*d - c);
                pieces.push_back({Rational(e + *d), fd, Line{false, sa, Av + Bd - sa * (e + *d)}});
            }
            if (f) {
                Rational Af = Av + sa * (*f - e);
                pieces.push_back({Rational(*f + c), fd, Line{false, sb, Af + Bv - sb * (*f + c)}});
            }
        }
    }
    return envelope(pieces, Rational(a.at_zero() + b.at_zero()), Mode::Min);
}

namespace {

// sup_{u >= 0} a(u) - b(u)
ExtRational sup_difference(const PwlCurve& a, const PwlCurve& b) {
    ExtRational best(Rational(a.at_zero() - b.at_zero()));
    auto consider = [&best](const ExtRational& av, const ExtRational& bv) {
        if (bv.is_infinite()) return;
        if (av.is_infinite()) {
            best = ExtRational::infinity();
            return;
        }
        ExtRational d(Rational(av.value() - bv.value()));
        if (d > best) best = d;
    };
    std::vector<Rational> points = a.breakpoints();
    for (const auto& p : b.breakpoints()) points.push_back(p);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    for (const auto& p : points) {
        if (p > 0) consider(a.eval(p), b.eval(p));
        consider(a.right_limit(p), b.right_limit(p));
    }
    const Segment& at = a.segments().back();
    const Segment& bt = b.segments().back();
    if (bt.value.is_finite() && (at.value.is_infinite() || at.slope > bt.slope)) best = ExtRational::infinity();
    return best;
}

}  // namespace

PwlCurve deconvolve(const PwlCurve& a, const PwlCurve& b) {
    require_nondecreasing(a, "deconvolution");
    require_nondecreasing(b, "deconvolution");

    ExtRational zero = sup_difference(a, b);
    if (zero.is_infinite()) throw Error(ErrorKind::UnboundedResult, "deconvolution diverges");

    std::vector<Piece> pieces;
    const auto& as = a.segments();
    const auto& bs = b.segments();
    for (std::size_t i = 0; i < as.size(); ++i) {
        Line l = line_through(as[i].start, as[i].value, as[i].slope);
        if (!l.infinite) l.intercept -= b.at_zero();
        pieces.push_back({as[i].start, next_start(as, i), l});
    }
    for (std::size_t i = 0; i < as.size(); ++i) {
        const Rational& e = as[i].start;
        auto f = next_start(as, i);
        for (std::size_t j = 0; j < bs.size(); ++j) {
            if (bs[j].value.is_infinite()) continue;
            const Rational& c = bs[j].start;
            auto d = next_start(bs, j);
            std::optional<Rational> lo_all;
            if (d) lo_all = e - *d;
            std::optional<Rational> hi_all;
            if (f) hi_all = *f - c;
            if (as[i].value.is_infinite()) {
                pieces.push_back({lo_all, hi_all, infinite_line()});
                continue;
            }
            const Rational& Av = as[i].value.value();
            const Rational& Bv = bs[j].value.value();
            const Rational& sa = as[i].slope;
            const Rational& sb = bs[j].slope;
            if (!f && !d && sa > sb) throw Error(ErrorKind::UnboundedResult, "deconvolution diverges");
            // Supremum over the shift sits at an end of its feasible range.
            pieces.push_back({Rational(e - c), hi_all, Line{false, sa, Av + sa * (c - e) - Bv}});
            pieces.push_back({lo_all, Rational(e - c), Line{false, sb, Av - Bv - sb * (e - c)}});
            if (d) {
                std::optional<Rational> hi;
                if (f) hi = *f - *d;
                pieces.push_back({lo_all, hi, Line{false, sa, Av + sa * (*d - e) - Bv - sb * (*d - c)}});
            }
            if (f) {
                std::optional<Rational> lo;
                if (d) lo = *f - *d;
                pieces.push_back({lo, hi_all, Line{false, sb, Av + sa * (*f - e) - Bv - sb * (*f - c)}});
            }
        }
    }
    return envelope(pieces, zero.value(), Mode::Max);
}

PwlCurve compose(const PwlCurve& f, const PwlCurve& g) {
    if (!g.is_nondecreasing()) throw Error(ErrorKind::UnsupportedOperand, "composition needs a nondecreasing inner curve");
    if (g.at_zero() < 0) throw Error(ErrorKind::DomainError, "composition needs a nonnegative inner curve");
    ExtRational zero = f.eval(g.at_zero());
    if (zero.is_infinite()) throw Error(ErrorKind::UnboundedResult, "composition is infinite at 0");

    std::vector<Piece> pieces;
    const auto& gs = g.segments();
    const auto& fs = f.segments();
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const Rational& p = gs[i].start;
        auto q = next_start(gs, i);
        if (gs[i].value.is_infinite()) {
            pieces.push_back({p, q, infinite_line()});
            continue;
        }
        const Rational& y0 = gs[i].value.value();
        const Rational& k = gs[i].slope;
        if (k == 0) {
            ExtRational v = f.eval(y0);
            pieces.push_back({p, q, line_through(p, v, Rational(0))});
            continue;
        }
        std::optional<Rational> y1;
        if (q) y1 = y0 + k * (*q - p);
        for (std::size_t j = 0; j < fs.size(); ++j) {
            const Rational& a = fs[j].start;
            auto b = next_start(fs, j);
            Rational lo_y = std::max(a, y0);
            std::optional<Rational> hi_y = b;
            if (y1 && (!hi_y || *y1 < *hi_y)) hi_y = y1;
            if (hi_y && *hi_y <= lo_y) continue;
            Rational t_lo = p + (lo_y - y0) / k;
            std::optional<Rational> t_hi;
            if (hi_y) t_hi = p + (*hi_y - y0) / k;
            if (fs[j].value.is_infinite()) {
                pieces.push_back({t_lo, t_hi, infinite_line()});
                continue;
            }
            Rational v = fs[j].value.value() + fs[j].slope * (lo_y - a);
            pieces.push_back({t_lo, t_hi, line_through(t_lo, ExtRational(v), Rational(fs[j].slope * k))});
        }
    }
    return envelope(pieces, zero.value(), Mode::Min);
}

PwlCurve pseudo_inverse(const PwlCurve& beta) {
    require_nondecreasing(beta, "pseudo-inverse");
    if (beta.at_zero() < 0) throw Error(ErrorKind::UnsupportedOperand, "pseudo-inverse needs beta(0) >= 0");

    std::vector<Piece> pieces;
    Rational level = beta.at_zero();
    pieces.push_back({std::nullopt, level, Line{false, Rational(0), Rational(0)}});
    const auto& segs = beta.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Rational& s = segs[i].start;
        auto q = next_start(segs, i);
        if (segs[i].value.is_infinite()) {
            pieces.push_back({level, std::nullopt, Line{false, Rational(0), s}});
            return envelope(pieces, Rational(0), Mode::Min);
        }
        const Rational& v = segs[i].value.value();
        const Rational& k = segs[i].slope;
        if (v > level) pieces.push_back({level, v, Line{false, Rational(0), s}});
        if (!q) {
            if (k > 0)
                pieces.push_back({v, std::nullopt, Line{false, Rational(1 / k), Rational(s - v / k)}});
            else
                pieces.push_back({v, std::nullopt, infinite_line()});
            break;
        }
        Rational end = v + k * (*q - s);
        if (k > 0) pieces.push_back({v, end, Line{false, Rational(1 / k), Rational(s - v / k)}});
        level = end;
    }
    return envelope(pieces, Rational(0), Mode::Min);
}

ExtRational horizontal_deviation(const PwlCurve& alpha, const PwlCurve& beta) {
    require_nondecreasing(alpha, "horizontal deviation");
    require_nondecreasing(beta, "horizontal deviation");
    if (alpha.at_zero() < 0) throw Error(ErrorKind::UnsupportedOperand, "horizontal deviation needs alpha(0) >= 0");

    PwlCurve inverse = pseudo_inverse(beta);
    if (inverse.eval(alpha.at_zero()).is_infinite()) return ExtRational::infinity();
    PwlCurve g = compose(inverse, alpha);

    Rational best = std::max(Rational(0), g.at_zero());
    const auto& segs = g.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs[i].value.is_infinite()) return ExtRational::infinity();
        const Rational& p = segs[i].start;
        best = std::max(best, Rational(segs[i].value.value() - p));
        if (auto q = next_start(segs, i))
            best = std::max(best, Rational(segs[i].value.value() + segs[i].slope * (*q - p) - *q));
        else if (segs[i].slope > 1)
            return ExtRational::infinity();
    }
    return ExtRational(best);
}

}  // namespace ncclock
