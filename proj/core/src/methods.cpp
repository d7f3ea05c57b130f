#include "ncclock/methods.hpp"

#include <algorithm>
#include <functional>

#include "ncclock/reclock.hpp"

namespace ncclock {

RoundingGrid RoundingGrid::identity() { return RoundingGrid{}; }

RoundingGrid RoundingGrid::quantum(Rational quantum, std::optional<Rational> max) {
    if (quantum <= 0) throw Error(ErrorKind::InvalidParameter, "grid quantum must be positive");
    RoundingGrid g;
    g.kind_ = Kind::Quantum;
    g.quantum_ = std::move(quantum);
    g.max_ = std::move(max);
    return g;
}

RoundingGrid RoundingGrid::decimal(int exponent, std::optional<Rational> max) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    return quantum(exponent < 0 ? Rational(mpz_class(1), p) : Rational(p), std::move(max));
}

RoundingGrid RoundingGrid::explicit_values(std::vector<Rational> values) {
    if (values.empty()) throw Error(ErrorKind::InvalidParameter, "explicit grid needs at least one value");
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    RoundingGrid g;
    g.kind_ = Kind::Explicit;
    g.values_ = std::move(values);
    return g;
}

Rational RoundingGrid::apply(const Rational& x) const {
    switch (kind_) {
        case Kind::Identity:
            return x;
        case Kind::Quantum: {
            Rational v = rational_ceil(x / quantum_) * quantum_;
            if (max_ && v > *max_)
                throw Error(ErrorKind::ConfigurationInfeasible, "no configurable value >= " + to_string(x));
            return v;
        }
        case Kind::Explicit: {
            auto it = std::lower_bound(values_.begin(), values_.end(), x);
            if (it == values_.end())
                throw Error(ErrorKind::ConfigurationInfeasible, "no configurable value >= " + to_string(x));
            return *it;
        }
    }
    return x;
}

void check_path(const FlowPath& path) {
    if (path.hops.empty()) throw Error(ErrorKind::InvalidParameter, "a path needs at least one hop");
    if (path.source.r0 <= 0 || path.source.b0 <= 0 || path.source.ell <= 0)
        throw Error(ErrorKind::InvalidParameter, "source needs r0 > 0, b0 > 0 and ell > 0");
    for (std::size_t k = 0; k + 1 < path.hops.size(); ++k)
        if (!path.hops[k].regulator)
            throw Error(ErrorKind::InvalidParameter, "only the last hop may omit its regulator");
}

std::vector<LeakyBucket> cascade_configure(const FlowPath& path, const ClockEnvelope& env) {
    check_path(path);
    std::vector<LeakyBucket> out;
    LeakyBucket prev{path.source.r0, path.source.b0};
    for (const auto& hop : path.hops) {
        if (!hop.regulator) break;
        LeakyBucket next{hop.grid.rate.apply(env.rho * prev.rate), hop.grid.burst.apply(prev.burst + env.eta * prev.rate)};
        out.push_back(next);
        prev = next;
    }
    return out;
}

PwlCurve element_arrival_curve_tai(const LeakyBucket& prev, const ClockEnvelope& env) {
    return reclock_leaky_bucket(prev.rate, prev.burst, env);
}

Rational element_delay_bound(const ElementModel& element, const std::vector<PwlCurve>& arrivals) {
    if (std::holds_alternative<ZeroDelay>(element)) return 0;
    if (const auto* fixed = std::get_if<FixedDelayBound>(&element)) {
        if (fixed->bound < 0) throw Error(ErrorKind::InvalidParameter, "delay bound must be >= 0");
        return fixed->bound;
    }
    if (const auto* server = std::get_if<RateLatencyServer>(&element)) {
        if (server->latency < 0 || (server->rate && *server->rate <= 0))
            throw Error(ErrorKind::InvalidParameter, "rate-latency server needs R > 0 and T >= 0");
        PwlCurve total = make_zero();
        for (const auto& a : arrivals) total = add_curves(total, a);
        PwlCurve beta = server->rate ? make_rate_latency(*server->rate, server->latency) : make_delta(server->latency);
        ExtRational h = horizontal_deviation(total, beta);
        if (h.is_infinite()) throw Error(ErrorKind::UnstableElement, "aggregate arrival rate exceeds the service rate");
        return h.value();
    }
    throw Error(ErrorKind::InvalidParameter, "a scripted element has no delay bound");
}

Rational cascade_hop_delay(const Rational& D, const ClockEnvelope& env) {
    if (D < 0) throw Error(ErrorKind::InvalidParameter, "delay bound must be >= 0");
    return env.rho * env.rho * D + env.eta * (1 + env.rho);
}

AdamConfig adam_configure(const SourceParams& source, const ClockEnvelope& env, const RoundingGrid& rate_grid) {
    if (source.r0 <= 0) throw Error(ErrorKind::InvalidParameter, "r0 must be positive");
    Rational rate = rate_grid.apply(env.rho * env.rho * source.r0);
    return {rate / source.r0, {rate, source.b0}};
}

AdamDelays adam_hop_delays(const SourceParams& source, const ClockEnvelope& env, const Rational& W,
                           const std::vector<Rational>& element_bounds) {
    if (W <= 1) throw Error(ErrorKind::InvalidParameter, "rate margin W must exceed 1");
    if (W < env.rho * env.rho) throw Error(ErrorKind::InvalidParameter, "rate margin W must be >= rho^2");
    const Rational& rho = env.rho;
    const Rational& eta = env.eta;
    const Rational& r0 = source.r0;
    const Rational& b0 = source.b0;
    Rational factor = (rho * rho - 1) / (W - 1);
    AdamDelays out;
    out.b2.push_back(b0 + eta * r0);
    for (const auto& D : element_bounds) {
        const Rational& prev = out.b2.back();
        Rational hop = D + eta * (1 + rho) + (prev - b0 - eta * W * r0) / (rho * r0) * factor;
        out.b2.push_back(prev + rho * r0 * hop);
        out.hop_bounds.push_back(std::move(hop));
    }
    return out;
}

PwlCurve adam_alpha1(const SourceParams& source, const ClockEnvelope& env, const Rational& W) {
    return make_leaky_bucket(env.rho * W * source.r0, source.b0 + env.eta * W * source.r0);
}

PwlCurve adam_alpha2(const SourceParams& source, const ClockEnvelope& env, const Rational& b2) {
    return make_leaky_bucket(env.rho * source.r0, b2);
}

PwlCurve adam_hop_service(const SourceParams& source, const ClockEnvelope& env, const Rational& W,
                          const Rational& D) {
    return convolve(make_delta(D + env.eta), make_leaky_bucket(W * source.r0 / env.rho, source.b0));
}

Rational sync_pfr_hop_delay(const Rational& D, const Rational& delta) {
    if (D < 0 || delta < 0) throw Error(ErrorKind::InvalidParameter, "delay bound and delta must be >= 0");
    return D + 4 * delta;
}

PwlCurve sync_pfr_arrival_curve(const SourceParams& source, const ClockEnvelope& env) {
    if (!env.synchronized()) throw Error(ErrorKind::InvalidParameter, "a synchronized envelope is required");
    return reclock_leaky_bucket(source.r0, source.b0, env);
}

bool sync_pfr_degenerate(const ClockEnvelope& env) {
    return env.synchronized() && env.eta >= 2 * *env.delta * env.rho;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Ideal: return "ideal";
        case Method::Cascade: return "cascade";
        case Method::Adam: return "adam";
        case Method::SyncNonAdapted: return "sync-nonadapted";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    for (Method m : {Method::Ideal, Method::Cascade, Method::Adam, Method::SyncNonAdapted})
        if (name == method_name(m)) return m;
    throw Error(ErrorKind::InvalidInput, "unknown method '" + name + "'");
}

namespace {

PathBound ideal_path(const FlowPath& path, const ElementBoundFn& bound) {
    PathBound out{Method::Ideal, {}, Rational(0), std::nullopt, {}, {}};
    LeakyBucket sigma{path.source.r0, path.source.b0};
    PwlCurve alpha = make_leaky_bucket(sigma.rate, sigma.burst);
    for (std::size_t k = 0; k < path.hops.size(); ++k) {
        const Hop& hop = path.hops[k];
        Rational D = bound(k, alpha);
        std::optional<LeakyBucket> config;
        if (hop.regulator) config = sigma;
        out.hops.push_back({D, D, config, alpha});
    }
    return out;
}

PathBound cascade_path(const FlowPath& path, const ClockEnvelope& env, const ElementBoundFn& bound) {
    PathBound out{Method::Cascade, {}, Rational(0), std::nullopt, {}, {}};
    auto configs = cascade_configure(path, env);
    LeakyBucket prev{path.source.r0, path.source.b0};
    for (std::size_t k = 0; k < path.hops.size(); ++k) {
        PwlCurve alpha = element_arrival_curve_tai(prev, env);
        Rational D = bound(k, alpha);
        if (k < configs.size()) {
            out.hops.push_back({D, cascade_hop_delay(D, env), configs[k], alpha});
            prev = configs[k];
        } else {
            out.hops.push_back({D, D, std::nullopt, alpha});
        }
    }
    return out;
}

PathBound adam_path(const FlowPath& path, const ClockEnvelope& env, const ElementBoundFn& bound) {
    PathBound out{Method::Adam, {}, Rational(0), std::nullopt, {}, {}};
    const HopGrid& grid = path.hops.front().grid;
    for (const auto& hop : path.hops) {
        if (!hop.regulator) continue;
        if (*hop.regulator != RegulatorKind::PFR)
            throw Error(ErrorKind::UnsupportedOperand, "the dual arrival-curve method needs per-flow regulators");
        if (hop.grid != grid) throw Error(ErrorKind::UnsupportedOperand, "the dual arrival-curve method needs identical grids");
    }
    AdamConfig cfg = adam_configure(path.source, env, grid.rate);
    cfg.regulator.burst = grid.burst.apply(cfg.regulator.burst);
    PwlCurve alpha = adam_alpha1(path.source, env, cfg.W);
    std::vector<Rational> bounds;
    for (std::size_t k = 0; k < path.hops.size(); ++k) {
        Rational D = bound(k, alpha);
        bounds.push_back(D);
        out.hops.push_back({D, D, std::nullopt, alpha});
    }
    std::size_t regulated = 0;
    while (regulated < path.hops.size() && path.hops[regulated].regulator) ++regulated;
    AdamDelays delays = adam_hop_delays(path.source, env, cfg.W, {bounds.begin(), bounds.begin() + regulated});
    for (std::size_t k = 0; k < regulated; ++k) {
        out.hops[k].hop_bound = delays.hop_bounds[k];
        out.hops[k].config = cfg.regulator;
    }
    out.W = cfg.W;
    out.b2 = std::move(delays.b2);
    return out;
}

PathBound sync_path(const FlowPath& path, const ClockEnvelope& env, const ElementBoundFn& bound) {
    PathBound out{Method::SyncNonAdapted, {}, Rational(0), std::nullopt, {}, {}};
    PwlCurve alpha = sync_pfr_arrival_curve(path.source, env);
    if (sync_pfr_degenerate(env)) out.warnings.push_back("eta >= 2 delta rho: the D + 4 delta bound is outside its derivation regime");
    LeakyBucket sigma{path.source.r0, path.source.b0};
    for (std::size_t k = 0; k < path.hops.size(); ++k) {
        const Hop& hop = path.hops[k];
        Rational D = bound(k, alpha);
        if (!hop.regulator) {
            out.hops.push_back({D, D, std::nullopt, alpha});
            continue;
        }
        if (*hop.regulator == RegulatorKind::IR)
            out.warnings.push_back("hop " + std::to_string(k + 1) +
                                   ": non-adapted interleaved regulator, delay unbounded under synchronized clocks");
        out.hops.push_back({D, sync_pfr_hop_delay(D, *env.delta), sigma, alpha});
    }
    return out;
}

}  // namespace

PathBound analyze_path(const FlowPath& path, const ClockEnvelope& env, Method method) {
    return analyze_path(path, env, method,
                        [&](std::size_t k, const PwlCurve& alpha) { return element_delay_bound(path.hops[k].element, {alpha}); });
}

PathBound analyze_path(const FlowPath& path, const ClockEnvelope& env, Method method, const ElementBoundFn& bound) {
    check_path(path);
    PathBound out;
    switch (method) {
        case Method::Ideal: out = ideal_path(path, bound); break;
        case Method::Cascade: out = cascade_path(path, env, bound); break;
        case Method::Adam: out = adam_path(path, env, bound); break;
        case Method::SyncNonAdapted: out = sync_path(path, env, bound); break;
    }
    for (const auto& h : out.hops) out.ete += h.hop_bound;
    return out;
}

std::vector<CompareRow> ete_compare(const CompareSetup& setup, std::size_t max_hops, const std::vector<Method>& methods) {
    if (max_hops < 1) throw Error(ErrorKind::InvalidParameter, "need at least one hop");
    ClockEnvelope sync = setup.sync_env ? *setup.sync_env : setup.env;
    if (!sync.synchronized()) sync.delta = *preset_envelope("tsn-tight-sync").delta;
    std::vector<CompareRow> rows;
    for (std::size_t n = 1; n <= max_hops; ++n) {
        FlowPath path{setup.source, {}};
        for (std::size_t k = 0; k < n; ++k) path.hops.push_back({setup.element, RegulatorKind::PFR, setup.cascade_grid});
        Rational ideal = analyze_path(path, setup.env, Method::Ideal).ete;
        for (Method m : methods) {
            Rational ete;
            switch (m) {
                case Method::Ideal: ete = ideal; break;
                case Method::Cascade: ete = analyze_path(path, setup.env, m).ete; break;
                case Method::SyncNonAdapted: ete = analyze_path(path, sync, m).ete; break;
                case Method::Adam: {
                    FlowPath adam = path;
                    for (auto& hop : adam.hops) hop.grid = {setup.adam_rate_grid, RoundingGrid::identity()};
                    ete = analyze_path(adam, setup.env, m).ete;
                    break;
                }
            }
            Rational rel = 0;
            if (ideal != 0) rel = (ete - ideal) / ideal;
            else if (ete != 0) throw Error(ErrorKind::InvalidParameter, "relative increase undefined for a zero ideal bound");
            rows.push_back({n, m, ete, rel});
        }
    }
    return rows;
}

}  // namespace ncclock
