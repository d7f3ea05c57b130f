#include "ncclock/scenarios.hpp"

#include <algorithm>

#include "ncclock/reclock.hpp"

namespace ncclock {

ScenarioRun run_scenario(const Scenario& s) {
    std::vector<PacketTrace> tai;
    for (const auto& src : s.sources) tai.push_back(reclock_trace(src.trace, src.tai_to_source, "TAI"));
    ScenarioRun run;
    run.input = merge_traces(tai, "TAI");
    run.element_output = simulate_element(run.input, s.element);
    run.regulator_input = map_trace(run.element_output, s.tai_to_regulator, "regulator");
    run.regulator_output = simulate_regulator(run.element_output, s.regulator, s.tai_to_regulator, "regulator");
    run.output = reclock_trace(run.regulator_output, s.tai_to_regulator, "TAI");
    run.end_to_end = measure(run.input, run.output);
    run.element = measure(run.input, run.element_output);
    run.regulator_local = measure(run.regulator_input, run.regulator_output);
    run.regulator_tai = measure(run.element_output, run.output);
    return run;
}

PeriodStats per_period_max_delay(const Scenario& s, const ScenarioRun& run) {
    PeriodStats stats;
    std::vector<std::optional<Rational>> best(s.periods);
    const auto& ev = run.input.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        Rational offset = (ev[i].time - s.start) / s.period;
        if (offset < 0) continue;
        Rational k = rational_floor(offset);
        if (k >= static_cast<long>(s.periods)) continue;
        auto& slot = best[k.get_num().get_ui()];
        const Rational& delay = run.end_to_end.delays[i];
        if (!slot || delay > *slot) slot = delay;
    }
    for (std::size_t k = 0; k < s.periods; ++k) {
        if (!best[k]) continue;
        stats.period_end.push_back(s.start + s.period * static_cast<long>(k + 1));
        stats.max_delay.push_back(*best[k]);
    }
    return stats;
}

Rational fitted_slope(const std::vector<Rational>& x, const std::vector<Rational>& y, std::size_t count) {
    if (x.size() != y.size()) throw Error(ErrorKind::InvalidParameter, "fit needs paired samples");
    std::size_t n = std::min(count, x.size());
    if (n < 2) throw Error(ErrorKind::InvalidParameter, "fit needs at least two samples");
    std::size_t first = x.size() - n;
    Rational mx = 0, my = 0;
    for (std::size_t i = first; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<long>(n);
    my /= static_cast<long>(n);
    Rational sxy = 0, sxx = 0;
    for (std::size_t i = first; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0) throw Error(ErrorKind::InvalidParameter, "fit needs distinct abscissae");
    return sxy / sxx;
}

std::optional<Rational> NonSyncInstability::threshold(const Rational& e) const {
    if (params.rho == 1) return std::nullopt;
    Rational d1 = params.eta;  // rho * 0 + eta for a zero-delay element
    Rational tau = (params.r * e + params.r * d1 + params.ell) / ((params.rho - 1) * params.r);
    return std::max(tau, params.t_start);
}

NonSyncInstabilityParams fig6_params() {
    NonSyncInstabilityParams p;
    p.rho = Rational(7, 6);
    p.eta = 0;
    p.r = 1;
    p.b = 1;
    p.ell = 1;
    p.period_packets = 7;
    return p;
}

NonSyncInstability build_nonsync_instability(const NonSyncInstabilityParams& p) {
    if (p.rho < 1) throw Error(ErrorKind::InvalidParameter, "rho must be >= 1");
    if (p.r <= 0 || p.ell <= 0 || p.b < p.ell)
        throw Error(ErrorKind::InvalidParameter, "need r > 0, ell > 0 and b >= ell");
    NonSyncInstability out;
    out.params = p;
    out.divergence_rate = p.rho - 1;
    Scenario& s = out.scenario;
    s.name = "nonsync-instability";
    s.envelope = make_envelope(p.rho, p.eta);
    s.period = p.period_packets * p.ell / p.r;
    s.periods = p.periods;
    s.start = p.t_start;
    Rational horizon = p.t_start + s.period * static_cast<long>(p.periods);
    s.sources.push_back({simulate_greedy_source({p.r, p.b}, p.ell, p.t_start, horizon, 0, 0, "source"),
                         ClockFunction::identity()});
    s.element = ZeroDelay{};
    s.regulator.kind = RegulatorKind::PFR;
    s.regulator.shaping[0] = {p.r, p.b};
    s.tai_to_regulator = ClockFunction::affine(Rational(1 / p.rho), Rational(0));
    return out;
}

ClockFunction sync_pfr_penalty_clock(const Rational& rho, const Rational& delta, const Rational& t_start) {
    Rational x1 = t_start + rho * delta / (rho - 1);
    return ClockFunction({{t_start, t_start}, {x1, Rational(x1 - delta)}}, Rational(1), Rational(1));
}

SyncPfrPenaltyParams fig8_params() {
    SyncPfrPenaltyParams p;
    p.rho = Rational(7, 6);
    p.eta = 0;
    p.delta = 1;
    p.r = 1;
    p.b = 1;
    p.ell = 1;
    p.extra_packets = 2;
    return p;
}

SyncPfrPenalty build_sync_pfr_penalty(const SyncPfrPenaltyParams& p) {
    if (p.delta <= 0) throw Error(ErrorKind::InvalidParameter, "delta must be > 0");
    if (p.rho <= 1) throw Error(ErrorKind::InvalidParameter, "rho must be > 1");
    if (p.r <= 0 || p.ell <= 0 || p.b < p.ell)
        throw Error(ErrorKind::InvalidParameter, "need r > 0, ell > 0 and b >= ell");
    SyncPfrPenalty out;
    out.params = p;
    out.x1 = p.t_start + p.rho * p.delta / (p.rho - 1);
    out.predicted_penalty = p.delta;
    Scenario& s = out.scenario;
    s.name = "sync-pfr-penalty";
    s.envelope = make_envelope(p.rho, p.eta, p.delta);
    s.period = p.ell / p.r;
    s.start = p.t_start;
    Rational horizon = out.x1 + s.period * static_cast<long>(p.extra_packets);
    s.periods = rational_ceil((horizon - p.t_start) / s.period).get_num().get_ui() + 1;
    s.sources.push_back({simulate_greedy_source({p.r, p.b}, p.ell, p.t_start, horizon), ClockFunction::identity()});
    s.element = ZeroDelay{};
    s.regulator.kind = RegulatorKind::PFR;
    s.regulator.shaping[0] = {p.r, p.b};
    s.tai_to_regulator = sync_pfr_penalty_clock(p.rho, p.delta, p.t_start);
    return out;
}

Rational default_s1(const Rational& rho) {
    Rational cap(3, 2);
    for (unsigned digits = 12; digits < 200; digits += 12) {
        Rational s = std::min(cap, sqrt_floor(rho, digits));
        if (s > 1) return s;
    }
    throw Error(ErrorKind::InvalidParameter, "rho too close to 1 for a rational s1");
}

Rational SyncIrInstability::lower_bound(std::size_t k) const {
    if (k == 0) throw Error(ErrorKind::InvalidParameter, "periods are numbered from 1");
    return per_period_growth * static_cast<long>(k - 1);
}

ClockFunction sync_ir_clock(const Rational& x_j, const Rational& s1, const Rational& I, const Rational& delta,
                            const Rational& tau, std::size_t periods) {
    Rational half = delta / 2;
    std::vector<ClockPoint> pts;
    for (std::size_t k = 0; k <= periods; ++k) {
        Rational x = x_j + tau * static_cast<long>(k);
        pts.push_back({x, Rational(x - half)});
        pts.push_back({Rational(x + I / s1), Rational(x + I - half)});
        pts.push_back({Rational(x + I / s1 + I), Rational(x + I / s1 + I - half)});
    }
    return ClockFunction(std::move(pts), Rational(1), Rational(1));
}

PacketTrace simulate_periodic_ir_source(std::size_t j, const SyncIrInstability& s) {
    if (j < 1 || j > s.n) throw Error(ErrorKind::InvalidParameter, "source index out of range");
    const Rational& ell = s.scenario.regulator.shaping.at(static_cast<int>(j)).burst;
    Rational base = s.clocks[j - 1](s.x[j - 1]);
    PacketTrace out{"H" + std::to_string(j), {}};
    for (std::size_t k = 0; k < s.scenario.periods; ++k) {
        Rational t = base + s.tau * static_cast<long>(k);
        std::uint64_t id = 2 * (k * s.n + (j - 1));
        out.events.push_back({t, Packet{id, static_cast<int>(j), ell}});
        out.events.push_back({Rational(t + s.I), Packet{id + 1, static_cast<int>(j), ell}});
    }
    return out;
}

SyncIrInstability build_sync_ir_instability(const SyncIrInstabilityParams& p) {
    if (p.n < 3) throw Error(ErrorKind::InvalidParameter, "need n >= 3 sources");
    if (p.rho <= 1) throw Error(ErrorKind::InvalidParameter, "rho must be > 1");
    if (p.delta <= 0) throw Error(ErrorKind::InvalidParameter, "delta must be > 0");
    if (p.ell <= 0) throw Error(ErrorKind::InvalidParameter, "packet length must be positive");
    SyncIrInstability out;
    out.n = p.n;
    out.s1 = p.s1 ? *p.s1 : default_s1(p.rho);
    if (out.s1 <= 1 || out.s1 > Rational(3, 2) || out.s1 * out.s1 > p.rho)
        throw Error(ErrorKind::InvalidParameter, "s1 must lie in (1, min(3/2, sqrt(rho))]");
    out.I = p.delta * out.s1 / (out.s1 - 1);
    Rational eps_max = out.I * (1 - 1 / out.s1);
    out.eps = p.eps ? *p.eps : Rational(eps_max / 2);
    if (out.eps <= 0 || out.eps >= eps_max) throw Error(ErrorKind::InvalidParameter, "eps must lie in (0, I(1 - 1/s1))");
    long n = static_cast<long>(p.n);
    out.tau = n * out.I / out.s1 + n * out.eps;
    Rational x1 = p.x1 ? *p.x1 : p.delta;
    for (long j = 0; j < n; ++j) out.x.push_back(x1 + j * (out.I / out.s1 + out.eps));
    out.per_period_growth = n * (eps_max - out.eps);
    out.divergence_rate = out.per_period_growth / out.tau;
    out.asymptotic_rate = out.s1 - 1;

    Scenario& s = out.scenario;
    s.name = "sync-ir-instability";
    s.envelope = make_envelope(p.rho, p.eta, p.delta);
    s.period = out.tau;
    s.periods = p.periods;
    s.start = x1;
    s.element = ZeroDelay{};
    s.regulator.kind = RegulatorKind::IR;
    s.tai_to_regulator = ClockFunction::identity();
    for (std::size_t j = 1; j <= p.n; ++j) {
        out.clocks.push_back(sync_ir_clock(out.x[j - 1], out.s1, out.I, p.delta, out.tau, p.periods));
        s.regulator.shaping[static_cast<int>(j)] = {p.ell / out.I, p.ell};
    }
    for (std::size_t j = 1; j <= p.n; ++j) s.sources.push_back({simulate_periodic_ir_source(j, out), out.clocks[j - 1]});
    return out;
}

Fig12Example build_fig12_example(bool identity_clocks) {
    Fig12Example out;
    out.id_1a = 0;
    out.id_1b = 1;
    out.id_2a = 2;
    out.id_2b = 3;
    out.deadline_1b = 7;
    Scenario& s = out.scenario;
    s.name = identity_clocks ? "fig12-identity" : "fig12";
    s.period = 10;
    s.periods = 1;
    const Rational one(1);
    PacketTrace flow1{"H1", {{Rational(0), {out.id_1a, 1, one}}, {Rational(2), {out.id_1b, 1, one}}}};
    PacketTrace flow2{"H2", {{Rational(3, 2), {out.id_2a, 2, one}}, {Rational(7, 2), {out.id_2b, 2, one}}}};
    ClockFunction clock2 = ClockFunction::identity();
    if (!identity_clocks) {
        // Source 2 runs fast: its second packet reaches the FIFO before packet 1b.
        clock2 = ClockFunction({{Rational(3, 2), Rational(3, 2)}, {Rational(9, 5), Rational(7, 2)}}, one, one);
        s.envelope = make_envelope(Rational(20, 3), Rational(0));
    }
    s.sources.push_back({flow1, ClockFunction::identity()});
    s.sources.push_back({flow2, clock2});

    std::vector<std::uint64_t> order = identity_clocks
                                           ? std::vector<std::uint64_t>{out.id_1a, out.id_2a, out.id_1b, out.id_2b}
                                           : std::vector<std::uint64_t>{out.id_1a, out.id_2a, out.id_2b, out.id_1b};
    std::vector<Rational> exits{Rational(5), Rational(6), Rational(6), Rational(6)};
    PacketTrace script{"TAI", {}};
    for (std::size_t i = 0; i < order.size(); ++i) {
        int flow = order[i] == out.id_1a || order[i] == out.id_1b ? 1 : 2;
        script.events.push_back({exits[i], {order[i], flow, one}});
    }
    s.element = ScriptedOutput{script};
    s.regulator.kind = RegulatorKind::IR;
    s.regulator.shaping[1] = {Rational(1, 2), one};
    s.regulator.shaping[2] = {Rational(1, 2), one};
    s.tai_to_regulator = ClockFunction::identity();
    s.labels = {{out.id_1a, "1a"}, {out.id_1b, "1b"}, {out.id_2a, "2a"}, {out.id_2b, "2b"}};
    return out;
}

}  // namespace ncclock
