#include "doctest.h"
#include "ncclock/methods.hpp"
#include "ncclock/network.hpp"
#include "ncclock/reclock.hpp"
#include "path_sim.hpp"
#include "support.hpp"

using namespace ncclock;
using testsupport::frac;
using testsupport::Gen;

namespace {

Rational dec(const char* s) { return parse_rational(s); }

FlowPath uniform_path(const SourceParams& src, const ElementModel& element, std::size_t n) {
    FlowPath p{src, {}};
    for (std::size_t k = 0; k < n; ++k) p.hops.push_back({element, RegulatorKind::PFR, {}});
    return p;
}

SourceParams random_source(Gen& g) {
    return {g.small_positive(8, 2), Rational(g.integer(1, 6)), 1};
}

ClockEnvelope random_env(Gen& g, bool sync) {
    Rational rho = 1 + frac(g.integer(1, 40), 100);
    Rational eta = frac(g.integer(0, 30), 100);
    std::optional<Rational> delta;
    if (sync) delta = frac(g.integer(1, 40), 100);
    return make_envelope(rho, eta, delta);
}

}  // namespace

TEST_CASE("rounding grids") {
    CHECK(RoundingGrid::identity().apply(frac(7, 3)) == frac(7, 3));
    RoundingGrid kbit = RoundingGrid::quantum(1000);
    CHECK(kbit.apply(dec("1000200")) == 1001000);
    CHECK(kbit.apply(3000) == 3000);
    CHECK(RoundingGrid::decimal(-2).apply(frac(1, 3)) == frac(34, 100));
    CHECK(RoundingGrid::decimal(3).apply(1) == 1000);
    CHECK_THROWS_AS(RoundingGrid::quantum(1000, Rational(2000)).apply(2001), Error);
    RoundingGrid ex = RoundingGrid::explicit_values({5, 1, 3});
    CHECK(ex.apply(2) == 3);
    CHECK(ex.apply(5) == 5);
    try {
        ex.apply(6);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigurationInfeasible);
    }
    CHECK_THROWS_AS(RoundingGrid::quantum(0), Error);
    CHECK_THROWS_AS(RoundingGrid::explicit_values({}), Error);
}

TEST_CASE("cascade hop bound and configuration") {
    ClockEnvelope tsn = preset_envelope("tsn-nonsync");
    Rational D = dec("100e-6");
    CHECK(cascade_hop_delay(D, tsn) == tsn.rho * tsn.rho * D + tsn.eta * (1 + tsn.rho));
    CHECK(cascade_hop_delay(0, tsn) == tsn.eta * (1 + tsn.rho));
    CHECK(cascade_hop_delay(D, ideal_envelope()) == D);
    CHECK_THROWS_AS(cascade_hop_delay(-1, tsn), Error);

    SourceParams src{1000000, 10000, 1000};
    FlowPath p = uniform_path(src, ZeroDelay{}, 3);
    auto cfg = cascade_configure(p, tsn);
    REQUIRE(cfg.size() == 3);
    CHECK(cfg[0].rate == tsn.rho * src.r0);
    CHECK(cfg[0].burst == src.b0 + tsn.eta * src.r0);
    CHECK(cfg[1].rate == tsn.rho * cfg[0].rate);
    CHECK(cfg[2].burst == cfg[1].burst + tsn.eta * cfg[1].rate);

    for (auto& h : p.hops) h.grid.rate = RoundingGrid::quantum(1000);
    cfg = cascade_configure(p, tsn);
    CHECK(cfg[0].rate == rational_ceil(tsn.rho * src.r0 / 1000) * 1000);
    CHECK(cfg[0].rate == 1001000);

    p.hops[1].grid.rate = RoundingGrid::quantum(1000, Rational(1000000));
    CHECK_THROWS_AS(cascade_configure(p, tsn), Error);

    FlowPath bad = uniform_path(src, ZeroDelay{}, 2);
    bad.hops[0].regulator.reset();
    CHECK_THROWS_AS(check_path(bad), Error);
    CHECK_THROWS_AS(check_path(FlowPath{src, {}}), Error);
}

TEST_CASE("element delay bounds") {
    CHECK(element_delay_bound(RateLatencyServer{Rational(2), 1}, {make_leaky_bucket(1, 2)}) == 2);
    CHECK(element_delay_bound(ZeroDelay{}, {make_leaky_bucket(1, 2)}) == 0);
    CHECK(element_delay_bound(FixedDelayBound{frac(3, 2)}, {}) == frac(3, 2));
    // Aggregate of two flows: rate 2, burst 3 into R = 4, T = 1.
    CHECK(element_delay_bound(RateLatencyServer{Rational(4), 1}, {make_leaky_bucket(1, 1), make_leaky_bucket(1, 2)}) ==
          1 + frac(3, 4));
    try {
        element_delay_bound(RateLatencyServer{Rational(1), 1}, {make_leaky_bucket(2, 1)});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnstableElement);
    }
    CHECK_THROWS_AS(element_delay_bound(ScriptedOutput{}, {make_leaky_bucket(1, 1)}), Error);
}

TEST_CASE("dual arrival-curve configuration") {
    ClockEnvelope tsn = preset_envelope("tsn-nonsync");
    SourceParams src{1000000, 10000, 1000};
    AdamConfig exact = adam_configure(src, tsn, RoundingGrid::identity());
    CHECK(exact.W == tsn.rho * tsn.rho);
    CHECK(exact.regulator.rate == exact.W * src.r0);
    CHECK(exact.regulator.burst == src.b0);

    AdamConfig bit = adam_configure(src, tsn, RoundingGrid::quantum(1));
    CHECK(bit.W == rational_ceil(tsn.rho * tsn.rho * src.r0) / src.r0);
    CHECK(bit.W >= tsn.rho * tsn.rho);

    CHECK_THROWS_AS(adam_hop_delays(src, tsn, 1, {Rational(1)}), Error);
    CHECK_THROWS_AS(adam_hop_delays(src, tsn, tsn.rho, {Rational(1)}), Error);

    // Ideal clocks: the bound collapses to the element bound.
    AdamDelays ideal = adam_hop_delays(src, make_envelope(1, 0), 2, {Rational(3), Rational(5)});
    CHECK(ideal.hop_bounds == std::vector<Rational>{3, 5});
}

TEST_CASE("property: dual arrival-curve bound against the curve engine") {
    Gen g(4242);
    int tight = 0, loose = 0;
    for (int trial = 0; trial < 150; ++trial) {
        ClockEnvelope env = random_env(g, false);
        SourceParams src = random_source(g);
        Rational W = env.rho * env.rho;
        if (g.coin()) W += frac(g.integer(1, 40), 20);
        std::vector<Rational> D;
        for (int k = 0; k < 5; ++k) D.push_back(frac(g.integer(0, 40), 8));
        AdamDelays out = adam_hop_delays(src, env, W, D);
        REQUIRE(out.hop_bounds.size() == 5);
        REQUIRE(out.b2.size() == 6);
        for (std::size_t k = 0; k < 5; ++k) {
            CHECK(out.b2[k + 1] > out.b2[k]);
            PwlCurve arrival = min_curve(adam_alpha1(src, env, W), adam_alpha2(src, env, out.b2[k]));
            Rational engine = horizontal_deviation(arrival, adam_hop_service(src, env, W, D[k])).value();
            bool figure_regime = out.b2[k] >= src.b0 + env.eta * W * src.r0;
            if (figure_regime) {
                CHECK(out.hop_bounds[k] == engine);
                ++tight;
            } else {
                CHECK(out.hop_bounds[k] >= engine);
                if (W == env.rho * env.rho) CHECK(out.hop_bounds[k] == engine);
                ++loose;
            }
        }
    }
    CHECK(tight > 100);
    CHECK(loose > 50);
}

TEST_CASE("synchronized non-adapted bound") {
    CHECK(sync_pfr_hop_delay(dec("100e-6"), dec("1e-6")) == dec("104e-6"));
    CHECK(sync_pfr_hop_delay(5, 0) == 5);
    CHECK_THROWS_AS(sync_pfr_hop_delay(1, -1), Error);
    CHECK_THROWS_AS(sync_pfr_arrival_curve({1, 1, 1}, preset_envelope("tsn-nonsync")), Error);
    CHECK_FALSE(sync_pfr_degenerate(preset_envelope("tsn-tight-sync")));
    CHECK(sync_pfr_degenerate(make_envelope(frac(11, 10), 1, frac(1, 10))));
    CHECK_FALSE(sync_pfr_degenerate(preset_envelope("tsn-nonsync")));
}

TEST_CASE("property: synchronized bound is the horizontal deviation of the hop") {
    Gen g(5151);
    int regular = 0;
    for (int trial = 0; trial < 200; ++trial) {
        ClockEnvelope env = random_env(g, true);
        SourceParams src = random_source(g);
        Rational D = frac(g.integer(0, 40), 8);
        PwlCurve service = convolve(make_delta(D), reclock_pfr_service(src.r0, src.b0, env));
        Rational h = horizontal_deviation(sync_pfr_arrival_curve(src, env), service).value();
        Rational bound = sync_pfr_hop_delay(D, *env.delta);
        if (!sync_pfr_degenerate(env)) {
            CHECK(h == bound);
            ++regular;
        } else {
            CHECK(h <= bound);
        }
    }
    CHECK(regular > 100);
}

TEST_CASE("property: bounds grow with the clock parameters") {
    Gen g(6262);
    SourceParams src{4, 3, 1};
    for (int trial = 0; trial < 60; ++trial) {
        Rational rho = 1 + frac(g.integer(1, 30), 100), eta = frac(g.integer(0, 20), 100);
        Rational delta = frac(g.integer(0, 20), 100), D = frac(g.integer(0, 40), 8);
        Rational bump = frac(g.integer(1, 10), 100);
        ClockEnvelope base = make_envelope(rho, eta, delta);
        for (const ClockEnvelope& more :
             {make_envelope(rho + bump, eta, delta), make_envelope(rho, eta + bump, delta), make_envelope(rho, eta, delta + bump)}) {
            CHECK(cascade_hop_delay(D, more) >= cascade_hop_delay(D, base));
            CHECK(reclock_delay(D, more) >= reclock_delay(D, base));
            CHECK(sync_pfr_hop_delay(D, *more.delta) >= sync_pfr_hop_delay(D, *base.delta));
            Rational W = more.rho * more.rho;
            CHECK(adam_hop_delays(src, more, W, {D, D}).hop_bounds.back() >=
                  adam_hop_delays(src, base, W, {D, D}).hop_bounds.back());
        }
        CHECK(cascade_hop_delay(D + bump, base) > cascade_hop_delay(D, base));
        CHECK(sync_pfr_hop_delay(D + bump, *base.delta) > sync_pfr_hop_delay(D, *base.delta));
    }
}

TEST_CASE("path analysis") {
    ClockEnvelope tsn = preset_envelope("tsn-nonsync");
    SourceParams src{1000000, 10000, 1000};
    ElementModel rl = RateLatencyServer{Rational(10000000), dec("1e-5")};
    FlowPath p = uniform_path(src, rl, 3);

    PathBound ideal = analyze_path(p, tsn, Method::Ideal);
    for (const auto& h : ideal.hops) CHECK(h.hop_bound == dec("1e-5") + src.b0 / 10000000);
    CHECK(ideal.ete == 3 * (dec("1e-5") + src.b0 / 10000000));

    PathBound cas = analyze_path(p, tsn, Method::Cascade);
    Rational sum = 0;
    for (const auto& h : cas.hops) {
        CHECK(h.hop_bound == cascade_hop_delay(h.element_bound, tsn));
        sum += h.hop_bound;
    }
    CHECK(cas.ete == sum);
    CHECK(cas.hops[1].element_bound > cas.hops[0].element_bound);

    PathBound adam = analyze_path(p, tsn, Method::Adam);
    REQUIRE(adam.W);
    CHECK(*adam.W == tsn.rho * tsn.rho);
    CHECK(adam.b2.size() == 4);

    ClockEnvelope sync = preset_envelope("tsn-tight-sync");
    PathBound s = analyze_path(p, sync, Method::SyncNonAdapted);
    for (const auto& h : s.hops) CHECK(h.hop_bound == h.element_bound + 4 * *sync.delta);
    CHECK(s.warnings.empty());
    CHECK_THROWS_AS(analyze_path(p, tsn, Method::SyncNonAdapted), Error);

    p.hops.back().regulator.reset();
    PathBound last = analyze_path(p, tsn, Method::Cascade);
    CHECK(last.hops.back().hop_bound == last.hops.back().element_bound);
    CHECK_FALSE(last.hops.back().config);

    // An unregulated last hop does not count against identical grids.
    FlowPath gridded = uniform_path(src, rl, 2);
    for (auto& h : gridded.hops) h.grid.rate = RoundingGrid::quantum(1000);
    gridded.hops.back().regulator.reset();
    gridded.hops.back().grid = {};
    PathBound g = analyze_path(gridded, tsn, Method::Adam);
    CHECK(g.hops[0].config->rate == rational_ceil(tsn.rho * tsn.rho * src.r0 / 1000) * 1000);
    CHECK(g.hops[1].hop_bound == g.hops[1].element_bound);
    gridded.hops.back().regulator = RegulatorKind::PFR;
    CHECK_THROWS_AS(analyze_path(gridded, tsn, Method::Adam), Error);

    FlowPath ir = uniform_path(src, rl, 2);
    ir.hops[0].regulator = RegulatorKind::IR;
    CHECK_THROWS_AS(analyze_path(ir, tsn, Method::Adam), Error);
    CHECK_FALSE(analyze_path(ir, sync, Method::SyncNonAdapted).warnings.empty());

    CHECK(parse_method("cascade") == Method::Cascade);
    CHECK_THROWS_AS(parse_method("magic"), Error);
}

TEST_CASE("end-to-end comparison") {
    CompareSetup setup;
    auto rows = ete_compare(setup, 10, {Method::Ideal, Method::Cascade, Method::Adam, Method::SyncNonAdapted});
    REQUIRE(rows.size() == 40);
    std::map<std::pair<std::size_t, Method>, Rational> rel;
    for (const auto& r : rows) rel[{r.n, r.method}] = r.rel_increase;
    for (std::size_t n = 1; n <= 10; ++n) {
        CHECK(rel[{n, Method::Ideal}] == 0);
        for (Method m : {Method::Cascade, Method::Adam, Method::SyncNonAdapted}) {
            CHECK(rel[{n, m}] > 0);
            CHECK(rel[{n, m}] < frac(4, 100));
        }
        if (n >= 2) CHECK(rel[{n, Method::Adam}] >= rel[{n, Method::Cascade}]);
        if (n >= 2) CHECK(rel[{n, Method::Adam}] > rel[{n - 1, Method::Adam}]);
    }
    // The dual arrival curve beats the cascade at a single hop with these parameters.
    CHECK(rel[{1, Method::Adam}] < rel[{1, Method::Cascade}]);

    CompareSetup ideal = setup;
    ideal.env = ideal_envelope();
    ideal.sync_env = make_envelope(1, 0, Rational(0));
    ideal.adam_rate_grid = RoundingGrid::identity();
    for (const auto& r : ete_compare(ideal, 4, {Method::Cascade, Method::SyncNonAdapted})) CHECK(r.rel_increase == 0);
    CHECK_THROWS_AS(ete_compare(setup, 0, {Method::Cascade}), Error);
}

TEST_CASE("property: cascade hop bounds hold in packet simulation") {
    Gen g(7373);
    for (int trial = 0; trial < 20; ++trial) {
        Rational s = 1 + frac(g.integer(1, 10), 100);
        ClockEnvelope env = make_envelope(s * s, frac(g.integer(0, 10), 100));
        SourceParams src{frac(g.integer(1, 4), 2), Rational(g.integer(1, 3)), 1};
        std::size_t n = static_cast<std::size_t>(g.integer(1, 4));
        FlowPath path{src, {}};
        for (std::size_t k = 0; k < n; ++k) {
            ElementModel e = RateLatencyServer{Rational(g.integer(3, 5)), frac(g.integer(0, 4), 4)};
            if (g.integer(0, 3) == 0) e = FixedDelayBound{frac(g.integer(0, 4), 4)};
            path.hops.push_back({e, RegulatorKind::PFR, {}});
        }
        if (g.coin()) path.hops.back().regulator.reset();
        auto run = testsupport::simulate_cascade_path(g, path, env, s, 30);
        for (std::size_t k = 0; k < n; ++k) CHECK(run.hop_max_delay[k] <= run.hop_bound[k]);
    }
}

TEST_CASE("network analysis") {
    Network net;
    net.envelope = preset_envelope("tsn-nonsync");
    net.elements = {{"sw1", RateLatencyServer{Rational(10000000), dec("1e-5")}}, {"sw2", RateLatencyServer{Rational(10000000), dec("1e-5")}}};
    net.regulators = {{"r1", RegulatorKind::PFR, {}}, {"r2", RegulatorKind::PFR, {}}};
    SourceParams src{1000000, 10000, 1000};
    net.flows = {{"a", src, {{"sw1", "r1"}, {"sw2", std::nullopt}}}, {"b", src, {{"sw1", "r2"}, {"sw2", std::nullopt}}}};

    NetworkReport rep = analyze_network(net);
    REQUIRE(rep.flows.size() == 2);
    CHECK_FALSE(rep.unstable);
    REQUIRE(rep.flows[0].bound);
    // Both flows share sw1: its bound covers the aggregate.
    PwlCurve one = element_arrival_curve_tai({src.r0, src.b0}, net.envelope);
    Rational shared = element_delay_bound(net.elements[0].model, {one, one});
    CHECK(rep.flows[0].bound->hops[0].element_bound == shared);
    CHECK(rep.flows[0].bound->hops[0].hop_bound == cascade_hop_delay(shared, net.envelope));
    CHECK(rep.flows[0].bound->ete == rep.flows[1].bound->ete);

    net.method = NetworkMethod::None;
    NetworkReport none = analyze_network(net);
    CHECK(none.unstable);
    REQUIRE_FALSE(none.warnings.empty());
    CHECK(none.warnings[0].find("unbounded") != std::string::npos);
    CHECK_FALSE(none.flows[0].bound);

    net.method = NetworkMethod::SyncNonAdapted;
    CHECK_THROWS_AS(analyze_network(net), Error);
    net.envelope = preset_envelope("tsn-tight-sync");
    NetworkReport sync = analyze_network(net);
    CHECK_FALSE(sync.unstable);
    CHECK(sync.flows[0].bound->hops[0].hop_bound == sync.flows[0].bound->hops[0].element_bound + 4 * *net.envelope.delta);

    net.regulators[0].kind = RegulatorKind::IR;
    NetworkReport ir = analyze_network(net);
    CHECK(ir.unstable);
    CHECK_FALSE(ir.flows[0].bound);

    net.method = NetworkMethod::Cascade;
    net.envelope = preset_envelope("tsn-nonsync");
    net.elements[0].model = RateLatencyServer{Rational(1500000), dec("1e-5")};
    NetworkReport over = analyze_network(net);
    CHECK(over.unstable);
    CHECK_FALSE(over.flows[0].bound);

    net.flows[0].path[0].element = "nowhere";
    CHECK_THROWS_AS(analyze_network(net), Error);

    Network empty;
    empty.envelope = ideal_envelope();
    CHECK(analyze_network(empty).flows.empty());
}
