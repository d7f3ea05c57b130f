#include "doctest.h"
#include "ncclock/reclock.hpp"
#include "ncclock/regulators.hpp"
#include "ncclock/scenarios.hpp"
#include "support.hpp"

using namespace ncclock;
using testsupport::frac;
using testsupport::Gen;

namespace {

PacketTrace unit_trace(std::size_t n, int flow = 0, std::uint64_t first = 0) {
    PacketTrace t{"TAI", {}};
    for (std::size_t k = 0; k < n; ++k)
        t.events.push_back({Rational(static_cast<long>(k)), Packet{first + k, flow, 1}});
    return t;
}

// Several flows of unit packets with random gaps, merged by time.
PacketTrace random_input(Gen& g, int flows, int per_flow) {
    std::vector<PacketTrace> parts;
    std::uint64_t id = 0;
    for (int f = 0; f < flows; ++f) {
        PacketTrace t{"TAI", {}};
        Rational time = frac(g.integer(0, 8), 4);
        for (int k = 0; k < per_flow; ++k) {
            t.events.push_back({time, Packet{id++, f, frac(g.integer(1, 4), 2)}});
            time += frac(g.integer(0, 6), 4);
        }
        parts.push_back(t);
    }
    return merge_traces(parts, "TAI");
}

std::vector<std::uint64_t> ids_of(const PacketTrace& t, std::optional<int> flow = std::nullopt) {
    std::vector<std::uint64_t> out;
    for (const auto& e : t.events)
        if (!flow || e.packet.flow == *flow) out.push_back(e.packet.id);
    return out;
}

}  // namespace

TEST_CASE("greedy source examples") {
    PacketTrace unit = simulate_greedy_source({1, 1}, 1, 3, 8);
    REQUIRE(unit.events.size() == 6);
    for (std::size_t k = 0; k < 6; ++k) CHECK(unit.events[k].time == 3 + static_cast<long>(k));

    CHECK(simulate_greedy_source({1, 1}, 1, 5, 4).events.empty());

    PacketTrace burst = simulate_greedy_source({2, 3}, 1, 0, 2);
    std::vector<Rational> expected{0, 0, 0, frac(1, 2), 1, frac(3, 2), 2};
    REQUIRE(burst.events.size() == expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) CHECK(burst.events[k].time == expected[k]);

    CHECK_THROWS_AS(simulate_greedy_source({1, frac(1, 2)}, 1, 0, 1), Error);
}

TEST_CASE("property: greedy source follows the floor formula") {
    Gen g(55);
    for (int trial = 0; trial < 40; ++trial) {
        Rational r = g.small_positive(10, 4), ell = frac(g.integer(1, 4), 2);
        Rational b = ell * g.integer(1, 5) + frac(g.integer(0, 3), 4);
        Rational ts = frac(g.integer(0, 8), 4);
        PacketTrace t = simulate_greedy_source({r, b}, ell, ts, ts + 6);
        PwlCurve gamma = make_leaky_bucket(r, b);
        CHECK(conforms(t, gamma));
        for (const auto& x : testsupport::lattice_points(6, 24)) {
            std::size_t count = 0;
            for (const auto& e : t.events)
                if (e.time <= ts + x) ++count;
            Rational bits = gamma.right_limit(x).value();
            CHECK(Rational(static_cast<long>(count)) == rational_floor(bits / ell));
        }
    }
}

TEST_CASE("network elements") {
    PacketTrace in = unit_trace(5);
    CHECK(simulate_element(in, ZeroDelay{}) == in);
    CHECK(simulate_element(in, RateLatencyServer{std::nullopt, 0}) == in);

    PacketTrace fixed = simulate_element(in, FixedDelayBound{2});
    for (std::size_t k = 0; k < 5; ++k) CHECK(fixed.events[k].time == in.events[k].time + 2);

    // Back-to-back packets at rate 1/2 with latency 1 queue up.
    PacketTrace rl = simulate_element(in, RateLatencyServer{frac(1, 2), 1});
    for (std::size_t k = 0; k < 5; ++k) CHECK(rl.events[k].time == 3 + 2 * static_cast<long>(k));

    PacketTrace script = in;
    std::swap(script.events[1].packet, script.events[2].packet);
    CHECK_THROWS_AS(simulate_element(in, ScriptedOutput{script}), Error);
    PacketTrace early = in;
    early.events[3].time = 2;
    try {
        simulate_element(in, ScriptedOutput{early});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidScript);
    }
    CHECK_THROWS_AS(simulate_element(in, RateLatencyServer{Rational(0), 1}), Error);
}

TEST_CASE("property: rate-latency element respects its horizontal deviation") {
    Gen g(66);
    for (int trial = 0; trial < 40; ++trial) {
        Rational r = frac(g.integer(1, 4), 2), b = g.integer(1, 4);
        Rational R = r + frac(g.integer(0, 6), 2), T = frac(g.integer(0, 8), 4);
        PacketTrace in = simulate_greedy_source({r, b}, 1, 0, 20);
        PacketTrace out = simulate_element(in, RateLatencyServer{R, T});
        Measurement m = measure(in, out);
        Rational bound = horizontal_deviation(make_leaky_bucket(r, b), make_rate_latency(R, T)).value();
        CHECK(m.max_delay <= bound);
        CHECK(ids_of(out) == ids_of(in));
    }
}

TEST_CASE("per-flow regulator with an ideal clock") {
    PacketTrace in = simulate_greedy_source({1, 2}, 1, 0, 10);
    PacketTrace out = simulate_pfr(in, LeakyBucket{1, 2}, ClockFunction::identity(), "TAI");
    Measurement m = measure(in, out);
    for (const auto& d : m.delays) CHECK(d == 0);
    CHECK(simulate_pfr(PacketTrace{}, LeakyBucket{1, 1}, ClockFunction::identity(), "TAI").events.empty());
    CHECK_THROWS_AS(simulate_pfr(in, LeakyBucket{1, frac(1, 2)}, ClockFunction::identity(), "TAI"), Error);
}

TEST_CASE("slow regulator clock: delays grow by 1/7 per packet") {
    auto ns = build_nonsync_instability(fig6_params());
    ScenarioRun run = run_scenario(ns.scenario);
    REQUIRE(run.regulator_local.delays.size() > 20);
    for (std::size_t k = 0; k <= 20; ++k) CHECK(run.regulator_local.delays[k] == frac(static_cast<long>(k), 7));
    CHECK(run.regulator_output.events[1].time == 1);
    CHECK(backlog_at(run.regulator_input, run.regulator_output, 7) == 2);
    CHECK(backlog_at(run.regulator_input, run.regulator_output, 14) == 3);
}

TEST_CASE("interleaved regulator") {
    PacketTrace in = unit_trace(6);
    RegulatorConfig cfg;
    cfg.kind = RegulatorKind::IR;
    cfg.shaping[0] = {frac(1, 2), 1};
    CHECK(simulate_ir(in, cfg, ClockFunction::identity(), "IR") == simulate_pfr(in, cfg, ClockFunction::identity(), "IR"));
    CHECK(simulate_ir(PacketTrace{}, cfg, ClockFunction::identity(), "IR").events.empty());

    auto ex = build_fig12_example();
    ScenarioRun run = run_scenario(ex.scenario);
    for (const auto& e : run.output.events)
        if (e.packet.id == ex.id_1b) CHECK(e.time >= 8);
}

TEST_CASE("head-of-line blocking differs from per-flow queues") {
    // Flow 1 is out of tokens; flow 0's packet behind it waits under IR but not under PFR.
    PacketTrace in{"TAI", {{0, Packet{0, 1, 1}}, {0, Packet{1, 1, 1}}, {0, Packet{2, 0, 1}}}};
    RegulatorConfig cfg;
    cfg.shaping[0] = {1, 1};
    cfg.shaping[1] = {frac(1, 4), 1};
    PacketTrace ir = simulate_ir(in, cfg, ClockFunction::identity(), "R");
    PacketTrace pfr = simulate_pfr(in, cfg, ClockFunction::identity(), "R");
    CHECK(measure(in, ir).delays[2] == 4);
    CHECK(measure(in, pfr).delays[2] == 0);
}

TEST_CASE("property: regulator output conforms and keeps order") {
    Gen g(77);
    for (int trial = 0; trial < 40; ++trial) {
        PacketTrace in = random_input(g, 3, 8);
        RegulatorConfig cfg;
        for (int f = 0; f < 3; ++f) cfg.shaping[f] = {g.small_positive(4, 4), Rational(2 + g.integer(0, 2))};
        Rational rho = g.rho(20);
        ClockFunction d = testsupport::random_envelope_clock(g, rho, -1, 30, 7);
        for (auto kind : {RegulatorKind::PFR, RegulatorKind::IR}) {
            cfg.kind = kind;
            PacketTrace out = simulate_regulator(in, cfg, d, "local");
            CHECK(out.clock == "local");
            CHECK(out.events.size() == in.events.size());
            for (int f = 0; f < 3; ++f) {
                PacketTrace sub = flow_subtrace(out, f);
                CHECK(conforms(sub, make_leaky_bucket(cfg.shaping[f].rate, cfg.shaping[f].burst)));
                CHECK(ids_of(out, f) == ids_of(in, f));
            }
            if (kind == RegulatorKind::IR) CHECK(ids_of(out) == ids_of(in));
            Measurement m = measure(in, out, d, ClockFunction::identity());
            for (const auto& delay : m.delays) CHECK(delay >= 0);
            CHECK(simulate_regulator(in, cfg, d, "local") == out);
        }
    }
}

TEST_CASE("property: single-flow interleaved regulator equals the per-flow regulator") {
    Gen g(88);
    for (int trial = 0; trial < 50; ++trial) {
        PacketTrace in = random_input(g, 1, 12);
        RegulatorConfig cfg;
        cfg.shaping[0] = {g.small_positive(4, 4), 2};
        ClockFunction d = testsupport::random_envelope_clock(g, g.rho(20), -1, 20, 5);
        CHECK(simulate_ir(in, cfg, d, "R") == simulate_pfr(in, cfg, d, "R"));
    }
}

TEST_CASE("measurement") {
    PacketTrace in = unit_trace(4);
    Measurement same = measure(in, in);
    for (const auto& d : same.delays) CHECK(d == 0);
    CHECK(same.max_backlog == 1);

    PacketTrace shifted = simulate_element(in, FixedDelayBound{frac(5, 2)});
    Measurement m = measure(in, shifted);
    CHECK(m.max_delay == frac(5, 2));
    CHECK(m.max_backlog == 3);
    CHECK(backlog_at(in, shifted, 2) == 3);

    PacketTrace missing = in;
    missing.events.pop_back();
    CHECK_THROWS_AS(measure(in, missing), Error);
    PacketTrace twice = in;
    twice.events.back().packet.id = 0;
    CHECK_THROWS_AS(measure(in, twice), Error);

    // Penalty scenario: the last packets are held exactly one unit of TAI.
    auto pen = build_sync_pfr_penalty(fig8_params());
    ScenarioRun run = run_scenario(pen.scenario);
    CHECK(run.regulator_tai.max_delay == 1);
    long held = 0;
    for (const auto& d : run.regulator_tai.delays)
        if (d == 1) ++held;
    CHECK(held >= 3);
}

TEST_CASE("property: shaping for free with ideal clocks") {
    Gen g(99);
    for (int trial = 0; trial < 40; ++trial) {
        Rational r = frac(g.integer(1, 4), 2), b = g.integer(1, 4);
        PacketTrace in = simulate_greedy_source({r, b}, 1, frac(g.integer(0, 4), 4), 15);
        ElementModel element;
        if (g.coin())
            element = FixedDelayBound{frac(g.integer(0, 12), 4)};
        else
            element = RateLatencyServer{r + frac(g.integer(0, 4), 2), frac(g.integer(0, 8), 4)};
        PacketTrace mid = simulate_element(in, element);
        PacketTrace out = simulate_pfr(mid, LeakyBucket{r, b}, ClockFunction::identity(), "TAI");
        CHECK(measure(in, out).max_delay == measure(in, mid).max_delay);
    }
}
