#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ncclock/clocks.hpp"
#include "ncclock/regulators.hpp"

namespace ncclock {

// A source trace observed with its own clock, and that clock relative to TAI.
struct SourceSpec {
    PacketTrace trace;
    ClockFunction tai_to_source;
};

// Sources -> one FIFO element running on TAI -> one regulator on its local clock.
struct Scenario {
    std::string name;
    ClockEnvelope envelope;
    std::vector<SourceSpec> sources;
    ElementModel element = ZeroDelay{};
    RegulatorConfig regulator;
    ClockFunction tai_to_regulator;
    // Observation period in TAI, used for per-period statistics.
    Rational period{1};
    std::size_t periods = 20;
    Rational start{0};
    std::map<std::uint64_t, std::string> labels;
};

struct ScenarioRun {
    PacketTrace input;            // element input, TAI
    PacketTrace element_output;   // TAI
    PacketTrace regulator_input;  // regulator local clock
    PacketTrace regulator_output; // regulator local clock
    PacketTrace output;           // regulator output, TAI
    Measurement end_to_end;       // element + regulator, TAI
    Measurement element;          // element only, TAI
    Measurement regulator_local;  // regulator only, local clock
    Measurement regulator_tai;    // regulator only, TAI
};

ScenarioRun run_scenario(const Scenario& s);

struct PeriodStats {
    std::vector<Rational> period_end;  // TAI
    std::vector<Rational> max_delay;   // end-to-end TAI delay of packets arriving in the period
};
PeriodStats per_period_max_delay(const Scenario& s, const ScenarioRun& run);

// Least-squares slope through the last `count` points, exact.
Rational fitted_slope(const std::vector<Rational>& x, const std::vector<Rational>& y, std::size_t count);

// Non-synchronized instability of a non-adapted regulator.
struct NonSyncInstabilityParams {
    Rational rho = parse_rational("1.0002");
    Rational eta = parse_rational("4e-9");
    Rational r{1000000};
    Rational b{1000};
    Rational ell{1000};
    Rational t_start{0};
    std::size_t periods = 20;
    // Period length in units of ell / r.
    Rational period_packets{7};
};
struct NonSyncInstability {
    Scenario scenario;
    NonSyncInstabilityParams params;
    // Closed-form rate at which TAI delays grow per second of TAI.
    Rational divergence_rate;
    // Regulator-local arrival time after which every packet is delayed more than e.
    std::optional<Rational> threshold(const Rational& e) const;
};
NonSyncInstability build_nonsync_instability(const NonSyncInstabilityParams& p);
NonSyncInstabilityParams fig6_params();

// Adversarial clock lower-bounding the synchronized PFR penalty.
struct SyncPfrPenaltyParams {
    Rational rho = parse_rational("1.0002");
    Rational eta = parse_rational("4e-9");
    Rational delta = parse_rational("1e-6");
    Rational r{1000000};
    Rational b{1000};
    Rational ell{1000};
    Rational t_start{0};
    // Packets emitted after the clock has fallen delta behind.
    std::size_t extra_packets = 10;
};
struct SyncPfrPenalty {
    Scenario scenario;
    SyncPfrPenaltyParams params;
    Rational x1;
    Rational predicted_penalty;
};
SyncPfrPenalty build_sync_pfr_penalty(const SyncPfrPenaltyParams& p);
SyncPfrPenaltyParams fig8_params();
// d_{TAI->PFR}: identity up to t_start, slope 1/rho until x1, then t - delta.
ClockFunction sync_pfr_penalty_clock(const Rational& rho, const Rational& delta, const Rational& t_start);

// Synchronized instability of a non-adapted interleaved regulator.
struct SyncIrInstabilityParams {
    std::size_t n = 3;
    Rational rho = parse_rational("1.0002");
    Rational eta = parse_rational("4e-9");
    Rational delta = parse_rational("1e-6");
    // Empty: largest decimal not above min(3/2, sqrt(rho)).
    std::optional<Rational> s1;
    // Empty: midpoint of (0, I(1 - 1/s1)).
    std::optional<Rational> eps;
    Rational ell{1000};
    std::size_t periods = 20;
    // Empty: x_1 = delta.
    std::optional<Rational> x1;
};
struct SyncIrInstability {
    Scenario scenario;
    std::size_t n;
    Rational s1, I, eps, tau;
    std::vector<Rational> x;          // x_j, j = 1..n
    std::vector<ClockFunction> clocks; // d_{IR->j}
    // Per-period growth of the first packet delay, n (I(1 - 1/s1) - eps).
    Rational per_period_growth;
    // Exact rate of the constructed scenario, per_period_growth / tau.
    Rational divergence_rate;
    // Limit of the rate as eps -> 0: s1 - 1.
    Rational asymptotic_rate;
    // Lower bound on the delay of the first packet of period k (k >= 1).
    Rational lower_bound(std::size_t k) const;
};
Rational default_s1(const Rational& rho);
SyncIrInstability build_sync_ir_instability(const SyncIrInstabilityParams& p);
// One period pattern of d_{IR->j} repeated `periods` + 1 times.
ClockFunction sync_ir_clock(const Rational& x_j, const Rational& s1, const Rational& I, const Rational& delta,
                            const Rational& tau, std::size_t periods);
PacketTrace simulate_periodic_ir_source(std::size_t j, const SyncIrInstability& s);

// Two flows through a scripted FIFO and an IR; packet 1b misses its deadline.
struct Fig12Example {
    Scenario scenario;
    Rational deadline_1b;
    std::uint64_t id_1a, id_1b, id_2a, id_2b;
};
Fig12Example build_fig12_example(bool identity_clocks = false);

}  // namespace ncclock
