#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ncclock/clocks.hpp"
#include "ncclock/curves.hpp"
#include "ncclock/regulators.hpp"

namespace ncclock {

// Smallest configurable value not below the input.
class RoundingGrid {
public:
    enum class Kind { Identity, Quantum, Explicit };

    static RoundingGrid identity();
    // Multiples of `quantum`, optionally capped at `max`.
    static RoundingGrid quantum(Rational quantum, std::optional<Rational> max = std::nullopt);
    // Multiples of 10^exponent.
    static RoundingGrid decimal(int exponent, std::optional<Rational> max = std::nullopt);
    static RoundingGrid explicit_values(std::vector<Rational> values);

    // Throws configuration-infeasible when no configurable value is large enough.
    Rational apply(const Rational& x) const;

    Kind kind() const { return kind_; }
    const Rational& step() const { return quantum_; }
    const std::optional<Rational>& max() const { return max_; }
    const std::vector<Rational>& values() const { return values_; }

    friend bool operator==(const RoundingGrid&, const RoundingGrid&) = default;

private:
    Kind kind_ = Kind::Identity;
    Rational quantum_{0};
    std::optional<Rational> max_;
    std::vector<Rational> values_;
};

struct HopGrid {
    RoundingGrid rate = RoundingGrid::identity();
    RoundingGrid burst = RoundingGrid::identity();

    friend bool operator==(const HopGrid&, const HopGrid&) = default;
};

struct SourceParams {
    Rational r0;
    Rational b0;
    Rational ell{1};
};

// Network element followed by an optional regulator. Only the last hop may omit the regulator.
struct Hop {
    ElementModel element = ZeroDelay{};
    std::optional<RegulatorKind> regulator = RegulatorKind::PFR;
    HopGrid grid;
};

struct FlowPath {
    SourceParams source;
    std::vector<Hop> hops;
};

void check_path(const FlowPath& path);

// Regulator configuration (r_k, b_k) for k = 1..n; entry k-1 belongs to hop k.
std::vector<LeakyBucket> cascade_configure(const FlowPath& path, const ClockEnvelope& env);

// TAI arrival curve at an element fed by a regulator (or source) shaping with `prev`.
PwlCurve element_arrival_curve_tai(const LeakyBucket& prev, const ClockEnvelope& env);

// TAI delay bound of a FIFO element for the aggregate of the given arrival curves.
Rational element_delay_bound(const ElementModel& element, const std::vector<PwlCurve>& arrivals);

Rational cascade_hop_delay(const Rational& D, const ClockEnvelope& env);

struct AdamConfig {
    Rational W;
    LeakyBucket regulator;  // (W r0, b0) at every hop
};
AdamConfig adam_configure(const SourceParams& source, const ClockEnvelope& env, const RoundingGrid& rate_grid);

struct AdamDelays {
    std::vector<Rational> hop_bounds;  // D'_k
    std::vector<Rational> b2;          // b_{2,0}, ..., b_{2,n}
};
AdamDelays adam_hop_delays(const SourceParams& source, const ClockEnvelope& env, const Rational& W,
                           const std::vector<Rational>& element_bounds);
// The dual arrival curves of hop k: alpha_1 and alpha_{2,k-1}.
PwlCurve adam_alpha1(const SourceParams& source, const ClockEnvelope& env, const Rational& W);
PwlCurve adam_alpha2(const SourceParams& source, const ClockEnvelope& env, const Rational& b2);
// TAI service curve of hop k: element bound D followed by the regulator (W r0, b0).
PwlCurve adam_hop_service(const SourceParams& source, const ClockEnvelope& env, const Rational& W,
                          const Rational& D);

Rational sync_pfr_hop_delay(const Rational& D, const Rational& delta);
// Arrival curve the element bound must be computed with; needs a synchronized envelope.
PwlCurve sync_pfr_arrival_curve(const SourceParams& source, const ClockEnvelope& env);
// The bound is still returned when eta >= 2 delta rho, but its derivation does not cover that regime.
bool sync_pfr_degenerate(const ClockEnvelope& env);

enum class Method { Ideal, Cascade, Adam, SyncNonAdapted };
const char* method_name(Method m);
Method parse_method(const std::string& name);

struct HopBound {
    Rational element_bound;            // D_k
    Rational hop_bound;                // D'_k
    std::optional<LeakyBucket> config; // regulator at hop k
    PwlCurve arrival;                  // TAI arrival curve used for D_k
};

struct PathBound {
    Method method;
    std::vector<HopBound> hops;
    Rational ete;
    std::optional<Rational> W;
    std::vector<Rational> b2;
    std::vector<std::string> warnings;
};

// Single-flow analysis of a path. Ideal ignores the envelope.
PathBound analyze_path(const FlowPath& path, const ClockEnvelope& env, Method method);
// Same, with D_k supplied by the caller from hop index and the flow's TAI arrival curve there.
using ElementBoundFn = std::function<Rational(std::size_t, const PwlCurve&)>;
PathBound analyze_path(const FlowPath& path, const ClockEnvelope& env, Method method, const ElementBoundFn& bound);

struct CompareRow {
    std::size_t n;
    Method method;
    Rational ete;
    Rational rel_increase;
};

struct CompareSetup {
    ClockEnvelope env = preset_envelope("tsn-nonsync");
    // Envelope for the synchronized method; defaults to env with delta from tsn-tight-sync.
    std::optional<ClockEnvelope> sync_env;
    SourceParams source{Rational(1000000), Rational(10000), Rational(1000)};
    ElementModel element = RateLatencyServer{Rational(10000000), Rational(1, 100000)};
    HopGrid cascade_grid;
    RoundingGrid adam_rate_grid = RoundingGrid::quantum(Rational(100000));
};

std::vector<CompareRow> ete_compare(const CompareSetup& setup, std::size_t max_hops, const std::vector<Method>& methods);

}  // namespace ncclock
