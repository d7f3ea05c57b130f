#include "cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "io.hpp"
#include "ncclock/reclock.hpp"

namespace ncclock::cli {

namespace {

using io::json;

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kWarning = 2;

struct EnvelopeOptions {
    std::string preset;
    std::string rho, eta, delta;

    explicit EnvelopeOptions(std::string default_preset) : preset(std::move(default_preset)) {}

    void attach(CLI::App* app) {
        app->add_option("--preset", preset, "Envelope preset: tsn-nonsync, tsn-tight-sync, ntp-loose-sync, ideal")
            ->capture_default_str();
        app->add_option("--rho", rho, "Override the clock stability bound");
        app->add_option("--eta", eta, "Override the timing-jitter bound");
        app->add_option("--delta", delta, "Override the time-error bound ('none' for non-synchronized)");
    }

    ClockEnvelope resolve() const {
        ClockEnvelope env = preset_envelope(preset);
        if (!rho.empty()) env.rho = parse_rational(rho);
        if (!eta.empty()) env.eta = parse_rational(eta);
        if (delta == "none") env.delta.reset();
        else if (!delta.empty()) env.delta = parse_rational(delta);
        return make_envelope(env.rho, env.eta, env.delta);
    }
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
    }
}

void emit(const std::string& path, std::ostream& fallback, const std::string& text) {
    if (path.empty() || path == "-") {
        fallback << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::InvalidInput, "cannot write '" + path + "'");
    f << text;
}

std::string float_text(const Rational& q) {
    std::ostringstream os;
    os << std::setprecision(17) << to_double(q);
    return os.str();
}

std::optional<Rational> opt_rational(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return parse_rational(s);
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
    std::string network;
    std::string out;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
    Network net = io::network_from(read_json_file(a.network));
    NetworkReport report = analyze_network(net);
    emit(a.out, out, io::report_to(report).dump(2) + "\n");
    return report.unstable ? kWarning : kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string scenario;
    EnvelopeOptions envelope{"tsn-nonsync"};
    bool envelope_given = false;
    std::size_t periods = 0;
    std::string horizon;
    std::string out;
    std::string summary;
    std::string scenario_out;
    // Scenario parameters.
    std::string r, b, ell;
    std::size_t n = 3;
    std::string s1, eps;
};

struct SimulationResult {
    Scenario scenario;
    ScenarioRun run;
    json predicted = json::object();
    std::string predicate;
    std::optional<bool> pass;
};

void apply_horizon(Scenario& s, const SimulateArgs& a) {
    if (a.periods) s.periods = a.periods;
    if (!a.horizon.empty()) {
        Rational h = parse_rational(a.horizon);
        if (h <= s.start) throw Error(ErrorKind::InvalidInput, "--horizon must lie after the scenario start");
        s.periods = rational_ceil((h - s.start) / s.period).get_num().get_ui();
    }
}

// Builders size their sources from the period count, so --horizon is converted up front.
std::size_t requested_periods(const SimulateArgs& a, std::size_t fallback, const Rational& start, const Rational& period) {
    if (!a.horizon.empty()) return rational_ceil((parse_rational(a.horizon) - start) / period).get_num().get_ui();
    return a.periods ? a.periods : fallback;
}

Rational fitted_rate(const PeriodStats& st) {
    return fitted_slope(st.period_end, st.max_delay, 10);
}

SimulationResult simulate_nonsync(const SimulateArgs& a) {
    NonSyncInstabilityParams p;
    ClockEnvelope env = a.envelope.resolve();
    p.rho = env.rho;
    p.eta = env.eta;
    if (auto v = opt_rational(a.r)) p.r = *v;
    if (auto v = opt_rational(a.b)) p.b = *v;
    if (auto v = opt_rational(a.ell)) p.ell = *v;
    p.periods = requested_periods(a, p.periods, p.t_start, p.period_packets * p.ell / p.r);
    NonSyncInstability ns = build_nonsync_instability(p);
    SimulationResult res{ns.scenario, run_scenario(ns.scenario), json::object(), "", std::nullopt};
    PeriodStats st = per_period_max_delay(res.scenario, res.run);
    Rational fit = fitted_rate(st);
    bool diverges = p.rho > 1;
    bool pass = fit == ns.divergence_rate;
    res.predicted["divergence_rate"] = io::rational_to(ns.divergence_rate);
    res.predicted["diverges"] = diverges;
    if (diverges) {
        // Threshold check for e set to half the largest local delay.
        Rational e = res.run.regulator_local.max_delay / 2;
        Rational tau = *ns.threshold(e);
        std::optional<Rational> first;
        for (std::size_t i = 0; i < res.run.regulator_local.delays.size(); ++i)
            if (res.run.regulator_local.delays[i] > e) {
                first = res.run.regulator_input.events[i].time;
                break;
            }
        pass = pass && first && *first <= tau;
        res.predicted["threshold_e"] = io::rational_to(e);
        res.predicted["threshold_local_time"] = io::rational_to(tau);
        res.predicted["first_exceeding_local_time"] = first ? io::rational_to(*first) : json(nullptr);
    }
    res.predicate = diverges ? "fitted rate equals rho - 1 and delays exceed e before the threshold"
                             : "no divergence: fitted rate is 0";
    res.pass = pass;
    return res;
}

SimulationResult simulate_sync_pfr(const SimulateArgs& a) {
    SyncPfrPenaltyParams p;
    ClockEnvelope env = a.envelope_given ? a.envelope.resolve() : preset_envelope("tsn-tight-sync");
    if (!env.delta) throw Error(ErrorKind::InvalidInput, "sync-pfr-penalty needs a synchronized envelope");
    p.rho = env.rho;
    p.eta = env.eta;
    p.delta = *env.delta;
    if (auto v = opt_rational(a.r)) p.r = *v;
    if (auto v = opt_rational(a.b)) p.b = *v;
    if (auto v = opt_rational(a.ell)) p.ell = *v;
    if (a.periods) p.extra_packets = a.periods;
    SyncPfrPenalty sp = build_sync_pfr_penalty(p);
    SimulationResult res{sp.scenario, run_scenario(sp.scenario), json::object(), "", std::nullopt};
    const Rational& worst = res.run.regulator_tai.max_delay;
    res.predicted["penalty"] = io::rational_to(sp.predicted_penalty);
    res.predicted["upper_bound"] = io::rational_to(sync_pfr_hop_delay(0, p.delta));
    res.predicted["x1"] = io::rational_to(sp.x1);
    res.predicted["regulator_max_delay"] = io::rational_to(worst);
    res.predicate = "regulator TAI penalty equals delta and stays within 4 delta";
    res.pass = worst == p.delta && worst <= 4 * p.delta;
    return res;
}

SimulationResult simulate_sync_ir(const SimulateArgs& a) {
    SyncIrInstabilityParams p;
    ClockEnvelope env = a.envelope_given ? a.envelope.resolve() : preset_envelope("tsn-tight-sync");
    if (!env.delta) throw Error(ErrorKind::InvalidInput, "sync-ir-instability needs a synchronized envelope");
    p.rho = env.rho;
    p.eta = env.eta;
    p.delta = *env.delta;
    p.n = a.n;
    p.s1 = opt_rational(a.s1);
    p.eps = opt_rational(a.eps);
    if (auto v = opt_rational(a.ell)) p.ell = *v;
    if (a.periods) p.periods = a.periods;
    SyncIrInstability ir = build_sync_ir_instability(p);
    if (!a.horizon.empty()) {
        p.periods = requested_periods(a, p.periods, ir.scenario.start, ir.tau);
        ir = build_sync_ir_instability(p);
    }
    SimulationResult res{ir.scenario, run_scenario(ir.scenario), json::object(), "", std::nullopt};
    std::map<std::uint64_t, Rational> delay;
    for (std::size_t i = 0; i < res.run.end_to_end.ids.size(); ++i)
        delay[res.run.end_to_end.ids[i]] = res.run.end_to_end.delays[i];
    bool bound_ok = true;
    json firsts = json::array();
    for (std::size_t k = 1; k <= res.scenario.periods; ++k) {
        const Rational& d = delay.at(2 * (k - 1) * ir.n);
        bound_ok = bound_ok && d >= ir.lower_bound(k);
        firsts.push_back({{"period", k}, {"delay", io::rational_to(d)}, {"lower_bound", io::rational_to(ir.lower_bound(k))}});
    }
    Rational fit = fitted_rate(per_period_max_delay(res.scenario, res.run));
    res.predicted["s1"] = io::rational_to(ir.s1);
    res.predicted["I"] = io::rational_to(ir.I);
    res.predicted["eps"] = io::rational_to(ir.eps);
    res.predicted["tau"] = io::rational_to(ir.tau);
    res.predicted["per_period_growth"] = io::rational_to(ir.per_period_growth);
    res.predicted["divergence_rate"] = io::rational_to(ir.divergence_rate);
    res.predicted["asymptotic_rate"] = io::rational_to(ir.asymptotic_rate);
    res.predicted["first_packet_delays"] = std::move(firsts);
    res.predicate = "first packet of period k is delayed at least (k-1) n (I(1-1/s1) - eps); fitted rate matches";
    res.pass = bound_ok && fit == ir.divergence_rate;
    return res;
}

SimulationResult simulate_fig12(bool identity) {
    Fig12Example ex = build_fig12_example(identity);
    SimulationResult res{ex.scenario, run_scenario(ex.scenario), json::object(), "", std::nullopt};
    Rational fifo_1a, release_1b;
    for (std::size_t i = 0; i < res.run.element.ids.size(); ++i)
        if (res.run.element.ids[i] == ex.id_1a) fifo_1a = res.run.element.delays[i];
    for (const auto& e : res.run.output.events)
        if (e.packet.id == ex.id_1b) release_1b = e.time;
    res.predicted["deadline_1b"] = io::rational_to(ex.deadline_1b);
    res.predicted["fifo_delay_1a"] = io::rational_to(fifo_1a);
    res.predicted["release_1b"] = io::rational_to(release_1b);
    if (identity) {
        res.predicate = "with identity clocks packet 1b meets its deadline";
        res.pass = release_1b <= ex.deadline_1b;
    } else {
        res.predicate = "packet 1a has FIFO delay 5 and packet 1b leaves the regulator at 8 or later, after its deadline 7";
        res.pass = fifo_1a == 5 && release_1b >= 8 && release_1b > ex.deadline_1b;
    }
    return res;
}

SimulationResult simulate_file(const SimulateArgs& a) {
    io::ScenarioFile file = io::scenario_from(read_json_file(a.scenario));
    apply_horizon(file.scenario, a);
    SimulationResult res{file.scenario, run_scenario(file.scenario), json::object(), "", std::nullopt};
    const Rational& worst = res.run.end_to_end.max_delay;
    if (file.max_delay_at_most || file.max_delay_at_least) {
        bool pass = true;
        std::string text;
        if (file.max_delay_at_most) {
            pass = pass && worst <= *file.max_delay_at_most;
            text = "max delay <= " + to_string(*file.max_delay_at_most);
        }
        if (file.max_delay_at_least) {
            pass = pass && worst >= *file.max_delay_at_least;
            text += (text.empty() ? "" : " and ") + std::string("max delay >= ") + to_string(*file.max_delay_at_least);
        }
        res.predicate = text;
        res.pass = pass;
    }
    return res;
}

json summary_json(const SimulationResult& res) {
    PeriodStats st = per_period_max_delay(res.scenario, res.run);
    json periods = json::array();
    for (std::size_t i = 0; i < st.period_end.size(); ++i)
        periods.push_back({{"period_end", io::rational_to(st.period_end[i])}, {"max_delay", io::rational_to(st.max_delay[i])}});
    json fit = nullptr;
    if (st.period_end.size() >= 2) fit = io::rational_to(fitted_rate(st));
    json packets = json::array();
    if (!res.scenario.labels.empty()) {
        std::map<std::uint64_t, Rational> arrival, release;
        for (const auto& e : res.run.input.events) arrival[e.packet.id] = e.time;
        for (const auto& e : res.run.output.events) release[e.packet.id] = e.time;
        for (const auto& [id, label] : res.scenario.labels)
            packets.push_back({{"id", id},
                               {"label", label},
                               {"arrival", io::rational_to(arrival.at(id))},
                               {"release", io::rational_to(release.at(id))}});
    }
    return {{"schema_version", 1},
            {"scenario", res.scenario.name},
            {"envelope", io::envelope_to(res.scenario.envelope)},
            {"period", io::rational_to(res.scenario.period)},
            {"periods", res.scenario.periods},
            {"packets", res.run.input.events.size()},
            {"max_delay", io::rational_to(res.run.end_to_end.max_delay)},
            {"max_backlog", io::rational_to(res.run.end_to_end.max_backlog)},
            {"regulator_max_delay_local", io::rational_to(res.run.regulator_local.max_delay)},
            {"max_delay_by_period", periods},
            {"fitted_divergence_rate", fit},
            {"predicted", res.predicted},
            {"predicate", res.predicate.empty() ? json(nullptr) : json(res.predicate)},
            {"predicate_pass", res.pass ? json(*res.pass) : json(nullptr)},
            {"labeled_packets", packets}};
}

std::string traces_csv(const ScenarioRun& run) {
    std::ostringstream os;
    write_trace_csv_header(os);
    write_trace_csv(os, run.input, EventKind::Arrival);
    write_trace_csv(os, run.regulator_input, EventKind::Arrival);
    write_trace_csv(os, run.regulator_output, EventKind::Departure);
    write_trace_csv(os, run.output, EventKind::Departure);
    return os.str();
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    SimulationResult res;
    if (a.scenario == "nonsync-instability") res = simulate_nonsync(a);
    else if (a.scenario == "sync-pfr-penalty") res = simulate_sync_pfr(a);
    else if (a.scenario == "sync-ir-instability") res = simulate_sync_ir(a);
    else if (a.scenario == "fig12") res = simulate_fig12(false);
    else if (a.scenario == "fig12-identity") res = simulate_fig12(true);
    else if (a.scenario.size() > 5 && a.scenario.ends_with(".json")) res = simulate_file(a);
    else throw Error(ErrorKind::InvalidInput, "unknown scenario '" + a.scenario + "'");
    if (!a.out.empty()) emit(a.out, out, traces_csv(res.run));
    if (!a.scenario_out.empty()) emit(a.scenario_out, out, io::scenario_to(res.scenario).dump(2) + "\n");
    emit(a.summary, out, summary_json(res).dump(2) + "\n");
    return kOk;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
    std::size_t hops = 10;
    std::vector<std::string> methods{"cascade", "adam", "sync-nonadapted"};
    std::string format = "csv";
    EnvelopeOptions envelope{"tsn-nonsync"};
    std::string sync_delta = "1e-6";
    std::string r0 = "1000000", b0 = "10000", ell = "1000";
    std::string rate = "10000000", latency = "1e-5";
    std::string adam_quantum = "100000";
    std::string out;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
    if (a.hops < 1) throw Error(ErrorKind::InvalidInput, "--hops must be >= 1");
    CompareSetup setup;
    setup.env = a.envelope.resolve();
    ClockEnvelope sync = setup.env;
    if (!sync.delta) sync.delta = parse_rational(a.sync_delta);
    setup.sync_env = sync;
    setup.source = {parse_rational(a.r0), parse_rational(a.b0), parse_rational(a.ell)};
    std::optional<Rational> rate;
    if (a.rate != "inf") rate = parse_rational(a.rate);
    setup.element = RateLatencyServer{rate, parse_rational(a.latency)};
    Rational q = parse_rational(a.adam_quantum);
    setup.adam_rate_grid = q == 0 ? RoundingGrid::identity() : RoundingGrid::quantum(q);
    std::vector<Method> methods;
    for (const auto& m : a.methods) methods.push_back(parse_method(m));
    std::vector<CompareRow> rows = ete_compare(setup, a.hops, methods);

    std::ostringstream os;
    if (a.format == "json") {
        json jr = json::array();
        for (const auto& r : rows)
            jr.push_back({{"n", r.n},
                          {"method", method_name(r.method)},
                          {"ete_bound_s", io::rational_to(r.ete)},
                          {"rel_increase", io::rational_to(r.rel_increase)}});
        os << json{{"schema_version", 1}, {"envelope", io::envelope_to(setup.env)}, {"rows", jr}}.dump(2) << "\n";
    } else if (a.format == "csv") {
        os << "n,method,ete_bound_s,rel_increase,ete_bound_s_float,rel_increase_float\n";
        for (const auto& r : rows)
            os << r.n << ',' << method_name(r.method) << ',' << to_string(r.ete) << ',' << to_string(r.rel_increase) << ','
               << float_text(r.ete) << ',' << float_text(r.rel_increase) << "\n";
    } else {
        throw Error(ErrorKind::InvalidInput, "--format must be json or csv");
    }
    emit(a.out, out, os.str());
    return kOk;
}

// ---------------------------------------------------------------- validate-clock

struct ValidateArgs {
    std::string clock;
    EnvelopeOptions envelope{"tsn-nonsync"};
    std::string from, to;
    std::string out;
};

int cmd_validate_clock(const ValidateArgs& a, std::ostream& out) {
    ClockFunction d = io::clock_from(read_json_file(a.clock));
    ClockEnvelope env = a.envelope.resolve();
    Rational lo = d.points().front().t - 1;
    Rational hi = d.points().back().t + 1;
    if (!a.from.empty()) lo = parse_rational(a.from);
    if (!a.to.empty()) hi = parse_rational(a.to);
    if (hi < lo) throw Error(ErrorKind::InvalidInput, "--to must not precede --from");
    EnvelopeReport rep = validate_envelope(d, env, lo, hi);
    json v = nullptr;
    if (rep.violation)
        v = {{"constraint", constraint_name(rep.violation->constraint)},
             {"s", io::rational_to(rep.violation->s)},
             {"t", io::rational_to(rep.violation->t)}};
    json j = {{"schema_version", 1},
              {"valid", rep.valid},
              {"envelope", io::envelope_to(env)},
              {"range", {{"from", io::rational_to(lo)}, {"to", io::rational_to(hi)}}},
              {"violation", v}};
    emit(a.out, out, j.dump(2) + "\n");
    return rep.valid ? kOk : kWarning;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Delay bounds and adversarial simulations for networks with nonideal clocks", "ncclock"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* an = app.add_subcommand("analyze", "Compute per-hop and end-to-end delay bounds for a network");
    an->add_option("network", analyze.network, "Network description (JSON)")->required();
    an->add_option("--out", analyze.out, "Report path (default: stdout)");

    SimulateArgs sim;
    auto* si = app.add_subcommand("simulate", "Run a named adversarial scenario or a scenario file");
    si->add_option("scenario", sim.scenario,
                   "nonsync-instability, sync-pfr-penalty, sync-ir-instability, fig12, fig12-identity, or a .json file")
        ->required();
    sim.envelope.attach(si);
    si->add_option("--periods", sim.periods, "Number of observation periods");
    si->add_option("--horizon", sim.horizon, "TAI horizon in seconds (overrides --periods)");
    si->add_option("--out", sim.out, "Write packet traces as CSV");
    si->add_option("--summary", sim.summary, "Summary path (default: stdout)");
    si->add_option("--scenario-out", sim.scenario_out, "Write the built scenario as JSON");
    si->add_option("--r", sim.r, "Source rate (bit/s)");
    si->add_option("--b", sim.b, "Source burst (bit)");
    si->add_option("--ell", sim.ell, "Packet length (bit)");
    si->add_option("--n", sim.n, "Number of sources for sync-ir-instability")->capture_default_str();
    si->add_option("--s1", sim.s1, "Clock slope for sync-ir-instability");
    si->add_option("--eps", sim.eps, "Source offset for sync-ir-instability");

    CompareArgs cmp;
    auto* co = app.add_subcommand("compare", "Relative end-to-end bound increase against ideal clocks");
    co->add_option("--hops", cmp.hops, "Largest path length")->capture_default_str();
    co->add_option("--methods", cmp.methods, "ideal, cascade, adam, sync-nonadapted")->delimiter(',')->capture_default_str();
    co->add_option("--format", cmp.format, "csv or json")->capture_default_str();
    cmp.envelope.attach(co);
    co->add_option("--sync-delta", cmp.sync_delta, "Time-error bound for sync-nonadapted when the envelope has none")
        ->capture_default_str();
    co->add_option("--r0", cmp.r0, "Source rate (bit/s)")->capture_default_str();
    co->add_option("--b0", cmp.b0, "Source burst (bit)")->capture_default_str();
    co->add_option("--ell", cmp.ell, "Packet length (bit)")->capture_default_str();
    co->add_option("--rate", cmp.rate, "Element service rate (bit/s, or inf)")->capture_default_str();
    co->add_option("--latency", cmp.latency, "Element latency (s)")->capture_default_str();
    co->add_option("--adam-quantum", cmp.adam_quantum, "ADAM rate grid step (bit/s, 0 for none)")->capture_default_str();
    co->add_option("--out", cmp.out, "Output path (default: stdout)");

    ValidateArgs val;
    auto* va = app.add_subcommand("validate-clock", "Check a relative time function against a clock envelope");
    va->add_option("clock", val.clock, "Clock function (JSON)")->required();
    val.envelope.attach(va);
    va->add_option("--from", val.from, "Start of the checked range");
    va->add_option("--to", val.to, "End of the checked range");
    va->add_option("--out", val.out, "Report path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err) == 0 ? kOk : kInputError;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInputError;
    }
    sim.envelope_given = si->count("--preset") || si->count("--rho") || si->count("--eta") || si->count("--delta");

    try {
        if (*an) return cmd_analyze(analyze, out);
        if (*si) return cmd_simulate(sim, out);
        if (*co) return cmd_compare(cmp, out);
        if (*va) return cmd_validate_clock(val, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        if (e.kind() == ErrorKind::ConfigurationInfeasible || e.kind() == ErrorKind::UnstableElement) return kWarning;
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

}  // namespace ncclock::cli
