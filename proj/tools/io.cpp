#include "io.hpp"

#include <algorithm>
#include <set>

namespace ncclock::io {

namespace {

[[noreturn]] void fail(const std::string& ptr, const std::string& what) {
    throw Error(ErrorKind::InvalidInput, (ptr.empty() ? std::string("/") : ptr) + ": " + what);
}

void expect_object(const json& j, const std::string& ptr) {
    if (!j.is_object()) fail(ptr, "expected an object");
}

void expect_array(const json& j, const std::string& ptr) {
    if (!j.is_array()) fail(ptr, "expected an array");
}

const json& field(const json& j, const std::string& key, const std::string& ptr) {
    expect_object(j, ptr);
    auto it = j.find(key);
    if (it == j.end()) fail(ptr + "/" + key, "required field is missing");
    return *it;
}

const json* optional_field(const json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return nullptr;
    return &*it;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& ptr) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail(ptr + "/" + it.key(), "unknown field");
}

std::string string_from(const json& j, const std::string& ptr) {
    if (!j.is_string()) fail(ptr, "expected a string");
    return j.get<std::string>();
}

long long integer_from(const json& j, const std::string& ptr) {
    if (!j.is_number_integer()) fail(ptr, "expected an integer");
    return j.get<long long>();
}

std::size_t count_from(const json& j, const std::string& ptr) {
    long long v = integer_from(j, ptr);
    if (v < 0) fail(ptr, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

Rational positive(const json& j, const std::string& ptr) {
    Rational q = rational_from(j, ptr);
    if (q <= 0) fail(ptr, "expected a positive value");
    return q;
}

Rational non_negative(const json& j, const std::string& ptr) {
    Rational q = rational_from(j, ptr);
    if (q < 0) fail(ptr, "expected a non-negative value");
    return q;
}

RegulatorKind kind_from(const json& j, const std::string& ptr) {
    std::string s = string_from(j, ptr);
    if (s == "PFR") return RegulatorKind::PFR;
    if (s == "IR") return RegulatorKind::IR;
    fail(ptr, "expected \"PFR\" or \"IR\"");
}

}  // namespace

Rational rational_from(const json& j, const std::string& ptr) {
    std::string text;
    if (j.is_string()) text = j.get<std::string>();
    else if (j.is_number_integer() || j.is_number_float()) text = j.dump();
    else fail(ptr, "expected a rational (string or number)");
    try {
        return parse_rational(text);
    } catch (const Error&) {
        fail(ptr, "not a rational: '" + text + "'");
    }
}

json rational_to(const Rational& q) { return to_string(q); }

ExtRational ext_rational_from(const json& j, const std::string& ptr) {
    if (j.is_string() && j.get<std::string>() == "inf") return ExtRational::infinity();
    return ExtRational(rational_from(j, ptr));
}

json ext_rational_to(const ExtRational& e) { return to_string(e); }

PwlCurve curve_from(const json& j, const std::string& ptr) {
    expect_object(j, ptr);
    reject_unknown(j, {"at_zero", "jump0", "segments"}, ptr);
    const json& segs = field(j, "segments", ptr);
    expect_array(segs, ptr + "/segments");
    std::vector<Segment> out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        std::string p = ptr + "/segments/" + std::to_string(i);
        expect_object(segs[i], p);
        ExtRational v = ext_rational_from(field(segs[i], "v", p), p + "/v");
        Rational slope = 0;
        if (v.is_finite()) slope = rational_from(field(segs[i], "slope", p), p + "/slope");
        out.push_back({rational_from(field(segs[i], "t", p), p + "/t"), v, slope});
    }
    Rational at_zero = 0;
    if (const json* z = optional_field(j, "at_zero")) at_zero = rational_from(*z, ptr + "/at_zero");
    try {
        return PwlCurve(at_zero, std::move(out));
    } catch (const Error& e) {
        fail(ptr, e.what());
    }
}

json curve_to(const PwlCurve& c) {
    json segs = json::array();
    for (const auto& s : c.segments())
        segs.push_back({{"t", rational_to(s.start)},
                        {"v", ext_rational_to(s.value)},
                        {"slope", s.value.is_infinite() ? json("inf") : rational_to(s.slope)}});
    return {{"at_zero", rational_to(c.at_zero())}, {"jump0", ext_rational_to(c.jump0())}, {"segments", segs}};
}

ClockEnvelope envelope_from(const json& j, const std::string& ptr) {
    if (j.is_string()) {
        try {
            return preset_envelope(j.get<std::string>());
        } catch (const Error& e) {
            fail(ptr, e.what());
        }
    }
    expect_object(j, ptr);
    reject_unknown(j, {"preset", "rho", "eta", "delta"}, ptr);
    if (const json* p = optional_field(j, "preset")) {
        if (j.size() != 1) fail(ptr, "a preset envelope takes no other fields");
        return envelope_from(*p, ptr + "/preset");
    }
    std::optional<Rational> delta;
    if (const json* d = optional_field(j, "delta")) delta = rational_from(*d, ptr + "/delta");
    try {
        return make_envelope(rational_from(field(j, "rho", ptr), ptr + "/rho"),
                             rational_from(field(j, "eta", ptr), ptr + "/eta"), delta);
    } catch (const Error& e) {
        fail(ptr, e.what());
    }
}

json envelope_to(const ClockEnvelope& env) {
    return {{"rho", rational_to(env.rho)},
            {"eta", rational_to(env.eta)},
            {"delta", env.delta ? rational_to(*env.delta) : json(nullptr)}};
}

ClockFunction clock_from(const json& j, const std::string& ptr) {
    if (j.is_string() && j.get<std::string>() == "identity") return ClockFunction::identity();
    expect_object(j, ptr);
    reject_unknown(j, {"points", "head_slope", "tail_slope", "affine"}, ptr);
    try {
        if (const json* a = optional_field(j, "affine")) {
            std::string p = ptr + "/affine";
            return ClockFunction::affine(rational_from(field(*a, "slope", p), p + "/slope"),
                                         rational_from(field(*a, "offset", p), p + "/offset"));
        }
        const json& pts = field(j, "points", ptr);
        expect_array(pts, ptr + "/points");
        std::vector<ClockPoint> points;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            std::string p = ptr + "/points/" + std::to_string(i);
            points.push_back({rational_from(field(pts[i], "t", p), p + "/t"), rational_from(field(pts[i], "d", p), p + "/d")});
        }
        Rational head = 1, tail = 1;
        if (const json* h = optional_field(j, "head_slope")) head = rational_from(*h, ptr + "/head_slope");
        if (const json* t = optional_field(j, "tail_slope")) tail = rational_from(*t, ptr + "/tail_slope");
        return ClockFunction(std::move(points), head, tail);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidInput) throw;
        fail(ptr, e.what());
    }
}

json clock_to(const ClockFunction& d) {
    json pts = json::array();
    for (const auto& p : d.points()) pts.push_back({{"t", rational_to(p.t)}, {"d", rational_to(p.d)}});
    return {{"points", pts}, {"head_slope", rational_to(d.head_slope())}, {"tail_slope", rational_to(d.tail_slope())}};
}

PacketTrace packets_from(const json& j, const std::string& clock, const std::string& ptr) {
    expect_array(j, ptr);
    PacketTrace out{clock, {}};
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string p = ptr + "/" + std::to_string(i);
        expect_object(j[i], p);
        reject_unknown(j[i], {"time", "id", "flow", "length"}, p);
        Packet pk;
        pk.id = static_cast<std::uint64_t>(count_from(field(j[i], "id", p), p + "/id"));
        pk.flow = static_cast<int>(integer_from(field(j[i], "flow", p), p + "/flow"));
        if (const json* l = optional_field(j[i], "length")) pk.length = positive(*l, p + "/length");
        out.events.push_back({rational_from(field(j[i], "time", p), p + "/time"), pk});
    }
    try {
        check_trace(out);
    } catch (const Error& e) {
        fail(ptr, e.what());
    }
    return out;
}

json packets_to(const PacketTrace& t) {
    json out = json::array();
    for (const auto& e : t.events)
        out.push_back({{"time", rational_to(e.time)},
                       {"id", e.packet.id},
                       {"flow", e.packet.flow},
                       {"length", rational_to(e.packet.length)}});
    return out;
}

ElementModel element_from(const json& j, const std::string& ptr) {
    std::string type = string_from(field(j, "type", ptr), ptr + "/type");
    if (type == "zero") {
        reject_unknown(j, {"type"}, ptr);
        return ZeroDelay{};
    }
    if (type == "fixed") {
        reject_unknown(j, {"type", "bound"}, ptr);
        return FixedDelayBound{non_negative(field(j, "bound", ptr), ptr + "/bound")};
    }
    if (type == "rate-latency") {
        reject_unknown(j, {"type", "rate", "latency"}, ptr);
        RateLatencyServer s;
        ExtRational rate = ext_rational_from(field(j, "rate", ptr), ptr + "/rate");
        if (rate.is_finite()) {
            if (rate.value() <= 0) fail(ptr + "/rate", "expected a positive value");
            s.rate = rate.value();
        }
        s.latency = non_negative(field(j, "latency", ptr), ptr + "/latency");
        return s;
    }
    if (type == "scripted") {
        reject_unknown(j, {"type", "output"}, ptr);
        return ScriptedOutput{packets_from(field(j, "output", ptr), "TAI", ptr + "/output")};
    }
    fail(ptr + "/type", "unknown element type '" + type + "'");
}

json element_to(const ElementModel& m) {
    if (std::holds_alternative<ZeroDelay>(m)) return {{"type", "zero"}};
    if (const auto* f = std::get_if<FixedDelayBound>(&m)) return {{"type", "fixed"}, {"bound", rational_to(f->bound)}};
    if (const auto* s = std::get_if<RateLatencyServer>(&m))
        return {{"type", "rate-latency"},
                {"rate", s->rate ? rational_to(*s->rate) : json("inf")},
                {"latency", rational_to(s->latency)}};
    return {{"type", "scripted"}, {"output", packets_to(std::get<ScriptedOutput>(m).output)}};
}

RoundingGrid grid_from(const json& j, const std::string& ptr) {
    std::string type = string_from(field(j, "type", ptr), ptr + "/type");
    std::optional<Rational> max;
    if (const json* m = optional_field(j, "max")) max = positive(*m, ptr + "/max");
    if (type == "identity") {
        reject_unknown(j, {"type"}, ptr);
        return RoundingGrid::identity();
    }
    if (type == "quantum") {
        reject_unknown(j, {"type", "quantum", "max"}, ptr);
        return RoundingGrid::quantum(positive(field(j, "quantum", ptr), ptr + "/quantum"), max);
    }
    if (type == "decimal") {
        reject_unknown(j, {"type", "exponent", "max"}, ptr);
        long long e = integer_from(field(j, "exponent", ptr), ptr + "/exponent");
        if (e < -30 || e > 30) fail(ptr + "/exponent", "exponent out of range [-30, 30]");
        return RoundingGrid::decimal(static_cast<int>(e), max);
    }
    if (type == "explicit") {
        reject_unknown(j, {"type", "values"}, ptr);
        const json& vs = field(j, "values", ptr);
        expect_array(vs, ptr + "/values");
        if (vs.empty()) fail(ptr + "/values", "expected at least one value");
        std::vector<Rational> values;
        for (std::size_t i = 0; i < vs.size(); ++i) values.push_back(positive(vs[i], ptr + "/values/" + std::to_string(i)));
        return RoundingGrid::explicit_values(std::move(values));
    }
    fail(ptr + "/type", "unknown grid type '" + type + "'");
}

json grid_to(const RoundingGrid& g) {
    switch (g.kind()) {
        case RoundingGrid::Kind::Identity:
            return {{"type", "identity"}};
        case RoundingGrid::Kind::Quantum: {
            json out = {{"type", "quantum"}, {"quantum", rational_to(g.step())}};
            if (g.max()) out["max"] = rational_to(*g.max());
            return out;
        }
        case RoundingGrid::Kind::Explicit: {
            json vs = json::array();
            for (const auto& v : g.values()) vs.push_back(rational_to(v));
            return {{"type", "explicit"}, {"values", vs}};
        }
    }
    return nullptr;
}

Network network_from(const json& j) {
    expect_object(j, "");
    reject_unknown(j, {"envelope", "method", "elements", "regulators", "flows"}, "");
    Network net;
    net.envelope = envelope_from(field(j, "envelope", ""), "/envelope");
    try {
        net.method = parse_network_method(string_from(field(j, "method", ""), "/method"));
    } catch (const Error&) {
        fail("/method", "expected one of none, cascade, adam, sync-nonadapted");
    }
    auto list = [&](const char* key) -> const json& {
        static const json empty = json::array();
        const json* v = optional_field(j, key);
        if (!v) return empty;
        expect_array(*v, std::string("/") + key);
        return *v;
    };
    const json& elements = list("elements");
    for (std::size_t i = 0; i < elements.size(); ++i) {
        std::string p = "/elements/" + std::to_string(i);
        reject_unknown(elements[i], {"id", "model"}, p);
        net.elements.push_back({string_from(field(elements[i], "id", p), p + "/id"),
                                element_from(field(elements[i], "model", p), p + "/model")});
        if (std::holds_alternative<ScriptedOutput>(net.elements.back().model))
            fail(p + "/model", "scripted elements have no delay bound");
    }
    const json& regulators = list("regulators");
    for (std::size_t i = 0; i < regulators.size(); ++i) {
        std::string p = "/regulators/" + std::to_string(i);
        reject_unknown(regulators[i], {"id", "kind", "grid"}, p);
        NetworkRegulator r;
        r.id = string_from(field(regulators[i], "id", p), p + "/id");
        r.kind = kind_from(field(regulators[i], "kind", p), p + "/kind");
        if (const json* g = optional_field(regulators[i], "grid")) {
            std::string gp = p + "/grid";
            expect_object(*g, gp);
            reject_unknown(*g, {"rate", "burst"}, gp);
            if (const json* r2 = optional_field(*g, "rate")) r.grid.rate = grid_from(*r2, gp + "/rate");
            if (const json* b = optional_field(*g, "burst")) r.grid.burst = grid_from(*b, gp + "/burst");
        }
        net.regulators.push_back(std::move(r));
    }
    const json& flows = list("flows");
    for (std::size_t i = 0; i < flows.size(); ++i) {
        std::string p = "/flows/" + std::to_string(i);
        reject_unknown(flows[i], {"id", "r0", "b0", "ell", "path"}, p);
        NetworkFlow f;
        f.id = string_from(field(flows[i], "id", p), p + "/id");
        f.source.r0 = positive(field(flows[i], "r0", p), p + "/r0");
        f.source.b0 = positive(field(flows[i], "b0", p), p + "/b0");
        if (const json* l = optional_field(flows[i], "ell")) f.source.ell = positive(*l, p + "/ell");
        const json& path = field(flows[i], "path", p);
        expect_array(path, p + "/path");
        if (path.empty()) fail(p + "/path", "expected at least one hop");
        for (std::size_t k = 0; k < path.size(); ++k) {
            std::string hp = p + "/path/" + std::to_string(k);
            reject_unknown(path[k], {"element", "regulator"}, hp);
            PathRef ref{string_from(field(path[k], "element", hp), hp + "/element"), std::nullopt};
            if (const json* r = optional_field(path[k], "regulator")) ref.regulator = string_from(*r, hp + "/regulator");
            f.path.push_back(std::move(ref));
        }
        net.flows.push_back(std::move(f));
    }
    return net;
}

json report_to(const NetworkReport& r) {
    json flows = json::array();
    for (const auto& f : r.flows) {
        json hops = json::array();
        json out = {{"id", f.id}, {"bounded", f.bound.has_value()}};
        for (std::size_t k = 0; k < f.path.size(); ++k) {
            json h = {{"element", f.path[k].element},
                      {"regulator", f.path[k].regulator ? json(*f.path[k].regulator) : json(nullptr)}};
            if (f.bound) {
                const HopBound& hb = f.bound->hops[k];
                h["element_bound"] = rational_to(hb.element_bound);
                h["hop_bound"] = rational_to(hb.hop_bound);
                h["config"] = hb.config ? json{{"rate", rational_to(hb.config->rate)}, {"burst", rational_to(hb.config->burst)}}
                                        : json(nullptr);
                h["arrival_curve"] = curve_to(hb.arrival);
            }
            hops.push_back(std::move(h));
        }
        out["hops"] = std::move(hops);
        out["ete"] = f.bound ? rational_to(f.bound->ete) : json(nullptr);
        out["analysis"] = f.bound ? json(method_name(f.bound->method)) : json(nullptr);
        if (f.bound && f.bound->W) {
            json b2 = json::array();
            for (const auto& b : f.bound->b2) b2.push_back(rational_to(b));
            out["adam"] = {{"W", rational_to(*f.bound->W)}, {"b2", b2}};
        }
        flows.push_back(std::move(out));
    }
    return {{"schema_version", 1},
            {"method", network_method_name(r.method)},
            {"envelope", envelope_to(r.envelope)},
            {"status", r.unstable ? "warning" : "ok"},
            {"warnings", r.warnings},
            {"flows", flows}};
}

ScenarioFile scenario_from(const json& j) {
    expect_object(j, "");
    reject_unknown(j, {"name", "envelope", "sources", "element", "regulator", "regulator_clock", "period", "periods",
                       "start", "labels", "predicate"},
                   "");
    ScenarioFile out;
    Scenario& s = out.scenario;
    s.name = j.contains("name") ? string_from(j["name"], "/name") : "custom";
    if (const json* e = optional_field(j, "envelope")) s.envelope = envelope_from(*e, "/envelope");
    const json& sources = field(j, "sources", "");
    expect_array(sources, "/sources");
    if (sources.empty()) fail("/sources", "expected at least one source");
    std::uint64_t next_id = 0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        std::string p = "/sources/" + std::to_string(i);
        reject_unknown(sources[i], {"clock", "packets", "greedy"}, p);
        SourceSpec src{PacketTrace{"source" + std::to_string(i), {}}, ClockFunction::identity()};
        if (const json* c = optional_field(sources[i], "clock")) src.tai_to_source = clock_from(*c, p + "/clock");
        const json* pk = optional_field(sources[i], "packets");
        const json* gr = optional_field(sources[i], "greedy");
        if ((pk == nullptr) == (gr == nullptr)) fail(p, "give exactly one of packets or greedy");
        if (pk) {
            src.trace = packets_from(*pk, src.trace.clock, p + "/packets");
        } else {
            std::string gp = p + "/greedy";
            reject_unknown(*gr, {"rate", "burst", "ell", "start", "horizon", "flow"}, gp);
            LeakyBucket sigma{non_negative(field(*gr, "rate", gp), gp + "/rate"),
                              positive(field(*gr, "burst", gp), gp + "/burst")};
            Rational ell = positive(field(*gr, "ell", gp), gp + "/ell");
            Rational start = gr->contains("start") ? rational_from((*gr)["start"], gp + "/start") : Rational(0);
            Rational horizon = rational_from(field(*gr, "horizon", gp), gp + "/horizon");
            int flow = gr->contains("flow") ? static_cast<int>(integer_from((*gr)["flow"], gp + "/flow")) : static_cast<int>(i);
            try {
                src.trace = simulate_greedy_source(sigma, ell, start, horizon, flow, next_id, src.trace.clock);
            } catch (const Error& e) {
                fail(gp, e.what());
            }
        }
        for (const auto& e : src.trace.events) next_id = std::max(next_id, e.packet.id + 1);
        s.sources.push_back(std::move(src));
    }
    if (const json* e = optional_field(j, "element")) s.element = element_from(*e, "/element");
    const json& reg = field(j, "regulator", "");
    reject_unknown(reg, {"kind", "shaping"}, "/regulator");
    s.regulator.kind = kind_from(field(reg, "kind", "/regulator"), "/regulator/kind");
    const json& shaping = field(reg, "shaping", "/regulator");
    expect_array(shaping, "/regulator/shaping");
    for (std::size_t i = 0; i < shaping.size(); ++i) {
        std::string p = "/regulator/shaping/" + std::to_string(i);
        reject_unknown(shaping[i], {"flow", "rate", "burst"}, p);
        int flow = static_cast<int>(integer_from(field(shaping[i], "flow", p), p + "/flow"));
        s.regulator.shaping[flow] = {positive(field(shaping[i], "rate", p), p + "/rate"),
                                     positive(field(shaping[i], "burst", p), p + "/burst")};
    }
    s.tai_to_regulator = ClockFunction::identity();
    if (const json* c = optional_field(j, "regulator_clock")) s.tai_to_regulator = clock_from(*c, "/regulator_clock");
    if (const json* v = optional_field(j, "period")) s.period = positive(*v, "/period");
    if (const json* v = optional_field(j, "periods")) s.periods = count_from(*v, "/periods");
    if (const json* v = optional_field(j, "start")) s.start = rational_from(*v, "/start");
    if (const json* v = optional_field(j, "labels")) {
        expect_object(*v, "/labels");
        for (auto it = v->begin(); it != v->end(); ++it) {
            std::string p = "/labels/" + it.key();
            std::uint64_t id = 0;
            try {
                id = std::stoull(it.key());
            } catch (...) {
                fail(p, "label keys must be packet ids");
            }
            s.labels[id] = string_from(it.value(), p);
        }
    }
    if (const json* pr = optional_field(j, "predicate")) {
        expect_object(*pr, "/predicate");
        reject_unknown(*pr, {"max_delay_at_most", "max_delay_at_least"}, "/predicate");
        if (const json* v = optional_field(*pr, "max_delay_at_most"))
            out.max_delay_at_most = rational_from(*v, "/predicate/max_delay_at_most");
        if (const json* v = optional_field(*pr, "max_delay_at_least"))
            out.max_delay_at_least = rational_from(*v, "/predicate/max_delay_at_least");
    }
    return out;
}

json scenario_to(const Scenario& s) {
    json sources = json::array();
    for (const auto& src : s.sources)
        sources.push_back({{"clock", clock_to(src.tai_to_source)}, {"packets", packets_to(src.trace)}});
    json shaping = json::array();
    for (const auto& [flow, sigma] : s.regulator.shaping)
        shaping.push_back({{"flow", flow}, {"rate", rational_to(sigma.rate)}, {"burst", rational_to(sigma.burst)}});
    json labels = json::object();
    for (const auto& [id, label] : s.labels) labels[std::to_string(id)] = label;
    return {{"name", s.name},
            {"envelope", envelope_to(s.envelope)},
            {"sources", sources},
            {"element", element_to(s.element)},
            {"regulator", {{"kind", regulator_kind_name(s.regulator.kind)}, {"shaping", shaping}}},
            {"regulator_clock", clock_to(s.tai_to_regulator)},
            {"period", rational_to(s.period)},
            {"periods", s.periods},
            {"start", rational_to(s.start)},
            {"labels", labels}};
}

}  // namespace ncclock::io
