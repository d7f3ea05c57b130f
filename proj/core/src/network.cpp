#include "ncclock/network.hpp"

#include <map>

namespace ncclock {

const char* network_method_name(NetworkMethod m) {
    switch (m) {
        case NetworkMethod::None: return "none";
        case NetworkMethod::Cascade: return "cascade";
        case NetworkMethod::Adam: return "adam";
        case NetworkMethod::SyncNonAdapted: return "sync-nonadapted";
    }
    return "?";
}

NetworkMethod parse_network_method(const std::string& name) {
    for (auto m : {NetworkMethod::None, NetworkMethod::Cascade, NetworkMethod::Adam, NetworkMethod::SyncNonAdapted})
        if (name == network_method_name(m)) return m;
    throw Error(ErrorKind::InvalidInput, "unknown method '" + name + "'");
}

namespace {

bool is_ideal(const ClockEnvelope& env) {
    return env.rho == 1 && env.eta == 0 && (!env.delta || *env.delta == 0);
}

struct Resolved {
    std::vector<FlowPath> paths;
    std::vector<std::vector<std::string>> elements;  // element id per hop
};

Resolved resolve(const Network& net) {
    std::map<std::string, const NetworkElement*> elements;
    std::map<std::string, const NetworkRegulator*> regulators;
    for (const auto& e : net.elements)
        if (!elements.emplace(e.id, &e).second) throw Error(ErrorKind::InvalidInput, "duplicate element id '" + e.id + "'");
    for (const auto& r : net.regulators)
        if (!regulators.emplace(r.id, &r).second)
            throw Error(ErrorKind::InvalidInput, "duplicate regulator id '" + r.id + "'");
    Resolved out;
    for (const auto& f : net.flows) {
        FlowPath path{f.source, {}};
        std::vector<std::string> ids;
        for (const auto& ref : f.path) {
            auto e = elements.find(ref.element);
            if (e == elements.end())
                throw Error(ErrorKind::InvalidInput, "flow '" + f.id + "' references unknown element '" + ref.element + "'");
            Hop hop{e->second->model, std::nullopt, {}};
            if (ref.regulator) {
                auto r = regulators.find(*ref.regulator);
                if (r == regulators.end())
                    throw Error(ErrorKind::InvalidInput,
                                "flow '" + f.id + "' references unknown regulator '" + *ref.regulator + "'");
                hop.regulator = r->second->kind;
                hop.grid = r->second->grid;
            }
            path.hops.push_back(std::move(hop));
            ids.push_back(ref.element);
        }
        try {
            check_path(path);
        } catch (const Error& err) {
            throw Error(ErrorKind::InvalidInput, "flow '" + f.id + "': " + err.what());
        }
        out.paths.push_back(std::move(path));
        out.elements.push_back(std::move(ids));
    }
    return out;
}

}  // namespace

NetworkReport analyze_network(const Network& net) {
    NetworkReport report{net.method, net.envelope, {}, {}, false};
    Resolved res = resolve(net);
    const ClockEnvelope& env = net.envelope;

    Method method = Method::Ideal;
    switch (net.method) {
        case NetworkMethod::Cascade: method = Method::Cascade; break;
        case NetworkMethod::Adam: method = Method::Adam; break;
        case NetworkMethod::SyncNonAdapted:
            if (!env.synchronized())
                throw Error(ErrorKind::InvalidInput, "method sync-nonadapted needs an envelope with delta");
            method = Method::SyncNonAdapted;
            break;
        case NetworkMethod::None:
            if (is_ideal(env)) {
                method = Method::Ideal;
            } else if (env.synchronized()) {
                method = Method::SyncNonAdapted;
            } else {
                bool regulated = false;
                for (const auto& p : res.paths)
                    for (const auto& h : p.hops) regulated = regulated || h.regulator.has_value();
                if (regulated) {
                    report.warnings.push_back(
                        "unbounded: non-adapted regulators in a non-synchronized network have unbounded delay");
                    report.unstable = true;
                    for (const auto& f : net.flows) report.flows.push_back({f.id, f.path, std::nullopt});
                    return report;
                }
                method = Method::Ideal;
            }
            break;
    }

    // Pass 1: each flow's TAI arrival curve at each of its hops.
    std::map<std::string, std::vector<PwlCurve>> aggregate;
    for (std::size_t f = 0; f < res.paths.size(); ++f) {
        try {
            analyze_path(res.paths[f], env, method, [&](std::size_t k, const PwlCurve& alpha) {
                aggregate[res.elements[f][k]].push_back(alpha);
                return Rational(0);
            });
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::ConfigurationInfeasible) throw;
            report.warnings.push_back("flow '" + net.flows[f].id + "': " + err.what());
            report.unstable = true;
        }
    }

    // Pass 2: element bounds.
    std::map<std::string, std::optional<Rational>> bounds;
    for (const auto& e : net.elements) {
        auto it = aggregate.find(e.id);
        if (it == aggregate.end()) continue;
        try {
            bounds[e.id] = element_delay_bound(e.model, it->second);
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::UnstableElement) throw;
            bounds[e.id] = std::nullopt;
            report.warnings.push_back("element '" + e.id + "': " + err.what());
            report.unstable = true;
        }
    }

    // Pass 3: per-flow hop bounds.
    for (std::size_t f = 0; f < res.paths.size(); ++f) {
        FlowReport fr{net.flows[f].id, net.flows[f].path, std::nullopt};
        bool finite = true;
        for (const auto& id : res.elements[f]) finite = finite && bounds[id].has_value();
        if (finite) {
            try {
                PathBound pb = analyze_path(res.paths[f], env, method,
                                            [&](std::size_t k, const PwlCurve&) { return *bounds[res.elements[f][k]]; });
                for (const auto& w : pb.warnings) report.warnings.push_back("flow '" + fr.id + "': " + w);
                bool ir = false;
                for (const auto& h : res.paths[f].hops) ir = ir || h.regulator == RegulatorKind::IR;
                if (method == Method::SyncNonAdapted && ir) report.unstable = true;
                else fr.bound = std::move(pb);
            } catch (const Error& err) {
                if (err.kind() != ErrorKind::ConfigurationInfeasible) throw;
                report.unstable = true;
            }
        }
        report.flows.push_back(std::move(fr));
    }
    return report;
}

}  // namespace ncclock
