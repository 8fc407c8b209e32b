#include "emc/config.hpp"

#include <fstream>
#include <set>

#include "emc/digest.hpp"
#include "emc/errors.hpp"
#include "emc/parallel.hpp"

namespace emc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config: " + where + ": " + what);
}

const json& require(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) fail(where, "missing required field '" + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

double positive(const json& j, const std::string& where) {
    const double v = number(j, where);
    if (!(v > 0.0)) fail(where, "expected a positive number");
    return v;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (known.count(key) == 0) fail(where, "unknown field '" + key + "'");
    }
}

Point point_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() < 3) fail(where, "expected a coordinate array of length >= 3");
    std::vector<double> coords;
    coords.reserve(j.size());
    for (const auto& c : j) coords.push_back(number(c, where));
    return Point(std::move(coords));
}

std::vector<double> number_list(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(number(v, where));
    return out;
}

}  // namespace

Domain domain_from_json(const json& j, const std::string& where) {
    const std::string type = require(j, "type", where).get<std::string>();
    if (type == "ball") {
        reject_unknown(j, {"type", "center", "radius"}, where);
        return Domain::ball(point_from_json(require(j, "center", where), where + ".center"),
                            positive(require(j, "radius", where), where + ".radius"));
    }
    if (type == "annulus") {
        reject_unknown(j, {"type", "center", "r_inner", "r_outer"}, where);
        return Domain::annulus(point_from_json(require(j, "center", where), where + ".center"),
                               positive(require(j, "r_inner", where), where + ".r_inner"),
                               positive(require(j, "r_outer", where), where + ".r_outer"));
    }
    if (type == "difference") {
        reject_unknown(j, {"type", "outer", "hole"}, where);
        return Domain::difference(
            domain_from_json(require(j, "outer", where), where + ".outer"),
            domain_from_json(require(j, "hole", where), where + ".hole"));
    }
    if (type == "union") {
        reject_unknown(j, {"type", "parts"}, where);
        const json& parts = require(j, "parts", where);
        if (!parts.is_array() || parts.empty()) fail(where, "'parts' must be a nonempty array");
        std::vector<Domain> domains;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            domains.push_back(
                domain_from_json(parts[i], where + ".parts[" + std::to_string(i) + "]"));
        }
        return Domain::union_of(std::move(domains));
    }
    fail(where, "unknown domain type '" + type + "'");
}

SimParams sim_params_from_json(const json& j, const std::string& where) {
    reject_unknown(j, {"scheme", "step_h", "eps_shell", "max_steps", "antithetic",
                       "brownian_bridge", "integrand_cap"},
                   where);
    SimParams params;
    if (j.contains("scheme")) {
        const std::string scheme = j.at("scheme").get<std::string>();
        if (scheme == "euler_maruyama") {
            params.scheme = Scheme::EulerMaruyama;
        } else if (scheme == "walk_on_spheres") {
            params.scheme = Scheme::WalkOnSpheres;
        } else {
            fail(where + ".scheme", "expected 'euler_maruyama' or 'walk_on_spheres'");
        }
    }
    if (j.contains("step_h")) params.step_h = positive(j.at("step_h"), where + ".step_h");
    if (j.contains("eps_shell")) params.eps_shell = positive(j.at("eps_shell"), where + ".eps_shell");
    if (j.contains("max_steps")) {
        params.max_steps = j.at("max_steps").get<std::uint64_t>();
        if (params.max_steps < 1) fail(where + ".max_steps", "must be at least 1");
    }
    if (j.contains("antithetic")) params.antithetic = j.at("antithetic").get<bool>();
    if (j.contains("brownian_bridge")) {
        params.brownian_bridge = j.at("brownian_bridge").get<bool>();
    }
    if (j.contains("integrand_cap")) {
        params.integrand_cap = positive(j.at("integrand_cap"), where + ".integrand_cap");
    }
    return params;
}

Partition RunConfig::partition() const {
    if (!d1) throw ConfigError("config: this subcommand requires a 'partition' section");
    return Partition(*d1, domain);
}

RunConfig RunConfig::parse(const json& j) {
    const std::string top = "$";
    reject_unknown(j,
                   {"version", "domain", "partition", "region", "point", "sim", "hypotheses",
                    "grids", "solve", "sweep", "multiplicity", "seed", "workers", "out_dir",
                    "format"},
                   top);
    const json& version = require(j, "version", top);
    if (!version.is_number_integer()) fail("$.version", "expected an integer");
    if (version.get<int>() != 1) fail("$.version", "unsupported config version (expected 1)");

    RunConfig cfg(1, hex_digest(j.dump()),
                  domain_from_json(require(j, "domain", top), "$.domain"));

    if (j.contains("partition")) {
        const json& part = j.at("partition");
        reject_unknown(part, {"d1"}, "$.partition");
        cfg.d1 = domain_from_json(require(part, "d1", "$.partition"), "$.partition.d1");
    }
    if (j.contains("region")) cfg.region = domain_from_json(j.at("region"), "$.region");
    if (j.contains("point")) cfg.point = point_from_json(j.at("point"), "$.point");
    if (j.contains("sim")) cfg.sim = sim_params_from_json(j.at("sim"), "$.sim");

    if (j.contains("hypotheses")) {
        const json& h = j.at("hypotheses");
        reject_unknown(h, {"lambda", "p", "m", "M"}, "$.hypotheses");
        cfg.hypotheses.lambda = positive(require(h, "lambda", "$.hypotheses"),
                                         "$.hypotheses.lambda");
        cfg.hypotheses.p = number(require(h, "p", "$.hypotheses"), "$.hypotheses.p");
        if (!(cfg.hypotheses.p > 1.0)) fail("$.hypotheses.p", "expected p > 1");
        if (h.contains("m")) cfg.hypotheses.m = positive(h.at("m"), "$.hypotheses.m");
        if (h.contains("M")) cfg.hypotheses.big_m = positive(h.at("M"), "$.hypotheses.M");
    }

    if (j.contains("grids")) {
        const json& g = j.at("grids");
        reject_unknown(g, {"n_paths", "n_per_point", "radial", "scattered", "envelope_z"},
                       "$.grids");
        if (g.contains("n_paths")) cfg.grids.n_paths = g.at("n_paths").get<std::uint64_t>();
        if (g.contains("n_per_point")) {
            cfg.grids.n_per_point = g.at("n_per_point").get<std::uint64_t>();
        }
        if (g.contains("radial")) cfg.grids.radial = g.at("radial").get<std::size_t>();
        if (g.contains("scattered")) cfg.grids.scattered = g.at("scattered").get<std::size_t>();
        if (g.contains("envelope_z")) {
            cfg.grids.envelope_z = positive(g.at("envelope_z"), "$.grids.envelope_z");
        }
        if (cfg.grids.n_paths < 2) fail("$.grids.n_paths", "need at least 2 paths");
        if (cfg.grids.n_per_point < 2) fail("$.grids.n_per_point", "need at least 2 paths");
    }

    if (j.contains("solve")) {
        const json& s = j.at("solve");
        reject_unknown(s,
                       {"tol", "max_iter", "n_per_node", "node_spacing", "node_margin",
                        "u0_constant", "factor", "stencil_h"},
                       "$.solve");
        if (s.contains("tol")) cfg.solve.tol = positive(s.at("tol"), "$.solve.tol");
        if (s.contains("max_iter")) cfg.solve.max_iter = s.at("max_iter").get<std::size_t>();
        if (s.contains("n_per_node")) {
            cfg.solve.n_per_node = s.at("n_per_node").get<std::uint64_t>();
        }
        if (s.contains("node_spacing")) {
            cfg.solve.node_spacing = positive(s.at("node_spacing"), "$.solve.node_spacing");
        }
        if (s.contains("node_margin")) {
            cfg.solve.node_margin = number(s.at("node_margin"), "$.solve.node_margin");
        }
        if (s.contains("u0_constant")) {
            cfg.solve.u0_constant = number(s.at("u0_constant"), "$.solve.u0_constant");
        }
        if (s.contains("factor")) {
            cfg.solve.factor = s.at("factor").get<int>();
            if (cfg.solve.factor != 1 && cfg.solve.factor != 2) {
                fail("$.solve.factor", "expected 1 or 2");
            }
        }
        if (s.contains("stencil_h")) {
            cfg.solve.stencil_h = positive(s.at("stencil_h"), "$.solve.stencil_h");
        }
    }

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        reject_unknown(s, {"delta", "t_outer", "p", "lambda", "store"}, "$.sweep");
        cfg.sweep.delta = number_list(require(s, "delta", "$.sweep"), "$.sweep.delta");
        cfg.sweep.t_outer = number_list(require(s, "t_outer", "$.sweep"), "$.sweep.t_outer");
        cfg.sweep.p = number_list(require(s, "p", "$.sweep"), "$.sweep.p");
        cfg.sweep.lambda = number_list(require(s, "lambda", "$.sweep"), "$.sweep.lambda");
        if (s.contains("store")) cfg.sweep.store = s.at("store").get<std::string>();
    }

    if (j.contains("multiplicity")) {
        const json& m = j.at("multiplicity");
        reject_unknown(m, {"components", "m", "M", "evaluate"}, "$.multiplicity");
        MultiplicityConfig mc;
        const json& comps = require(m, "components", "$.multiplicity");
        if (!comps.is_array() || comps.empty()) {
            fail("$.multiplicity.components", "expected a nonempty array");
        }
        for (std::size_t i = 0; i < comps.size(); ++i) {
            mc.components.push_back(domain_from_json(
                comps[i], "$.multiplicity.components[" + std::to_string(i) + "]"));
        }
        const std::vector<double> ms =
            number_list(require(m, "m", "$.multiplicity"), "$.multiplicity.m");
        const std::vector<double> big_ms =
            number_list(require(m, "M", "$.multiplicity"), "$.multiplicity.M");
        if (ms.size() != mc.components.size() || big_ms.size() != mc.components.size()) {
            fail("$.multiplicity", "'m' and 'M' must have one entry per component");
        }
        for (std::size_t i = 0; i < ms.size(); ++i) mc.constants.emplace_back(ms[i], big_ms[i]);
        if (m.contains("evaluate")) mc.evaluate = m.at("evaluate").get<bool>();
        cfg.multiplicity = std::move(mc);
    }

    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.sim.seed = cfg.seed;
    if (j.contains("workers")) cfg.workers = j.at("workers").get<unsigned>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("format")) {
        cfg.format = j.at("format").get<std::string>();
        if (cfg.format != "json" && cfg.format != "csv") {
            fail("$.format", "expected 'json' or 'csv'");
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse(j);
}

ConditionEstimatorConfig condition_config(const RunConfig& cfg) {
    ConditionEstimatorConfig out;
    out.params = cfg.sim;
    out.n_per_point = cfg.grids.n_per_point;
    out.radial_grid = cfg.grids.radial;
    out.scattered_grid = cfg.grids.scattered;
    out.envelope_z = cfg.grids.envelope_z;
    out.workers = cfg.workers == 0 ? default_workers() : cfg.workers;
    return out;
}

}  // namespace emc
