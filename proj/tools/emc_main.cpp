#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emc/conditions.hpp"
#include "emc/config.hpp"
#include "emc/errors.hpp"
#include "emc/estimators.hpp"
#include "emc/oracles.hpp"
#include "emc/parallel.hpp"
#include "emc/results.hpp"
#include "emc/solver.hpp"

namespace {

using emc::RunConfig;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitTaint = 3;
constexpr int kExitDiverged = 4;
constexpr double kTaintThreshold = 1e-3;

unsigned effective_workers(const RunConfig& cfg) {
    return cfg.workers == 0 ? emc::default_workers() : cfg.workers;
}

json estimate_to_json(const emc::Estimate& est) {
    return json{{"mean", est.mean},
                {"std_error", est.std_error},
                {"n_paths", est.n_paths},
                {"truncated_fraction", est.truncated_fraction},
                {"config_digest", est.config_digest}};
}

json verdict_to_json(const emc::ConditionVerdict& v) {
    return json{{"lhs", v.lhs},
                {"rhs", v.rhs},
                {"margin", v.margin},
                {"verdict", v.verdict},
                {"conservative", v.conservative},
                {"anti_conservative", v.anti_conservative},
                {"lhs_std_error", v.lhs_std_error}};
}

json report_to_json(const emc::ConditionsReport& rep) {
    return json{{"cond1", verdict_to_json(rep.cond1)},
                {"cond2", verdict_to_json(rep.cond2)},
                {"cond3", verdict_to_json(rep.cond3)},
                {"m_le_M", rep.m_le_big_m},
                {"tainted", rep.tainted},
                {"grid_provenance", rep.grid_provenance},
                {"all_hold", rep.all_hold()}};
}

/// Writes the record and, when the configured format is csv, a CSV companion
/// for any tabular payload section.
void persist(const RunConfig& cfg, const std::string& subcommand, const json& payload) {
    emc::ResultRecord rec{cfg.digest, subcommand, emc::utc_timestamp(), emc::kToolkitVersion,
                          payload};
    emc::append_record(cfg.out_dir + "/results.jsonl", rec);
    if (cfg.format != "csv") return;
    for (const char* table_key : {"profile", "rows", "trace"}) {
        if (!payload.contains(table_key) || !payload.at(table_key).is_array() ||
            payload.at(table_key).empty()) {
            continue;
        }
        const json& table = payload.at(table_key);
        std::ofstream csv(cfg.out_dir + "/" + cfg.digest + "-" + subcommand + "-" + table_key +
                          ".csv");
        bool header = true;
        for (const json& row : table) {
            if (header) {
                bool first = true;
                for (const auto& [key, value] : row.items()) {
                    csv << (first ? "" : ",") << key;
                    first = false;
                }
                csv << "\n";
                header = false;
            }
            bool first = true;
            for (const auto& [key, value] : row.items()) {
                csv << (first ? "" : ",") << value.dump();
                first = false;
            }
            csv << "\n";
        }
    }
}

emc::Point required_point(const RunConfig& cfg) {
    if (!cfg.point) throw emc::ConfigError("config: this subcommand requires 'point'");
    return *cfg.point;
}

emc::HypothesesConfig required_constants(const RunConfig& cfg) {
    if (!cfg.hypotheses.m || !cfg.hypotheses.big_m) {
        throw emc::ConfigError("config: this subcommand requires hypotheses 'm' and 'M'");
    }
    return cfg.hypotheses;
}

int taint_status(double truncated_fraction) {
    return truncated_fraction > kTaintThreshold ? kExitTaint : kExitOk;
}

int run_estimate_exit(const RunConfig& cfg) {
    const emc::Estimate est = emc::expected_exit_time(cfg.domain, required_point(cfg), cfg.sim,
                                                      cfg.grids.n_paths, effective_workers(cfg));
    std::cout << "exit-time mean=" << est.mean << " std_error=" << est.std_error
              << " n_paths=" << est.n_paths << " truncated_fraction=" << est.truncated_fraction
              << "\n";
    persist(cfg, "estimate-exit", json{{"estimate", estimate_to_json(est)}});
    return taint_status(est.truncated_fraction);
}

int run_estimate_occupation(const RunConfig& cfg) {
    if (!cfg.region) throw emc::ConfigError("config: estimate-occupation requires 'region'");
    const emc::Estimate est =
        emc::expected_occupation(cfg.domain, *cfg.region, required_point(cfg), cfg.sim,
                                 cfg.grids.n_paths, effective_workers(cfg));
    std::cout << "occupation mean=" << est.mean << " std_error=" << est.std_error
              << " n_paths=" << est.n_paths << " truncated_fraction=" << est.truncated_fraction
              << "\n";
    persist(cfg, "estimate-occupation", json{{"estimate", estimate_to_json(est)}});
    return taint_status(est.truncated_fraction);
}

int run_green_apply(const RunConfig& cfg, const std::string& f_name) {
    std::function<double(const emc::Point&)> f;
    std::string tag;
    if (f_name == "one") {
        f = [](const emc::Point&) { return 1.0; };
        tag = "one";
    } else if (f_name == "indicator") {
        if (!cfg.region) {
            throw emc::ConfigError("config: green-apply with --f indicator requires 'region'");
        }
        const emc::Domain region = *cfg.region;
        f = [region](const emc::Point& x) { return region.contains(x) ? 1.0 : 0.0; };
        tag = "indicator:" + region.describe();
    } else {
        throw emc::ConfigError("green-apply: --f must be 'one' or 'indicator'");
    }
    const emc::Estimate est = emc::green_apply(cfg.domain, f, required_point(cfg), cfg.sim,
                                               cfg.grids.n_paths, effective_workers(cfg), tag);
    std::cout << "green f=" << f_name << " mean=" << est.mean << " std_error=" << est.std_error
              << " n_paths=" << est.n_paths << " truncated_fraction=" << est.truncated_fraction
              << "\n";
    persist(cfg, "green-apply", json{{"f", f_name}, {"estimate", estimate_to_json(est)}});
    return taint_status(est.truncated_fraction);
}

int run_check_conditions(const RunConfig& cfg) {
    const emc::HypothesesConfig hc = required_constants(cfg);
    const emc::Hypotheses hyp(hc.lambda, hc.p, *hc.m, *hc.big_m, cfg.partition());
    const emc::ConditionsReport rep = emc::check_conditions(hyp, emc::condition_config(cfg));
    std::cout << "cond1 lhs=" << rep.cond1.lhs << " rhs=" << rep.cond1.rhs
              << " margin=" << rep.cond1.margin << " verdict=" << rep.cond1.verdict << "\n"
              << "cond2 lhs=" << rep.cond2.lhs << " rhs=" << rep.cond2.rhs
              << " margin=" << rep.cond2.margin << " verdict=" << rep.cond2.verdict << "\n"
              << "cond3 lhs=" << rep.cond3.lhs << " rhs=" << rep.cond3.rhs
              << " margin=" << rep.cond3.margin << " verdict=" << rep.cond3.verdict << "\n"
              << "m<=M " << rep.m_le_big_m << " tainted=" << rep.tainted
              << " all_hold=" << rep.all_hold() << "\n";
    persist(cfg, "check-conditions", json{{"report", report_to_json(rep)}});
    return rep.tainted ? kExitTaint : kExitOk;
}

int run_find_constants(const RunConfig& cfg) {
    const emc::FeasibleConstantsResult res = emc::find_feasible_constants(
        cfg.domain, cfg.partition(), cfg.hypotheses.lambda, cfg.hypotheses.p,
        emc::condition_config(cfg));
    json payload{{"report", report_to_json(res.report)},
                 {"feasible", res.constants.has_value()},
                 {"failing", res.failing}};
    if (res.constants) {
        payload["m"] = res.constants->first;
        payload["M"] = res.constants->second;
        std::cout << "feasible m=" << res.constants->first << " M=" << res.constants->second
                  << "\n";
    } else {
        std::cout << "infeasible failing=" << res.failing << "\n";
    }
    persist(cfg, "find-constants", payload);
    return res.report.tainted ? kExitTaint : kExitOk;
}

/// Annulus parameters (delta, T) read off the configured radial domain.
std::pair<double, double> annulus_radii(const RunConfig& cfg) {
    emc::Point center;
    double ri = 0.0, ro = 0.0;
    if (!cfg.domain.radial_profile(center, ri, ro) || ri <= 0.0 || cfg.domain.dim() != 3) {
        throw emc::ConfigError("config: this subcommand requires a 3-D annulus domain");
    }
    return {ri, ro};
}

int run_example2_report(const RunConfig& cfg) {
    const auto [delta, t_outer] = annulus_radii(cfg);
    const emc::Example2Report rep = emc::example2_inequality_report(
        delta, t_outer, cfg.hypotheses.p, cfg.hypotheses.lambda);
    std::cout << "sup_exit=" << rep.sup_exit << " M=" << rep.big_m
              << " M_exponent_side=" << rep.m_exponent_side << " bound_side=" << rep.bound_side
              << " printed_direction_holds=" << rep.printed_direction_holds << "\n";
    persist(cfg, "example2-report",
            json{{"sup_exit", rep.sup_exit},
                 {"M", rep.big_m},
                 {"M_exponent_side", rep.m_exponent_side},
                 {"bound_side", rep.bound_side},
                 {"printed_direction_holds", rep.printed_direction_holds}});
    return kExitOk;
}

int run_oracle_compare(const RunConfig& cfg) {
    emc::Point center;
    double ri = 0.0, ro = 0.0;
    if (!cfg.domain.radial_profile(center, ri, ro)) {
        throw emc::ConfigError("config: oracle-compare requires a ball or annulus domain");
    }
    if (ri > 0.0 && cfg.domain.dim() != 3) {
        throw emc::ConfigError("config: the annulus oracle covers d = 3 only");
    }
    json profile = json::array();
    double worst_z = 0.0;
    const std::size_t n_radii = std::max<std::size_t>(cfg.grids.radial, 2);
    for (std::size_t k = 0; k < n_radii; ++k) {
        const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(n_radii);
        const double r = ri + (ro - ri) * t;
        const emc::Point x = emc::radial_point(center, r);
        const emc::Estimate est = emc::expected_exit_time(cfg.domain, x, cfg.sim,
                                                          cfg.grids.n_per_point,
                                                          effective_workers(cfg));
        const double oracle = ri == 0.0
                                  ? emc::ball_exit_time(ro, cfg.domain.dim(), x)
                                  : emc::annulus_exit_time(emc::AnnulusSpec3D(ri, ro, center), x);
        const double z = est.std_error > 0.0 ? (est.mean - oracle) / est.std_error : 0.0;
        worst_z = std::max(worst_z, std::abs(z));
        profile.push_back(json{{"r", r},
                               {"mean", est.mean},
                               {"std_error", est.std_error},
                               {"oracle", oracle},
                               {"z", z}});
        std::cout << "r=" << r << " mc=" << est.mean << " oracle=" << oracle << " z=" << z
                  << "\n";
    }
    std::cout << "worst |z|=" << worst_z << "\n";
    persist(cfg, "oracle-compare", json{{"profile", profile}, {"worst_abs_z", worst_z}});
    return kExitOk;
}

int run_sweep(const RunConfig& cfg) {
    if (cfg.sweep.delta.empty()) {
        throw emc::ConfigError("config: sweep requires a 'sweep' section");
    }
    std::vector<emc::SweepPoint> grid;
    for (double delta : cfg.sweep.delta) {
        for (double t_outer : cfg.sweep.t_outer) {
            for (double p : cfg.sweep.p) {
                for (double lambda : cfg.sweep.lambda) {
                    grid.push_back({delta, t_outer, p, lambda});
                }
            }
        }
    }
    std::string store = cfg.sweep.store.empty() ? cfg.out_dir + "/sweep-store.jsonl"
                                                : cfg.sweep.store;
    std::filesystem::create_directories(cfg.out_dir);
    const std::vector<emc::SweepRow> rows =
        emc::feasibility_sweep(grid, emc::condition_config(cfg), store);
    json rows_json = json::array();
    std::size_t feasible = 0, cached = 0, errored = 0;
    for (const emc::SweepRow& row : rows) {
        feasible += row.feasible ? 1 : 0;
        cached += row.from_cache ? 1 : 0;
        errored += row.error.empty() ? 0 : 1;
        rows_json.push_back(json{{"delta", row.point.delta},
                                 {"t_outer", row.point.t_outer},
                                 {"p", row.point.p},
                                 {"lambda", row.point.lambda},
                                 {"feasible", row.feasible},
                                 {"failing", row.failing},
                                 {"cond1_margin", row.cond1_margin},
                                 {"cond2_margin", row.cond2_margin},
                                 {"cond3_margin", row.cond3_margin},
                                 {"from_cache", row.from_cache},
                                 {"error", row.error},
                                 {"key", row.key}});
    }
    std::cout << "sweep rows=" << rows.size() << " feasible=" << feasible << " cached=" << cached
              << " errors=" << errored << "\n";
    persist(cfg, "sweep",
            json{{"rows", rows_json},
                 {"n_rows", rows.size()},
                 {"n_feasible", feasible},
                 {"n_cached", cached},
                 {"n_errors", errored},
                 {"store", store}});
    return kExitOk;
}

emc::Field seed_field(const RunConfig& cfg) {
    emc::Field u = emc::Field::lattice(cfg.domain, cfg.solve.node_spacing, cfg.solve.node_margin);
    for (double& v : u.values()) v = std::max(cfg.solve.u0_constant, 0.0);
    return u;
}

int run_solve(const RunConfig& cfg) {
    if (!cfg.domain.regular_boundary()) {
        std::cout << "warning: domain boundary regularity not certified\n";
    }
    emc::Field u0 = seed_field(cfg);
    emc::PicardOptions opts;
    opts.tol = cfg.solve.tol;
    opts.max_iter = cfg.solve.max_iter;
    opts.n_per_node = cfg.solve.n_per_node;
    opts.m_hint = cfg.hypotheses.big_m.value_or(0.0);
    opts.workers = effective_workers(cfg);
    auto [u, trace] = emc::picard_solve(cfg.domain, cfg.hypotheses.lambda, cfg.hypotheses.p, u0,
                                        cfg.sim, opts);
    json trace_json = json::array();
    for (const emc::IterationStep& step : trace.steps) {
        trace_json.push_back(json{{"sup_change", step.sup_change}, {"sup_norm", step.sup_norm}});
    }
    const char* status = trace.status == emc::SolveStatus::Converged       ? "converged"
                         : trace.status == emc::SolveStatus::MaxIterations ? "max-iterations"
                                                                           : "diverged";
    json payload{{"status", status},
                 {"iterations", trace.steps.size()},
                 {"contraction_estimate", trace.contraction_estimate},
                 {"contraction_warning", trace.contraction_warning},
                 {"sup_norm", u.sup_norm()},
                 {"trace", trace_json},
                 {"nodes", u.nodes().size()}};
    std::cout << "solve status=" << status << " iterations=" << trace.steps.size()
              << " C=" << trace.contraction_estimate << " |u|=" << u.sup_norm() << "\n";
    if (trace.contraction_warning) {
        std::cout << "warning: contraction estimate >= 1, no convergence claim\n";
    }
    if (trace.status != emc::SolveStatus::Diverged) {
        const double stencil_h =
            cfg.solve.stencil_h > 0.0 ? cfg.solve.stencil_h : cfg.solve.node_spacing;
        try {
            const emc::ResidualReport res =
                emc::residual_check(u, cfg.domain, cfg.hypotheses.lambda, cfg.hypotheses.p,
                                    stencil_h, cfg.solve.factor);
            payload["sup_residual"] = res.sup_residual;
            payload["normalized_residual"] = res.normalized;
            payload["eligible_nodes"] = res.eligible_nodes;
            std::cout << "residual sup=" << res.sup_residual << " normalized=" << res.normalized
                      << " eligible_nodes=" << res.eligible_nodes << "\n";
        } catch (const emc::InputError& e) {
            // A stencil too wide for the lattice leaves the solve result
            // usable; record why the residual is missing.
            payload["residual_unavailable"] = e.what();
            std::cout << "residual unavailable: " << e.what() << "\n";
        }
    }
    json field_json = json::array();
    for (std::size_t i = 0; i < u.nodes().size(); ++i) {
        field_json.push_back(json{{"x", u.nodes()[i].coords}, {"value", u.values()[i]}});
    }
    payload["field"] = field_json;
    persist(cfg, "solve", payload);
    return trace.status == emc::SolveStatus::Diverged ? kExitDiverged : kExitOk;
}

int run_membership(const RunConfig& cfg) {
    const emc::HypothesesConfig hc = required_constants(cfg);
    const emc::Partition partition = cfg.partition();
    // Urysohn-style seed: u = m on D1, tapering linearly to 0 away from it.
    emc::Field u = emc::Field::lattice(cfg.domain, cfg.solve.node_spacing, cfg.solve.node_margin);
    const double taper = 2.0 * cfg.solve.node_spacing;
    for (std::size_t i = 0; i < u.nodes().size(); ++i) {
        const double sd = partition.d1().signed_distance(u.nodes()[i]);
        u.values()[i] = sd < 0.0 ? *hc.m : *hc.m * std::max(0.0, 1.0 - sd / taper);
    }
    const emc::MembershipReport rep = emc::membership_b(
        u, partition, {hc.lambda, hc.p, *hc.m, *hc.big_m}, cfg.sim, cfg.grids.n_per_point,
        cfg.grids.scattered, effective_workers(cfg));
    std::cout << "inf_D1 L=" << rep.inf_d1.value << " holds=" << rep.inf_d1.holds
              << " margin=" << rep.inf_d1.margin << "\n"
              << "sup_D2 L=" << rep.sup_d2.value << " holds=" << rep.sup_d2.holds
              << " margin=" << rep.sup_d2.margin << "\n"
              << "|u|=" << rep.sup_norm.value << " holds=" << rep.sup_norm.holds
              << " margin=" << rep.sup_norm.margin << "\n";
    auto mv = [](const emc::MembershipVerdict& v) {
        return json{{"value", v.value}, {"margin", v.margin}, {"holds", v.holds}};
    };
    persist(cfg, "membership",
            json{{"inf_d1", mv(rep.inf_d1)},
                 {"sup_d2", mv(rep.sup_d2)},
                 {"sup_norm", mv(rep.sup_norm)}});
    return kExitOk;
}

int run_multiplicity(const RunConfig& cfg) {
    if (!cfg.multiplicity) {
        throw emc::ConfigError("config: multiplicity requires a 'multiplicity' section");
    }
    const std::vector<emc::MultiplicitySet> sets = emc::multiplicity_enumerate(
        cfg.domain, cfg.multiplicity->components, cfg.multiplicity->constants,
        cfg.hypotheses.lambda, cfg.hypotheses.p, emc::condition_config(cfg),
        cfg.multiplicity->evaluate);
    json sets_json = json::array();
    for (const emc::MultiplicitySet& set : sets) {
        json entry{{"index_set", set.index_set}, {"m_hat", set.m_hat}, {"M_hat", set.big_m_hat}};
        if (cfg.multiplicity->evaluate) entry["report"] = report_to_json(set.report);
        sets_json.push_back(std::move(entry));
    }
    std::cout << "multiplicity sets=" << sets.size() << "\n";
    persist(cfg, "multiplicity", json{{"sets", sets_json}, {"n_sets", sets.size()}});
    return kExitOk;
}

int run_plot(const std::string& records_path, const std::string& kind_name,
             const std::string& out_dir) {
    emc::PlotKind kind;
    if (kind_name == "radial-profile") {
        kind = emc::PlotKind::RadialProfile;
    } else if (kind_name == "sweep-heatmap") {
        kind = emc::PlotKind::SweepHeatmap;
    } else if (kind_name == "convergence") {
        kind = emc::PlotKind::Convergence;
    } else {
        throw emc::ConfigError("plot: --kind must be radial-profile, sweep-heatmap or convergence");
    }
    const auto files = emc::emit_plotdata(emc::read_records(records_path), kind, out_dir);
    for (const std::string& f : files) std::cout << "wrote " << f << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo toolkit for Brownian exit times, occupation times and the "
                 "semilinear problem Delta u + lambda u^p = 0"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<unsigned> workers_override;
    std::optional<std::string> out_override;
    std::optional<std::string> format_override;
    std::string green_f = "one";
    std::string plot_records, plot_kind, plot_out = "out";

    const std::vector<std::string> config_subs = {
        "estimate-exit", "estimate-occupation", "green-apply",   "check-conditions",
        "find-constants", "example2-report",    "oracle-compare", "sweep",
        "solve",          "membership",         "multiplicity"};
    for (const std::string& name : config_subs) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--seed", seed_override, "override config seed");
        sub->add_option("--workers", workers_override, "override worker count");
        sub->add_option("--out", out_override, "override output directory");
        sub->add_option("--format", format_override, "json or csv");
        if (name == "green-apply") {
            sub->add_option("--f", green_f, "integrand: one | indicator");
        }
    }
    CLI::App* plot = app.add_subcommand("plot", "emit plot data from a results file");
    plot->add_option("--records", plot_records, "results JSONL file")->required();
    plot->add_option("--kind", plot_kind, "radial-profile | sweep-heatmap | convergence")
        ->required();
    plot->add_option("--out", plot_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "plot") return run_plot(plot_records, plot_kind, plot_out);

        RunConfig cfg = RunConfig::load(config_path);
        if (seed_override) {
            cfg.seed = *seed_override;
            cfg.sim.seed = *seed_override;
        }
        if (workers_override) cfg.workers = *workers_override;
        if (out_override) cfg.out_dir = *out_override;
        if (format_override) cfg.format = *format_override;
        // The only environment overrides: output directory and worker count.
        if (const char* env_out = std::getenv("EMC_OUT_DIR"); env_out && !out_override) {
            cfg.out_dir = env_out;
        }
        if (const char* env_workers = std::getenv("EMC_WORKERS");
            env_workers && !workers_override) {
            cfg.workers = static_cast<unsigned>(std::stoul(env_workers));
        }

        if (sub == "estimate-exit") return run_estimate_exit(cfg);
        if (sub == "estimate-occupation") return run_estimate_occupation(cfg);
        if (sub == "green-apply") return run_green_apply(cfg, green_f);
        if (sub == "check-conditions") return run_check_conditions(cfg);
        if (sub == "find-constants") return run_find_constants(cfg);
        if (sub == "example2-report") return run_example2_report(cfg);
        if (sub == "oracle-compare") return run_oracle_compare(cfg);
        if (sub == "sweep") return run_sweep(cfg);
        if (sub == "solve") return run_solve(cfg);
        if (sub == "membership") return run_membership(cfg);
        if (sub == "multiplicity") return run_multiplicity(cfg);
        std::cerr << "error: unknown subcommand '" << sub << "'\n";
        return kExitValidation;
    } catch (const emc::UnboundedIntegrandError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTaint;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
