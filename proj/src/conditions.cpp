#include "emc/conditions.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "emc/digest.hpp"
#include "emc/errors.hpp"

namespace emc {

Hypotheses::Hypotheses(double lambda_, double p_, double m_, double big_m_, Partition partition_)
    : lambda(lambda_), p(p_), m(m_), big_m(big_m_), partition(std::move(partition_)) {
    if (!(lambda > 0.0)) throw InputError("Hypotheses: need lambda > 0");
    if (!(p > 1.0)) throw InputError("Hypotheses: need p > 1");
    if (!(m > 0.0) || !(big_m > 0.0)) throw InputError("Hypotheses: need m, M > 0");
}

namespace {

struct BoundEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double truncated_fraction = 0.0;
    std::string provenance;
};

bool radial_oracle_available(const Domain& domain) {
    Point center;
    double ri = 0.0, ro = 0.0;
    if (!domain.radial_profile(center, ri, ro)) return false;
    return ri == 0.0 || domain.dim() == 3;
}

double radial_exit_oracle(const Domain& domain, const Point& x) {
    Point center;
    double ri = 0.0, ro = 0.0;
    domain.radial_profile(center, ri, ro);
    if (ri == 0.0) {
        Point rel = x;
        for (int i = 0; i < x.dim(); ++i) rel[i] -= center[i];
        return ball_exit_time(ro, domain.dim(), rel);
    }
    return annulus_exit_time(AnnulusSpec3D(ri, ro, center), x);
}

/// sup over the whole domain of E_x[tau_D].
BoundEstimate sup_exit_over_domain(const Domain& domain, const ConditionEstimatorConfig& cfg) {
    if (cfg.use_oracles && radial_oracle_available(domain)) {
        Point center;
        double ri = 0.0, ro = 0.0;
        domain.radial_profile(center, ri, ro);
        if (ri == 0.0) {
            return {ro * ro / static_cast<double>(domain.dim()), 0.0, 0.0, "oracle:ball"};
        }
        const auto [value, arg] = annulus_sup_exit_time(AnnulusSpec3D(ri, ro, center));
        (void)arg;
        return {value, 0.0, 0.0, "oracle:annulus"};
    }
    const std::vector<Point> grid =
        condition_grid(domain, cfg.radial_grid, cfg.scattered_grid, cfg.params.seed + 31);
    const ExtremumEstimate ext = extremum_over(domain, Quantity::exit_time(), ExtremumMode::Sup,
                                               grid, cfg.params, cfg.n_per_point, cfg.workers);
    double trunc = 0.0;
    for (const auto& [pt, est] : ext.per_point) trunc = std::max(trunc, est.truncated_fraction);
    std::ostringstream prov;
    prov << "mc:grid=" << grid.size() << ",n=" << cfg.n_per_point;
    double se = 0.0;
    for (const auto& [pt, est] : ext.per_point) {
        if (est.mean == ext.value) se = est.std_error;
    }
    return {ext.value, se, trunc, prov.str()};
}

std::vector<Point> grid_in_d2(const Partition& partition, const ConditionEstimatorConfig& cfg) {
    const Domain& parent = partition.parent();
    Point center;
    double ri = 0.0, ro = 0.0;
    if (parent.radial_profile(center, ri, ro)) {
        std::vector<Point> grid;
        const std::size_t n = std::max<std::size_t>(cfg.radial_grid, 8);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
            const Point x = ri == 0.0 && k == 0 ? center : radial_point(center, ri + (ro - ri) * t);
            if (partition.in_d2(x)) grid.push_back(x);
        }
        if (!grid.empty()) return grid;
    }
    std::vector<Point> grid;
    std::uint64_t salt = 0;
    while (grid.size() < cfg.scattered_grid && salt < 64) {
        for (Point& p : sample_interior(parent, cfg.scattered_grid, cfg.params.seed + 57 + salt)) {
            if (partition.in_d2(p) && grid.size() < cfg.scattered_grid) grid.push_back(std::move(p));
        }
        ++salt;
    }
    if (grid.empty()) throw InputError("conditions: partition leaves no room for a D2 grid");
    return grid;
}

/// sup over D2 of E_x[tau_D]; exact on radial oracle domains.
BoundEstimate sup_exit_over_d2(const Partition& partition, const ConditionEstimatorConfig& cfg) {
    const Domain& parent = partition.parent();
    const std::vector<Point> grid = grid_in_d2(partition, cfg);
    if (cfg.use_oracles && radial_oracle_available(parent)) {
        double best = 0.0;
        for (const Point& x : grid) best = std::max(best, radial_exit_oracle(parent, x));
        return {best, 0.0, 0.0, "oracle:radial-grid"};
    }
    const ExtremumEstimate ext = extremum_over(parent, Quantity::exit_time(), ExtremumMode::Sup,
                                               grid, cfg.params, cfg.n_per_point, cfg.workers);
    double trunc = 0.0;
    for (const auto& [pt, est] : ext.per_point) trunc = std::max(trunc, est.truncated_fraction);
    double se = 0.0;
    for (const auto& [pt, est] : ext.per_point) {
        if (est.mean == ext.value) se = est.std_error;
    }
    return {ext.value, se, trunc, "mc:d2-grid"};
}

/// Extremum of the occupation time of `region_selector` over `grid`,
/// always Monte Carlo (no closed form).
BoundEstimate occupation_extremum(const Partition& partition, bool region_is_d1,
                                  ExtremumMode mode, const std::vector<Point>& grid,
                                  const ConditionEstimatorConfig& cfg) {
    const Domain& parent = partition.parent();
    auto indicator = [&partition, region_is_d1](const Point& x) {
        return (region_is_d1 ? partition.in_d1(x) : partition.in_d2(x)) ? 1.0 : 0.0;
    };
    const ExtremumEstimate ext = extremum_over(
        parent, Quantity::green(indicator, region_is_d1 ? "1_D1" : "1_D2"), mode, grid,
        cfg.params, cfg.n_per_point, cfg.workers);
    double trunc = 0.0;
    double se = 0.0;
    for (const auto& [pt, est] : ext.per_point) {
        trunc = std::max(trunc, est.truncated_fraction);
        if (est.mean == ext.value) se = est.std_error;
    }
    std::ostringstream prov;
    prov << "mc:occ-grid=" << grid.size() << ",n=" << cfg.n_per_point;
    return {ext.value, se, trunc, prov.str()};
}

ConditionVerdict make_verdict(double lhs, double rhs, bool lhs_le_rhs, double lhs_se, double z) {
    ConditionVerdict v;
    v.lhs = lhs;
    v.rhs = rhs;
    v.lhs_std_error = lhs_se;
    if (lhs_le_rhs) {
        v.margin = rhs - lhs;
        v.conservative = rhs - (lhs + z * lhs_se) >= 0.0;
        v.anti_conservative = rhs - (lhs - z * lhs_se) >= 0.0;
    } else {
        v.margin = lhs - rhs;
        v.conservative = (lhs - z * lhs_se) - rhs >= 0.0;
        v.anti_conservative = (lhs + z * lhs_se) - rhs >= 0.0;
    }
    v.verdict = v.margin >= 0.0;
    return v;
}

}  // namespace

ConditionsReport check_conditions(const Hypotheses& hyp, const ConditionEstimatorConfig& cfg) {
    const Partition& partition = hyp.partition;
    const Domain& parent = partition.parent();
    ConditionsReport report;
    std::ostringstream provenance;

    // Cond1: sup_D E[tau] <= M^(1-p)/lambda.
    const BoundEstimate sup_exit = sup_exit_over_domain(parent, cfg);
    report.cond1 = make_verdict(sup_exit.value, std::pow(hyp.big_m, 1.0 - hyp.p) / hyp.lambda,
                                true, sup_exit.std_error, cfg.envelope_z);
    provenance << "cond1=" << sup_exit.provenance;

    // Cond2: inf_D1 of the D1 occupation >= m^(1-p)/lambda.
    const std::vector<Point> d1_grid =
        condition_grid(partition.d1(), cfg.radial_grid, cfg.scattered_grid, cfg.params.seed + 41);
    const BoundEstimate inf_occ =
        occupation_extremum(partition, true, ExtremumMode::Inf, d1_grid, cfg);
    report.cond2 = make_verdict(inf_occ.value, std::pow(hyp.m, 1.0 - hyp.p) / hyp.lambda, false,
                                inf_occ.std_error, cfg.envelope_z);
    provenance << ";cond2=" << inf_occ.provenance;

    // Cond3: M sup_D2 E[tau] (sup_D2 occupation(D2))^p <= (m/lambda)^p.
    const BoundEstimate sup_exit_d2 = sup_exit_over_d2(partition, cfg);
    const std::vector<Point> d2_grid = grid_in_d2(partition, cfg);
    const BoundEstimate sup_occ_d2 =
        occupation_extremum(partition, false, ExtremumMode::Sup, d2_grid, cfg);
    const double a = sup_exit_d2.value;
    const double b = sup_occ_d2.value;
    const double lhs3 = hyp.big_m * a * std::pow(b, hyp.p);
    // First-order error propagation through the product.
    const double se3 = hyp.big_m * (sup_exit_d2.std_error * std::pow(b, hyp.p) +
                                    (b > 0.0 ? a * hyp.p * std::pow(b, hyp.p - 1.0) *
                                                   sup_occ_d2.std_error
                                             : 0.0));
    report.cond3 = make_verdict(lhs3, std::pow(hyp.m / hyp.lambda, hyp.p), true, se3,
                                cfg.envelope_z);
    provenance << ";cond3=" << sup_exit_d2.provenance << "+" << sup_occ_d2.provenance;

    report.m_le_big_m = hyp.m <= hyp.big_m;
    const double worst_trunc = std::max({sup_exit.truncated_fraction, inf_occ.truncated_fraction,
                                         sup_exit_d2.truncated_fraction,
                                         sup_occ_d2.truncated_fraction});
    report.tainted = worst_trunc > cfg.truncation_taint_threshold;
    report.grid_provenance = provenance.str();
    return report;
}

FeasibleConstantsResult find_feasible_constants(const Domain& domain, const Partition& partition,
                                                double lambda, double p,
                                                const ConditionEstimatorConfig& cfg) {
    if (!(p > 1.0)) throw InputError("find_feasible_constants: need p > 1");
    if (!(lambda > 0.0)) throw InputError("find_feasible_constants: need lambda > 0");

    // M from Cond1 equality.
    const BoundEstimate sup_exit = sup_exit_over_domain(domain, cfg);
    double big_m = m_constant(sup_exit.value, lambda, p);
    // Exponent round trips can land one ulp on the wrong side; nudge M so the
    // saturated condition holds with margin >= 0.
    while (std::pow(big_m, 1.0 - p) / lambda < sup_exit.value) {
        big_m = std::nextafter(big_m, 0.0);
    }

    // m from Cond2 equality.
    const std::vector<Point> d1_grid =
        condition_grid(partition.d1(), cfg.radial_grid, cfg.scattered_grid, cfg.params.seed + 41);
    const BoundEstimate inf_occ =
        occupation_extremum(partition, true, ExtremumMode::Inf, d1_grid, cfg);
    if (!(inf_occ.value > 0.0)) {
        throw InputError("find_feasible_constants: D1 occupation infimum is not positive");
    }
    double m = std::pow(lambda * inf_occ.value, 1.0 / (1.0 - p));
    while (std::pow(m, 1.0 - p) / lambda > inf_occ.value) {
        m = std::nextafter(m, std::numeric_limits<double>::infinity());
    }

    FeasibleConstantsResult result;
    result.report = check_conditions(Hypotheses(lambda, p, m, big_m, partition), cfg);
    if (!result.report.cond1.verdict) {
        result.failing = "cond1";
    } else if (!result.report.cond2.verdict) {
        result.failing = "cond2";
    } else if (!result.report.cond3.verdict) {
        result.failing = "cond3";
    } else if (!result.report.m_le_big_m) {
        result.failing = "m<=M";
    }
    if (result.failing.empty()) result.constants = {m, big_m};
    return result;
}

Example2Report example2_inequality_report(double delta, double t_outer, double p, double lambda) {
    if (!(p > 1.0) || !(p < std::sqrt(2.0))) {
        throw InputError("example2_inequality_report: need 1 < p < sqrt(2)");
    }
    if (!(delta > 0.0) || !(delta < t_outer)) {
        throw InputError("example2_inequality_report: need 0 < delta < T");
    }
    if (!(lambda > 0.0)) throw InputError("example2_inequality_report: need lambda > 0");

    Example2Report rep;
    rep.sup_exit = annulus_sup_exit_time(AnnulusSpec3D(delta, t_outer)).first;
    rep.big_m = m_constant(rep.sup_exit, lambda, p);
    const double exponent = 2.0 - p * p;
    rep.m_exponent_side = std::pow(rep.big_m, exponent);
    const double s = t_outer * t_outer + t_outer * delta + delta * delta;
    rep.bound_side = std::pow(s, exponent / (1.0 - p));
    rep.printed_direction_holds = rep.m_exponent_side < rep.bound_side;
    return rep;
}

std::vector<MultiplicitySet> multiplicity_enumerate(
    const Domain& domain, const std::vector<Domain>& components,
    const std::vector<std::pair<double, double>>& per_component_constants, double lambda, double p,
    const ConditionEstimatorConfig& cfg, bool evaluate_conditions) {
    const std::size_t s = components.size();
    if (s < 1) throw InputError("multiplicity_enumerate: need at least one component");
    if (per_component_constants.size() != s) {
        throw InputError("multiplicity_enumerate: constants list size mismatch");
    }

    // Pairwise-disjointness by sampling.
    for (std::size_t i = 0; i < s; ++i) {
        const std::vector<Point> pts = sample_interior(components[i], 200, cfg.params.seed + i);
        for (std::size_t j = 0; j < s; ++j) {
            if (i == j) continue;
            for (const Point& x : pts) {
                if (components[j].contains(x)) {
                    throw InputError("multiplicity_enumerate: components " + std::to_string(i) +
                                     " and " + std::to_string(j) + " overlap");
                }
            }
        }
    }

    std::vector<MultiplicitySet> out;
    const std::size_t total = (std::size_t{1} << s) - 1;
    out.reserve(total);
    for (std::size_t mask = 1; mask <= total; ++mask) {
        MultiplicitySet set{{}, 0.0, 0.0, domain, {}};
        std::vector<Domain> parts;
        double m_hat = 0.0;
        double big_m_hat = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s; ++i) {
            if ((mask >> i) & 1u) {
                set.index_set.push_back(i + 1);
                parts.push_back(components[i]);
                m_hat = std::max(m_hat, per_component_constants[i].first);
                big_m_hat = std::min(big_m_hat, per_component_constants[i].second);
            }
        }
        set.m_hat = m_hat;
        set.big_m_hat = big_m_hat;
        set.d1_hat = parts.size() == 1 ? parts.front() : Domain::union_of(parts);
        if (evaluate_conditions) {
            set.report = check_conditions(
                Hypotheses(lambda, p, m_hat, big_m_hat, Partition(set.d1_hat, domain)), cfg);
        }
        out.push_back(std::move(set));
    }
    return out;
}

Partition example2_partition(double delta, double t_outer) {
    // D2 must contain the sup-attaining radius, so D1 = A(r, R) sits in the
    // outer part of the shell with a gap on both sides.
    const auto [sup_value, z_star] = annulus_sup_exit_time(AnnulusSpec3D(delta, t_outer));
    (void)sup_value;
    const double gap = (t_outer - z_star) / 4.0;
    const double r = z_star + gap;
    const double big_r = t_outer - gap;
    Point center = origin(3);
    return Partition(Domain::annulus(center, r, big_r),
                     Domain::annulus(center, delta, t_outer));
}

std::vector<SweepRow> feasibility_sweep(const std::vector<SweepPoint>& grid,
                                        const ConditionEstimatorConfig& cfg,
                                        const std::string& store_path) {
    std::ostringstream cfg_id;
    cfg_id << cfg.params.describe() << "|n=" << cfg.n_per_point << "|rg=" << cfg.radial_grid
           << "|sg=" << cfg.scattered_grid << "|oracle=" << cfg.use_oracles;
    const std::string cfg_digest = hex_digest(cfg_id.str());

    std::unordered_map<std::string, SweepRow> cache;
    if (!store_path.empty()) {
        std::ifstream in(store_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                const nlohmann::json j = nlohmann::json::parse(line);
                SweepRow row;
                row.key = j.at("key").get<std::string>();
                row.point = {j.at("delta").get<double>(), j.at("t_outer").get<double>(),
                             j.at("p").get<double>(), j.at("lambda").get<double>()};
                row.feasible = j.at("feasible").get<bool>();
                row.failing = j.value("failing", "");
                row.cond1_margin = j.value("cond1_margin", 0.0);
                row.cond2_margin = j.value("cond2_margin", 0.0);
                row.cond3_margin = j.value("cond3_margin", 0.0);
                row.error = j.value("error", "");
                row.from_cache = true;
                cache[row.key] = std::move(row);
            } catch (const nlohmann::json::exception&) {
                continue;  // skip unreadable rows
            }
        }
    }

    std::ofstream out;
    if (!store_path.empty()) out.open(store_path, std::ios::app);

    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const SweepPoint& point : grid) {
        std::ostringstream key_stream;
        key_stream.precision(17);
        key_stream << point.delta << "," << point.t_outer << "," << point.p << "," << point.lambda
                   << "|" << cfg_digest;
        const std::string key = key_stream.str();
        if (const auto it = cache.find(key); it != cache.end()) {
            rows.push_back(it->second);
            continue;
        }
        SweepRow row;
        row.point = point;
        row.key = key;
        try {
            const Partition partition = example2_partition(point.delta, point.t_outer);
            const FeasibleConstantsResult res = find_feasible_constants(
                partition.parent(), partition, point.lambda, point.p, cfg);
            row.feasible = res.constants.has_value();
            row.failing = res.failing;
            row.cond1_margin = res.report.cond1.margin;
            row.cond2_margin = res.report.cond2.margin;
            row.cond3_margin = res.report.cond3.margin;
        } catch (const std::exception& err) {
            row.error = err.what();
        }
        if (out.is_open()) {
            nlohmann::json j{{"key", row.key},
                             {"delta", row.point.delta},
                             {"t_outer", row.point.t_outer},
                             {"p", row.point.p},
                             {"lambda", row.point.lambda},
                             {"feasible", row.feasible},
                             {"failing", row.failing},
                             {"cond1_margin", row.cond1_margin},
                             {"cond2_margin", row.cond2_margin},
                             {"cond3_margin", row.cond3_margin},
                             {"error", row.error}};
            out << j.dump() << "\n";
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace emc
