#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emc/estimators.hpp"
#include "emc/geometry.hpp"
#include "emc/oracles.hpp"
#include "emc/simulate.hpp"

namespace emc {

/// Constants and partition the existence theorem is checked against.
struct Hypotheses {
    double lambda;
    double p;
    double m;
    double big_m;
    Partition partition;

    Hypotheses(double lambda_, double p_, double m_, double big_m_, Partition partition_);
};

/// How condition estimates are produced.
struct ConditionEstimatorConfig {
    SimParams params;
    std::uint64_t n_per_point = 20000;
    std::size_t radial_grid = 64;
    std::size_t scattered_grid = 512;
    double envelope_z = 3.0;
    double truncation_taint_threshold = 1e-3;
    bool use_oracles = true;  // closed forms for certified ball/annulus exit times
    unsigned workers = 1;
};

struct ConditionVerdict {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;       // rhs-lhs for <=-conditions, lhs-rhs for >=
    bool verdict = false;      // margin >= 0
    bool conservative = false;      // margin at the unfavorable z-sigma envelope
    bool anti_conservative = false; // margin at the favorable z-sigma envelope
    double lhs_std_error = 0.0;
};

struct ConditionsReport {
    ConditionVerdict cond1;  // sup_D E[tau] <= M^(1-p)/lambda
    ConditionVerdict cond2;  // inf_D1 occupation(D1) >= m^(1-p)/lambda
    ConditionVerdict cond3;  // M sup_D2 E[tau] (sup_D2 occupation(D2))^p <= (m/lambda)^p
    bool m_le_big_m = false;
    bool tainted = false;    // some estimate exceeded the truncation threshold
    std::string grid_provenance;

    bool all_hold() const {
        return cond1.verdict && cond2.verdict && cond3.verdict && m_le_big_m;
    }
};

ConditionsReport check_conditions(const Hypotheses& hyp, const ConditionEstimatorConfig& config);

struct FeasibleConstantsResult {
    std::optional<std::pair<double, double>> constants;  // (m, M) when feasible
    ConditionsReport report;
    std::string failing;  // empty when feasible, else "cond1".."cond3" or "m<=M"
};

/// Equality-saturation search: M from Cond1 equality, m from Cond2 equality,
/// then Cond3 and m <= M verified.
FeasibleConstantsResult find_feasible_constants(const Domain& domain, const Partition& partition,
                                                double lambda, double p,
                                                const ConditionEstimatorConfig& config);

struct Example2Report {
    double sup_exit = 0.0;
    double big_m = 0.0;
    double m_exponent_side = 0.0;  // M^(2-p^2)
    double bound_side = 0.0;       // (T^2 + T d + d^2)^((2-p^2)/(1-p))
    bool printed_direction_holds = false;
};

/// Both sides of the closing display of the annulus worked example; the
/// comparison is reported, not asserted.
Example2Report example2_inequality_report(double delta, double t_outer, double p, double lambda);

struct MultiplicitySet {
    std::vector<std::size_t> index_set;  // 1-based component indices
    double m_hat = 0.0;
    double big_m_hat = 0.0;
    Domain d1_hat;
    ConditionsReport report;
};

/// Enumerates the 2^s - 1 nonempty component subsets, with m-hat = max m_i,
/// M-hat = min M_i over each subset, and checks the conditions for each
/// induced partition.
std::vector<MultiplicitySet> multiplicity_enumerate(
    const Domain& domain, const std::vector<Domain>& components,
    const std::vector<std::pair<double, double>>& per_component_constants, double lambda, double p,
    const ConditionEstimatorConfig& config, bool evaluate_conditions = true);

struct SweepPoint {
    double delta;
    double t_outer;
    double p;
    double lambda;
};

struct SweepRow {
    SweepPoint point;
    bool feasible = false;
    std::string failing;
    double cond1_margin = 0.0;
    double cond2_margin = 0.0;
    double cond3_margin = 0.0;
    bool from_cache = false;
    std::string error;  // per-row estimator failure, sweep continues
    std::string key;    // parameter tuple + config digest
};

/// Example-2-style annulus family: D1 = A(r, R) placed so that D2 contains
/// the sup-attaining radius (delta T (delta+T)/2)^(1/3).
Partition example2_partition(double delta, double t_outer);

/// Runs find_feasible_constants on each grid vertex. When `store_path` is
/// nonempty, rows are appended to that JSONL file and rows already present
/// (same key) are returned from the store without recomputation.
std::vector<SweepRow> feasibility_sweep(const std::vector<SweepPoint>& grid,
                                        const ConditionEstimatorConfig& config,
                                        const std::string& store_path = "");

}  // namespace emc
