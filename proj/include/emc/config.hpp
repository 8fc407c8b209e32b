#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emc/conditions.hpp"
#include "emc/geometry.hpp"
#include "emc/simulate.hpp"

namespace emc {

inline constexpr const char* kToolkitVersion = "0.1.0";
/// The schema every config is validated against lives at this repository
/// path; the validation code enforces the same constraints.
inline constexpr const char* kSchemaPath = "schema/config.schema.json";

Domain domain_from_json(const nlohmann::json& j, const std::string& where);
SimParams sim_params_from_json(const nlohmann::json& j, const std::string& where);

struct HypothesesConfig {
    double lambda = 1.0;
    double p = 2.0;
    std::optional<double> m;
    std::optional<double> big_m;
};

struct GridConfig {
    std::uint64_t n_paths = 200000;       // point estimators
    std::uint64_t n_per_point = 20000;    // extremum grids
    std::size_t radial = 64;
    std::size_t scattered = 512;
    double envelope_z = 3.0;
};

struct SolveConfig {
    double tol = 1e-4;
    std::size_t max_iter = 40;
    std::uint64_t n_per_node = 256;
    double node_spacing = 0.1;
    double node_margin = 0.0;
    double u0_constant = 0.0;
    int factor = 2;
    double stencil_h = 0.0;  // 0 = node_spacing
};

struct MultiplicityConfig {
    std::vector<Domain> components;
    std::vector<std::pair<double, double>> constants;  // (m_i, M_i) per component
    bool evaluate = false;  // run check_conditions on every subset
};

struct SweepConfig {
    std::vector<double> delta;
    std::vector<double> t_outer;
    std::vector<double> p;
    std::vector<double> lambda;
    std::string store;  // JSONL path, relative to out_dir when not absolute
};

/// Parsed and validated run configuration. Unknown keys are rejected so a
/// typo cannot silently fall back to a default.
struct RunConfig {
    RunConfig(int version_, std::string digest_, Domain domain_)
        : version(version_), digest(std::move(digest_)), domain(std::move(domain_)) {}

    int version = 0;
    std::string digest;  // stable hash of the canonicalized JSON
    Domain domain;
    std::optional<Domain> d1;     // partition subregion
    std::optional<Domain> region; // occupation region
    std::optional<Point> point;   // evaluation point for point estimators
    SimParams sim;
    HypothesesConfig hypotheses;
    GridConfig grids;
    SolveConfig solve;
    SweepConfig sweep;
    std::optional<MultiplicityConfig> multiplicity;
    std::uint64_t seed = 0;
    unsigned workers = 0;  // 0 = available parallelism
    std::string out_dir = "out";
    std::string format = "json";  // json | csv

    Partition partition() const;  // throws ConfigError when d1 is absent

    static RunConfig parse(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
};

/// Estimator configuration for the conditions module assembled from a
/// RunConfig (grids + sim params + workers).
ConditionEstimatorConfig condition_config(const RunConfig& cfg);

}  // namespace emc
