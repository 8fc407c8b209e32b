#pragma once

#include <optional>
#include <vector>

#include "emc/estimators.hpp"
#include "emc/field.hpp"
#include "emc/geometry.hpp"
#include "emc/simulate.hpp"

namespace emc {

struct IterationStep {
    double sup_change = 0.0;
    double sup_norm = 0.0;
};

enum class SolveStatus { Converged, MaxIterations, Diverged };

struct IterationTrace {
    std::vector<IterationStep> steps;
    double contraction_estimate = 0.0;  // lambda * p * M^(p-1) * sup E[tau]
    bool contraction_warning = false;   // attached when the estimate is >= 1
    bool converged = false;
    SolveStatus status = SolveStatus::MaxIterations;
};

/// One application of the fixed-point operator: node values become
/// G_D(lambda * max(u,0)^p) estimated from each node's own path block.
/// Matched path streams across calls (common random numbers).
Field apply_t(const Field& u, const Domain& domain, double lambda, double p,
              const SimParams& params, std::uint64_t n_per_node, unsigned workers = 1);

struct PicardOptions {
    double tol = 1e-8;            // sup-change stopping threshold
    std::size_t max_iter = 40;
    std::uint64_t n_per_node = 256;
    double m_hint = 0.0;          // expected bound on iterates; 0 = use |u0|
    double sup_exit_hint = 0.0;   // 0 = estimate (oracle shortcut if radial)
    unsigned workers = 1;
};

std::pair<Field, IterationTrace> picard_solve(const Domain& domain, double lambda, double p,
                                              const Field& u0, const SimParams& params,
                                              const PicardOptions& options);

struct ResidualRow {
    Point node;
    double value = 0.0;
    double laplacian = 0.0;
    double residual = 0.0;
};

struct ResidualReport {
    double sup_residual = 0.0;
    double normalized = 0.0;  // sup|r| / (lambda |u|^p); 0 for the zero field
    std::vector<ResidualRow> per_node;
    std::size_t eligible_nodes = 0;
};

/// Central-difference residual r = Lap_h u + factor * lambda * u^p at nodes
/// with full interior stencils. Lattice fields with stencil_h equal to the
/// lattice spacing use exact node values; other fields evaluate the stencil
/// through interpolation. `constant_source` replaces the nonlinearity by the
/// constant 1 (stencil calibration mode: r = Lap_h u + factor).
ResidualReport residual_check(const Field& u, const Domain& domain, double lambda, double p,
                              double stencil_h, int factor = 2, bool constant_source = false);

struct MembershipVerdict {
    bool holds = false;
    double margin = 0.0;   // signed distance to the bound, >= 0 when holds
    double value = 0.0;
};

struct MembershipReport {
    MembershipVerdict inf_d1;    // inf over D1 of L_D^u[D1] >= m
    MembershipVerdict sup_d2;    // sup over D2 of L_D^u[D2] <= m
    MembershipVerdict sup_norm;  // |u| <= M
};

struct HypothesesConstants {
    double lambda;
    double p;
    double m;
    double big_m;
};

/// Evaluates the three membership clauses for the candidate set of fields
/// over MC grids in D1 and D2.
MembershipReport membership_b(const Field& u, const Partition& partition,
                              const HypothesesConstants& hyp, const SimParams& params,
                              std::uint64_t n_per_point, std::size_t grid_points,
                              unsigned workers = 1);

}  // namespace emc
