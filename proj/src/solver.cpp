#include "emc/solver.hpp"

#include <cmath>

#include "emc/errors.hpp"
#include "emc/oracles.hpp"
#include "emc/parallel.hpp"

namespace emc {

namespace {

double positive_power(double y, double p) { return y > 0.0 ? std::pow(y, p) : 0.0; }

double sup_exit_for(const Domain& domain, const std::vector<Point>& fallback_grid,
                    const SimParams& params, unsigned workers) {
    Point center;
    double ri = 0.0, ro = 0.0;
    if (domain.radial_profile(center, ri, ro)) {
        if (ri == 0.0) {
            return ro * ro / static_cast<double>(domain.dim());  // ball, sup at the center
        }
        if (domain.dim() == 3) {
            return annulus_sup_exit_time(AnnulusSpec3D(ri, ro, center)).first;
        }
    }
    // Monte Carlo fallback over a thinned node grid.
    std::vector<Point> grid;
    const std::size_t stride = std::max<std::size_t>(1, fallback_grid.size() / 64);
    for (std::size_t i = 0; i < fallback_grid.size(); i += stride) grid.push_back(fallback_grid[i]);
    const ExtremumEstimate ext = extremum_over(domain, Quantity::exit_time(), ExtremumMode::Sup,
                                               grid, params, 2000, workers);
    return ext.value;
}

}  // namespace

Field apply_t(const Field& u, const Domain& domain, double lambda, double p,
              const SimParams& params, std::uint64_t n_per_node, unsigned workers) {
    if (!(p > 1.0)) throw InputError("apply_t: need p > 1");
    if (!(lambda > 0.0)) throw InputError("apply_t: need lambda > 0");
    if (n_per_node < 1) throw InputError("apply_t: need at least one path per node");

    // h(u) with the negative part cut off; interpolation undershoot must not
    // produce complex powers.
    auto g = [&](const Point& x) { return lambda * positive_power(u.evaluate(x), p); };

    const std::vector<Point>& nodes = u.nodes();
    std::vector<double> new_values(nodes.size(), 0.0);
    // Identical path indices for every node and every call: common random
    // numbers across Picard iterations and spatially correlated noise
    // between neighboring nodes.
    parallel_for(nodes.size(), workers, [&](std::size_t i) {
        double sum = 0.0;
        for (std::uint64_t j = 0; j < n_per_node; ++j) {
            sum += functional_sample(domain, g, nodes[i], params, j).functional_value;
        }
        new_values[i] = std::max(sum / static_cast<double>(n_per_node), 0.0);
    });
    Field out(domain, nodes, std::move(new_values), u.interp(), 8, u.absorption_shell());
    return out;
}

std::pair<Field, IterationTrace> picard_solve(const Domain& domain, double lambda, double p,
                                              const Field& u0, const SimParams& params,
                                              const PicardOptions& options) {
    IterationTrace trace;
    const double u0_norm = u0.sup_norm();
    const double m_hint = options.m_hint > 0.0 ? options.m_hint : std::max(u0_norm, 1e-12);
    const double sup_exit = options.sup_exit_hint > 0.0
                                ? options.sup_exit_hint
                                : sup_exit_for(domain, u0.nodes(), params, options.workers);
    trace.contraction_estimate = lambda * p * std::pow(m_hint, p - 1.0) * sup_exit;
    trace.contraction_warning = trace.contraction_estimate >= 1.0;

    const double divergence_cap = 10.0 * std::max(m_hint, u0_norm);
    Field current = u0;
    for (std::size_t it = 0; it < options.max_iter; ++it) {
        Field next = apply_t(current, domain, lambda, p, params, options.n_per_node,
                             options.workers);
        double change = 0.0;
        for (std::size_t i = 0; i < next.values().size(); ++i) {
            change = std::max(change, std::abs(next.values()[i] - current.values()[i]));
        }
        const double norm = next.sup_norm();
        trace.steps.push_back({change, norm});
        current = std::move(next);
        if (norm > divergence_cap) {
            trace.status = SolveStatus::Diverged;
            return {std::move(current), std::move(trace)};
        }
        if (change < options.tol) {
            trace.converged = true;
            trace.status = SolveStatus::Converged;
            return {std::move(current), std::move(trace)};
        }
    }
    trace.status = SolveStatus::MaxIterations;
    return {std::move(current), std::move(trace)};
}

ResidualReport residual_check(const Field& u, const Domain& domain, double lambda, double p,
                              double stencil_h, int factor, bool constant_source) {
    if (!(stencil_h > 0.0)) throw InputError("residual_check: stencil_h must be positive");
    if (factor != 1 && factor != 2) throw InputError("residual_check: factor must be 1 or 2");

    const int d = domain.dim();
    const double margin = stencil_h * std::sqrt(static_cast<double>(d));
    const bool exact_lattice =
        u.has_lattice() && std::abs(u.lattice_spacing() - stencil_h) < 1e-12 * stencil_h;

    ResidualReport report;
    const double h2 = stencil_h * stencil_h;
    for (std::size_t i = 0; i < u.nodes().size(); ++i) {
        const Point& x = u.nodes()[i];
        if (domain.signed_distance(x) > -margin) continue;
        const double center_value = u.values()[i];
        double lap = 0.0;
        bool eligible = true;
        if (exact_lattice) {
            for (int axis = 0; axis < d && eligible; ++axis) {
                const auto plus = u.lattice_neighbor(i, axis, +1);
                const auto minus = u.lattice_neighbor(i, axis, -1);
                if (!plus || !minus) {
                    eligible = false;
                    break;
                }
                lap += (u.values()[*plus] - 2.0 * center_value + u.values()[*minus]) / h2;
            }
        } else {
            Point probe = x;
            for (int axis = 0; axis < d; ++axis) {
                probe[axis] = x[axis] + stencil_h;
                const double up = u.evaluate(probe);
                probe[axis] = x[axis] - stencil_h;
                const double dn = u.evaluate(probe);
                probe[axis] = x[axis];
                lap += (up - 2.0 * center_value + dn) / h2;
            }
        }
        if (!eligible) continue;
        const double source = constant_source
                                  ? static_cast<double>(factor)
                                  : static_cast<double>(factor) * lambda *
                                        positive_power(center_value, p);
        const double r = lap + source;
        report.per_node.push_back({x, center_value, lap, r});
        report.sup_residual = std::max(report.sup_residual, std::abs(r));
        ++report.eligible_nodes;
    }
    if (report.eligible_nodes == 0) {
        throw InputError("residual_check: no nodes with full interior stencils (domain too thin)");
    }
    if (constant_source) {
        report.normalized = report.sup_residual / static_cast<double>(factor);
    } else {
        const double norm = u.sup_norm();
        report.normalized =
            norm > 0.0 ? report.sup_residual / (lambda * std::pow(norm, p)) : 0.0;
    }
    return report;
}

MembershipReport membership_b(const Field& u, const Partition& partition,
                              const HypothesesConstants& hyp, const SimParams& params,
                              std::uint64_t n_per_point, std::size_t grid_points,
                              unsigned workers) {
    const Domain& parent = partition.parent();
    const Domain& d1 = partition.d1();

    auto weighted = [&](bool in_first_region) {
        return [&u, &partition, in_first_region](const Point& x) {
            const bool in_region =
                in_first_region ? partition.in_d1(x) : partition.in_d2(x);
            return in_region ? u.evaluate(x) : 0.0;
        };
    };

    // Grid in D1.
    const std::vector<Point> d1_grid = condition_grid(d1, 16, grid_points, params.seed + 101);
    // Grid in D2 = parent minus D1, by filtered rejection from the parent.
    std::vector<Point> d2_grid;
    std::uint64_t salt = 0;
    while (d2_grid.size() < grid_points && salt < 64) {
        for (Point& pnt : sample_interior(parent, grid_points, params.seed + 211 + salt)) {
            if (partition.in_d2(pnt) && d2_grid.size() < grid_points) {
                d2_grid.push_back(std::move(pnt));
            }
        }
        ++salt;
    }
    if (d2_grid.empty()) throw InputError("membership_b: could not sample points in D2");

    MembershipReport rep;
    {
        const ExtremumEstimate inf1 =
            extremum_over(parent, Quantity::green(weighted(true), "u*1_D1"), ExtremumMode::Inf,
                          d1_grid, params, n_per_point, workers);
        rep.inf_d1.value = inf1.value;
        rep.inf_d1.margin = inf1.value - hyp.m;
        rep.inf_d1.holds = rep.inf_d1.margin >= 0.0;
    }
    {
        const ExtremumEstimate sup2 =
            extremum_over(parent, Quantity::green(weighted(false), "u*1_D2"), ExtremumMode::Sup,
                          d2_grid, params, n_per_point, workers);
        rep.sup_d2.value = sup2.value;
        rep.sup_d2.margin = hyp.m - sup2.value;
        rep.sup_d2.holds = rep.sup_d2.margin >= 0.0;
    }
    rep.sup_norm.value = u.sup_norm();
    rep.sup_norm.margin = hyp.big_m - rep.sup_norm.value;
    rep.sup_norm.holds = rep.sup_norm.margin >= 0.0;
    return rep;
}

}  // namespace emc
