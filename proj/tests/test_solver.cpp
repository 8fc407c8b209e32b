#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "emc/errors.hpp"
#include "emc/oracles.hpp"
#include "emc/solver.hpp"

using namespace emc;

namespace {

SimParams em_params(double h, std::uint64_t seed = 0) {
    SimParams p;
    p.scheme = Scheme::EulerMaruyama;
    p.step_h = h;
    p.seed = seed;
    return p;
}

Field constant_field(const Domain& domain, double spacing, double value) {
    Field f = Field::lattice(domain, spacing);
    for (double& v : f.values()) v = value;
    return f;
}

}  // namespace

TEST_CASE("lattice field basics") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    Field f = Field::lattice(ball, 0.25);
    CHECK(f.has_lattice());
    CHECK(f.lattice_spacing() == 0.25);
    REQUIRE(f.nodes().size() > 50);
    for (const Point& p : f.nodes()) CHECK(ball.contains(p));

    // Zero-Dirichlet extension outside the domain.
    CHECK(f.evaluate(Point{5.0, 0.0, 0.0}) == 0.0);

    // Exact node hits return the stored value.
    for (std::size_t i = 0; i < f.values().size(); ++i) {
        f.values()[i] = static_cast<double>(i) - 3.0;
    }
    CHECK(f.evaluate(f.nodes()[7]) == f.values()[7]);
    CHECK(f.sup_norm() == static_cast<double>(f.nodes().size() - 1) - 3.0);

    f.clamp_nonnegative();
    for (double v : f.values()) CHECK(v >= 0.0);

    // Interior lattice neighbors exist and sit one cell apart.
    std::size_t center = 0;
    for (std::size_t i = 0; i < f.nodes().size(); ++i) {
        if (f.nodes()[i].norm() < f.nodes()[center].norm()) center = i;
    }
    const auto up = f.lattice_neighbor(center, 0, +1);
    REQUIRE(up.has_value());
    CHECK(f.nodes()[*up][0] == doctest::Approx(f.nodes()[center][0] + 0.25));
    CHECK(f.nodes()[*up][1] == f.nodes()[center][1]);

    // Stepping far past the boundary leaves the node set.
    CHECK_FALSE(f.lattice_neighbor(center, 0, 64).has_value());
}

TEST_CASE("nearest-node interpolation snaps to the closest node") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    Field lat = Field::lattice(ball, 0.5);
    Field f(ball, lat.nodes(), lat.values(), Interp::NearestNode);
    for (std::size_t i = 0; i < f.values().size(); ++i) f.values()[i] = double(i + 1);
    Point probe = f.nodes()[2];
    probe[0] += 0.01;
    CHECK(f.evaluate(probe) == f.values()[2]);
}

TEST_CASE("apply_t maps the zero field to the zero field exactly") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Field zero = Field::lattice(ball, 0.3);
    const Field image = apply_t(zero, ball, 1.0, 2.0, em_params(1e-2, 5), 20);
    for (double v : image.values()) CHECK(v == 0.0);
}

TEST_CASE("apply_t input validation") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Field zero = Field::lattice(ball, 0.3);
    CHECK_THROWS_AS(apply_t(zero, ball, 1.0, 1.0, em_params(1e-2), 20), InputError);
    CHECK_THROWS_AS(apply_t(zero, ball, 0.0, 2.0, em_params(1e-2), 20), InputError);
    CHECK_THROWS_AS(apply_t(zero, ball, 1.0, 2.0, em_params(1e-2), 0), InputError);
}

TEST_CASE("apply_t on a constant field reproduces the scaled exit time") {
    // With u = c, T u = lambda c^p E[tau], which at the center of the unit
    // ball is lambda c^p / 3.
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Field u = constant_field(ball, 0.25, 1.0);
    const Field tu = apply_t(u, ball, 1.0, 2.0, em_params(1e-3, 9), 400);
    std::size_t center = 0;
    for (std::size_t i = 0; i < tu.nodes().size(); ++i) {
        if (tu.nodes()[i].norm() < tu.nodes()[center].norm()) center = i;
    }
    const double oracle = ball_exit_time(1.0, 3, tu.nodes()[center]);
    CHECK(tu.values()[center] == doctest::Approx(oracle).epsilon(0.1));
}

TEST_CASE("apply_t is positive and monotone under matched seeds") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Field lo = constant_field(ball, 0.3, 0.5);
    const Field hi = constant_field(ball, 0.3, 1.0);
    const SimParams params = em_params(1e-2, 17);
    const Field tlo = apply_t(lo, ball, 1.0, 2.0, params, 50);
    const Field thi = apply_t(hi, ball, 1.0, 2.0, params, 50);
    REQUIRE(tlo.values().size() == thi.values().size());
    for (std::size_t i = 0; i < tlo.values().size(); ++i) {
        CHECK(tlo.values()[i] >= 0.0);
        // Same driving paths, pointwise larger integrand.
        CHECK(tlo.values()[i] <= thi.values()[i]);
    }
}

TEST_CASE("picard iteration from the zero field converges immediately") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Field zero = Field::lattice(ball, 0.3);
    PicardOptions opts;
    opts.tol = 1e-12;
    opts.n_per_node = 20;
    const auto [field, trace] = picard_solve(ball, 0.2, 2.0, zero, em_params(1e-2, 3), opts);
    CHECK(trace.status == SolveStatus::Converged);
    CHECK(trace.converged);
    CHECK(trace.steps.size() == 1);
    CHECK(trace.steps[0].sup_change == 0.0);
    CHECK(field.sup_norm() == 0.0);
    CHECK_FALSE(trace.contraction_warning);
}

TEST_CASE("picard iteration flags divergence") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Field u0 = constant_field(ball, 0.4, 1.0);
    PicardOptions opts;
    opts.n_per_node = 50;
    opts.max_iter = 10;
    const auto [field, trace] = picard_solve(ball, 1000.0, 2.0, u0, em_params(1e-2, 3), opts);
    CHECK(trace.status == SolveStatus::Diverged);
    CHECK_FALSE(trace.converged);
    CHECK(trace.contraction_warning);
    CHECK(trace.steps.back().sup_norm > 10.0);
}

TEST_CASE("residual stencil is exact on a quadratic lattice field") {
    // u = (1 - |x|^2)/3 solves (1/2) Lap u = -1, so with the factor-2
    // convention the constant-source residual Lap_h u + 2 vanishes to
    // rounding: central differences are exact on quadratics.
    const Domain ball = Domain::ball(origin(3), 1.0);
    Field u = Field::lattice(ball, 0.05);
    for (std::size_t i = 0; i < u.nodes().size(); ++i) {
        const double r2 = u.nodes()[i].norm() * u.nodes()[i].norm();
        u.values()[i] = (1.0 - r2) / 3.0;
    }
    const ResidualReport rep =
        residual_check(u, ball, 1.0, 2.0, 0.05, 2, /*constant_source=*/true);
    CHECK(rep.eligible_nodes > 1000);
    CHECK(rep.sup_residual <= 1e-10);
    CHECK(rep.normalized <= 1e-10);
}

TEST_CASE("residual check validation") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Field u = Field::lattice(ball, 0.2);
    CHECK_THROWS_AS(residual_check(u, ball, 1.0, 2.0, 0.0), InputError);
    CHECK_THROWS_AS(residual_check(u, ball, 1.0, 2.0, 0.2, 3), InputError);
    // Stencil wider than the domain leaves no eligible nodes.
    CHECK_THROWS_AS(residual_check(u, ball, 1.0, 2.0, 0.9), InputError);
}

TEST_CASE("residual normalization is zero for the zero field") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Field zero = Field::lattice(ball, 0.1);
    const ResidualReport rep = residual_check(zero, ball, 1.0, 2.0, 0.1);
    CHECK(rep.sup_residual == 0.0);
    CHECK(rep.normalized == 0.0);
}

TEST_CASE("membership clauses on constant candidate fields") {
    const Domain parent = Domain::ball(origin(3), 1.0);
    const Partition part(Domain::ball(origin(3), 0.5), parent);
    const SimParams params = em_params(1e-2, 23);
    const HypothesesConstants hyp{1.0, 2.0, 0.1, 1.0};

    // The zero field fails the D1 lower bound but satisfies the other two.
    const Field zero = Field::lattice(parent, 0.25);
    const MembershipReport z = membership_b(zero, part, hyp, params, 50, 32);
    CHECK_FALSE(z.inf_d1.holds);
    CHECK(z.inf_d1.value == 0.0);
    CHECK(z.sup_d2.holds);
    CHECK(z.sup_d2.margin == hyp.m);
    CHECK(z.sup_norm.holds);

    // A field pinned at M saturates the norm clause with zero margin.
    const Field at_cap = constant_field(parent, 0.25, hyp.big_m);
    const MembershipReport c = membership_b(at_cap, part, hyp, params, 50, 32);
    CHECK(c.sup_norm.holds);
    CHECK(c.sup_norm.margin == 0.0);
}
