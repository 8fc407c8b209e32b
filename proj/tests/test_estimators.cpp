#include <doctest.h>

#include <cmath>

#include "emc/errors.hpp"
#include "emc/estimators.hpp"

using namespace emc;

namespace {

constexpr double kDyadicH = 0.000244140625;  // 2^-12

SimParams em_params(double h, std::uint64_t seed = 0) {
    SimParams p;
    p.scheme = Scheme::EulerMaruyama;
    p.step_h = h;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("ball exit-time estimate approaches the oracle") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    SimParams params = em_params(1e-3, 4);
    params.brownian_bridge = true;
    const Estimate est = expected_exit_time(ball, origin(3), params, 20000);
    CHECK(est.n_paths == 20000);
    CHECK(est.truncated_fraction == 0.0);
    CHECK(std::abs(est.mean - 1.0 / 3.0) < 5.0 * est.std_error + 2e-3);
    CHECK_THROWS_AS(expected_exit_time(ball, origin(3), params, 1), InputError);
}

TEST_CASE("occupation of the domain equals the exit time under matched seeds") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const SimParams params = em_params(1e-3, 21);
    const Estimate occ = expected_occupation(ball, ball, origin(3), params, 2000);
    const Estimate ext = expected_exit_time(ball, origin(3), params, 2000);
    CHECK(occ.mean == ext.mean);
    CHECK(occ.std_error == ext.std_error);
}

TEST_CASE("occupation of a disjoint region is exactly zero") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Domain far = Domain::ball(Point{10.0, 0.0, 0.0}, 1.0);
    const Estimate est = expected_occupation(ball, far, origin(3), em_params(1e-3, 2), 500);
    CHECK(est.mean == 0.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("occupation additivity over a partition is exact per matched path") {
    const Domain parent = Domain::ball(origin(3), 1.0);
    const Partition part(Domain::ball(origin(3), 0.6), parent);
    const SimParams params = em_params(kDyadicH, 8);
    const Point x = radial_point(origin(3), 0.4);
    const std::uint64_t n = 400;
    const Estimate occ1 = expected_occupation(parent, part.d1(), x, params, n);
    const Estimate occ2 = green_apply(
        parent, [&part](const Point& w) { return part.in_d2(w) ? 1.0 : 0.0; }, x, params, n, 1,
        "1_D2");
    const Estimate ext = expected_exit_time(parent, x, params, n);
    // Dyadic h makes every per-path sum a multiple of 2^-12, so the means
    // add without rounding.
    CHECK(occ1.mean + occ2.mean == doctest::Approx(ext.mean).epsilon(1e-15));
}

TEST_CASE("occupation is monotone under region inclusion with matched seeds") {
    const Domain parent = Domain::ball(origin(3), 1.0);
    const Domain small = Domain::ball(origin(3), 0.4);
    const Domain large = Domain::ball(origin(3), 0.8);
    const SimParams params = em_params(1e-3, 13);
    const Point x = radial_point(origin(3), 0.2);
    const Estimate u = expected_occupation(parent, small, x, params, 500);
    const Estimate v = expected_occupation(parent, large, x, params, 500);
    CHECK(u.mean <= v.mean);
}

TEST_CASE("green potential reductions and exact scaling") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const SimParams params = em_params(1e-3, 30);
    const Point x = origin(3);
    const Estimate one = green_apply(ball, [](const Point&) { return 1.0; }, x, params, 800);
    const Estimate ext = expected_exit_time(ball, x, params, 800);
    CHECK(one.mean == doctest::Approx(ext.mean).epsilon(1e-12));

    // Scaling by a power of two is exact in floating point.
    const Estimate doubled =
        green_apply(ball, [](const Point&) { return 2.0; }, x, params, 800);
    CHECK(doubled.mean == 2.0 * one.mean);
}

TEST_CASE("green potential of an indicator equals the occupation estimate") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Domain inner = Domain::ball(origin(3), 0.5);
    const SimParams params = em_params(kDyadicH, 44);
    const Point x = origin(3);
    const Estimate g = green_apply(
        ball, [&inner](const Point& w) { return inner.contains(w) ? 1.0 : 0.0; }, x, params, 500);
    const Estimate occ = expected_occupation(ball, inner, x, params, 500);
    CHECK(g.mean == occ.mean);
}

TEST_CASE("extremum over a grid") {
    const Domain ann = Domain::annulus(origin(3), 1.0, 2.0);
    SimParams params;
    params.scheme = Scheme::WalkOnSpheres;
    params.eps_shell = 1e-4;
    params.seed = 3;

    CHECK_THROWS_AS(
        extremum_over(ann, Quantity::exit_time(), ExtremumMode::Sup, {}, params, 100),
        InputError);

    // A single-point grid returns that point's estimate.
    const Point x = radial_point(origin(3), 1.5);
    const ExtremumEstimate single =
        extremum_over(ann, Quantity::exit_time(), ExtremumMode::Inf, {x}, params, 500);
    CHECK(single.per_point.size() == 1);
    CHECK(single.value == single.per_point[0].second.mean);
    CHECK(single.arg_point.coords == x.coords);

    // Grid refinement never decreases the sup under matched seeds.
    std::vector<Point> coarse, fine;
    for (int k = 0; k < 8; ++k) coarse.push_back(radial_point(origin(3), 1.1 + 0.1 * k));
    fine = coarse;
    fine.push_back(radial_point(origin(3), 1.44));
    const ExtremumEstimate sup_coarse =
        extremum_over(ann, Quantity::exit_time(), ExtremumMode::Sup, coarse, params, 500);
    const ExtremumEstimate sup_fine =
        extremum_over(ann, Quantity::exit_time(), ExtremumMode::Sup, fine, params, 500);
    CHECK(sup_fine.value >= sup_coarse.value);
}

TEST_CASE("inf of region occupation never exceeds sup of the exit time") {
    const Domain ann = Domain::annulus(origin(3), 1.0, 2.0);
    const Domain region = Domain::annulus(origin(3), 1.2, 1.8);
    const SimParams params = em_params(1e-3, 19);
    std::vector<Point> region_grid, domain_grid;
    for (int k = 0; k < 6; ++k) {
        region_grid.push_back(radial_point(origin(3), 1.25 + 0.1 * k));
        domain_grid.push_back(radial_point(origin(3), 1.05 + 0.15 * k));
    }
    const ExtremumEstimate inf_occ = extremum_over(ann, Quantity::occupation(region),
                                                   ExtremumMode::Inf, region_grid, params, 400);
    const ExtremumEstimate sup_exit =
        extremum_over(ann, Quantity::exit_time(), ExtremumMode::Sup, domain_grid, params, 400);
    CHECK(inf_occ.value <= sup_exit.value);
}

TEST_CASE("condition grids are radial for shells and scattered otherwise") {
    const Domain ann = Domain::annulus(origin(3), 1.0, 2.0);
    const auto radial = condition_grid(ann, 16, 128, 5);
    CHECK(radial.size() == 16);
    for (const Point& p : radial) {
        CHECK(ann.contains(p));
        CHECK(p[1] == 0.0);
    }
    const Domain ball = Domain::ball(origin(3), 1.0);
    const auto ball_grid = condition_grid(ball, 16, 128, 5);
    CHECK(ball_grid.front().norm() == 0.0);  // innermost point is the center

    const Domain csg =
        Domain::union_of({Domain::ball(origin(3), 1.0), Domain::ball(Point{3.0, 0.0, 0.0}, 1.0)});
    const auto scattered = condition_grid(csg, 16, 128, 5);
    CHECK(scattered.size() == 128);
    for (const Point& p : scattered) CHECK(csg.contains(p));
}

TEST_CASE("estimates carry a stable configuration digest") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const SimParams params = em_params(1e-3, 1);
    const Estimate a = expected_exit_time(ball, origin(3), params, 100);
    const Estimate b = expected_exit_time(ball, origin(3), params, 100);
    CHECK(a.config_digest == b.config_digest);
    const Estimate c = expected_exit_time(ball, origin(3), params, 200);
    CHECK(a.config_digest != c.config_digest);
}
