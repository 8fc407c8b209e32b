#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "emc/conditions.hpp"
#include "emc/errors.hpp"
#include "emc/oracles.hpp"

using namespace emc;

namespace {

ConditionEstimatorConfig cheap_config(double h = 1e-3, std::uint64_t n = 300) {
    ConditionEstimatorConfig cfg;
    cfg.params.scheme = Scheme::EulerMaruyama;
    cfg.params.step_h = h;
    cfg.params.seed = 1234;
    cfg.n_per_point = n;
    cfg.radial_grid = 8;
    cfg.scattered_grid = 64;
    return cfg;
}

}  // namespace

TEST_CASE("hypotheses validation") {
    const Partition part(Domain::ball(origin(3), 0.5), Domain::ball(origin(3), 1.0));
    CHECK_THROWS_AS(Hypotheses(0.0, 3.0, 0.1, 1.0, part), InputError);
    CHECK_THROWS_AS(Hypotheses(1.0, 1.0, 0.1, 1.0, part), InputError);
    CHECK_THROWS_AS(Hypotheses(1.0, 3.0, 0.0, 1.0, part), InputError);
}

TEST_CASE("cond1 saturates exactly at the oracle M for the ball") {
    const Partition part(Domain::ball(origin(3), 0.5), Domain::ball(origin(3), 1.0));
    const double big_m = m_constant(1.0 / 3.0, 1.0, 3.0);  // sqrt(3)
    const Hypotheses hyp(1.0, 3.0, 0.01, big_m, part);
    const ConditionsReport rep = check_conditions(hyp, cheap_config());
    CHECK(rep.cond1.lhs == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(std::abs(rep.cond1.margin) < 1e-12);
    CHECK(rep.cond1.lhs_std_error == 0.0);  // oracle branch
    CHECK(rep.m_le_big_m);
}

TEST_CASE("cond1 verdict is invariant under the lambda-M rescaling") {
    const Partition part(Domain::ball(origin(3), 0.5), Domain::ball(origin(3), 1.0));
    const double p = 3.0;
    const double saturating = m_constant(1.0 / 3.0, 1.0, p);
    const double c = 3.7;
    for (double factor : {0.9, 1.5}) {
        const Hypotheses base(1.0, p, 0.01, factor * saturating, part);
        const Hypotheses scaled(c, p, 0.01, std::pow(c, 1.0 / (1.0 - p)) * factor * saturating,
                                part);
        const ConditionsReport a = check_conditions(base, cheap_config());
        const ConditionsReport b = check_conditions(scaled, cheap_config());
        CHECK(a.cond1.verdict == b.cond1.verdict);
        CHECK(a.cond1.verdict == (factor < 1.0));
    }
}

TEST_CASE("truncated estimates taint the report") {
    const Partition part(Domain::ball(origin(3), 0.5), Domain::ball(origin(3), 1.0));
    ConditionEstimatorConfig cfg = cheap_config();
    cfg.params.max_steps = 5;
    cfg.n_per_point = 50;
    const ConditionsReport rep =
        check_conditions(Hypotheses(1.0, 3.0, 0.01, 1.0, part), cfg);
    CHECK(rep.tainted);
}

TEST_CASE("feasible-constant search identifies cond3 on the large ball") {
    // Example-1 regime: ball of radius 100, p = 3.
    const double t_outer = 100.0;
    const Domain ball = Domain::ball(origin(3), t_outer);
    const Partition part(Domain::ball(origin(3), t_outer / 2.0), ball);
    ConditionEstimatorConfig cfg = cheap_config(1.0, 100);
    cfg.radial_grid = 6;
    const FeasibleConstantsResult res = find_feasible_constants(ball, part, 1.0, 3.0, cfg);
    CHECK_FALSE(res.constants.has_value());
    CHECK(res.failing == "cond3");
    CHECK(res.report.cond1.margin >= 0.0);  // saturated by construction
    CHECK(res.report.cond2.margin >= 0.0);
    CHECK(res.report.cond3.margin < 0.0);
    CHECK_THROWS_AS(find_feasible_constants(ball, part, 1.0, 0.5, cfg), InputError);
}

TEST_CASE("example 2 partition leaves the maximizing radius in D2") {
    const double delta = 1.0, t_outer = 2.0;
    const Partition part = example2_partition(delta, t_outer);
    const double z_star = std::cbrt(delta * t_outer * (t_outer + delta) / 2.0);
    CHECK(part.in_d2(radial_point(origin(3), z_star)));
    CHECK_FALSE(part.in_d1(radial_point(origin(3), z_star)));
    Point c;
    double ri = 0.0, ro = 0.0;
    CHECK(part.parent().radial_profile(c, ri, ro));
    CHECK(ri == delta);
    CHECK(ro == t_outer);
}

TEST_CASE("example 2 inequality report") {
    CHECK_THROWS_AS(example2_inequality_report(1.0, 10.0, 1.5, 1.0), InputError);
    CHECK_THROWS_AS(example2_inequality_report(1.0, 10.0, 0.9, 1.0), InputError);
    CHECK_THROWS_AS(example2_inequality_report(10.0, 1.0, 1.2, 1.0), InputError);

    const Example2Report rep = example2_inequality_report(1.0, 10.0, 1.2, 1.0);
    CHECK(rep.sup_exit == doctest::Approx(32.1793).epsilon(1e-4));
    CHECK(rep.big_m == doctest::Approx(std::pow(rep.sup_exit, -5.0)).epsilon(1e-12));
    CHECK_FALSE(rep.printed_direction_holds);

    // Near the exponent boundary p -> sqrt(2), both sides tend to 1.
    const Example2Report limit = example2_inequality_report(1.0, 2.0, 1.41421, 1.0);
    CHECK(limit.m_exponent_side == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(limit.bound_side == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("multiplicity enumeration") {
    const Domain parent = Domain::ball(origin(3), 10.0);
    const std::vector<Domain> comps = {Domain::ball(Point{3.0, 0.0, 0.0}, 1.0),
                                       Domain::ball(Point{-3.0, 0.0, 0.0}, 1.0),
                                       Domain::ball(Point{0.0, 3.0, 0.0}, 1.0)};
    const std::vector<std::pair<double, double>> constants = {{1.0, 5.0}, {2.0, 4.0}, {3.0, 6.0}};
    const auto sets = multiplicity_enumerate(parent, comps, constants, 1.0, 3.0, cheap_config(),
                                             /*evaluate_conditions=*/false);
    REQUIRE(sets.size() == 7);

    // Brute-force max/min over every subset.
    for (const MultiplicitySet& set : sets) {
        double m_hat = 0.0, big_m_hat = 1e300;
        for (std::size_t one_based : set.index_set) {
            m_hat = std::max(m_hat, constants[one_based - 1].first);
            big_m_hat = std::min(big_m_hat, constants[one_based - 1].second);
        }
        CHECK(set.m_hat == m_hat);
        CHECK(set.big_m_hat == big_m_hat);
    }
    // Singletons copy the component constants; the {1,3} subset gives (3, 5).
    for (const MultiplicitySet& set : sets) {
        if (set.index_set == std::vector<std::size_t>{1, 3}) {
            CHECK(set.m_hat == 3.0);
            CHECK(set.big_m_hat == 5.0);
        }
    }

    const std::vector<Domain> overlapping = {Domain::ball(origin(3), 1.0),
                                             Domain::ball(Point{0.5, 0.0, 0.0}, 1.0)};
    CHECK_THROWS_AS(multiplicity_enumerate(parent, overlapping,
                                           {{1.0, 2.0}, {1.0, 2.0}}, 1.0, 3.0, cheap_config(),
                                           false),
                    InputError);
}

TEST_CASE("feasibility sweep: degenerate grid, resume and per-row errors") {
    ConditionEstimatorConfig cfg = cheap_config(1e-3, 150);
    cfg.radial_grid = 6;

    // One-point sweep reproduces find_feasible_constants.
    const std::vector<SweepRow> single = feasibility_sweep({{1.0, 2.0, 1.2, 0.5}}, cfg);
    REQUIRE(single.size() == 1);
    const Partition part = example2_partition(1.0, 2.0);
    const FeasibleConstantsResult direct =
        find_feasible_constants(part.parent(), part, 0.5, 1.2, cfg);
    CHECK(single[0].feasible == direct.constants.has_value());
    CHECK(single[0].failing == direct.failing);
    CHECK(single[0].cond1_margin == direct.report.cond1.margin);
    CHECK(single[0].cond3_margin == direct.report.cond3.margin);

    // Store-backed resume.
    const std::string store =
        (std::filesystem::temp_directory_path() / "emc-test-sweep.jsonl").string();
    std::filesystem::remove(store);
    const std::vector<SweepPoint> grid = {{1.0, 2.0, 1.2, 0.5}, {3.0, 2.0, 1.2, 0.5}};
    const auto first = feasibility_sweep(grid, cfg, store);
    REQUIRE(first.size() == 2);
    CHECK_FALSE(first[0].from_cache);
    CHECK(first[1].error != "");  // delta >= T is a per-row failure, sweep continued
    const auto second = feasibility_sweep(grid, cfg, store);
    CHECK(second[0].from_cache);
    CHECK(second[1].from_cache);
    CHECK(second[0].cond1_margin == first[0].cond1_margin);
    std::filesystem::remove(store);
}
