#include <doctest.h>

#include <cmath>
#include <random>

#include "emc/errors.hpp"
#include "emc/geometry.hpp"

using namespace emc;

namespace {

std::vector<Point> bbox_points(const Domain& domain, std::size_t n, unsigned seed) {
    const Aabb box = domain.bounding_box();
    std::mt19937_64 gen(seed);
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Point p = origin(domain.dim());
        for (int i = 0; i < domain.dim(); ++i) {
            const auto ui = static_cast<std::size_t>(i);
            // Slightly enlarged box so exterior points appear too.
            std::uniform_real_distribution<double> dist(box.lo[ui] - 0.2, box.hi[ui] + 0.2);
            p[i] = dist(gen);
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

}  // namespace

TEST_CASE("containment on the primitives") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    CHECK(ball.contains(Point{0.5, 0.0, 0.0}));
    CHECK_FALSE(ball.contains(Point{1.0, 0.0, 0.0}));  // boundary is outside

    const Domain ann = Domain::annulus(origin(3), 1.0, 2.0);
    CHECK_FALSE(ann.contains(Point{0.5, 0.0, 0.0}));
    CHECK(ann.contains(Point{1.5, 0.0, 0.0}));
    CHECK_FALSE(ann.contains(Point{2.5, 0.0, 0.0}));
}

TEST_CASE("signed distance values") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    CHECK(ball.signed_distance(origin(3)) == doctest::Approx(-1.0));
    CHECK(ball.signed_distance(Point{2.0, 0.0, 0.0}) == doctest::Approx(1.0));

    const Domain ann = Domain::annulus(origin(3), 1.0, 2.0);
    CHECK(ann.signed_distance(Point{1.5, 0.0, 0.0}) == doctest::Approx(-0.5));
    CHECK(ann.signed_distance(Point{1.0, 0.0, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(Domain::ball(Point{0.0, 0.0}, 1.0), InputError);  // d = 2 rejected
    CHECK_THROWS_AS(Domain::ball(origin(3), 0.0), InputError);
    CHECK_THROWS_AS(Domain::annulus(origin(3), 2.0, 1.0), InputError);
    CHECK_THROWS_AS(Domain::annulus(origin(3), 0.0, 1.0), InputError);
    CHECK_THROWS_AS(Domain::union_of({}), InputError);
    CHECK_THROWS_AS(
        Domain::difference(Domain::ball(origin(3), 1.0), Domain::ball(Point{5.0, 0.0, 0.0}, 1.0)),
        InputError);
    const Domain ball = Domain::ball(origin(3), 1.0);
    CHECK_THROWS_AS(ball.signed_distance(Point{0.0, 0.0, 0.0, 0.0}), InputError);
    CHECK_THROWS_AS(ball.contains(Point{0.0, 0.0, 0.0, 0.0}), InputError);
}

TEST_CASE("signed_distance sign agrees with contains on random points") {
    const Domain shapes[] = {
        Domain::ball(origin(3), 1.0),
        Domain::annulus(origin(3), 1.0, 2.0),
        Domain::difference(Domain::ball(origin(3), 2.0), Domain::ball(Point{0.5, 0.0, 0.0}, 0.5)),
        Domain::union_of({Domain::ball(origin(3), 1.0), Domain::ball(Point{3.0, 0.0, 0.0}, 1.0)}),
    };
    for (const Domain& d : shapes) {
        for (const Point& p : bbox_points(d, 10000, 17)) {
            CHECK((d.signed_distance(p) < 0.0) == d.contains(p));
        }
    }
}

TEST_CASE("annulus containment on a radial grid") {
    const Domain ann = Domain::annulus(origin(3), 1.0, 2.0);
    for (int k = 0; k <= 300; ++k) {
        const double r = 0.01 + 2.49 * k / 300.0;
        CHECK(ann.contains(radial_point(origin(3), r)) == (r > 1.0 && r < 2.0));
    }
}

TEST_CASE("sample_interior contract") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const auto pts = sample_interior(ball, 1000, 7);
    REQUIRE(pts.size() == 1000);
    for (const Point& p : pts) CHECK(ball.contains(p));

    const auto again = sample_interior(ball, 1000, 7);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].coords == again[i].coords);
    }
}

TEST_CASE("sample_interior mean radius on the annulus") {
    // Uniform measure on A(1,2) in R^3: E r = 45/28, E r^2 = 93/35.
    const Domain ann = Domain::annulus(origin(3), 1.0, 2.0);
    const auto pts = sample_interior(ann, 1000, 11);
    double mean = 0.0;
    for (const Point& p : pts) mean += p.norm();
    mean /= static_cast<double>(pts.size());
    const double expected = 45.0 / 28.0;
    const double var = 93.0 / 35.0 - expected * expected;
    const double sigma = std::sqrt(var / static_cast<double>(pts.size()));
    CHECK(std::abs(mean - expected) < 5.0 * sigma);
}

TEST_CASE("sample_interior sub-ball volume fraction") {
    const Domain ball = Domain::ball(origin(3), 1.0);
    const Domain sub = Domain::ball(origin(3), 0.5);
    const auto pts = sample_interior(ball, 10000, 23);
    std::size_t inside = 0;
    for (const Point& p : pts) inside += sub.contains(p) ? 1 : 0;
    const double frac = static_cast<double>(inside) / static_cast<double>(pts.size());
    const double expected = 0.125;  // (1/2)^3
    const double sigma = std::sqrt(expected * (1.0 - expected) / 10000.0);
    CHECK(std::abs(frac - expected) < 4.0 * sigma);
}

TEST_CASE("degenerate domain rejection guard") {
    const Domain thin = Domain::annulus(origin(3), 1.0, 1.0000001);
    CHECK_THROWS_AS(sample_interior(thin, 10, 3), DegenerateDomainError);
}

TEST_CASE("boundary regularity certification") {
    CHECK(Domain::ball(origin(3), 1.0).regular_boundary());
    CHECK(Domain::annulus(origin(3), 1.0, 2.0).regular_boundary());
    CHECK(Domain::difference(Domain::ball(origin(3), 2.0), Domain::ball(origin(3), 0.5))
              .regular_boundary());
    // Overlapping union: conservative "not certified".
    CHECK_FALSE(Domain::union_of({Domain::ball(origin(3), 1.0),
                                  Domain::ball(Point{0.5, 0.0, 0.0}, 1.0)})
                    .regular_boundary());
    // Hole touching the outer sphere: not certified.
    CHECK_FALSE(Domain::difference(Domain::ball(origin(3), 1.0),
                                   Domain::ball(Point{0.5, 0.0, 0.0}, 0.5))
                    .regular_boundary());
}

TEST_CASE("partition membership and validation") {
    const Domain parent = Domain::ball(origin(3), 2.0);
    const Partition part(Domain::ball(origin(3), 1.0), parent);
    CHECK(part.in_d1(Point{0.5, 0.0, 0.0}));
    CHECK_FALSE(part.in_d2(Point{0.5, 0.0, 0.0}));
    CHECK(part.in_d2(Point{1.5, 0.0, 0.0}));
    CHECK_FALSE(part.in_d2(Point{2.5, 0.0, 0.0}));  // outside the parent

    CHECK_THROWS_AS(Partition(Domain::ball(Point{5.0, 0.0, 0.0}, 1.0), parent), InputError);
}

TEST_CASE("radial profile and canonical description") {
    Point c;
    double ri = 0.0, ro = 0.0;
    CHECK(Domain::ball(origin(3), 1.5).radial_profile(c, ri, ro));
    CHECK(ri == 0.0);
    CHECK(ro == 1.5);
    CHECK(Domain::annulus(origin(3), 1.0, 2.0).radial_profile(c, ri, ro));
    CHECK(ri == 1.0);
    CHECK_FALSE(Domain::union_of({Domain::ball(origin(3), 1.0)}).radial_profile(c, ri, ro));

    CHECK(Domain::ball(origin(3), 1.0).describe() ==
          Domain::ball(origin(3), 1.0).describe());
    CHECK(Domain::ball(origin(3), 1.0).describe() !=
          Domain::ball(origin(3), 2.0).describe());
}
