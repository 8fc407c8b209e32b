#include "emc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "emc/errors.hpp"
#include "emc/rng.hpp"

namespace emc {

double Point::norm() const {
    double s = 0.0;
    for (double c : coords) s += c * c;
    return std::sqrt(s);
}

double Point::dist(const Point& other) const {
    double s = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const double d = coords[i] - other.coords[i];
        s += d * d;
    }
    return std::sqrt(s);
}

Point origin(int dim) { return Point(std::vector<double>(static_cast<std::size_t>(dim), 0.0)); }

Point radial_point(const Point& center, double radius) {
    Point p = center;
    p[0] += radius;
    return p;
}

void check_dim(const Domain& domain, const Point& x, const char* where) {
    if (x.dim() != domain.dim()) {
        throw InputError(std::string(where) + ": point dimension " + std::to_string(x.dim()) +
                         " does not match domain dimension " + std::to_string(domain.dim()));
    }
}

namespace {

void require_finite_center(const Point& c) {
    for (double v : c.coords) {
        if (!std::isfinite(v)) throw InputError("domain center has non-finite coordinate");
    }
}

}  // namespace

Domain Domain::ball(Point center, double radius) {
    if (center.dim() < 3) throw InputError("Domain::ball: dimension must be >= 3");
    require_finite_center(center);
    if (!(radius > 0.0)) throw InputError("Domain::ball: radius must be positive");
    const int d = center.dim();
    return Domain(BallShape{std::move(center), radius}, d);
}

Domain Domain::annulus(Point center, double r_inner, double r_outer) {
    if (center.dim() < 3) throw InputError("Domain::annulus: dimension must be >= 3");
    require_finite_center(center);
    if (!(r_inner > 0.0) || !(r_inner < r_outer)) {
        throw InputError("Domain::annulus: need 0 < r_inner < r_outer");
    }
    const int d = center.dim();
    return Domain(AnnulusShape{std::move(center), r_inner, r_outer}, d);
}

Domain Domain::difference(Domain outer, Domain hole) {
    if (outer.dim() != hole.dim()) throw InputError("Domain::difference: dimension mismatch");
    // Hole must sit strictly inside the outer bounding box.
    const Aabb ob = outer.bounding_box();
    const Aabb hb = hole.bounding_box();
    for (int i = 0; i < outer.dim(); ++i) {
        if (hb.lo[static_cast<std::size_t>(i)] < ob.lo[static_cast<std::size_t>(i)] ||
            hb.hi[static_cast<std::size_t>(i)] > ob.hi[static_cast<std::size_t>(i)]) {
            throw InputError("Domain::difference: hole not inside outer bounding box");
        }
    }
    const int d = outer.dim();
    return Domain(DifferenceShape{std::make_shared<Domain>(std::move(outer)),
                                  std::make_shared<Domain>(std::move(hole))},
                  d);
}

Domain Domain::union_of(std::vector<Domain> parts) {
    if (parts.empty()) throw InputError("Domain::union_of: empty part list");
    const int d = parts.front().dim();
    for (const Domain& p : parts) {
        if (p.dim() != d) throw InputError("Domain::union_of: parts must share dimension");
    }
    UnionShape u;
    u.parts.reserve(parts.size());
    for (Domain& p : parts) u.parts.push_back(std::make_shared<Domain>(std::move(p)));
    return Domain(std::move(u), d);
}

double Domain::signed_distance(const Point& x) const {
    check_dim(*this, x, "signed_distance");
    return std::visit(
        [&](const auto& s) -> double {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, BallShape>) {
                return x.dist(s.center) - s.radius;
            } else if constexpr (std::is_same_v<S, AnnulusShape>) {
                const double r = x.dist(s.center);
                return std::max(r - s.r_outer, s.r_inner - r);
            } else if constexpr (std::is_same_v<S, DifferenceShape>) {
                return std::max(s.outer->signed_distance(x), -s.hole->signed_distance(x));
            } else {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& part : s.parts) best = std::min(best, part->signed_distance(x));
                return best;
            }
        },
        shape_);
}

Aabb Domain::bounding_box() const {
    return std::visit(
        [&](const auto& s) -> Aabb {
            using S = std::decay_t<decltype(s)>;
            Aabb box;
            if constexpr (std::is_same_v<S, BallShape>) {
                for (double c : s.center.coords) {
                    box.lo.push_back(c - s.radius);
                    box.hi.push_back(c + s.radius);
                }
            } else if constexpr (std::is_same_v<S, AnnulusShape>) {
                for (double c : s.center.coords) {
                    box.lo.push_back(c - s.r_outer);
                    box.hi.push_back(c + s.r_outer);
                }
            } else if constexpr (std::is_same_v<S, DifferenceShape>) {
                box = s.outer->bounding_box();
            } else {
                box = s.parts.front()->bounding_box();
                for (std::size_t k = 1; k < s.parts.size(); ++k) {
                    const Aabb b = s.parts[k]->bounding_box();
                    for (std::size_t i = 0; i < box.lo.size(); ++i) {
                        box.lo[i] = std::min(box.lo[i], b.lo[i]);
                        box.hi[i] = std::max(box.hi[i], b.hi[i]);
                    }
                }
            }
            return box;
        },
        shape_);
}

bool Domain::regular_boundary() const {
    return std::visit(
        [&](const auto& s) -> bool {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, BallShape>) {
                return true;
            } else if constexpr (std::is_same_v<S, AnnulusShape>) {
                return true;
            } else if constexpr (std::is_same_v<S, DifferenceShape>) {
                // Certified only for ball-minus-ball with strictly separated
                // boundary spheres.
                const auto* ob = std::get_if<BallShape>(&s.outer->shape());
                const auto* hb = std::get_if<BallShape>(&s.hole->shape());
                if (ob == nullptr || hb == nullptr) return false;
                const double centers = ob->center.dist(hb->center);
                return centers + hb->radius < ob->radius;
            } else {
                return false;  // not certified
            }
        },
        shape_);
}

bool Domain::radial_profile(Point& center, double& r_inner, double& r_outer) const {
    if (const auto* b = std::get_if<BallShape>(&shape_)) {
        center = b->center;
        r_inner = 0.0;
        r_outer = b->radius;
        return true;
    }
    if (const auto* a = std::get_if<AnnulusShape>(&shape_)) {
        center = a->center;
        r_inner = a->r_inner;
        r_outer = a->r_outer;
        return true;
    }
    return false;
}

std::string Domain::describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, BallShape>) {
                os << "ball(c=[";
                for (double c : s.center.coords) os << c << ",";
                os << "],r=" << s.radius << ")";
            } else if constexpr (std::is_same_v<S, AnnulusShape>) {
                os << "annulus(c=[";
                for (double c : s.center.coords) os << c << ",";
                os << "],ri=" << s.r_inner << ",ro=" << s.r_outer << ")";
            } else if constexpr (std::is_same_v<S, DifferenceShape>) {
                os << "difference(" << s.outer->describe() << "," << s.hole->describe() << ")";
            } else {
                os << "union(";
                for (const auto& part : s.parts) os << part->describe() << ",";
                os << ")";
            }
        },
        shape_);
    return os.str();
}

std::vector<Point> sample_interior(const Domain& domain, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw InputError("sample_interior: n must be >= 1");
    const Aabb box = domain.bounding_box();
    const int d = domain.dim();
    PathRng rng(seed, 0x1a7e51edULL);
    std::vector<Point> out;
    out.reserve(n);
    std::uint64_t attempts = 0;
    Point p = origin(d);
    while (out.size() < n) {
        ++attempts;
        for (int i = 0; i < d; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            p[i] = box.lo[ui] + (box.hi[ui] - box.lo[ui]) * rng.uniform();
        }
        if (domain.contains(p)) out.push_back(p);
        // Acceptance-rate guard, checked after a warm-up window.
        if (attempts >= 2'000'000 && static_cast<double>(out.size()) <
                                         1e-6 * static_cast<double>(attempts)) {
            throw DegenerateDomainError(
                "sample_interior: acceptance rate below 1e-6 for " + domain.describe());
        }
    }
    return out;
}

Partition::Partition(Domain d1, Domain parent, std::size_t check_samples, std::uint64_t check_seed)
    : d1_(std::move(d1)), parent_(std::move(parent)) {
    if (d1_.dim() != parent_.dim()) throw InputError("Partition: dimension mismatch");
    const std::vector<Point> pts = sample_interior(d1_, check_samples, check_seed);
    for (const Point& p : pts) {
        if (!parent_.contains(p)) {
            throw InputError("Partition: sampled point of D1 lies outside the parent domain");
        }
    }
}

}  // namespace emc
