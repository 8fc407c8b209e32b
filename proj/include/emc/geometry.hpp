#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace emc {

/// A point in R^d. The toolkit requires d >= 3 at every entry point.
struct Point {
    std::vector<double> coords;

    Point() = default;
    explicit Point(std::vector<double> c) : coords(std::move(c)) {}
    Point(std::initializer_list<double> c) : coords(c) {}

    int dim() const { return static_cast<int>(coords.size()); }
    double& operator[](int i) { return coords[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return coords[static_cast<std::size_t>(i)]; }

    double norm() const;
    double dist(const Point& other) const;
};

Point origin(int dim);
/// Point at given radius along the first axis from a center.
Point radial_point(const Point& center, double radius);

/// Axis-aligned bounding box.
struct Aabb {
    std::vector<double> lo, hi;
    int dim() const { return static_cast<int>(lo.size()); }
};

class Domain;
using DomainPtr = std::shared_ptr<const Domain>;

struct BallShape {
    Point center;
    double radius;
};

struct AnnulusShape {
    Point center;
    double r_inner;
    double r_outer;
};

struct DifferenceShape {
    DomainPtr outer;
    DomainPtr hole;
};

struct UnionShape {
    std::vector<DomainPtr> parts;
};

/// Bounded open domain D in R^d described by signed-distance CSG.
///
/// The signed distance is exact for Ball and Annulus. For Difference and
/// Union the max/min composition is a conservative bound: inside the domain
/// the returned value never exceeds the true distance in magnitude.
class Domain {
public:
    static Domain ball(Point center, double radius);
    static Domain annulus(Point center, double r_inner, double r_outer);
    static Domain difference(Domain outer, Domain hole);
    static Domain union_of(std::vector<Domain> parts);

    int dim() const { return dim_; }

    /// True iff x lies in the open set; boundary points return false.
    bool contains(const Point& x) const { return signed_distance(x) < 0.0; }

    /// Negative inside, positive outside, zero on the boundary.
    double signed_distance(const Point& x) const;

    Aabb bounding_box() const;

    /// Certification that every boundary point satisfies the Poincare cone
    /// condition. True for Ball, Annulus and Difference-of-balls with
    /// strictly separated boundaries; false means "not certified".
    bool regular_boundary() const;

    /// Ball/Annulus centered shells: radii of the radial section, used for
    /// oracle shortcuts and radial evaluation grids.
    bool radial_profile(Point& center, double& r_inner, double& r_outer) const;

    /// Canonical textual form, stable across runs; feeds config digests.
    std::string describe() const;

    const std::variant<BallShape, AnnulusShape, DifferenceShape, UnionShape>& shape() const {
        return shape_;
    }

private:
    Domain(std::variant<BallShape, AnnulusShape, DifferenceShape, UnionShape> shape, int dim)
        : shape_(std::move(shape)), dim_(dim) {}

    std::variant<BallShape, AnnulusShape, DifferenceShape, UnionShape> shape_;
    int dim_;
};

/// Uniform interior points by rejection from the bounding box.
/// Deterministic given seed. Throws DegenerateDomainError if the acceptance
/// rate falls below 1e-6.
std::vector<Point> sample_interior(const Domain& domain, std::size_t n, std::uint64_t seed);

/// Subdomain split D = D1 u D2 with D2 := parent \ D1 held implicitly.
class Partition {
public:
    /// Checks d1 subset parent on `check_samples` sampled points.
    Partition(Domain d1, Domain parent, std::size_t check_samples = 1000,
              std::uint64_t check_seed = 0x5eedf00dULL);

    const Domain& d1() const { return d1_; }
    const Domain& parent() const { return parent_; }

    bool in_d1(const Point& x) const { return d1_.contains(x); }
    bool in_d2(const Point& x) const { return parent_.contains(x) && !d1_.contains(x); }

private:
    Domain d1_;
    Domain parent_;
};

void check_dim(const Domain& domain, const Point& x, const char* where);

}  // namespace emc
