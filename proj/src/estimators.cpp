#include "emc/estimators.hpp"

#include <cmath>
#include <sstream>

#include "emc/digest.hpp"
#include "emc/errors.hpp"
#include "emc/parallel.hpp"

namespace emc {

namespace {

std::string point_key(const Point& x) {
    std::ostringstream os;
    os.precision(17);
    for (double c : x.coords) os << c << ",";
    return os.str();
}

std::string make_digest(const char* op, const Domain& domain, const Point& x,
                        const SimParams& params, std::uint64_t n, const std::string& extra) {
    std::ostringstream os;
    os << op << "|" << domain.describe() << "|x=" << point_key(x) << "|" << params.describe()
       << "|n=" << n << "|" << extra;
    return hex_digest(os.str());
}

// Reduction is a serial pass over per-path slots in path-index order, so the
// result does not depend on the worker count.
Estimate reduce(const std::vector<double>& values, const std::vector<char>& truncated,
                std::string digest) {
    Estimate e;
    e.n_paths = values.size();
    e.config_digest = std::move(digest);
    if (values.empty()) return e;
    double sum = 0.0;
    std::uint64_t n_trunc = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i];
        n_trunc += truncated[i] ? 1u : 0u;
    }
    e.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        const double d = v - e.mean;
        ss += d * d;
    }
    const auto n = static_cast<double>(values.size());
    if (values.size() > 1) e.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    e.truncated_fraction = static_cast<double>(n_trunc) / n;
    return e;
}

}  // namespace

Estimate expected_exit_time(const Domain& domain, const Point& x, const SimParams& params,
                            std::uint64_t n, unsigned workers) {
    if (n < 2) throw InputError("expected_exit_time: need n >= 2");
    std::vector<double> values(n);
    std::vector<char> trunc(n);
    parallel_for(n, workers, [&](std::size_t i) {
        const PathOutcome o = exit_sample(domain, x, params, i);
        values[i] = o.exit_time;
        trunc[i] = o.truncated ? 1 : 0;
    });
    return reduce(values, trunc, make_digest("exit", domain, x, params, n, ""));
}

Estimate expected_occupation(const Domain& domain, const Domain& region, const Point& x,
                             const SimParams& params, std::uint64_t n, unsigned workers) {
    if (n < 2) throw InputError("expected_occupation: need n >= 2");
    std::vector<double> values(n);
    std::vector<char> trunc(n);
    parallel_for(n, workers, [&](std::size_t i) {
        const PathOutcome o = occupation_sample(domain, region, x, params, i);
        values[i] = o.functional_value;
        trunc[i] = o.truncated ? 1 : 0;
    });
    return reduce(values, trunc,
                  make_digest("occupation", domain, x, params, n, region.describe()));
}

Estimate green_apply(const Domain& domain, const std::function<double(const Point&)>& f,
                     const Point& x, const SimParams& params, std::uint64_t n, unsigned workers,
                     const std::string& f_tag) {
    if (n < 2) throw InputError("green_apply: need n >= 2");
    std::vector<double> values(n);
    std::vector<char> trunc(n);
    parallel_for(n, workers, [&](std::size_t i) {
        const PathOutcome o = functional_sample(domain, f, x, params, i);
        values[i] = o.functional_value;
        trunc[i] = o.truncated ? 1 : 0;
    });
    return reduce(values, trunc, make_digest("green", domain, x, params, n, f_tag));
}

Quantity Quantity::exit_time() { return Quantity{Kind::ExitTime, nullptr, nullptr, "exit"}; }

Quantity Quantity::occupation(const Domain& region) {
    return Quantity{Kind::Occupation, &region, nullptr, "occ"};
}

Quantity Quantity::green(std::function<double(const Point&)> f, std::string tag) {
    return Quantity{Kind::Green, nullptr, std::move(f), std::move(tag)};
}

ExtremumEstimate extremum_over(const Domain& domain, const Quantity& quantity, ExtremumMode mode,
                               const std::vector<Point>& grid, const SimParams& params,
                               std::uint64_t n_per_point, unsigned workers) {
    if (grid.empty()) throw InputError("extremum_over: empty grid");
    ExtremumEstimate out;
    out.mode = mode;
    out.per_point.reserve(grid.size());
    for (const Point& x : grid) {
        Estimate e;
        switch (quantity.kind) {
            case Quantity::Kind::ExitTime:
                e = expected_exit_time(domain, x, params, n_per_point, workers);
                break;
            case Quantity::Kind::Occupation:
                e = expected_occupation(domain, *quantity.region, x, params, n_per_point, workers);
                break;
            case Quantity::Kind::Green:
                e = green_apply(domain, quantity.f, x, params, n_per_point, workers,
                                quantity.f_tag);
                break;
        }
        out.per_point.emplace_back(x, e);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.per_point.size(); ++i) {
        const double v = out.per_point[i].second.mean;
        const double b = out.per_point[best].second.mean;
        if ((mode == ExtremumMode::Sup && v > b) || (mode == ExtremumMode::Inf && v < b)) best = i;
    }
    out.value = out.per_point[best].second.mean;
    out.arg_point = out.per_point[best].first;
    return out;
}

std::vector<Point> condition_grid(const Domain& domain, std::size_t radial_points,
                                  std::size_t scattered_points, std::uint64_t seed) {
    Point center;
    double ri = 0.0, ro = 0.0;
    if (domain.radial_profile(center, ri, ro) && radial_points >= 1) {
        // Strictly interior radii; for a ball the innermost point is the center.
        std::vector<Point> grid;
        grid.reserve(radial_points);
        const double span = ro - ri;
        for (std::size_t k = 0; k < radial_points; ++k) {
            const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(radial_points);
            double r = ri + span * t;
            grid.push_back(radial_point(center, r));
        }
        if (ri == 0.0) grid.front() = center;
        return grid;
    }
    return sample_interior(domain, scattered_points, seed);
}

}  // namespace emc
