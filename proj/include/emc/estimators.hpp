#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "emc/geometry.hpp"
#include "emc/simulate.hpp"

namespace emc {

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;        // sample standard deviation / sqrt(n)
    std::uint64_t n_paths = 0;
    double truncated_fraction = 0.0;
    std::string config_digest;
};

enum class ExtremumMode { Sup, Inf };

struct ExtremumEstimate {
    double value = 0.0;
    Point arg_point;
    std::vector<std::pair<Point, Estimate>> per_point;
    ExtremumMode mode = ExtremumMode::Sup;
};

/// Monte Carlo mean of E_x[tau_D] over n paths. Deterministic given
/// (params.seed, n); independent of worker count.
Estimate expected_exit_time(const Domain& domain, const Point& x, const SimParams& params,
                            std::uint64_t n, unsigned workers = 1);

/// Monte Carlo mean of the occupation time in `region` before leaving
/// `domain` (EM scheme only).
Estimate expected_occupation(const Domain& domain, const Domain& region, const Point& x,
                             const SimParams& params, std::uint64_t n, unsigned workers = 1);

/// Monte Carlo mean of the Green potential G_D f(x) = E_x[int_0^tau f(W)].
Estimate green_apply(const Domain& domain, const std::function<double(const Point&)>& f,
                     const Point& x, const SimParams& params, std::uint64_t n,
                     unsigned workers = 1, const std::string& f_tag = "custom");

/// Per-grid-point quantity evaluated by extremum_over.
struct Quantity {
    enum class Kind { ExitTime, Occupation, Green } kind = Kind::ExitTime;
    const Domain* region = nullptr;                   // Occupation
    std::function<double(const Point&)> f;            // Green
    std::string f_tag = "custom";

    static Quantity exit_time();
    static Quantity occupation(const Domain& region);
    static Quantity green(std::function<double(const Point&)> f, std::string tag = "custom");
};

/// Evaluates the estimator at every grid point and returns the extremum of
/// the means together with the full per-point table.
ExtremumEstimate extremum_over(const Domain& domain, const Quantity& quantity, ExtremumMode mode,
                               const std::vector<Point>& grid, const SimParams& params,
                               std::uint64_t n_per_point, unsigned workers = 1);

/// Evaluation grids for sup/inf searches: radial for certified ball/annulus
/// shells, rejection-sampled otherwise.
std::vector<Point> condition_grid(const Domain& domain, std::size_t radial_points,
                                  std::size_t scattered_points, std::uint64_t seed);

}  // namespace emc
