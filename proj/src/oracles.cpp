#include "emc/oracles.hpp"

#include <cmath>
#include <vector>

#include "emc/errors.hpp"

namespace emc {

AnnulusSpec3D::AnnulusSpec3D(double delta_, double t_outer_, Point center_)
    : delta(delta_), t_outer(t_outer_), center(std::move(center_)) {
    if (!(delta > 0.0) || !(delta < t_outer)) {
        throw InputError("AnnulusSpec3D: need 0 < delta < T");
    }
    if (center.dim() != 3) throw InputError("AnnulusSpec3D: center must lie in R^3");
}

double ball_exit_time(double t_radius, int d, const Point& x) {
    if (d < 3) throw InputError("ball_exit_time: d must be >= 3");
    if (!(t_radius > 0.0)) throw InputError("ball_exit_time: radius must be positive");
    const double r = x.norm();
    if (r > t_radius * (1.0 + 1e-12)) {
        throw InputError("ball_exit_time: point outside the closed ball");
    }
    return (t_radius * t_radius - r * r) / static_cast<double>(d);
}

double annulus_exit_time(const AnnulusSpec3D& spec, const Point& x) {
    if (x.dim() != 3) throw InputError("annulus_exit_time: point must lie in R^3");
    const double r = x.dist(spec.center);
    const double delta = spec.delta;
    const double T = spec.t_outer;
    if (r < delta * (1.0 - 1e-12) || r > T * (1.0 + 1e-12)) {
        throw InputError("annulus_exit_time: point outside the closed annulus");
    }
    return (T * T + T * delta + delta * delta - delta * T * (delta + T) / r - r * r) / 3.0;
}

std::pair<double, double> annulus_sup_exit_time(const AnnulusSpec3D& spec) {
    const double delta = spec.delta;
    const double T = spec.t_outer;
    const double arg_radius = std::cbrt(delta * T * (T + delta) / 2.0);
    if (!(arg_radius > delta) || !(arg_radius < T)) {
        throw InternalConsistencyError(
            "annulus_sup_exit_time: maximizing radius fell outside the open shell");
    }
    const double value =
        (T * T + T * delta + delta * delta) / 3.0 - std::pow(delta * T * (T + delta) / 2.0, 2.0 / 3.0) / 3.0;
    return {value, arg_radius};
}

double m_constant(double sup_exit, double lambda, double p) {
    if (!(p > 1.0)) throw InputError("m_constant: need p > 1");
    if (!(lambda > 0.0)) throw InputError("m_constant: need lambda > 0");
    if (!(sup_exit > 0.0)) throw InputError("m_constant: need a positive exit-time bound");
    return std::pow(lambda * sup_exit, 1.0 / (1.0 - p));
}

std::pair<double, double> heat_kernel_potential_check(const Point& x, const Point& y, int d,
                                                      std::size_t quad_points) {
    if (d < 3) throw InputError("heat_kernel_potential_check: d must be >= 3");
    if (x.dim() != d || y.dim() != d) {
        throw InputError("heat_kernel_potential_check: point dimension mismatch");
    }
    const double s = x.dist(y);
    if (s == 0.0) throw InputError("heat_kernel_potential_check: singular kernel at x = y");

    // Time integral of (2 pi t)^(-d/2) exp(-s^2/2t). Substituting
    // u = s^2/(2t) and then u = w^2 gives the smooth integrand
    //   lhs = pi^(-d/2) s^(2-d) * int_0^inf w^(d-3) exp(-w^2) dw,
    // evaluated by composite Simpson on [0, 8.5] (tail below 1e-30).
    const double w_max = 8.5;
    std::size_t n = quad_points;
    if (n % 2 == 1) ++n;
    const double hw = w_max / static_cast<double>(n);
    auto integrand = [d](double w) {
        if (w == 0.0) return d == 3 ? 1.0 : 0.0;
        return std::pow(w, static_cast<double>(d - 3)) * std::exp(-w * w);
    };
    double acc = integrand(0.0) + integrand(w_max);
    for (std::size_t k = 1; k < n; ++k) {
        acc += (k % 2 == 1 ? 4.0 : 2.0) * integrand(hw * static_cast<double>(k));
    }
    const double tail_integral = acc * hw / 3.0;
    const double lhs = std::pow(M_PI, -0.5 * d) * std::pow(s, 2.0 - d) * tail_integral;

    const double rhs =
        std::tgamma(0.5 * d - 1.0) / (2.0 * std::pow(M_PI, 0.5 * d)) * std::pow(s, 2.0 - d);
    return {lhs, rhs};
}

double radial_occupation_bvp(double r_inner, double r_outer, double a, double b, int d,
                             double r_eval, std::size_t grid_points) {
    if (!(r_inner >= 0.0) || !(r_inner < r_outer)) {
        throw InputError("radial_occupation_bvp: need 0 <= r_inner < r_outer");
    }
    if (r_eval < r_inner || r_eval > r_outer) {
        throw InputError("radial_occupation_bvp: evaluation radius outside the shell");
    }
    if (grid_points < 16) throw InputError("radial_occupation_bvp: grid too coarse");
    if (r_inner == 0.0) {
        throw InputError("radial_occupation_bvp: r_inner = 0 hits the coordinate singularity");
    }

    const std::size_t n = grid_points;             // interior unknowns
    const double h = (r_outer - r_inner) / static_cast<double>(n + 1);
    std::vector<double> sub(n), diag(n), sup(n), rhs(n);
    const double nu = static_cast<double>(d - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = r_inner + h * static_cast<double>(i + 1);
        sub[i] = 1.0 / (h * h) - nu / (2.0 * h * r);
        diag[i] = -2.0 / (h * h);
        sup[i] = 1.0 / (h * h) + nu / (2.0 * h * r);
        rhs[i] = (r >= a && r <= b) ? -2.0 : 0.0;
    }
    // Thomas solve with zero Dirichlet ends.
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> v(n);
    v[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        v[i] = (rhs[i] - sup[i] * v[i + 1]) / diag[i];
    }

    // Linear interpolation, boundary values are zero.
    const double t = (r_eval - r_inner) / h;
    const auto k = static_cast<std::size_t>(t);
    auto value_at = [&](std::size_t idx) -> double {
        if (idx == 0 || idx > n) return 0.0;
        return v[idx - 1];
    };
    const double frac = t - static_cast<double>(k);
    return value_at(k) * (1.0 - frac) + value_at(k + 1) * frac;
}

}  // namespace emc
