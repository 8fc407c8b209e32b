#pragma once

#include <utility>

#include "emc/geometry.hpp"

namespace emc {

/// Centered spherical shell in R^3 with inner radius delta and outer radius
/// t_outer. The closed forms below are specific to d = 3.
struct AnnulusSpec3D {
    double delta;
    double t_outer;
    Point center;

    AnnulusSpec3D(double delta_, double t_outer_, Point center_ = Point{0.0, 0.0, 0.0});
};

/// E_x[tau] for the centered ball of radius t_radius in R^d under standard
/// Brownian motion: (t_radius^2 - |x|^2) / d.
double ball_exit_time(double t_radius, int d, const Point& x);

/// E_x[tau] for the 3-D annulus:
/// (T^2 + T d + d^2 - dT(d+T)/|x| - |x|^2) / 3 with d = delta, T = t_outer.
double annulus_exit_time(const AnnulusSpec3D& spec, const Point& x);

/// Maximum of the annulus exit time and the radius attaining it,
/// arg^3 = delta*T*(T+delta)/2. Asserts arg lies strictly inside the shell.
std::pair<double, double> annulus_sup_exit_time(const AnnulusSpec3D& spec);  // (value, arg_radius)

/// Largest M satisfying sup E[tau] <= M^(1-p)/lambda with equality:
/// (lambda * sup_exit)^(1/(1-p)).
double m_constant(double sup_exit, double lambda, double p);

/// Compares the time integral of the Brownian transition density against the
/// Newtonian kernel Gamma(d/2-1)/(2 pi^(d/2)) |x-y|^(2-d).
/// Returns (quadrature value, closed form).
std::pair<double, double> heat_kernel_potential_check(const Point& x, const Point& y, int d,
                                                      std::size_t quad_points = 4000);

/// Dense finite-difference solution of the radial occupation problem
///   (1/2)(v'' + ((d-1)/r) v') = -1_{[a,b]}(r),  v(r_inner)=v(r_outer)=0,
/// evaluated at radius r_eval. Independent oracle for occupation estimates
/// on centered shells.
double radial_occupation_bvp(double r_inner, double r_outer, double a, double b, int d,
                             double r_eval, std::size_t grid_points = 100000);

}  // namespace emc
