#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "emc/geometry.hpp"

namespace emc {

enum class Scheme { EulerMaruyama, WalkOnSpheres };

/// Path-simulation configuration under the generator-(1/2)Laplacian
/// convention: W_t = x + B_t with B standard Brownian motion.
struct SimParams {
    Scheme scheme = Scheme::EulerMaruyama;
    double step_h = 1e-4;      // EM time step
    double eps_shell = 1e-4;   // WoS absorption shell width
    std::uint64_t max_steps = 10'000'000;
    std::uint64_t seed = 0;
    bool antithetic = false;
    /// Per-step boundary-crossing test between inside samples (half-space
    /// bridge probability exp(-2 a b / h)). Off by default.
    bool brownian_bridge = false;
    /// Cap for functional integrands; exceeding it raises
    /// UnboundedIntegrandError.
    double integrand_cap = 1e12;

    std::string describe() const;
};

struct PathOutcome {
    double exit_time = 0.0;
    Point exit_point;
    double functional_value = 0.0;
    bool truncated = false;
};

/// One exit-time sample. EM: exit at the first sample outside D, time
/// rounded to that step. WoS: sphere jumps accumulating r^2/d per jump, so
/// the per-path time is an estimator of E[tau] only in aggregate.
PathOutcome exit_sample(const Domain& domain, const Point& x0, const SimParams& params,
                        std::uint64_t path_index);

/// Occupation time in `region` before exiting `domain` (EM only):
/// functional_value = h * sum_k 1{W_k in region} over pre-exit steps.
PathOutcome occupation_sample(const Domain& domain, const Domain& region, const Point& x0,
                              const SimParams& params, std::uint64_t path_index);

/// Path functional h * sum_k g(W_k) over pre-exit steps (EM only,
/// left-endpoint quadrature).
PathOutcome functional_sample(const Domain& domain,
                              const std::function<double(const Point&)>& g, const Point& x0,
                              const SimParams& params, std::uint64_t path_index);

}  // namespace emc
