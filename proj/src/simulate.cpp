#include "emc/simulate.hpp"

#include <cmath>
#include <sstream>

#include "emc/errors.hpp"
#include "emc/rng.hpp"

namespace emc {

std::string SimParams::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "scheme=" << (scheme == Scheme::EulerMaruyama ? "em" : "wos") << ",h=" << step_h
       << ",eps=" << eps_shell << ",max_steps=" << max_steps << ",seed=" << seed
       << ",antithetic=" << antithetic << ",bridge=" << brownian_bridge
       << ",cap=" << integrand_cap;
    return os.str();
}

namespace {

constexpr std::uint64_t kEmStream = 0x00e1ee75ULL;
constexpr std::uint64_t kWosStream = 0x0005fe7eULL;

Point boundary_projection(const Domain& domain, const Point& w) {
    // First-order projection along the numeric signed-distance gradient.
    const double delta = 1e-6;
    const int d = w.dim();
    Point g = origin(d);
    Point probe = w;
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) {
        probe[i] = w[i] + delta;
        const double fp = domain.signed_distance(probe);
        probe[i] = w[i] - delta;
        const double fm = domain.signed_distance(probe);
        probe[i] = w[i];
        g[i] = (fp - fm) / (2.0 * delta);
        norm2 += g[i] * g[i];
    }
    Point out = w;
    if (norm2 > 0.0) {
        const double s = domain.signed_distance(w) / norm2;
        for (int i = 0; i < d; ++i) out[i] -= s * g[i];
    }
    return out;
}

// Euler-Maruyama walk; calls accumulate(w) once per pre-exit step.
template <typename Accumulate>
PathOutcome em_walk(const Domain& domain, const Point& x0, const SimParams& params,
                    std::uint64_t path_index, Accumulate&& accumulate) {
    check_dim(domain, x0, "em_walk");
    if (!domain.contains(x0)) throw InputError("em_walk: start point is not inside the domain");
    if (!(params.step_h > 0.0)) throw InputError("em_walk: step_h must be positive");

    const std::uint64_t pair = params.antithetic ? path_index / 2 : path_index;
    const double flip = (params.antithetic && (path_index & 1)) ? -1.0 : 1.0;
    PathRng rng(params.seed, kEmStream, pair);

    const int d = x0.dim();
    const double h = params.step_h;
    const double sqrt_h = std::sqrt(h);
    Point w = x0;
    double sd_prev = domain.signed_distance(w);

    PathOutcome out;
    for (std::uint64_t k = 0; k < params.max_steps; ++k) {
        accumulate(static_cast<const Point&>(w));
        Point next = w;
        for (int i = 0; i < d; ++i) next[i] += flip * sqrt_h * rng.normal();
        const double sd_next = domain.signed_distance(next);
        if (sd_next >= 0.0) {
            out.exit_time = static_cast<double>(k + 1) * h;
            out.exit_point = next;
            return out;
        }
        if (params.brownian_bridge) {
            // Half-space crossing probability between two inside samples.
            const double prod = sd_prev * sd_next;  // both negative
            const double p_cross = std::exp(-2.0 * prod / h);
            if (p_cross > 1e-12 && rng.uniform() < p_cross) {
                out.exit_time = static_cast<double>(k + 1) * h;
                out.exit_point = boundary_projection(domain, (sd_prev > sd_next) ? w : next);
                return out;
            }
        }
        w = next;
        sd_prev = sd_next;
    }
    out.exit_time = static_cast<double>(params.max_steps) * h;
    out.exit_point = w;
    out.truncated = true;
    return out;
}

}  // namespace

PathOutcome exit_sample(const Domain& domain, const Point& x0, const SimParams& params,
                        std::uint64_t path_index) {
    if (params.scheme == Scheme::EulerMaruyama) {
        return em_walk(domain, x0, params, path_index, [](const Point&) {});
    }

    // Walk on spheres: jump to a uniform point on the maximal inscribed
    // sphere, accrue the mean exit time r^2/d of that sphere, stop in the
    // eps shell.
    check_dim(domain, x0, "exit_sample");
    if (!domain.contains(x0)) throw InputError("exit_sample: start point is not inside the domain");
    if (!(params.eps_shell > 0.0)) throw InputError("exit_sample: eps_shell must be positive");

    const std::uint64_t pair = params.antithetic ? path_index / 2 : path_index;
    const double flip = (params.antithetic && (path_index & 1)) ? -1.0 : 1.0;
    PathRng rng(params.seed, kWosStream, pair);

    const int d = x0.dim();
    Point w = x0;
    PathOutcome out;
    for (std::uint64_t k = 0; k < params.max_steps; ++k) {
        const double r = -domain.signed_distance(w);
        if (r <= params.eps_shell) {
            out.exit_point = w;
            return out;
        }
        out.exit_time += r * r / static_cast<double>(d);
        // Uniform direction from normalized Gaussians.
        double norm2 = 0.0;
        Point dir = origin(d);
        do {
            norm2 = 0.0;
            for (int i = 0; i < d; ++i) {
                dir[i] = rng.normal();
                norm2 += dir[i] * dir[i];
            }
        } while (norm2 == 0.0);
        const double scale = flip * r / std::sqrt(norm2);
        for (int i = 0; i < d; ++i) w[i] += scale * dir[i];
    }
    out.exit_point = w;
    out.truncated = true;
    return out;
}

PathOutcome occupation_sample(const Domain& domain, const Domain& region, const Point& x0,
                              const SimParams& params, std::uint64_t path_index) {
    if (params.scheme != Scheme::EulerMaruyama) {
        throw UnsupportedSchemeError(
            "occupation_sample: walk-on-spheres cannot accumulate occupation times");
    }
    check_dim(domain, x0, "occupation_sample");
    if (region.dim() != domain.dim()) {
        throw InputError("occupation_sample: region dimension mismatch");
    }
    // Integer step count times h, so that region = domain reproduces the
    // exit time (k+1)*h bit for bit.
    std::uint64_t occupied_steps = 0;
    PathOutcome out = em_walk(domain, x0, params, path_index, [&](const Point& w) {
        if (region.contains(w)) ++occupied_steps;
    });
    out.functional_value = static_cast<double>(occupied_steps) * params.step_h;
    return out;
}

PathOutcome functional_sample(const Domain& domain,
                              const std::function<double(const Point&)>& g, const Point& x0,
                              const SimParams& params, std::uint64_t path_index) {
    if (params.scheme != Scheme::EulerMaruyama) {
        throw UnsupportedSchemeError("functional_sample: requires the Euler-Maruyama scheme");
    }
    const double h = params.step_h;
    const double cap = params.integrand_cap;
    double acc = 0.0;
    PathOutcome out = em_walk(domain, x0, params, path_index, [&](const Point& w) {
        const double v = g(w);
        if (!(std::abs(v) <= cap)) {
            std::ostringstream os;
            os.precision(10);
            os << "functional_sample: integrand value " << v << " exceeds cap " << cap << " at (";
            for (double c : w.coords) os << c << " ";
            os << ")";
            throw UnboundedIntegrandError(os.str());
        }
        acc += h * v;
    });
    out.functional_value = acc;
    return out;
}

}  // namespace emc
