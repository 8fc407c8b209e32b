#include "emc/field.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "emc/errors.hpp"
#include "emc/rng.hpp"

namespace emc {

namespace {

std::uint64_t mix_ints(const std::vector<int>& idx) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (int v : idx) {
        std::uint64_t s = h ^ (static_cast<std::uint64_t>(static_cast<std::int64_t>(v)) *
                               0xff51afd7ed558ccdULL);
        h = splitmix64(s);
    }
    return h;
}

}  // namespace

Field::Field(const Domain& domain, std::vector<Point> nodes, std::vector<double> values,
             Interp interp, int idw_neighbors, double absorption_shell)
    : domain_(domain),
      nodes_(std::move(nodes)),
      values_(std::move(values)),
      interp_(interp),
      idw_k_(idw_neighbors),
      shell_(absorption_shell) {
    if (nodes_.empty()) throw InputError("Field: node list is empty");
    if (nodes_.size() != values_.size()) throw InputError("Field: nodes/values size mismatch");
    if (idw_k_ < 1) throw InputError("Field: need at least one interpolation neighbor");
    for (const Point& p : nodes_) check_dim(domain_, p, "Field");
    build_accel();
}

Field Field::lattice(const Domain& domain, double spacing, double margin) {
    if (!(spacing > 0.0)) throw InputError("Field::lattice: spacing must be positive");
    const Aabb box = domain.bounding_box();
    const int d = domain.dim();
    std::vector<int> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        lo[ui] = static_cast<int>(std::floor(box.lo[ui] / spacing)) - 1;
        hi[ui] = static_cast<int>(std::ceil(box.hi[ui] / spacing)) + 1;
    }
    std::vector<Point> nodes;
    std::vector<std::vector<int>> coords;
    std::vector<int> idx = lo;
    Point p = origin(d);
    while (true) {
        for (int i = 0; i < d; ++i) p[i] = spacing * idx[static_cast<std::size_t>(i)];
        if (domain.signed_distance(p) < -margin) {
            nodes.push_back(p);
            coords.push_back(idx);
        }
        int axis = 0;
        for (; axis < d; ++axis) {
            auto ua = static_cast<std::size_t>(axis);
            if (++idx[ua] <= hi[ua]) break;
            idx[ua] = lo[ua];
        }
        if (axis == d) break;
    }
    if (nodes.empty()) {
        throw DegenerateDomainError("Field::lattice: no lattice nodes inside the domain");
    }
    Field f(domain, std::move(nodes), std::vector<double>(coords.size(), 0.0),
            Interp::InverseDistance, 8, 0.0);
    f.lattice_spacing_ = spacing;
    f.lattice_coords_ = std::move(coords);
    f.lattice_index_.reserve(f.lattice_coords_.size());
    for (std::size_t i = 0; i < f.lattice_coords_.size(); ++i) {
        f.lattice_index_[mix_ints(f.lattice_coords_[i])] = static_cast<std::uint32_t>(i);
    }
    return f;
}

std::optional<std::size_t> Field::lattice_neighbor(std::size_t i, int axis, int step) const {
    if (!has_lattice() || i >= lattice_coords_.size()) return std::nullopt;
    std::vector<int> idx = lattice_coords_[i];
    idx[static_cast<std::size_t>(axis)] += step;
    const auto it = lattice_index_.find(mix_ints(idx));
    if (it == lattice_index_.end()) return std::nullopt;
    // Guard against hash collisions.
    if (lattice_coords_[it->second] != idx) return std::nullopt;
    return static_cast<std::size_t>(it->second);
}

void Field::build_accel() {
    const int d = domain_.dim();
    const Aabb box = domain_.bounding_box();
    accel_.lo = box.lo;
    double volume = 1.0;
    for (int i = 0; i < d; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        volume *= std::max(box.hi[ui] - box.lo[ui], 1e-12);
    }
    // Aim for order-one nodes per cell.
    accel_.cell = std::pow(volume / static_cast<double>(nodes_.size()), 1.0 / d);
    accel_.cell = std::max(accel_.cell, 1e-9);
    accel_.cells.clear();
    std::vector<int> idx(static_cast<std::size_t>(d));
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        for (int i = 0; i < d; ++i) {
            idx[static_cast<std::size_t>(i)] = static_cast<int>(
                std::floor((nodes_[n][i] - accel_.lo[static_cast<std::size_t>(i)]) / accel_.cell));
        }
        accel_.cells[mix_ints(idx)].push_back(static_cast<std::uint32_t>(n));
    }
}

double Field::evaluate(const Point& x) const {
    check_dim(domain_, x, "Field::evaluate");
    if (domain_.signed_distance(x) > -shell_) return 0.0;

    const int d = domain_.dim();
    const int k_want = interp_ == Interp::NearestNode ? 1 : idw_k_;

    // k best (distance^2, node) pairs gathered from expanding cell rings.
    std::vector<std::pair<double, std::uint32_t>> best;
    best.reserve(static_cast<std::size_t>(k_want) + 1);
    auto consider = [&](std::uint32_t n) {
        double d2 = 0.0;
        const Point& p = nodes_[n];
        for (int i = 0; i < d; ++i) {
            const double diff = x[i] - p[i];
            d2 += diff * diff;
        }
        if (best.size() < static_cast<std::size_t>(k_want)) {
            best.emplace_back(d2, n);
            std::push_heap(best.begin(), best.end());
        } else if (d2 < best.front().first) {
            std::pop_heap(best.begin(), best.end());
            best.back() = {d2, n};
            std::push_heap(best.begin(), best.end());
        }
    };

    std::vector<int> home(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        home[static_cast<std::size_t>(i)] = static_cast<int>(
            std::floor((x[i] - accel_.lo[static_cast<std::size_t>(i)]) / accel_.cell));
    }
    std::vector<int> idx(static_cast<std::size_t>(d));
    const int ring_cap = 1 + static_cast<int>(64.0 / accel_.cell);  // hard stop
    for (int ring = 0;; ++ring) {
        // Visit all cells with Chebyshev distance exactly `ring`.
        std::function<void(int, bool)> walk = [&](int axis, bool pinned) {
            if (axis == d) {
                if (!pinned) return;
                const auto it = accel_.cells.find(mix_ints(idx));
                if (it != accel_.cells.end()) {
                    for (std::uint32_t n : it->second) consider(n);
                }
                return;
            }
            const auto ua = static_cast<std::size_t>(axis);
            for (int off = -ring; off <= ring; ++off) {
                idx[ua] = home[ua] + off;
                walk(axis + 1, pinned || std::abs(off) == ring);
            }
        };
        if (ring == 0) {
            idx = home;
            const auto it = accel_.cells.find(mix_ints(idx));
            if (it != accel_.cells.end()) {
                for (std::uint32_t n : it->second) consider(n);
            }
        } else {
            walk(0, false);
        }
        if (best.size() >= static_cast<std::size_t>(k_want)) {
            const double reach = accel_.cell * static_cast<double>(ring);
            if (best.front().first <= reach * reach) break;
        }
        if (ring >= ring_cap) break;
    }
    if (best.empty()) throw ConfigError("Field::evaluate: interpolation found no neighbors");

    if (interp_ == Interp::NearestNode) return values_[best.front().second];

    double wsum = 0.0, vsum = 0.0;
    for (const auto& [d2, n] : best) {
        if (d2 < 1e-24) return values_[n];  // exact node hit
        const double w = 1.0 / d2;
        wsum += w;
        vsum += w * values_[n];
    }
    return vsum / wsum;
}

double Field::sup_norm() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
}

void Field::clamp_nonnegative() {
    for (double& v : values_) v = std::max(v, 0.0);
}

}  // namespace emc
