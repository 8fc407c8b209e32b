#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "emc/geometry.hpp"

namespace emc {

enum class Interp { NearestNode, InverseDistance };

/// Scalar function sampled on interior nodes. Evaluation outside the domain,
/// or within the absorption shell next to the boundary, returns 0 (the
/// zero-Dirichlet extension). Scattered nodes are interpolated through a
/// uniform-grid neighbor accelerator; nodes built on a Cartesian lattice
/// additionally support exact neighbor lookup for stencils.
class Field {
public:
    Field(const Domain& domain, std::vector<Point> nodes, std::vector<double> values,
          Interp interp = Interp::InverseDistance, int idw_neighbors = 8,
          double absorption_shell = 0.0);

    /// Nodes on the Cartesian lattice origin + spacing * Z^d restricted to
    /// {x : signed_distance(x) < -margin}; values start at zero.
    static Field lattice(const Domain& domain, double spacing, double margin = 0.0);

    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    const Domain& domain() const { return domain_; }
    Interp interp() const { return interp_; }
    double absorption_shell() const { return shell_; }

    double evaluate(const Point& x) const;
    double sup_norm() const;

    /// Clamp node values below at zero.
    void clamp_nonnegative();

    bool has_lattice() const { return lattice_spacing_ > 0.0; }
    double lattice_spacing() const { return lattice_spacing_; }
    /// Index of the node offset by `step` lattice cells along `axis` from
    /// node `i`, if that lattice point carries a node.
    std::optional<std::size_t> lattice_neighbor(std::size_t i, int axis, int step) const;

private:
    struct GridAccel {
        std::vector<double> lo;
        double cell = 1.0;
        std::vector<int> dims;
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells;
    };

    void build_accel();
    std::uint64_t cell_key(const std::vector<int>& idx) const;

    Domain domain_;
    std::vector<Point> nodes_;
    std::vector<double> values_;
    Interp interp_;
    int idw_k_;
    double shell_;

    GridAccel accel_;

    double lattice_spacing_ = 0.0;
    std::vector<double> lattice_origin_;
    std::unordered_map<std::uint64_t, std::uint32_t> lattice_index_;
    std::vector<std::vector<int>> lattice_coords_;
};

}  // namespace emc
