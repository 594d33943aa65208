#pragma once

// Axis-aligned boxes and regular node lattices. Node index convention:
// res[i] nodes per axis (>= 2), node j on axis i at lo + j*(hi-lo)/(res-1),
// row-major flat order with the last axis fastest.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "invextopo/expr.hpp"

namespace invextopo {

struct BoxDomain {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    double extent(int axis) const { return hi[axis] - lo[axis]; }
    double diameter() const;
    bool contains(std::span<const double> p, double slack = 0.0) const;
    std::vector<double> clip(std::span<const double> p) const;
    std::vector<double> center() const;
    void validate() const;  // throws std::invalid_argument on lo/hi disorder
};

BoxDomain make_box(std::initializer_list<double> lo, std::initializer_list<double> hi);
// Square box [lo,hi]^dim.
BoxDomain square_box(double lo, double hi, int dim);
BoxDomain concat_boxes(const BoxDomain& a, const BoxDomain& b);

struct RegularGrid {
    BoxDomain box;
    std::vector<int> res;  // nodes per axis, each >= 2

    int dim() const { return static_cast<int>(res.size()); }
    std::size_t node_count() const;
    double spacing(int axis) const { return box.extent(axis) / (res[axis] - 1); }
    double max_spacing() const;

    std::size_t flat_index(std::span<const int> idx) const;
    void unflatten(std::size_t flat, std::span<int> idx_out) const;
    std::vector<double> node_point(std::size_t flat) const;
    void node_point(std::size_t flat, std::span<double> out) const;
    // Index of the lattice node nearest to p (coords clipped to the box).
    std::size_t nearest_node(std::span<const double> p) const;

    void validate(std::size_t max_nodes = kDefaultNodeBudget) const;
    static constexpr std::size_t kDefaultNodeBudget = 50'000'000;
};

RegularGrid make_grid(const BoxDomain& box, int res_all_axes);
RegularGrid make_grid(const BoxDomain& box, std::vector<int> res);

// Evaluate a field at every node. Evaluation errors are rethrown with the
// offending node's flat index and coordinates in the message.
std::vector<double> sample_lattice(const ScalarField& f, const RegularGrid& grid);

}  // namespace invextopo
