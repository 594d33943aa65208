#pragma once

// Sublevel-set masks on regular grids and their connectivity. Adjacency is
// face adjacency only (index differs by one step along exactly one axis);
// diagonal neighbors never touch. Component labels are assigned in flat node
// order, so label 0 is the component holding the lowest-index masked node.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "invextopo/grid.hpp"

namespace invextopo {

struct NodeMask {
    std::vector<char> in;  // one flag per grid node
    std::size_t count() const;
    bool operator==(const NodeMask&) const = default;
};

// How the level threshold of a sublevel mask is interpreted.
//   Absolute:  node kept iff  value <= c
//   AboveMin:  node kept iff  value <= (min over grid) + c
enum class LevelAnchor { Absolute, AboveMin };

NodeMask level_mask(const std::vector<double>& values, double c,
                    LevelAnchor anchor = LevelAnchor::Absolute);

struct Components {
    std::vector<int> label;  // -1 outside the mask, else component id
    int count = 0;
    std::vector<std::size_t> size;            // nodes per component
    std::vector<std::size_t> representative;  // lowest flat index per component
};

Components connected_components(const RegularGrid& grid, const NodeMask& mask);

// Euclidean distance from p to the nearest masked node (infinity if empty).
double distance_to_mask(const RegularGrid& grid, const NodeMask& mask,
                        std::span<const double> p);

struct SublevelReport {
    double c = 0.0;
    LevelAnchor anchor = LevelAnchor::Absolute;
    double threshold = 0.0;  // resolved absolute threshold
    double grid_min = 0.0;
    std::size_t mask_count = 0;
    int component_count = 0;
    bool connected = false;  // exactly one component (empty mask is not connected)
    std::vector<std::vector<double>> representatives;  // one node per component
};

SublevelReport sublevel_connectedness(const ScalarField& f, const RegularGrid& grid,
                                      double c, LevelAnchor anchor);

// CSV with one row per node: index coordinates, point coordinates, value,
// in-mask flag, component label.
std::string labeling_csv(const RegularGrid& grid, const std::vector<double>& values,
                         const NodeMask& mask, const Components& comps);

}  // namespace invextopo
