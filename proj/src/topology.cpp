#include "invextopo/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace invextopo {

std::size_t NodeMask::count() const {
    return static_cast<std::size_t>(std::count(in.begin(), in.end(), char(1)));
}

NodeMask level_mask(const std::vector<double>& values, double c, LevelAnchor anchor) {
    double threshold = c;
    if (anchor == LevelAnchor::AboveMin) {
        threshold = *std::min_element(values.begin(), values.end()) + c;
    }
    NodeMask m;
    m.in.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m.in[i] = values[i] <= threshold ? 1 : 0;
    return m;
}

namespace {

// Plain union-find over flat node indices; path halving + union by size.
struct DisjointSets {
    std::vector<std::size_t> parent;
    std::vector<std::size_t> size;

    explicit DisjointSets(std::size_t n) : parent(n), size(n, 1) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

}  // namespace

Components connected_components(const RegularGrid& grid, const NodeMask& mask) {
    const std::size_t n = grid.node_count();
    if (mask.in.size() != n)
        throw std::invalid_argument("connected_components: mask size != node count");

    DisjointSets ds(n);
    // Strides per axis in flat order (last axis is fastest).
    const int d = grid.dim();
    std::vector<std::size_t> stride(d, 1);
    for (int i = d - 2; i >= 0; --i)
        stride[i] = stride[i + 1] * static_cast<std::size_t>(grid.res[i + 1]);

    std::vector<int> idx(d);
    for (std::size_t k = 0; k < n; ++k) {
        if (!mask.in[k]) continue;
        grid.unflatten(k, idx);
        // Only look "forward" along each axis; the backward pair was handled
        // when the neighbor was visited.
        for (int i = 0; i < d; ++i) {
            if (idx[i] + 1 >= grid.res[i]) continue;
            std::size_t nb = k + stride[i];
            if (mask.in[nb]) ds.unite(k, nb);
        }
    }

    Components comps;
    comps.label.assign(n, -1);
    std::vector<int> root_label(n, -1);
    for (std::size_t k = 0; k < n; ++k) {
        if (!mask.in[k]) continue;
        std::size_t r = ds.find(k);
        if (root_label[r] == -1) {
            root_label[r] = comps.count++;
            comps.size.push_back(0);
            comps.representative.push_back(k);
        }
        comps.label[k] = root_label[r];
        comps.size[root_label[r]]++;
    }
    return comps;
}

double distance_to_mask(const RegularGrid& grid, const NodeMask& mask,
                        std::span<const double> p) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> q(grid.dim());
    for (std::size_t k = 0; k < mask.in.size(); ++k) {
        if (!mask.in[k]) continue;
        grid.node_point(k, q);
        double s = 0.0;
        for (int i = 0; i < grid.dim(); ++i) s += (q[i] - p[i]) * (q[i] - p[i]);
        best = std::min(best, std::sqrt(s));
    }
    return best;
}

SublevelReport sublevel_connectedness(const ScalarField& f, const RegularGrid& grid,
                                      double c, LevelAnchor anchor) {
    std::vector<double> values = sample_lattice(f, grid);
    SublevelReport rep;
    rep.c = c;
    rep.anchor = anchor;
    rep.grid_min = *std::min_element(values.begin(), values.end());
    rep.threshold = anchor == LevelAnchor::AboveMin ? rep.grid_min + c : c;
    NodeMask mask = level_mask(values, c, anchor);
    rep.mask_count = mask.count();
    Components comps = connected_components(grid, mask);
    rep.component_count = comps.count;
    rep.connected = comps.count == 1;
    for (std::size_t r : comps.representative) rep.representatives.push_back(grid.node_point(r));
    return rep;
}

std::string labeling_csv(const RegularGrid& grid, const std::vector<double>& values,
                         const NodeMask& mask, const Components& comps) {
    std::ostringstream os;
    os.precision(17);
    const int d = grid.dim();
    for (int i = 0; i < d; ++i) os << "i" << i << ",";
    for (int i = 0; i < d; ++i) os << "x" << i << ",";
    os << "value,in_mask,component\n";
    std::vector<int> idx(d);
    std::vector<double> p(d);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        grid.unflatten(k, idx);
        grid.node_point(k, p);
        for (int i = 0; i < d; ++i) os << idx[i] << ",";
        for (int i = 0; i < d; ++i) os << p[i] << ",";
        os << values[k] << "," << int(mask.in[k]) << "," << comps.label[k] << "\n";
    }
    return os.str();
}

}  // namespace invextopo
