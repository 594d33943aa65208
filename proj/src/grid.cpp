#include "invextopo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace invextopo {

double BoxDomain::diameter() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += extent(i) * extent(i);
    return std::sqrt(s);
}

bool BoxDomain::contains(std::span<const double> p, double slack) const {
    if (static_cast<int>(p.size()) != dim()) return false;
    for (int i = 0; i < dim(); ++i)
        if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
    return true;
}

std::vector<double> BoxDomain::clip(std::span<const double> p) const {
    std::vector<double> q(p.begin(), p.end());
    for (int i = 0; i < dim(); ++i) q[i] = std::clamp(q[i], lo[i], hi[i]);
    return q;
}

std::vector<double> BoxDomain::center() const {
    std::vector<double> c(lo.size());
    for (int i = 0; i < dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
}

void BoxDomain::validate() const {
    if (lo.size() != hi.size() || lo.empty())
        throw std::invalid_argument("box: lo/hi must be nonempty and the same length");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) {
            std::ostringstream os;
            os << "box: axis " << i << " has lo=" << lo[i] << " >= hi=" << hi[i];
            throw std::invalid_argument(os.str());
        }
    }
}

BoxDomain make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
    BoxDomain b{std::vector<double>(lo), std::vector<double>(hi)};
    b.validate();
    return b;
}

BoxDomain square_box(double lo, double hi, int dim) {
    BoxDomain b{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
    b.validate();
    return b;
}

BoxDomain concat_boxes(const BoxDomain& a, const BoxDomain& b) {
    BoxDomain c = a;
    c.lo.insert(c.lo.end(), b.lo.begin(), b.lo.end());
    c.hi.insert(c.hi.end(), b.hi.begin(), b.hi.end());
    return c;
}

std::size_t RegularGrid::node_count() const {
    std::size_t n = 1;
    for (int r : res) n *= static_cast<std::size_t>(r);
    return n;
}

double RegularGrid::max_spacing() const {
    double h = 0.0;
    for (int i = 0; i < dim(); ++i) h = std::max(h, spacing(i));
    return h;
}

std::size_t RegularGrid::flat_index(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int i = 0; i < dim(); ++i) f = f * static_cast<std::size_t>(res[i]) + idx[i];
    return f;
}

void RegularGrid::unflatten(std::size_t flat, std::span<int> idx_out) const {
    for (int i = dim() - 1; i >= 0; --i) {
        idx_out[i] = static_cast<int>(flat % static_cast<std::size_t>(res[i]));
        flat /= static_cast<std::size_t>(res[i]);
    }
}

void RegularGrid::node_point(std::size_t flat, std::span<double> out) const {
    for (int i = dim() - 1; i >= 0; --i) {
        int j = static_cast<int>(flat % static_cast<std::size_t>(res[i]));
        flat /= static_cast<std::size_t>(res[i]);
        // Hit the upper endpoint exactly rather than through accumulated steps.
        out[i] = (j == res[i] - 1) ? box.hi[i] : box.lo[i] + j * spacing(i);
    }
}

std::vector<double> RegularGrid::node_point(std::size_t flat) const {
    std::vector<double> p(dim());
    node_point(flat, p);
    return p;
}

std::size_t RegularGrid::nearest_node(std::span<const double> p) const {
    std::vector<int> idx(dim());
    for (int i = 0; i < dim(); ++i) {
        double t = (std::clamp(p[i], box.lo[i], box.hi[i]) - box.lo[i]) / spacing(i);
        idx[i] = std::clamp(static_cast<int>(std::lround(t)), 0, res[i] - 1);
    }
    return flat_index(idx);
}

void RegularGrid::validate(std::size_t max_nodes) const {
    box.validate();
    if (static_cast<int>(res.size()) != box.dim())
        throw std::invalid_argument("grid: resolution vector length != box dimension");
    for (int r : res)
        if (r < 2) throw std::invalid_argument("grid: need at least 2 nodes per axis");
    // Multiply with overflow care: bail as soon as the budget is crossed.
    std::size_t n = 1;
    for (int r : res) {
        if (n > max_nodes / static_cast<std::size_t>(r)) {
            std::ostringstream os;
            os << "grid: node count exceeds budget of " << max_nodes;
            throw std::invalid_argument(os.str());
        }
        n *= static_cast<std::size_t>(r);
    }
}

RegularGrid make_grid(const BoxDomain& box, int res_all_axes) {
    return make_grid(box, std::vector<int>(box.dim(), res_all_axes));
}

RegularGrid make_grid(const BoxDomain& box, std::vector<int> res) {
    RegularGrid g{box, std::move(res)};
    g.validate();
    return g;
}

std::vector<double> sample_lattice(const ScalarField& f, const RegularGrid& grid) {
    grid.validate();
    if (f.dim != grid.dim())
        throw std::invalid_argument("sample_lattice: field arity != grid dimension");
    const std::size_t n = grid.node_count();
    std::vector<double> values(n);
    std::vector<double> p(grid.dim());
    for (std::size_t k = 0; k < n; ++k) {
        grid.node_point(k, p);
        try {
            values[k] = evaluate(f, p);
        } catch (const EvalError& e) {
            std::ostringstream os;
            os << e.what() << " at node " << k << " (";
            for (int i = 0; i < grid.dim(); ++i) os << (i ? ", " : "") << p[i];
            os << ")";
            throw EvalError(os.str(), e.offset);
        }
    }
    return values;
}

}  // namespace invextopo
