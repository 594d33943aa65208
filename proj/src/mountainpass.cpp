#include "invextopo/mountainpass.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace invextopo {

namespace {

double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Resample a polyline to equal arc-length spacing, endpoints fixed.
void reparameterize(std::vector<std::vector<double>>& nodes) {
    const std::size_t m = nodes.size();
    const std::size_t n = nodes[0].size();
    std::vector<double> cum(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) cum[i] = cum[i - 1] + dist(nodes[i - 1], nodes[i]);
    const double total = cum[m - 1];
    if (total <= 0.0) return;  // fully degenerate; leave in place

    std::vector<std::vector<double>> out(m, std::vector<double>(n));
    out[0] = nodes[0];
    out[m - 1] = nodes[m - 1];
    std::size_t seg = 0;
    for (std::size_t j = 1; j + 1 < m; ++j) {
        double target = total * static_cast<double>(j) / static_cast<double>(m - 1);
        while (seg + 2 < m && cum[seg + 1] < target) ++seg;
        double len = cum[seg + 1] - cum[seg];
        double w = len > 0.0 ? (target - cum[seg]) / len : 0.0;
        for (std::size_t i = 0; i < n; ++i)
            out[j][i] = nodes[seg][i] + w * (nodes[seg + 1][i] - nodes[seg][i]);
    }
    nodes = std::move(out);
}

}  // namespace

PassResult find_mountain_pass(const ScalarField& f, std::span<const double> x0,
                              std::span<const double> x1, const PassOptions& opt) {
    const int n = f.dim;
    if (opt.m < 3) throw std::invalid_argument("find_mountain_pass: need at least 3 path nodes");
    if (static_cast<int>(x0.size()) != n || static_cast<int>(x1.size()) != n)
        throw std::invalid_argument("find_mountain_pass: endpoint dimension != field arity");
    const double length = dist(x0, x1);
    if (length <= 0.0)
        throw std::invalid_argument("find_mountain_pass: endpoints must be distinct");
    const double step = opt.step_rel * length;

    BoxDomain clamp;
    if (opt.clamp) {
        clamp = *opt.clamp;
        clamp.validate();
    } else {
        clamp.lo.resize(n);
        clamp.hi.resize(n);
        for (int i = 0; i < n; ++i) {
            clamp.lo[i] = std::min(x0[i], x1[i]) - 2.0 * length;
            clamp.hi[i] = std::max(x0[i], x1[i]) + 2.0 * length;
        }
    }

    PassResult res;
    res.max_endpoint_value = std::max(evaluate(f, x0), evaluate(f, x1));

    std::vector<std::vector<double>> nodes(opt.m, std::vector<double>(n));
    for (int j = 0; j < opt.m; ++j) {
        double w = static_cast<double>(j) / (opt.m - 1);
        for (int i = 0; i < n; ++i) nodes[j][i] = x0[i] + w * (x1[i] - x0[i]);
    }
    res.snapshots.emplace_back(0, nodes);

    std::vector<double> tangent(n), g(n);
    std::vector<std::vector<double>> next = nodes;
    int it = 1;
    for (; it <= opt.iters; ++it) {
        double interior_max = -std::numeric_limits<double>::infinity();
        for (int j = 1; j + 1 < opt.m; ++j) {
            interior_max = std::max(interior_max, evaluate(f, nodes[j]));
            double tn = 0.0;
            for (int i = 0; i < n; ++i) {
                tangent[i] = nodes[j + 1][i] - nodes[j - 1][i];
                tn += tangent[i] * tangent[i];
            }
            tn = std::sqrt(tn);
            value_and_gradient(f, nodes[j], g);
            double proj = 0.0;
            if (tn > 0.0) {
                for (int i = 0; i < n; ++i) tangent[i] /= tn;
                for (int i = 0; i < n; ++i) proj += g[i] * tangent[i];
            }
            for (int i = 0; i < n; ++i) {
                double moved = nodes[j][i] - step * (g[i] - proj * tangent[i]);
                double clipped = std::clamp(moved, clamp.lo[i], clamp.hi[i]);
                if (clipped != moved) res.boundary_hit = true;
                next[j][i] = clipped;
            }
        }
        res.interior_max_trace.push_back(interior_max);
        reparameterize(next);
        double movement = 0.0;
        for (int j = 1; j + 1 < opt.m; ++j) movement = std::max(movement, dist(nodes[j], next[j]));
        nodes = next;
        if (it % opt.snapshot_every == 0) res.snapshots.emplace_back(it, nodes);
        if (movement <= opt.tol * length) break;
    }
    res.string_iters = std::min(it, opt.iters);
    res.path = nodes;
    if (res.snapshots.back().first != res.string_iters)
        res.snapshots.emplace_back(res.string_iters, nodes);

    // Locate the interior maximum of the relaxed string.
    int imax = 1;
    double vmax = -std::numeric_limits<double>::infinity();
    for (int j = 1; j + 1 < opt.m; ++j) {
        double v = evaluate(f, nodes[j]);
        if (v > vmax) {
            vmax = v;
            imax = j;
        }
    }

    const double no_pass_slack = 1e-8 * (1.0 + std::abs(res.max_endpoint_value));
    if (vmax <= res.max_endpoint_value + no_pass_slack) {
        res.no_pass = true;
        res.pass_point = nodes[imax];
        res.pass_value = vmax;
        value_and_gradient(f, nodes[imax], g);
        res.grad_norm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
        return res;
    }

    // Climbing image: ascend along the (frozen) tangent, descend orthogonally.
    std::vector<double> x = nodes[imax];
    double tn = 0.0;
    for (int i = 0; i < n; ++i) {
        tangent[i] = nodes[imax + 1][i] - nodes[imax - 1][i];
        tn += tangent[i] * tangent[i];
    }
    tn = std::sqrt(tn);
    if (tn > 0.0)
        for (int i = 0; i < n; ++i) tangent[i] /= tn;
    for (int k = 0; k < opt.iters; ++k) {
        value_and_gradient(f, x, g);
        double gn = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
        if (gn <= opt.tol) break;
        double proj = 0.0;
        for (int i = 0; i < n; ++i) proj += g[i] * tangent[i];
        for (int i = 0; i < n; ++i) {
            double moved = x[i] - step * (g[i] - 2.0 * proj * tangent[i]);
            double clipped = std::clamp(moved, clamp.lo[i], clamp.hi[i]);
            if (clipped != moved) res.boundary_hit = true;
            x[i] = clipped;
        }
    }

    // Polish: drive ||grad f||^2 to zero from the climbing image's endpoint.
    ValueGrad h = [&f](std::span<const double> p, std::span<double> gout) {
        std::vector<double> grad(p.size());
        value_and_gradient(f, p, grad);
        std::vector<double> hv = hessian_vector(f, p, grad);
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            s += grad[i] * grad[i];
            gout[i] = 2.0 * hv[i];
        }
        return s;
    };
    DescentOptions popt;
    popt.max_iters = 400;
    popt.tol_grad = 1e-14;
    DescentResult polished = projected_descent(h, clamp, x, popt);

    res.pass_point = polished.point;
    res.pass_value = evaluate(f, polished.point);
    res.grad_norm = std::sqrt(std::max(0.0, polished.value));
    res.converged = res.grad_norm <= opt.tol &&
                    res.pass_value > res.max_endpoint_value + no_pass_slack;
    res.inconclusive = !res.converged && !res.no_pass;
    return res;
}

bool verify_separation(const ScalarField& f, const RegularGrid& grid,
                       std::span<const double> x0, std::span<const double> x1, double c) {
    grid.validate();
    auto check_endpoint = [&](std::span<const double> p, const char* name) {
        if (!grid.box.contains(p))
            throw std::invalid_argument(std::string("verify_separation: ") + name +
                                        " lies outside the grid box");
        if (evaluate(f, p) > c)
            throw std::invalid_argument(std::string("verify_separation: f(") + name +
                                        ") exceeds the level c");
    };
    check_endpoint(x0, "x0");
    check_endpoint(x1, "x1");

    std::vector<double> values = sample_lattice(f, grid);
    NodeMask mask = level_mask(values, c, LevelAnchor::Absolute);
    if (mask.count() == 0)
        throw std::invalid_argument("verify_separation: sublevel mask is empty at this level");
    Components comps = connected_components(grid, mask);

    auto nearest_masked = [&](std::span<const double> p) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_k = 0;
        std::vector<double> q(grid.dim());
        for (std::size_t k = 0; k < mask.in.size(); ++k) {
            if (!mask.in[k]) continue;
            grid.node_point(k, q);
            double d = dist(p, q);
            if (d < best) {
                best = d;
                best_k = k;
            }
        }
        return best_k;
    };
    return comps.label[nearest_masked(x0)] != comps.label[nearest_masked(x1)];
}

std::string path_trace_csv(const ScalarField& f, const PassResult& r) {
    std::ostringstream os;
    os.precision(17);
    const std::size_t n = r.path.empty() ? 0 : r.path[0].size();
    os << "iteration,node";
    for (std::size_t i = 0; i < n; ++i) os << ",x" << i;
    os << ",value\n";
    for (const auto& [iter, nodes] : r.snapshots) {
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            os << iter << "," << j;
            for (double c : nodes[j]) os << "," << c;
            os << "," << evaluate(f, nodes[j]) << "\n";
        }
    }
    return os.str();
}

}  // namespace invextopo
