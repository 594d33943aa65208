#include "invextopo/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace invextopo {

namespace {

constexpr unsigned kPrimes[12] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double radical_inverse(unsigned base, unsigned long long i) {
    double r = 0.0, f = 1.0 / base;
    while (i) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f /= base;
    }
    return r;
}

void ensure_finite(double v, std::span<const double> p) {
    if (std::isfinite(v)) return;
    std::ostringstream os;
    os << "non-finite objective value at (";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ")";
    throw std::runtime_error(os.str());
}

double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

std::vector<std::vector<double>> halton_points(int dim, int count, unsigned seed) {
    if (dim < 1 || dim > 12)
        throw std::invalid_argument("halton_points: dimension must be between 1 and 12");
    std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
    for (int k = 0; k < count; ++k)
        for (int j = 0; j < dim; ++j)
            pts[k][j] =
                radical_inverse(kPrimes[j], static_cast<unsigned long long>(seed) + 1 + k);
    return pts;
}

std::vector<std::vector<double>> sphere_directions(int dim, int count) {
    std::vector<std::vector<double>> dirs;
    if (dim == 1) {
        dirs.push_back({1.0});
        dirs.push_back({-1.0});
        return dirs;
    }
    if (dim == 2) {
        for (int k = 0; k < count; ++k) {
            double th = 2.0 * std::numbers::pi * (k + 0.5) / count;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
        return dirs;
    }
    if (dim == 3) {
        // Golden-angle spiral lattice.
        const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            double z = 1.0 - 2.0 * (k + 0.5) / count;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            dirs.push_back({r * std::cos(ga * k), r * std::sin(ga * k), z});
        }
        return dirs;
    }
    auto u = halton_points(dim, count * 3, 0);
    for (const auto& row : u) {
        std::vector<double> v(dim);
        double n2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            v[i] = 2.0 * row[i] - 1.0;
            n2 += v[i] * v[i];
        }
        if (n2 < 1e-2 || n2 > 1.0) continue;
        double inv = 1.0 / std::sqrt(n2);
        for (double& c : v) c *= inv;
        dirs.push_back(std::move(v));
        if (static_cast<int>(dirs.size()) == count) break;
    }
    return dirs;
}

DescentResult projected_descent(const ValueGrad& fn, const BoxDomain& box,
                                std::vector<double> x0, const DescentOptions& opt) {
    const int d = box.dim();
    std::vector<double> x = box.clip(x0);
    std::vector<double> g(d), gt(d), trial(d);
    double val = fn(x, g);
    ensure_finite(val, x);

    auto projected_grad_norm = [&](const std::vector<double>& p, const std::vector<double>& grad) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            double diff = p[i] - std::clamp(p[i] - grad[i], box.lo[i], box.hi[i]);
            s += diff * diff;
        }
        return std::sqrt(s);
    };

    DescentResult res;
    double t_prev = opt.initial_step;
    int it = 0;
    for (; it < opt.max_iters; ++it) {
        if (projected_grad_norm(x, g) <= opt.tol_grad) break;
        double t = std::min(opt.initial_step, 2.0 * t_prev);
        bool accepted = false;
        for (int bt = 0; bt < opt.max_backtracks; ++bt, t *= 0.5) {
            double step_sq = 0.0;
            for (int i = 0; i < d; ++i) {
                trial[i] = std::clamp(x[i] - t * g[i], box.lo[i], box.hi[i]);
                double diff = trial[i] - x[i];
                step_sq += diff * diff;
            }
            if (step_sq == 0.0) break;  // fully pinned at the boundary
            double vt = fn(trial, gt);
            ensure_finite(vt, trial);
            if (vt <= val - (opt.armijo_c / t) * step_sq) {
                x = trial;
                val = vt;
                std::swap(g, gt);
                t_prev = t;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // line search exhausted; keep the best point so far
    }
    res.point = std::move(x);
    res.value = val;
    res.grad_norm = projected_grad_norm(res.point, g);
    res.iters = it;
    res.converged = res.grad_norm <= opt.tol_grad;
    return res;
}

MultistartResult multistart_fn(const ValueGrad& fn, const BoxDomain& box,
                               const std::vector<int>& free_axes,
                               std::span<const double> anchor, const MultistartOptions& opt) {
    box.validate();
    if (opt.starts < 1) throw std::invalid_argument("multistart: need at least one start");
    const int d = box.dim();
    std::vector<int> axes = free_axes;
    if (axes.empty()) {
        axes.resize(d);
        for (int i = 0; i < d; ++i) axes[i] = i;
    }
    std::vector<char> is_free(d, 0);
    for (int a : axes) is_free[a] = 1;
    const bool all_free = static_cast<int>(axes.size()) == d;

    ValueGrad masked = fn;
    if (!all_free) {
        masked = [&fn, is_free](std::span<const double> p, std::span<double> gout) {
            double v = fn(p, gout);
            for (std::size_t i = 0; i < gout.size(); ++i)
                if (!is_free[i]) gout[i] = 0.0;
            return v;
        };
    }

    double sub_diam_sq = 0.0;
    for (int a : axes) sub_diam_sq += box.extent(a) * box.extent(a);
    const double radius = opt.cluster_radius_rel * std::sqrt(sub_diam_sq);

    auto u = halton_points(static_cast<int>(axes.size()), opt.starts, opt.seed);
    std::vector<DescentResult> terms;
    terms.reserve(opt.starts);
    std::vector<double> x0(anchor.begin(), anchor.end());
    if (x0.empty()) x0 = box.center();
    for (const auto& row : u) {
        for (std::size_t j = 0; j < axes.size(); ++j)
            x0[axes[j]] = box.lo[axes[j]] + row[j] * box.extent(axes[j]);
        terms.push_back(projected_descent(masked, box, x0, opt.descent));
    }

    std::sort(terms.begin(), terms.end(), [](const DescentResult& a, const DescentResult& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.point < b.point;
    });

    MultistartResult out;
    for (auto& t : terms) {
        bool merged = false;
        for (std::size_t c = 0; c < out.optima.size(); ++c) {
            if (dist(out.optima[c].point, t.point) <= radius) {
                out.cluster_sizes[c]++;
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.optima.push_back(std::move(t));
            out.cluster_sizes.push_back(1);
        }
    }
    out.best_value = out.optima.front().value;
    return out;
}

MultistartResult multistart_extremize(const ScalarField& f, const BoxDomain& box, int sign,
                                      const std::vector<int>& free_axes,
                                      std::span<const double> anchor,
                                      const MultistartOptions& opt) {
    if (f.dim != box.dim())
        throw std::invalid_argument("multistart_extremize: field arity != box dimension");
    const double s = sign < 0 ? -1.0 : 1.0;
    ValueGrad fn = [&f, s](std::span<const double> p, std::span<double> gout) {
        double v = value_and_gradient(f, p, gout);
        if (s < 0)
            for (double& gi : gout) gi = -gi;
        return s * v;
    };
    MultistartResult out = multistart_fn(fn, box, free_axes, anchor, opt);
    if (s < 0) {
        out.best_value = -out.best_value;
        for (auto& o : out.optima) o.value = -o.value;
    }
    return out;
}

MultistartResult multistart_minimize(const ScalarField& f, const BoxDomain& box,
                                     const MultistartOptions& opt) {
    return multistart_extremize(f, box, +1, {}, {}, opt);
}

MultistartResult multistart_stationary(const ScalarField& f, const BoxDomain& box,
                                       const MultistartOptions& opt) {
    ValueGrad fn = [&f](std::span<const double> p, std::span<double> gout) {
        std::vector<double> grad(p.size());
        value_and_gradient(f, p, grad);
        std::vector<double> hv = hessian_vector(f, p, grad);
        double h = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            h += grad[i] * grad[i];
            gout[i] = 2.0 * hv[i];
        }
        return h;
    };
    return multistart_fn(fn, box, {}, {}, opt);
}

}  // namespace invextopo
