#include "invextopo/certify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace invextopo {

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

double default_exclusion(double eps_excl, double f_star) {
    return eps_excl >= 0.0 ? eps_excl : 1e-9 * (1.0 + std::abs(f_star));
}

std::string join_values(std::span<const double> v) {
    std::ostringstream os;
    os.precision(12);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    return os.str();
}

}  // namespace

MinimumEstimate estimate_minimum(const ScalarField& f, const BoxDomain& box, int starts,
                                 int iters, double tol, unsigned seed) {
    if (starts < 1) throw std::invalid_argument("estimate_minimum: starts must be >= 1");
    MultistartOptions opt;
    opt.starts = starts;
    opt.seed = seed;
    opt.descent.max_iters = iters;
    MultistartResult ms = multistart_minimize(f, box, opt);

    MinimumEstimate est;
    est.f_star = ms.best_value;
    est.starts = starts;
    for (const auto& o : ms.optima) {
        if (o.value > est.f_star + tol) break;  // optima are sorted best-first
        est.argmin_points.push_back(o.point);
        for (int i = 0; i < box.dim(); ++i) {
            double edge = 1e-9 * box.extent(i);
            if (o.point[i] <= box.lo[i] + edge || o.point[i] >= box.hi[i] - edge)
                est.boundary_attained = true;
        }
    }
    return est;
}

StationaryPointSet find_stationary_points(const ScalarField& f, const BoxDomain& box, int starts,
                                          double tol_grad, unsigned seed) {
    if (starts < 1) throw std::invalid_argument("find_stationary_points: starts must be >= 1");
    MultistartOptions opt;
    opt.starts = starts;
    opt.seed = seed;
    MultistartResult ms = multistart_stationary(f, box, opt);

    StationaryPointSet set;
    set.clustering_radius = opt.cluster_radius_rel * box.diameter();
    for (const auto& o : ms.optima) {
        if (o.value > tol_grad * tol_grad) continue;  // h = ||grad f||^2
        StationaryPointSet::Entry e;
        e.point = o.point;
        e.value = evaluate(f, o.point);
        e.grad_norm = std::sqrt(std::max(0.0, o.value));
        set.points.push_back(std::move(e));
    }
    return set;
}

Certificate invexity_verdict(const ScalarField& f, const BoxDomain& box, double tol_grad,
                             double tol_val, unsigned seed) {
    MinimumEstimate est = estimate_minimum(f, box, 64, 400, 1e-6, seed);
    StationaryPointSet stat = find_stationary_points(f, box, 64, tol_grad, seed);

    Certificate cert;
    cert.condition = "invexity";
    cert.params = {{"tol_grad", tol_grad}, {"tol_val", tol_val}, {"f_star", est.f_star}};
    cert.samples_checked = stat.points.size();
    cert.worst_ratio = 0.0;  // largest stationary-value gap above the minimum
    for (const auto& s : stat.points) {
        double gap = s.value - est.f_star;
        if (gap > cert.worst_ratio) {
            cert.worst_ratio = gap;
            cert.witness = s.point;
        }
    }
    if (stat.points.empty()) {
        cert.verdict = Verdict::Pass;
        cert.note = "no stationary points found in the box (vacuous pass)";
    } else {
        cert.verdict = cert.worst_ratio <= tol_val ? Verdict::Pass : Verdict::Fail;
    }
    return cert;
}

Certificate check_alpha_pl(const ScalarField& f, const RegularGrid& grid, double alpha, double mu,
                           double eps_excl, std::optional<double> f_star) {
    if (alpha <= 0.0 || mu <= 0.0)
        throw std::invalid_argument("check_alpha_pl: alpha and mu must be positive");
    grid.validate();
    std::vector<double> values = sample_lattice(f, grid);
    const double fs = f_star ? *f_star : *std::min_element(values.begin(), values.end());
    const double excl = default_exclusion(eps_excl, fs);

    Certificate cert;
    cert.condition = "alpha_pl";
    cert.params = {{"alpha", alpha}, {"mu", mu}, {"eps_excl", excl}, {"f_star", fs}};
    cert.worst_ratio = std::numeric_limits<double>::infinity();

    std::vector<double> p(grid.dim());
    for (std::size_t k = 0; k < values.size(); ++k) {
        double gap = values[k] - fs;
        if (gap <= excl) continue;
        grid.node_point(k, p);
        std::vector<double> g = gradient(f, p);
        double g2 = 0.0;
        for (double c : g) g2 += c * c;
        // alpha = 2 avoids the sqrt/pow round-trip so exact ratios stay exact.
        double lhs = alpha == 2.0 ? g2 : std::pow(std::sqrt(g2), alpha);
        double r = lhs / gap;
        ++cert.samples_checked;
        if (r < cert.worst_ratio) {
            cert.worst_ratio = r;
            cert.witness = p;
        }
    }
    if (cert.samples_checked == 0) {
        cert.verdict = Verdict::Inconclusive;
        cert.note = "all grid nodes fall inside the exclusion band";
    } else {
        cert.verdict = cert.worst_ratio >= mu - kRatioSlack ? Verdict::Pass : Verdict::Fail;
    }
    return cert;
}

Certificate check_growth(const ScalarField& f, const RegularGrid& grid, double beta, double eta,
                         const NodeMask& minima_mask, double eps_excl,
                         std::optional<double> f_star) {
    if (beta <= 0.0 || eta <= 0.0)
        throw std::invalid_argument("check_growth: beta and eta must be positive");
    grid.validate();
    if (minima_mask.in.size() != grid.node_count())
        throw std::invalid_argument("check_growth: mask size does not match the grid");
    if (minima_mask.count() == 0)
        throw std::invalid_argument("check_growth: empty minima mask");

    std::vector<double> values = sample_lattice(f, grid);
    const double fs = f_star ? *f_star : *std::min_element(values.begin(), values.end());
    const double excl = default_exclusion(eps_excl, fs);

    std::vector<std::vector<double>> mask_points;
    for (std::size_t k = 0; k < minima_mask.in.size(); ++k)
        if (minima_mask.in[k]) mask_points.push_back(grid.node_point(k));

    Certificate cert;
    cert.condition = "growth";
    cert.params = {{"beta", beta}, {"eta", eta}, {"eps_excl", excl}, {"f_star", fs}};
    cert.worst_ratio = std::numeric_limits<double>::infinity();

    std::vector<double> p(grid.dim());
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (minima_mask.in[k]) continue;
        double gap = values[k] - fs;
        if (gap <= excl) continue;
        grid.node_point(k, p);
        double d2_best = std::numeric_limits<double>::infinity();
        for (const auto& q : mask_points) {
            double s = 0.0;
            for (int i = 0; i < grid.dim(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
            d2_best = std::min(d2_best, s);
        }
        double d = std::sqrt(d2_best);
        if (d == 0.0) continue;
        double r = gap / std::pow(d, beta);
        ++cert.samples_checked;
        if (r < cert.worst_ratio) {
            cert.worst_ratio = r;
            cert.witness = p;
        }
    }
    if (cert.samples_checked == 0) {
        cert.verdict = Verdict::Inconclusive;
        cert.note = "no nodes outside the minima mask and exclusion band";
    } else {
        cert.verdict = cert.worst_ratio >= eta - kRatioSlack ? Verdict::Pass : Verdict::Fail;
    }
    return cert;
}

std::pair<Certificate, Certificate> check_two_sided_pl(const MinimaxProblem& problem,
                                                       const RegularGrid& joint_grid, double mu1,
                                                       double mu2, double eps_excl,
                                                       int inner_starts, unsigned seed) {
    problem.validate();
    joint_grid.validate();
    if (joint_grid.dim() != problem.field.dim)
        throw std::invalid_argument("check_two_sided_pl: grid dimension != field arity");
    if (mu1 <= 0.0 || mu2 <= 0.0)
        throw std::invalid_argument("check_two_sided_pl: mu1 and mu2 must be positive");

    const int d = joint_grid.dim();
    const std::vector<int> xa = problem.x_axes(), ya = problem.y_axes();
    const BoxDomain joint = joint_grid.box;
    std::vector<double> values = sample_lattice(problem.field, joint_grid);

    // Distinct-slice keys: flatten the y (resp. x) part of the node index.
    std::size_t y_slices = 1, x_slices = 1;
    for (int i : ya) y_slices *= static_cast<std::size_t>(joint_grid.res[i]);
    for (int i : xa) x_slices *= static_cast<std::size_t>(joint_grid.res[i]);

    MultistartOptions inner;
    inner.starts = inner_starts;
    inner.seed = seed;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> min_x(y_slices, nan), max_y(x_slices, nan);

    std::vector<int> idx(d);
    auto slice_key = [&](const std::vector<int>& node_idx, const std::vector<int>& axes) {
        std::size_t key = 0;
        for (int i : axes) key = key * static_cast<std::size_t>(joint_grid.res[i]) + node_idx[i];
        return key;
    };

    Certificate cx, cy;
    cx.condition = "two_sided_pl_x";
    cx.params = {{"mu1", mu1}, {"inner_starts", double(inner_starts)}};
    cx.note = "ratio = ||grad_x f||^2 / (2 (f - min_x f))";
    cy.condition = "two_sided_pl_y";
    cy.params = {{"mu2", mu2}, {"inner_starts", double(inner_starts)}};
    cy.note = "ratio = ||grad_y f||^2 / (2 (max_y f - f))";
    cx.worst_ratio = cy.worst_ratio = std::numeric_limits<double>::infinity();

    std::vector<double> p(d), grad(d);
    for (std::size_t k = 0; k < values.size(); ++k) {
        joint_grid.unflatten(k, idx);
        joint_grid.node_point(k, p);

        std::size_t ky = slice_key(idx, ya);
        if (std::isnan(min_x[ky]))
            min_x[ky] = multistart_extremize(problem.field, joint, +1, xa, p, inner).best_value;
        std::size_t kx = slice_key(idx, xa);
        if (std::isnan(max_y[kx]))
            max_y[kx] = multistart_extremize(problem.field, joint, -1, ya, p, inner).best_value;

        double gap_x = values[k] - min_x[ky];
        double gap_y = max_y[kx] - values[k];
        double excl_x = default_exclusion(eps_excl, min_x[ky]);
        double excl_y = default_exclusion(eps_excl, max_y[kx]);
        if (gap_x <= excl_x && gap_y <= excl_y) continue;

        value_and_gradient(problem.field, p, grad);
        if (gap_x > excl_x) {
            double gx2 = 0.0;
            for (int i : xa) gx2 += grad[i] * grad[i];
            double r = gx2 / (2.0 * gap_x);
            ++cx.samples_checked;
            if (r < cx.worst_ratio) {
                cx.worst_ratio = r;
                cx.witness = p;
            }
        }
        if (gap_y > excl_y) {
            double gy2 = 0.0;
            for (int i : ya) gy2 += grad[i] * grad[i];
            double r = gy2 / (2.0 * gap_y);
            ++cy.samples_checked;
            if (r < cy.worst_ratio) {
                cy.worst_ratio = r;
                cy.witness = p;
            }
        }
    }

    auto finish = [](Certificate& c, double mu) {
        if (c.samples_checked == 0) {
            c.verdict = Verdict::Inconclusive;
            c.note += "; all nodes excluded";
        } else {
            c.verdict = c.worst_ratio >= mu - kRatioSlack ? Verdict::Pass : Verdict::Fail;
        }
    };
    finish(cx, mu1);
    finish(cy, mu2);
    return {cx, cy};
}

Certificate check_increasing_at_infinity(const ScalarField& f, std::span<const double> center,
                                         std::span<const double> radii, double c,
                                         int dirs_per_dim) {
    if (radii.size() < 3)
        throw std::invalid_argument("check_increasing_at_infinity: need at least 3 radii");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (radii[i] <= radii[i - 1])
            throw std::invalid_argument("check_increasing_at_infinity: radii must increase");
    const int n = f.dim;
    auto dirs = sphere_directions(n, dirs_per_dim * n);

    std::vector<double> shell_min(radii.size());
    std::vector<std::vector<double>> shell_arg(radii.size());
    std::vector<double> p(n);
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& dir : dirs) {
            for (int i = 0; i < n; ++i) p[i] = center[i] + radii[ri] * dir[i];
            double v = evaluate(f, p);
            if (v < best) {
                best = v;
                shell_arg[ri] = p;
            }
        }
        shell_min[ri] = best;
    }

    Certificate cert;
    cert.condition = "increasing_at_infinity";
    cert.params = {{"c", c}, {"directions", double(dirs.size())}};
    cert.samples_checked = dirs.size() * radii.size();
    cert.note = "shell minima: " + join_values(shell_min);

    std::size_t first = radii.size();
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (shell_min[i] > c) {
            first = i;
            break;
        }
    }
    bool ok = first < radii.size();
    std::size_t bad = first;
    for (std::size_t i = first + 1; ok && i < radii.size(); ++i) {
        if (shell_min[i] <= c || shell_min[i] < shell_min[i - 1]) {
            ok = false;
            bad = i;
        }
    }
    double overall_min = *std::min_element(shell_min.begin(), shell_min.end());
    cert.worst_ratio = overall_min;
    if (ok) {
        cert.verdict = Verdict::Pass;
        cert.witness = shell_arg[first];
    } else {
        cert.verdict = Verdict::Fail;
        cert.witness = shell_arg[bad < radii.size() ? bad : radii.size() - 1];
    }
    return cert;
}

double pl_growth_constant(double alpha, double mu) {
    if (alpha <= 1.0)
        throw std::invalid_argument("pl_growth_constant: alpha must exceed 1");
    if (mu <= 0.0) throw std::invalid_argument("pl_growth_constant: mu must be positive");
    double q = (alpha - 1.0) / alpha;
    return std::pow(q, alpha / (alpha - 1.0)) * std::pow(mu, 1.0 / (alpha - 1.0));
}

FlowTrace pl_gradient_flow(const ScalarField& f, std::span<const double> x0, double alpha,
                           double f_star, const FlowOptions& opt) {
    if (alpha <= 1.0) throw std::invalid_argument("pl_gradient_flow: alpha must exceed 1");
    const int n = f.dim;
    const double e = (alpha - 1.0) / alpha;

    FlowTrace trace;
    std::vector<double> x(x0.begin(), x0.end());
    double fx = evaluate(f, x);
    double gap = fx - f_star;

    if (opt.mu) {
        trace.time_bound = std::pow(gap > 0.0 ? gap : 0.0, e) * std::pow(alpha / (alpha - 1.0), 2.0) *
                           std::pow(*opt.mu, -2.0 / alpha);
    }
    if (gap <= opt.stop_gap) {
        trace.converged = true;
        trace.terminal_point = x;
        return trace;
    }

    // -grad g at a point with a known positive gap.
    auto minus_grad_g = [&](const std::vector<double>& q, double gap_q,
                            std::vector<double>& out) {
        value_and_gradient(f, q, out);
        double scale = -e * std::pow(gap_q, e - 1.0);
        for (double& c : out) c *= scale;
    };

    double t = 0.0, dt = opt.initial_dt;
    const double dt_max = 1e3 * opt.initial_dt;
    std::vector<double> k1(n), k2(n), k3(n), xm(n), xn(n);
    trace.samples.push_back({0.0, x, fx});
    minus_grad_g(x, gap, k1);

    int steps = 0;
    while (steps < opt.max_steps && t < opt.max_time) {
        bool accepted = false;
        bool terminal = false;
        for (; dt >= 1e-15; dt *= 0.5) {
            for (int i = 0; i < n; ++i) xm[i] = x[i] + 0.5 * dt * k1[i];
            double gm = evaluate(f, xm) - f_star;
            if (!std::isfinite(gm)) continue;
            if (gm <= 0.0) continue;  // midpoint stepped over the minimum; shrink
            minus_grad_g(xm, gm, k2);
            for (int i = 0; i < n; ++i) xn[i] = x[i] + dt * k2[i];
            double fv = evaluate(f, xn);
            double gn = fv - f_star;
            if (!std::isfinite(fv) || gn >= gap) continue;  // must decrease
            if (gn <= opt.stop_gap) {
                fx = fv;
                gap = gn;
                accepted = terminal = true;
                break;
            }
            // Reject steps that jump across the valley floor (the field's
            // downhill direction reverses), otherwise the accumulated time
            // overstates the continuous flow's.
            minus_grad_g(xn, gn, k3);
            double dot = 0.0;
            for (int i = 0; i < n; ++i) dot += k3[i] * k2[i];
            if (dot < 0.0) continue;
            fx = fv;
            gap = gn;
            std::swap(k1, k3);  // endpoint gradient doubles as the next k1
            accepted = true;
            break;
        }
        if (!accepted) {
            trace.diverged = true;
            break;
        }
        t += dt;
        x = xn;
        trace.samples.push_back({t, x, fx});
        ++steps;
        if (terminal || gap <= opt.stop_gap) {
            trace.converged = true;
            break;
        }
        dt = std::min(dt * 1.25, dt_max);
    }

    trace.terminal_time = t;
    trace.terminal_point = x;
    if (trace.time_bound)
        trace.bound_satisfied = !trace.converged || trace.terminal_time <= *trace.time_bound + 1e-9;
    return trace;
}

}  // namespace invextopo
