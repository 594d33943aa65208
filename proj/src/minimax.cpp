#include "invextopo/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace invextopo {

namespace {

constexpr unsigned kProbeSeed = 17;  // fixed so saddle probes never vary between runs

std::vector<double> joint_from_blocks(const MinimaxProblem& p, std::span<const double> x,
                                      std::span<const double> y) {
    std::vector<double> joint(static_cast<std::size_t>(p.n_x + p.n_y));
    std::copy(x.begin(), x.end(), joint.begin());
    std::copy(y.begin(), y.end(), joint.begin() + p.n_x);
    return joint;
}

void require_block_point(const BoxDomain& box, std::span<const double> pt, const char* what) {
    if (static_cast<int>(pt.size()) != box.dim())
        throw std::invalid_argument(std::string(what) + ": expected " +
                                    std::to_string(box.dim()) + " coordinates, got " +
                                    std::to_string(pt.size()));
    if (!box.contains(pt, 1e-12))
        throw std::invalid_argument(std::string(what) + ": point outside its block box");
}

RegularGrid block_subgrid(const MinimaxProblem& p, const RegularGrid& joint, Block side) {
    const int off = side == Block::X ? 0 : p.n_x;
    const int n = side == Block::X ? p.n_x : p.n_y;
    RegularGrid g;
    g.box = side == Block::X ? p.x_box : p.y_box;
    g.res.assign(joint.res.begin() + off, joint.res.begin() + off + n);
    return g;
}

void require_joint_grid(const MinimaxProblem& p, const RegularGrid& grid) {
    const BoxDomain jb = p.joint_box();
    if (grid.dim() != jb.dim())
        throw std::invalid_argument("joint grid dimension does not match the problem");
    for (int i = 0; i < jb.dim(); ++i)
        if (grid.box.lo[i] != jb.lo[i] || grid.box.hi[i] != jb.hi[i])
            throw std::invalid_argument("joint grid box does not match x_box x y_box");
}

double block_grad_norm2(const std::vector<double>& grad, int off, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += grad[off + i] * grad[off + i];
    return s;
}

// Least squares fit y = b + a*x; returns {a, b, rms residual}.
struct LineFit {
    double slope = 0.0, intercept = 0.0, rms = 0.0;
};
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    LineFit f;
    const double denom = n * sxx - sx * sx;
    f.slope = denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (f.intercept + f.slope * xs[i]);
        ss += e * e;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

std::vector<std::vector<double>> mask_points(const RegularGrid& grid, const NodeMask& mask) {
    std::vector<std::vector<double>> pts;
    for (std::size_t k = 0; k < mask.in.size(); ++k)
        if (mask.in[k]) pts.push_back(grid.node_point(k));
    return pts;
}

}  // namespace

double primal_dual_value(const MinimaxProblem& problem, std::span<const double> point, Side side,
                         int starts, unsigned seed) {
    problem.validate();
    const BoxDomain& own = side == Side::Primal ? problem.x_box : problem.y_box;
    require_block_point(own, point, side == Side::Primal ? "primal point" : "dual point");

    std::vector<double> anchor(static_cast<std::size_t>(problem.n_x + problem.n_y));
    const auto other_center = (side == Side::Primal ? problem.y_box : problem.x_box).center();
    const int off = side == Side::Primal ? 0 : problem.n_x;
    std::copy(point.begin(), point.end(), anchor.begin() + off);
    const int other_off = side == Side::Primal ? problem.n_x : 0;
    std::copy(other_center.begin(), other_center.end(), anchor.begin() + other_off);

    MultistartOptions opt;
    opt.starts = starts;
    opt.seed = seed;
    const auto free_axes = side == Side::Primal ? problem.y_axes() : problem.x_axes();
    const int sign = side == Side::Primal ? -1 : +1;  // primal: inner max
    return multistart_extremize(problem.field, problem.joint_box(), sign, free_axes, anchor, opt)
        .best_value;
}

BestResponseSet best_response_set(const MinimaxProblem& problem, Block responding,
                                  std::span<const double> fixed, const RegularGrid& block_grid,
                                  double tol, int starts, unsigned seed) {
    problem.validate();
    const BoxDomain& own = responding == Block::Y ? problem.y_box : problem.x_box;
    const BoxDomain& fix_box = responding == Block::Y ? problem.x_box : problem.y_box;
    require_block_point(fix_box, fixed, "fixed block point");
    if (block_grid.dim() != own.dim())
        throw std::invalid_argument("response grid dimension does not match the block");
    for (int i = 0; i < own.dim(); ++i)
        if (block_grid.box.lo[i] < own.lo[i] - 1e-12 || block_grid.box.hi[i] > own.hi[i] + 1e-12)
            throw std::invalid_argument("response grid leaves the block box");

    // Inner optimum over the responding block (continuous, multistart).
    std::vector<double> anchor(static_cast<std::size_t>(problem.n_x + problem.n_y));
    const int fix_off = responding == Block::Y ? 0 : problem.n_x;
    const int own_off = responding == Block::Y ? problem.n_x : 0;
    std::copy(fixed.begin(), fixed.end(), anchor.begin() + fix_off);
    const auto own_center = own.center();
    std::copy(own_center.begin(), own_center.end(), anchor.begin() + own_off);

    MultistartOptions opt;
    opt.starts = starts;
    opt.seed = seed;
    const auto free_axes = responding == Block::Y ? problem.y_axes() : problem.x_axes();
    const int sign = responding == Block::Y ? -1 : +1;  // y responds by maximizing
    BestResponseSet out;
    out.optimum =
        multistart_extremize(problem.field, problem.joint_box(), sign, free_axes, anchor, opt)
            .best_value;

    out.mask.in.assign(block_grid.node_count(), 0);
    std::vector<double> node(static_cast<std::size_t>(own.dim()));
    std::vector<double> joint = anchor;
    for (std::size_t k = 0; k < out.mask.in.size(); ++k) {
        block_grid.node_point(k, node);
        std::copy(node.begin(), node.end(), joint.begin() + own_off);
        const double v = evaluate(problem.field, joint);
        const bool near = responding == Block::Y ? v >= out.optimum - tol : v <= out.optimum + tol;
        out.mask.in[k] = near ? 1 : 0;
    }
    out.points = mask_points(block_grid, out.mask);
    return out;
}

bool sampled_saddle_ok(const MinimaxProblem& problem, std::span<const double> joint_point,
                       double tol, int probes_per_block) {
    const double f0 = evaluate(problem.field, joint_point);
    std::vector<double> probe(joint_point.begin(), joint_point.end());

    const auto y_dev = halton_points(problem.n_y, probes_per_block, kProbeSeed);
    for (const auto& u : y_dev) {
        for (int i = 0; i < problem.n_y; ++i)
            probe[problem.n_x + i] = problem.y_box.lo[i] + u[i] * problem.y_box.extent(i);
        if (evaluate(problem.field, probe) > f0 + tol) return false;
    }
    std::copy(joint_point.begin(), joint_point.end(), probe.begin());

    const auto x_dev = halton_points(problem.n_x, probes_per_block, kProbeSeed);
    for (const auto& u : x_dev) {
        for (int i = 0; i < problem.n_x; ++i)
            probe[i] = problem.x_box.lo[i] + u[i] * problem.x_box.extent(i);
        if (evaluate(problem.field, probe) < f0 - tol) return false;
    }
    return true;
}

SolutionClassification classify_solutions(const MinimaxProblem& problem,
                                          const RegularGrid& joint_grid, double tol_val,
                                          double tol_grad, int starts, unsigned seed) {
    problem.validate();
    require_joint_grid(problem, joint_grid);

    SolutionClassification cls;
    cls.problem = problem;
    cls.joint_grid = joint_grid;
    cls.x_grid = block_subgrid(problem, joint_grid, Block::X);
    cls.y_grid = block_subgrid(problem, joint_grid, Block::Y);
    cls.tol_val = tol_val;
    cls.tol_grad = tol_grad;

    const std::size_t nx = cls.x_grid.node_count();
    const std::size_t ny = cls.y_grid.node_count();

    // Primal and dual values per block node (inner optima are continuous
    // multistart solves; grids only discretize the outer block).
    std::vector<double> F(nx), G(ny);
    std::vector<double> xpt(static_cast<std::size_t>(problem.n_x));
    std::vector<double> ypt(static_cast<std::size_t>(problem.n_y));
    for (std::size_t i = 0; i < nx; ++i) {
        cls.x_grid.node_point(i, xpt);
        F[i] = primal_dual_value(problem, xpt, Side::Primal, starts, seed);
    }
    for (std::size_t j = 0; j < ny; ++j) {
        cls.y_grid.node_point(j, ypt);
        G[j] = primal_dual_value(problem, ypt, Side::Dual, starts, seed);
    }
    cls.min_F = *std::min_element(F.begin(), F.end());
    cls.max_G = *std::max_element(G.begin(), G.end());

    cls.X_mask.in.assign(nx, 0);
    for (std::size_t i = 0; i < nx; ++i) cls.X_mask.in[i] = F[i] <= cls.min_F + tol_val ? 1 : 0;
    cls.Y_mask.in.assign(ny, 0);
    for (std::size_t j = 0; j < ny; ++j) cls.Y_mask.in[j] = G[j] >= cls.max_G - tol_val ? 1 : 0;
    cls.inconclusive = cls.X_mask.count() == 0 || cls.Y_mask.count() == 0;

    const auto values = sample_lattice(problem.field, joint_grid);
    const std::size_t total = joint_grid.node_count();
    cls.Mlow_mask.in.assign(total, 0);
    cls.Mup_mask.in.assign(total, 0);
    cls.E_mask.in.assign(total, 0);

    std::vector<double> joint(static_cast<std::size_t>(problem.n_x + problem.n_y));
    for (std::size_t k = 0; k < total; ++k) {
        const std::size_t i = k / ny, j = k % ny;
        const bool low = cls.X_mask.in[i] && values[k] >= F[i] - tol_val;
        const bool up = cls.Y_mask.in[j] && values[k] <= G[j] + tol_val;
        cls.Mlow_mask.in[k] = low ? 1 : 0;
        cls.Mup_mask.in[k] = up ? 1 : 0;
        if (!(low && up)) continue;
        joint_grid.node_point(k, joint);
        if (tol_grad > 0.0) {
            const auto grad = gradient(problem.field, joint);
            double g2 = 0.0;
            for (double g : grad) g2 += g * g;
            if (std::sqrt(g2) > tol_grad) continue;
        }
        if (sampled_saddle_ok(problem, joint, tol_val)) cls.E_mask.in[k] = 1;
    }

    const auto comps = connected_components(joint_grid, cls.E_mask);
    cls.E_components = comps.count;
    if (cls.E_mask.count() > 0) {
        const int dim = joint_grid.dim();
        cls.E_bbox_lo.assign(dim, std::numeric_limits<double>::infinity());
        cls.E_bbox_hi.assign(dim, -std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k < total; ++k) {
            if (!cls.E_mask.in[k]) continue;
            joint_grid.node_point(k, joint);
            for (int d = 0; d < dim; ++d) {
                cls.E_bbox_lo[d] = std::min(cls.E_bbox_lo[d], joint[d]);
                cls.E_bbox_hi[d] = std::max(cls.E_bbox_hi[d], joint[d]);
            }
        }
    }
    return cls;
}

std::vector<std::vector<double>> SolutionClassification::E_points() const {
    return mask_points(joint_grid, E_mask);
}
std::vector<std::vector<double>> SolutionClassification::X_points() const {
    return mask_points(x_grid, X_mask);
}
std::vector<std::vector<double>> SolutionClassification::Y_points() const {
    return mask_points(y_grid, Y_mask);
}
std::vector<std::vector<double>> SolutionClassification::Mlow_points() const {
    return mask_points(joint_grid, Mlow_mask);
}
std::vector<std::vector<double>> SolutionClassification::Mup_points() const {
    return mask_points(joint_grid, Mup_mask);
}

Certificate product_structure_check(const SolutionClassification& cls, double tol) {
    Certificate cert;
    cert.condition = "saddle_product_structure";
    cert.params = {{"tol", tol}};
    if (cls.E_mask.count() == 0) {
        cert.verdict = Verdict::Inconclusive;
        cert.note = "saddle set is empty; nothing to factor";
        return cert;
    }
    const auto xs = cls.X_points();
    const auto ys = cls.Y_points();
    std::size_t failures = 0;
    for (const auto& x : xs) {
        for (const auto& y : ys) {
            const auto joint = joint_from_blocks(cls.problem, x, y);
            ++cert.samples_checked;
            if (!sampled_saddle_ok(cls.problem, joint, tol)) {
                if (failures == 0) cert.witness = joint;
                ++failures;
            }
        }
    }
    cert.worst_ratio = static_cast<double>(failures);
    cert.verdict = failures == 0 ? Verdict::Pass : Verdict::Fail;
    cert.note = failures == 0 ? "every X x Y pair passes the sampled saddle inequalities"
                              : std::to_string(failures) + " of " +
                                    std::to_string(cert.samples_checked) +
                                    " X x Y pairs violate the saddle inequalities";
    return cert;
}

Certificate interchangeability_check(const MinimaxProblem& problem, std::span<const double> s1,
                                     std::span<const double> s2, double tol) {
    problem.validate();
    const int n = problem.n_x + problem.n_y;
    if (static_cast<int>(s1.size()) != n || static_cast<int>(s2.size()) != n)
        throw std::invalid_argument("saddle points must have the joint dimension");

    Certificate cert;
    cert.condition = "saddle_interchangeability";
    cert.params = {{"tol", tol}};
    if (!sampled_saddle_ok(problem, s1, tol) || !sampled_saddle_ok(problem, s2, tol)) {
        cert.verdict = Verdict::Inconclusive;
        cert.note = "an input point is not a sampled saddle; nothing to interchange";
        return cert;
    }

    const auto mixed_a = joint_from_blocks(problem, s1.first(problem.n_x), s2.last(problem.n_y));
    const auto mixed_b = joint_from_blocks(problem, s2.first(problem.n_x), s1.last(problem.n_y));
    cert.samples_checked = 4;

    for (const auto* m : {&mixed_a, &mixed_b}) {
        if (!sampled_saddle_ok(problem, *m, tol)) {
            cert.verdict = Verdict::Fail;
            cert.witness = *m;
            cert.note = "a mixed pair fails the sampled saddle inequalities";
            return cert;
        }
    }

    const double v[4] = {evaluate(problem.field, s1), evaluate(problem.field, s2),
                         evaluate(problem.field, mixed_a), evaluate(problem.field, mixed_b)};
    const auto [lo, hi] = std::minmax_element(std::begin(v), std::end(v));
    cert.worst_ratio = *hi - *lo;
    if (cert.worst_ratio <= tol) {
        cert.verdict = Verdict::Pass;
        cert.note = "mixed pairs are saddles and all four values agree";
    } else {
        cert.verdict = Verdict::Fail;
        cert.witness = mixed_a;
        cert.note = "saddle values disagree across the four pairs";
    }
    return cert;
}

GdaResult gda(const MinimaxProblem& problem, std::span<const double> x0,
              std::span<const double> y0, double step_x, double step_y, int iters) {
    problem.validate();
    require_block_point(problem.x_box, x0, "gda x start");
    require_block_point(problem.y_box, y0, "gda y start");
    if (step_x <= 0.0 || step_y <= 0.0) throw std::invalid_argument("gda steps must be positive");

    // Escape region: the joint box inflated tenfold about its center.
    const BoxDomain jb = problem.joint_box();
    BoxDomain escape = jb;
    for (int i = 0; i < jb.dim(); ++i) {
        const double c = 0.5 * (jb.lo[i] + jb.hi[i]), h = 0.5 * jb.extent(i);
        escape.lo[i] = c - 10.0 * h;
        escape.hi[i] = c + 10.0 * h;
    }

    GdaResult out;
    std::vector<double> z = joint_from_blocks(problem, x0, y0);
    out.trajectory.push_back(z);
    for (int k = 0; k < iters; ++k) {
        const auto grad = gradient(problem.field, z);
        double step2 = 0.0;
        for (int i = 0; i < problem.n_x; ++i) {
            const double d = -step_x * grad[i];
            z[i] += d;
            step2 += d * d;
        }
        for (int i = problem.n_x; i < problem.n_x + problem.n_y; ++i) {
            const double d = step_y * grad[i];
            z[i] += d;
            step2 += d * d;
        }
        out.final_step_norm = std::sqrt(step2);
        out.trajectory.push_back(z);
        if (!escape.contains(z)) {
            out.diverged = true;
            break;
        }
    }
    out.terminal = z;
    return out;
}

ModulusEstimate estimate_inner_modulus(const MinimaxProblem& problem, Block responding,
                                       std::span<const double> base, std::span<const double> deltas,
                                       const RegularGrid& block_grid, ModulusMode mode,
                                       double br_tol, int starts, unsigned seed) {
    problem.validate();
    if (static_cast<int>(base.size()) != problem.n_x + problem.n_y)
        throw std::invalid_argument("modulus base point must have the joint dimension");
    const std::span<const double> xbar = base.first(problem.n_x);
    const std::span<const double> ybar = base.last(problem.n_y);

    ModulusEstimate est;
    est.mode = mode;

    const std::span<const double> own = responding == Block::Y ? ybar : xbar;
    const std::span<const double> other = responding == Block::Y ? xbar : ybar;
    const BoxDomain& other_box = responding == Block::Y ? problem.x_box : problem.y_box;

    // Precondition: the base response actually best-responds to the base anchor.
    {
        const auto joint = joint_from_blocks(problem, xbar, ybar);
        const double v = evaluate(problem.field, joint);
        const double opt = primal_dual_value(
            problem, responding == Block::Y ? xbar : ybar,
            responding == Block::Y ? Side::Primal : Side::Dual, starts, seed);
        if (std::abs(v - opt) > br_tol + 1e-9 * (1.0 + std::abs(opt)))
            throw std::invalid_argument("base response is not a best response at the base point");
    }

    if (mode == ModulusMode::ErrorBound) {
        const auto brs = best_response_set(problem, responding, other, block_grid, br_tol, starts,
                                           seed);
        if (brs.mask.count() == 0)
            throw std::runtime_error("best-response set empty on the supplied grid");
        const int own_off = responding == Block::Y ? problem.n_x : 0;
        const int own_dim = responding == Block::Y ? problem.n_y : problem.n_x;
        std::vector<double> node(static_cast<std::size_t>(own_dim));
        std::vector<double> joint = joint_from_blocks(problem, xbar, ybar);
        for (std::size_t k = 0; k < block_grid.node_count(); ++k) {
            block_grid.node_point(k, node);
            std::copy(node.begin(), node.end(), joint.begin() + own_off);
            const double d = distance_to_mask(block_grid, brs.mask, node);
            if (d == 0.0) continue;
            const auto grad = gradient(problem.field, joint);
            const double gn = std::sqrt(block_grad_norm2(grad, own_off, own_dim));
            if (gn <= 1e-12) continue;
            est.deltas.push_back(gn);
            est.distances.push_back(d);
            est.kappa = std::max(est.kappa, d / gn);
        }
        est.alpha_hat = 1.0;
        return est;
    }

    if (deltas.empty()) throw std::invalid_argument("modulus probes need at least one delta");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (deltas[i] <= 0.0) throw std::invalid_argument("modulus deltas must be positive");
        if (i > 0 && deltas[i] >= deltas[i - 1])
            throw std::invalid_argument("modulus deltas must be strictly decreasing");
    }
    if (mode == ModulusMode::Hoelder &&
        (deltas.size() < 4 || deltas.front() < 100.0 * deltas.back() * (1.0 - 1e-12)))
        throw std::invalid_argument("Hoelder fit needs >= 4 deltas spanning two decades");

    const auto dirs = sphere_directions(other_box.dim(), std::max(2, 2 * other_box.dim()));
    std::vector<double> probe(other.begin(), other.end());
    for (const double delta : deltas) {
        double worst = 0.0;
        for (const auto& v : dirs) {
            for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = other[i] + delta * v[i];
            if (!other_box.contains(probe, 1e-12))
                throw std::invalid_argument("modulus probe leaves the anchored block's box");
            const auto brs = best_response_set(problem, responding, probe, block_grid, br_tol,
                                               starts, seed);
            if (brs.mask.count() == 0)
                throw std::runtime_error("best-response set empty at a probe");
            worst = std::max(worst, distance_to_mask(block_grid, brs.mask, own));
        }
        est.deltas.push_back(delta);
        est.distances.push_back(worst);
    }

    if (mode == ModulusMode::Lipschitz) {
        est.alpha_hat = 1.0;
        for (std::size_t i = 0; i < est.deltas.size(); ++i)
            est.kappa = std::max(est.kappa, est.distances[i] / est.deltas[i]);
        return est;
    }

    // Hoelder: log-log least squares over the probes with nonzero retreat.
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < est.deltas.size(); ++i) {
        if (est.distances[i] > 1e-12) {
            lx.push_back(std::log(est.deltas[i]));
            ly.push_back(std::log(est.distances[i]));
        }
    }
    if (lx.size() < 2) {
        est.kappa = 0.0;  // response never moved: constant best-response map
        est.alpha_hat = 0.0;
        return est;
    }
    const LineFit fit = fit_line(lx, ly);
    est.alpha_hat = fit.slope;
    est.kappa = std::exp(fit.intercept);
    est.fit_residual = fit.rms;
    return est;
}

// ---- blockwise ratio certificates ------------------------------------------------

namespace {

struct SliceScan {
    std::vector<double> opt;       // per slice-key optimum (min for X, max for Y)
    std::size_t keys = 0, own = 0; // own = nodes per slice
};

// Slice key = flat index over the opposite block's axes. With x axes first,
// joint flat = x_flat * ny + y_flat.
SliceScan scan_slices(const std::vector<double>& values, std::size_t nx, std::size_t ny,
                      Block side) {
    SliceScan s;
    const bool x_side = side == Block::X;
    s.keys = x_side ? ny : nx;
    s.own = x_side ? nx : ny;
    s.opt.assign(s.keys, x_side ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const double v = values[i * ny + j];
            if (x_side)
                s.opt[j] = std::min(s.opt[j], v);
            else
                s.opt[i] = std::max(s.opt[i], v);
        }
    }
    return s;
}

}  // namespace

Certificate check_block_pl(const MinimaxProblem& problem, const RegularGrid& joint_grid,
                           Block side, double mu, double alpha, double eps_excl) {
    problem.validate();
    require_joint_grid(problem, joint_grid);
    if (mu <= 0.0) throw std::invalid_argument("block PL needs mu > 0");
    if (alpha < 1.0) throw std::invalid_argument("block PL needs alpha >= 1");

    const RegularGrid xg = block_subgrid(problem, joint_grid, Block::X);
    const RegularGrid yg = block_subgrid(problem, joint_grid, Block::Y);
    const std::size_t nx = xg.node_count(), ny = yg.node_count();
    const auto values = sample_lattice(problem.field, joint_grid);
    const SliceScan slices = scan_slices(values, nx, ny, side);

    const int own_off = side == Block::X ? 0 : problem.n_x;
    const int own_dim = side == Block::X ? problem.n_x : problem.n_y;

    Certificate cert;
    cert.condition = side == Block::X ? "block_pl_x" : "block_pl_y";
    cert.params = {{"mu", mu}, {"alpha", alpha}};
    cert.worst_ratio = std::numeric_limits<double>::infinity();
    cert.note = side == Block::X
                    ? "ratio = ||grad_x f||^alpha / (f - min over the x sublattice)"
                    : "ratio = ||grad_y f||^alpha / (max over the y sublattice - f)";

    std::vector<double> joint(static_cast<std::size_t>(joint_grid.dim()));
    for (std::size_t k = 0; k < values.size(); ++k) {
        const std::size_t key = side == Block::X ? k % ny : k / ny;
        const double gap =
            side == Block::X ? values[k] - slices.opt[key] : slices.opt[key] - values[k];
        const double excl =
            eps_excl >= 0.0 ? eps_excl : 1e-9 * (1.0 + std::abs(slices.opt[key]));
        if (gap <= excl) continue;
        joint_grid.node_point(k, joint);
        const auto grad = gradient(problem.field, joint);
        const double g2 = block_grad_norm2(grad, own_off, own_dim);
        // alpha == 2 avoids the sqrt/pow round-trip so exact ratios stay exact.
        const double lhs = alpha == 2.0 ? g2 : std::pow(std::sqrt(g2), alpha);
        const double r = lhs / gap;
        ++cert.samples_checked;
        if (r < cert.worst_ratio) {
            cert.worst_ratio = r;
            cert.witness = joint;
        }
    }

    if (cert.samples_checked == 0) {
        cert.verdict = Verdict::Inconclusive;
        cert.note += "; no node clears the exclusion gap";
    } else {
        cert.verdict = cert.worst_ratio >= mu - kRatioSlack ? Verdict::Pass : Verdict::Fail;
    }
    return cert;
}

Certificate check_block_growth(const MinimaxProblem& problem, const RegularGrid& joint_grid,
                               Block side, double beta, double eta, double mask_tol,
                               double eps_excl) {
    problem.validate();
    require_joint_grid(problem, joint_grid);
    if (eta <= 0.0) throw std::invalid_argument("block growth needs eta > 0");
    if (beta <= 0.0) throw std::invalid_argument("block growth needs beta > 0");

    const RegularGrid xg = block_subgrid(problem, joint_grid, Block::X);
    const RegularGrid yg = block_subgrid(problem, joint_grid, Block::Y);
    const std::size_t nx = xg.node_count(), ny = yg.node_count();
    const auto values = sample_lattice(problem.field, joint_grid);
    const SliceScan slices = scan_slices(values, nx, ny, side);

    const RegularGrid& own_grid = side == Block::X ? xg : yg;
    const std::size_t own_count = side == Block::X ? nx : ny;
    const std::size_t key_count = side == Block::X ? ny : nx;

    Certificate cert;
    cert.condition = side == Block::X ? "block_growth_x" : "block_growth_y";
    cert.params = {{"beta", beta}, {"eta", eta}, {"mask_tol", mask_tol}};
    cert.worst_ratio = std::numeric_limits<double>::infinity();
    cert.note = side == Block::X
                    ? "ratio = (f - slice min) / d(x, slice argmin)^beta on the x sublattice"
                    : "ratio = (slice max - f) / d(y, slice argmax)^beta on the y sublattice";

    NodeMask slice_mask;
    slice_mask.in.assign(own_count, 0);
    std::vector<double> own_pt(static_cast<std::size_t>(own_grid.dim()));
    std::vector<double> joint(static_cast<std::size_t>(joint_grid.dim()));
    for (std::size_t key = 0; key < key_count; ++key) {
        const double opt = slices.opt[key];
        const double excl =
            std::max(eps_excl >= 0.0 ? eps_excl : 1e-9 * (1.0 + std::abs(opt)), mask_tol);
        for (std::size_t o = 0; o < own_count; ++o) {
            const std::size_t k = side == Block::X ? o * ny + key : key * ny + o;
            const double gap = side == Block::X ? values[k] - opt : opt - values[k];
            slice_mask.in[o] = gap <= mask_tol ? 1 : 0;
        }
        for (std::size_t o = 0; o < own_count; ++o) {
            const std::size_t k = side == Block::X ? o * ny + key : key * ny + o;
            const double gap = side == Block::X ? values[k] - opt : opt - values[k];
            if (gap <= excl) continue;
            own_grid.node_point(o, own_pt);
            const double d = distance_to_mask(own_grid, slice_mask, own_pt);
            if (d <= 0.0) continue;
            const double r = gap / std::pow(d, beta);
            ++cert.samples_checked;
            if (r < cert.worst_ratio) {
                cert.worst_ratio = r;
                joint_grid.node_point(k, joint);
                cert.witness = joint;
            }
        }
    }

    if (cert.samples_checked == 0) {
        cert.verdict = Verdict::Inconclusive;
        cert.note += "; no node clears the exclusion gap";
    } else {
        cert.verdict = cert.worst_ratio >= eta - kRatioSlack ? Verdict::Pass : Verdict::Fail;
    }
    return cert;
}

}  // namespace invextopo
