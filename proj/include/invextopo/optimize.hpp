#pragma once

// Deterministic multistart local optimization on box domains. All start
// points come from a seeded Halton sequence, so identical inputs reproduce
// identical results bit for bit.

#include <functional>
#include <span>
#include <vector>

#include "invextopo/grid.hpp"

namespace invextopo {

// Halton points in [0,1]^dim (prime bases), starting at index seed+1 so the
// degenerate all-zero point never appears. dim <= 12.
std::vector<std::vector<double>> halton_points(int dim, int count, unsigned seed);

// Unit directions in R^n: equiangular for n=2, spiral lattice for n=3,
// normalized Halton offsets above. count is a lower bound for n=1 (returns 2).
std::vector<std::vector<double>> sphere_directions(int dim, int count);

struct DescentOptions {
    int max_iters = 400;
    double tol_grad = 1e-9;     // projected-gradient norm target
    double initial_step = 1.0;
    double armijo_c = 1e-4;
    int max_backtracks = 60;
};

struct DescentResult {
    std::vector<double> point;
    double value = 0.0;
    double grad_norm = 0.0;  // projected-gradient norm at the terminal
    int iters = 0;
    bool converged = false;
};

// Objective callback: returns the value and fills grad_out (same length as
// the query point).
using ValueGrad = std::function<double(std::span<const double>, std::span<double>)>;

DescentResult projected_descent(const ValueGrad& fn, const BoxDomain& box,
                                std::vector<double> x0, const DescentOptions& opt = {});

struct MultistartOptions {
    int starts = 64;
    unsigned seed = 42;
    DescentOptions descent;
    double cluster_radius_rel = 1e-3;  // scaled by the diameter of the free sub-box
};

struct MultistartResult {
    double best_value = 0.0;                // in problem orientation (max for sign=-1)
    std::vector<DescentResult> optima;      // clustered, best first, lexicographic ties
    std::vector<std::size_t> cluster_sizes;
};

// Minimize (sign=+1) or maximize (sign=-1) f over the axes listed in
// free_axes (all axes when empty), the rest held at anchor (ignored when all
// axes are free). Values in the result are plain f values.
MultistartResult multistart_extremize(const ScalarField& f, const BoxDomain& box, int sign,
                                      const std::vector<int>& free_axes,
                                      std::span<const double> anchor,
                                      const MultistartOptions& opt = {});

MultistartResult multistart_minimize(const ScalarField& f, const BoxDomain& box,
                                     const MultistartOptions& opt = {});

// Multistart descent on h(x) = ||grad f(x)||^2 (gradient of h taken through
// second derivatives). Result values are h values; callers re-evaluate f.
MultistartResult multistart_stationary(const ScalarField& f, const BoxDomain& box,
                                       const MultistartOptions& opt = {});

// Shared core for callback objectives.
MultistartResult multistart_fn(const ValueGrad& fn, const BoxDomain& box,
                               const std::vector<int>& free_axes,
                               std::span<const double> anchor, const MultistartOptions& opt);

}  // namespace invextopo
