#pragma once

// Numerical certificates for landscape conditions: invexity, gradient
// dominance (alpha-PL), two-sided PL, growth lower bounds, increase at
// infinity, and the gradient-dominated flow that links PL to growth.
//
// Conventions kept as stated by their definitions (deliberately not unified):
//   alpha-PL:      ||grad f||^alpha >= mu * (f - f_star)          (no factor 2)
//   two-sided PL:  ||grad_x f||^2  >= 2*mu1 * (f - min_x f)
//                  ||grad_y f||^2  >= 2*mu2 * (max_y f - f)

#include <optional>
#include <string>
#include <utility>

#include "invextopo/minimax_problem.hpp"
#include "invextopo/optimize.hpp"
#include "invextopo/topology.hpp"

namespace invextopo {

enum class Verdict { Pass, Fail, Inconclusive };
std::string_view verdict_name(Verdict v);

// Absolute slack applied to every ratio comparison, so equality cases
// (worst ratio exactly equal to the claimed constant) certify cleanly.
inline constexpr double kRatioSlack = 1e-9;

struct Certificate {
    std::string condition;
    std::vector<std::pair<std::string, double>> params;  // insertion order
    Verdict verdict = Verdict::Inconclusive;
    double worst_ratio = 0.0;
    std::vector<double> witness;  // node attaining worst_ratio (or the violation)
    std::size_t samples_checked = 0;
    std::string note;
    bool passed() const { return verdict == Verdict::Pass; }
};

// ---- minima and stationary points --------------------------------------------

struct MinimumEstimate {
    double f_star = 0.0;
    std::vector<std::vector<double>> argmin_points;  // clustered, within tol of f_star
    bool boundary_attained = false;
    int starts = 0;
};

MinimumEstimate estimate_minimum(const ScalarField& f, const BoxDomain& box, int starts = 64,
                                 int iters = 400, double tol = 1e-6, unsigned seed = 42);

struct StationaryPointSet {
    struct Entry {
        std::vector<double> point;
        double value = 0.0;
        double grad_norm = 0.0;
    };
    std::vector<Entry> points;  // pairwise >= clustering_radius apart
    double clustering_radius = 0.0;
};

// Multistart minimization of ||grad f||^2; keeps terminals with
// ||grad f|| <= tol_grad.
StationaryPointSet find_stationary_points(const ScalarField& f, const BoxDomain& box,
                                          int starts = 64, double tol_grad = 1e-6,
                                          unsigned seed = 42);

// Pass iff every stationary point's value is within tol_val of the estimated
// minimum. worst_ratio = largest value gap; witness = the point attaining it.
Certificate invexity_verdict(const ScalarField& f, const BoxDomain& box, double tol_grad = 1e-6,
                             double tol_val = 1e-4, unsigned seed = 42);

// ---- pointwise ratio certificates ---------------------------------------------

// ||grad f||^alpha >= mu (f - f_star) over grid nodes with f - f_star >
// eps_excl. worst_ratio = min ||grad f||^alpha / (f - f_star). Negative
// eps_excl selects the default 1e-9 * (1 + |f_star|). f_star defaults to the
// grid minimum.
Certificate check_alpha_pl(const ScalarField& f, const RegularGrid& grid, double alpha,
                           double mu, double eps_excl = -1.0,
                           std::optional<double> f_star = std::nullopt);

// f - f_star >= eta * d(x, minima_mask)^beta away from the mask.
Certificate check_growth(const ScalarField& f, const RegularGrid& grid, double beta, double eta,
                         const NodeMask& minima_mask, double eps_excl = -1.0,
                         std::optional<double> f_star = std::nullopt);

// Two-sided PL on a joint grid: per-slice inner optima are solved with the
// same deterministic multistart as estimate_minimum and cached per distinct
// slice. Returns the pair (x certificate, y certificate).
std::pair<Certificate, Certificate> check_two_sided_pl(const MinimaxProblem& problem,
                                                       const RegularGrid& joint_grid, double mu1,
                                                       double mu2, double eps_excl = -1.0,
                                                       int inner_starts = 64, unsigned seed = 42);

// Shell test: sample >= dirs_per_dim * n directions per radius; pass iff from
// the first radius whose shell minimum exceeds c onward, every shell minimum
// exceeds c and the sequence is nondecreasing. Needs >= 3 radii.
Certificate check_increasing_at_infinity(const ScalarField& f, std::span<const double> center,
                                         std::span<const double> radii, double c,
                                         int dirs_per_dim = 64);

// ---- PL => growth -------------------------------------------------------------

// eta = ((alpha-1)/alpha)^(alpha/(alpha-1)) * mu^(1/(alpha-1)); alpha > 1.
double pl_growth_constant(double alpha, double mu);

struct FlowTrace {
    struct Sample {
        double t = 0.0;
        std::vector<double> point;
        double value = 0.0;
    };
    std::vector<Sample> samples;  // f values strictly decreasing
    double terminal_time = 0.0;
    std::vector<double> terminal_point;
    bool converged = false;  // reached stop_gap
    bool diverged = false;   // step underflow before convergence
    std::optional<double> time_bound;  // g(x0) * (alpha/(alpha-1))^2 * mu^(-2/alpha)
    bool bound_satisfied = true;
};

struct FlowOptions {
    double stop_gap = 1e-6;  // stop once f - f_star <= stop_gap
    double initial_dt = 1e-3;
    double max_time = 1e3;
    int max_steps = 200000;
    std::optional<double> mu;  // supply to enable the time-bound check
};

// Integrates dx/dt = -grad g with g = (f - f_star)^((alpha-1)/alpha) by an
// adaptive midpoint scheme that only accepts value-decreasing steps.
FlowTrace pl_gradient_flow(const ScalarField& f, std::span<const double> x0, double alpha,
                           double f_star, const FlowOptions& opt = {});

}  // namespace invextopo
