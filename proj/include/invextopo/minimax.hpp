#pragma once

// Saddle / minimax / maximin classification for min_x max_y problems,
// best-response sets, gradient descent-ascent, blockwise PL and growth
// ratios, and inner-continuity modulus estimation.

#include <optional>

#include "invextopo/certify.hpp"
#include "invextopo/minimax_problem.hpp"

namespace invextopo {

enum class Side { Primal, Dual };    // primal: F(x) = max_y f; dual: G(y) = min_x f
enum class Block { X, Y };

// F(x) (side=Primal, point = x block) or G(y) (side=Dual, point = y block),
// inner optimum via deterministic multistart over the opposite block.
double primal_dual_value(const MinimaxProblem& problem, std::span<const double> point,
                         Side side, int starts = 64, unsigned seed = 42);

struct BestResponseSet {
    NodeMask mask;                             // over the responding block's grid
    std::vector<std::vector<double>> points;   // masked nodes
    double optimum = 0.0;                      // inner optimum of the slice
};

// Responding block's grid nodes within tol of the slice optimum. side=Y:
// responses maximize f(fixed, .); side=X: responses minimize f(., fixed).
BestResponseSet best_response_set(const MinimaxProblem& problem, Block responding,
                                  std::span<const double> fixed, const RegularGrid& block_grid,
                                  double tol, int starts = 64, unsigned seed = 42);

struct SolutionClassification {
    MinimaxProblem problem;  // kept so downstream checks can re-test pairs
    RegularGrid joint_grid, x_grid, y_grid;
    NodeMask X_mask;              // x-grid argmin of F within tol_val
    NodeMask Y_mask;              // y-grid argmax of G within tol_val
    NodeMask Mlow_mask;           // joint: x in X and y a grid best response to x
    NodeMask Mup_mask;            // joint: y in Y and x a grid best response to y
    NodeMask E_mask;              // Mlow and Mup and sampled saddle inequalities
    int E_components = 0;
    std::vector<double> E_bbox_lo, E_bbox_hi;  // empty when E is empty
    double min_F = 0.0, max_G = 0.0;
    double tol_val = 0.0, tol_grad = 0.0;
    bool inconclusive = false;  // empty X or Y

    std::vector<std::vector<double>> E_points() const;
    std::vector<std::vector<double>> X_points() const;
    std::vector<std::vector<double>> Y_points() const;
    std::vector<std::vector<double>> Mlow_points() const;
    std::vector<std::vector<double>> Mup_points() const;
};

// Grid classification of the primal set X, dual set Y, minimax set (Mlow),
// maximin set (Mup), and saddle set E. Saddle membership additionally
// requires the sampled two-sided inequalities and a stationary gradient
// (||grad f|| <= tol_grad), since box-interior saddles are stationary.
SolutionClassification classify_solutions(const MinimaxProblem& problem,
                                          const RegularGrid& joint_grid, double tol_val = 1e-6,
                                          double tol_grad = 1e-6, int starts = 64,
                                          unsigned seed = 42);

// Pass iff every pair (x, y) with x in X_mask, y in Y_mask belongs to E_mask
// (the saddle set factors as the product of the primal and dual sets).
Certificate product_structure_check(const SolutionClassification& cls, double tol);

// Pass iff s1 and s2 are sampled saddles, the mixed pairs (x1,y2), (x2,y1)
// are saddles too, and all four values agree within tol.
Certificate interchangeability_check(const MinimaxProblem& problem, std::span<const double> s1,
                                     std::span<const double> s2, double tol);

// Sampled saddle test at (x, y): f(x, y') <= f(x,y) + tol and
// f(x', y) >= f(x,y) - tol over 32 deterministic deviations per block.
bool sampled_saddle_ok(const MinimaxProblem& problem, std::span<const double> joint_point,
                       double tol, int probes_per_block = 32);

struct GdaResult {
    std::vector<std::vector<double>> trajectory;  // joint iterates, first = start
    std::vector<double> terminal;
    bool diverged = false;       // left the 10x inflated joint box
    double final_step_norm = 0.0;
};

// Simultaneous gradient descent on x, ascent on y.
GdaResult gda(const MinimaxProblem& problem, std::span<const double> x0,
              std::span<const double> y0, double step_x, double step_y, int iters);

enum class ModulusMode { Lipschitz, Hoelder, ErrorBound };

struct ModulusEstimate {
    ModulusMode mode = ModulusMode::Lipschitz;
    double kappa = 0.0;      // Lipschitz / Hoelder constant, or the EB modulus
    double alpha_hat = 1.0;  // Hoelder exponent from the log-log fit
    std::vector<double> deltas;
    std::vector<double> distances;
    double fit_residual = 0.0;  // RMS residual of the log-log fit (Hoelder)
};

// Inner-continuity moduli of the best-response maps around base = (x_bar, y_bar):
//   Lipschitz:  kappa = max over probes of d(y_bar, BR(x_bar + delta v)) / delta
//   Hoelder:    log-log least squares of the same distances
//   ErrorBound: kappa = max over grid nodes of d(x, BR_x(y_bar)) / ||grad_x f(x, y_bar)||
ModulusEstimate estimate_inner_modulus(const MinimaxProblem& problem, Block responding,
                                       std::span<const double> base,
                                       std::span<const double> deltas,
                                       const RegularGrid& block_grid, ModulusMode mode,
                                       double br_tol = 1e-9, int starts = 64,
                                       unsigned seed = 42);

// ---- blockwise ratio certificates (grid-closed slice optima) ------------------

// Factor-free blockwise PL: side=X checks ||grad_x f||^alpha >= mu (f - min_x f)
// with the slice minimum taken over the x-sublattice; side=Y checks
// ||grad_y f||^alpha >= mu (max_y f - f) against the y-sublattice maximum.
Certificate check_block_pl(const MinimaxProblem& problem, const RegularGrid& joint_grid,
                           Block side, double mu, double alpha = 2.0, double eps_excl = -1.0);

// Blockwise growth: side=X checks f - min_x f >= eta * d(x, argmin_x)^beta per
// slice, distances measured inside the block lattice; side=Y analogous with
// the argmax set. mask_tol selects the slice optimum plateau.
Certificate check_block_growth(const MinimaxProblem& problem, const RegularGrid& joint_grid,
                               Block side, double beta, double eta, double mask_tol = 1e-9,
                               double eps_excl = -1.0);

}  // namespace invextopo
