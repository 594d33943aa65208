#pragma once

// Expression parsing + evaluation for smooth (piecewise-smooth) scalar fields
// R^n -> R. Variables are spelled x0, x1, ... Functions: exp, log, sin, cos,
// sqrt, abs, sgn, max, min, sigmoid. See docs/grammar.md for the grammar and
// the derivative conventions at kinks.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "invextopo/dual.hpp"

namespace invextopo {

struct ParseError : std::runtime_error {
    std::size_t offset;  // byte offset into the source text
    ParseError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}
};

struct EvalError : std::runtime_error {
    std::size_t offset;  // byte offset of the offending subexpression
    EvalError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (subexpression at offset " + std::to_string(off) + ")"),
          offset(off) {}
};

enum class Op : std::uint8_t {
    Const, Var,
    Add, Sub, Mul, Div, Pow, Neg,
    Exp, Log, Sin, Cos, Sqrt, Abs, Sgn, Sigmoid,
    Max, Min,
};

struct ExprNode {
    Op op;
    std::int32_t a = -1;      // first child index
    std::int32_t b = -1;      // second child index
    double value = 0.0;       // Const payload
    std::int32_t var = 0;     // Var payload
    std::uint32_t offset = 0; // source offset for diagnostics
    bool var_dependent = false;
};

// Nodes are stored children-before-parents, so a single forward sweep
// evaluates the tree without recursion.
struct Expr {
    std::vector<ExprNode> nodes;
    std::int32_t root = -1;
};

struct ScalarField {
    int dim = 0;
    Expr expr;
    std::string text;  // source form (parseable)
};

// ---- parsing / printing -----------------------------------------------------

// Throws ParseError on malformed input, unknown identifiers, or variable
// indices >= n_vars.
Expr parse_expression(std::string_view text, int n_vars);
ScalarField parse_field(std::string_view text, int n_vars);

// Minimal-parenthesis form; parse(print(e)) reproduces the same tree.
std::string to_string(const Expr& e);

// Structural equality (ignores source offsets).
bool same_structure(const Expr& a, const Expr& b);

// ---- evaluation -------------------------------------------------------------

template <class S>
S eval_expr(const Expr& e, std::span<const S> vars);

double evaluate(const ScalarField& f, std::span<const double> p);
std::vector<double> gradient(const ScalarField& f, std::span<const double> p);
// value + gradient in one call (n+? sweeps internally).
double value_and_gradient(const ScalarField& f, std::span<const double> p,
                          std::span<double> grad_out);
// Hessian-vector product via nested duals; also returns the gradient.
std::vector<double> hessian_vector(const ScalarField& f, std::span<const double> p,
                                   std::span<const double> v,
                                   std::vector<double>* grad_out = nullptr);

// Max over coordinates of the relative discrepancy between the analytic
// gradient and a central finite difference with step h.
double finite_difference_check(const ScalarField& f, std::span<const double> p, double h);

// ---- field helpers ----------------------------------------------------------

// Named reference fields; throws std::invalid_argument for unknown names.
// Names: quadratic, doublewell, fig1_invex, fig3_twosided_pl, appB_exp,
//        fig4_u1, fig4_u2.
ScalarField builtin_field(std::string_view name);
std::vector<std::string> builtin_field_names();

// Substitute fixed values for the given axes (field keeps its arity; the
// pinned variables simply no longer appear).
ScalarField pin_axes(const ScalarField& f, const std::vector<std::pair<int, double>>& pins);

}  // namespace invextopo
