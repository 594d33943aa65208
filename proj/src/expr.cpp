#include "invextopo/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

namespace invextopo {

namespace {

// ---- parser -----------------------------------------------------------------

struct Parser {
    std::string_view src;
    std::size_t pos = 0;
    int n_vars;
    Expr out;

    explicit Parser(std::string_view text, int nv) : src(text), n_vars(nv) {}

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw ParseError(msg, at);
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= src.size();
    }
    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }
    bool consume(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    std::int32_t add(ExprNode n) {
        out.nodes.push_back(n);
        return static_cast<std::int32_t>(out.nodes.size() - 1);
    }
    std::int32_t add_unary(Op op, std::int32_t a, std::size_t off) {
        ExprNode n;
        n.op = op;
        n.a = a;
        n.offset = static_cast<std::uint32_t>(off);
        n.var_dependent = out.nodes[a].var_dependent;
        return add(n);
    }
    std::int32_t add_binary(Op op, std::int32_t a, std::int32_t b, std::size_t off) {
        ExprNode n;
        n.op = op;
        n.a = a;
        n.b = b;
        n.offset = static_cast<std::uint32_t>(off);
        n.var_dependent = out.nodes[a].var_dependent || out.nodes[b].var_dependent;
        return add(n);
    }

    std::int32_t parse_sum() {
        std::int32_t lhs = parse_term();
        for (;;) {
            std::size_t off = pos;
            if (consume('+')) {
                lhs = add_binary(Op::Add, lhs, parse_term(), off);
            } else if (consume('-')) {
                lhs = add_binary(Op::Sub, lhs, parse_term(), off);
            } else {
                return lhs;
            }
        }
    }

    std::int32_t parse_term() {
        std::int32_t lhs = parse_unary();
        for (;;) {
            std::size_t off = pos;
            if (consume('*')) {
                lhs = add_binary(Op::Mul, lhs, parse_unary(), off);
            } else if (consume('/')) {
                lhs = add_binary(Op::Div, lhs, parse_unary(), off);
            } else {
                return lhs;
            }
        }
    }

    std::int32_t parse_unary() {
        std::size_t off = pos;
        if (consume('-')) return add_unary(Op::Neg, parse_unary(), off);
        if (consume('+')) return parse_unary();
        return parse_power();
    }

    std::int32_t parse_power() {
        std::int32_t base = parse_atom();
        std::size_t off = pos;
        if (consume('^')) {
            // right-associative; exponent may carry a sign: x^-2
            std::int32_t expo = parse_unary();
            return add_binary(Op::Pow, base, expo, off);
        }
        return base;
    }

    std::int32_t parse_atom() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of expression", pos);
        char c = src[pos];
        if (c == '(') {
            ++pos;
            std::int32_t inner = parse_sum();
            if (!consume(')')) fail("expected ')'", pos);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(std::string("unexpected character '") + c + "'", pos);
    }

    std::int32_t parse_number() {
        std::size_t start = pos;
        double value = 0.0;
        const char* first = src.data() + pos;
        const char* last = src.data() + src.size();
        auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc()) fail("malformed number", start);
        pos = static_cast<std::size_t>(res.ptr - src.data());
        ExprNode n;
        n.op = Op::Const;
        n.value = value;
        n.offset = static_cast<std::uint32_t>(start);
        n.var_dependent = false;
        return add(n);
    }

    std::int32_t parse_identifier() {
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        std::string_view name = src.substr(start, pos - start);

        // variable?  x<digits>
        if (name.size() >= 2 && name[0] == 'x' &&
            std::all_of(name.begin() + 1, name.end(),
                        [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            int idx = 0;
            std::from_chars(name.data() + 1, name.data() + name.size(), idx);
            if (idx >= n_vars)
                fail("variable " + std::string(name) + " out of range for dimension " +
                         std::to_string(n_vars),
                     start);
            ExprNode n;
            n.op = Op::Var;
            n.var = idx;
            n.offset = static_cast<std::uint32_t>(start);
            n.var_dependent = true;
            return add(n);
        }

        static const std::map<std::string_view, Op> unary_fns = {
            {"exp", Op::Exp},   {"log", Op::Log},   {"sin", Op::Sin},
            {"cos", Op::Cos},   {"sqrt", Op::Sqrt}, {"abs", Op::Abs},
            {"sgn", Op::Sgn},   {"sigmoid", Op::Sigmoid},
        };
        static const std::map<std::string_view, Op> binary_fns = {
            {"max", Op::Max},
            {"min", Op::Min},
        };

        if (auto it = unary_fns.find(name); it != unary_fns.end()) {
            if (!consume('(')) fail("expected '(' after function name", pos);
            std::int32_t a = parse_sum();
            if (!consume(')')) fail("expected ')'", pos);
            return add_unary(it->second, a, start);
        }
        if (auto it = binary_fns.find(name); it != binary_fns.end()) {
            if (!consume('(')) fail("expected '(' after function name", pos);
            std::int32_t a = parse_sum();
            if (!consume(',')) fail("expected ',' between arguments", pos);
            std::int32_t b = parse_sum();
            if (!consume(')')) fail("expected ')'", pos);
            return add_binary(it->second, a, b, start);
        }
        fail("unknown identifier '" + std::string(name) + "'", start);
    }
};

// Integer power with exact derivative propagation through S's arithmetic.
template <class S>
S ipow(const S& base, long long k, std::uint32_t off) {
    if (k == 0) return make_constant<S>(1.0);
    if (k < 0) {
        if (real_part(base) == 0.0) throw EvalError("zero raised to a negative power", off);
        return make_constant<S>(1.0) / ipow(base, -k, off);
    }
    S acc = make_constant<S>(1.0);
    S b = base;
    long long e = k;
    while (e > 0) {
        if (e & 1) acc = acc * b;
        b = b * b;
        e >>= 1;
    }
    return acc;
}

bool is_integer_valued(double x, long long& k) {
    if (!std::isfinite(x) || std::fabs(x) > 1e9) return false;
    double r = std::nearbyint(x);
    if (r != x) return false;
    k = static_cast<long long>(r);
    return true;
}

}  // namespace

Expr parse_expression(std::string_view text, int n_vars) {
    if (n_vars < 1) throw ParseError("dimension must be >= 1", 0);
    Parser p(text, n_vars);
    std::int32_t root = p.parse_sum();
    if (!p.eof()) p.fail("trailing characters after expression", p.pos);
    p.out.root = root;
    return std::move(p.out);
}

ScalarField parse_field(std::string_view text, int n_vars) {
    ScalarField f;
    f.dim = n_vars;
    f.expr = parse_expression(text, n_vars);
    f.text = std::string(text);
    return f;
}

template <class S>
S eval_expr(const Expr& e, std::span<const S> vars) {
    std::vector<S> vals(e.nodes.size());
    for (std::size_t i = 0; i < e.nodes.size(); ++i) {
        const ExprNode& n = e.nodes[i];
        switch (n.op) {
            case Op::Const: vals[i] = make_constant<S>(n.value); break;
            case Op::Var: vals[i] = vars[static_cast<std::size_t>(n.var)]; break;
            case Op::Add: vals[i] = vals[n.a] + vals[n.b]; break;
            case Op::Sub: vals[i] = vals[n.a] - vals[n.b]; break;
            case Op::Mul: vals[i] = vals[n.a] * vals[n.b]; break;
            case Op::Div:
                if (real_part(vals[n.b]) == 0.0) throw EvalError("division by zero", n.offset);
                vals[i] = vals[n.a] / vals[n.b];
                break;
            case Op::Neg: vals[i] = -vals[n.a]; break;
            case Op::Exp: vals[i] = s_exp(vals[n.a]); break;
            case Op::Log:
                if (real_part(vals[n.a]) <= 0.0)
                    throw EvalError("log of non-positive value", n.offset);
                vals[i] = s_log(vals[n.a]);
                break;
            case Op::Sin: vals[i] = s_sin(vals[n.a]); break;
            case Op::Cos: vals[i] = s_cos(vals[n.a]); break;
            case Op::Sqrt:
                if (real_part(vals[n.a]) < 0.0)
                    throw EvalError("sqrt of negative value", n.offset);
                vals[i] = s_sqrt(vals[n.a]);
                break;
            case Op::Abs: vals[i] = s_abs(vals[n.a]); break;
            case Op::Sgn: vals[i] = s_sgn(vals[n.a]); break;
            case Op::Sigmoid: vals[i] = s_sigmoid(vals[n.a]); break;
            case Op::Max: vals[i] = s_max(vals[n.a], vals[n.b]); break;
            case Op::Min: vals[i] = s_min(vals[n.a], vals[n.b]); break;
            case Op::Pow: {
                const S& base = vals[n.a];
                const S& expo = vals[n.b];
                double ev = real_part(expo);
                long long k = 0;
                if (!e.nodes[n.b].var_dependent && is_integer_valued(ev, k)) {
                    vals[i] = ipow(base, k, n.offset);
                } else {
                    if (real_part(base) <= 0.0)
                        throw EvalError(
                            "power with non-positive base requires a constant integer exponent",
                            n.offset);
                    vals[i] = s_exp(expo * s_log(base));
                }
                break;
            }
        }
    }
    return vals[static_cast<std::size_t>(e.root)];
}

template double eval_expr<double>(const Expr&, std::span<const double>);
template Dual1 eval_expr<Dual1>(const Expr&, std::span<const Dual1>);
template Dual2 eval_expr<Dual2>(const Expr&, std::span<const Dual2>);

double evaluate(const ScalarField& f, std::span<const double> p) {
    return eval_expr<double>(f.expr, p);
}

std::vector<double> gradient(const ScalarField& f, std::span<const double> p) {
    std::vector<double> g(static_cast<std::size_t>(f.dim));
    value_and_gradient(f, p, g);
    return g;
}

double value_and_gradient(const ScalarField& f, std::span<const double> p,
                          std::span<double> grad_out) {
    std::vector<Dual1> xs(p.begin(), p.end());
    double value = 0.0;
    for (int i = 0; i < f.dim; ++i) {
        xs[i].d = 1.0;
        Dual1 r = eval_expr<Dual1>(f.expr, xs);
        grad_out[i] = r.d;
        value = r.v;
        xs[i].d = 0.0;
    }
    return value;
}

std::vector<double> hessian_vector(const ScalarField& f, std::span<const double> p,
                                   std::span<const double> v, std::vector<double>* grad_out) {
    std::size_t n = static_cast<std::size_t>(f.dim);
    std::vector<Dual2> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = Dual2(Dual1(p[i], v[i]));
    std::vector<double> hv(n);
    if (grad_out) grad_out->assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i].d = Dual1(1.0, 0.0);
        Dual2 r = eval_expr<Dual2>(f.expr, xs);
        hv[i] = r.d.d;                       // d/dx_i of (grad f . v)
        if (grad_out) (*grad_out)[i] = r.d.v;  // d/dx_i of f
        xs[i].d = Dual1(0.0, 0.0);
    }
    return hv;
}

double finite_difference_check(const ScalarField& f, std::span<const double> p, double h) {
    std::vector<double> g = gradient(f, p);
    std::vector<double> q(p.begin(), p.end());
    double worst = 0.0;
    for (int i = 0; i < f.dim; ++i) {
        q[i] = p[i] + h;
        double fp = evaluate(f, q);
        q[i] = p[i] - h;
        double fm = evaluate(f, q);
        q[i] = p[i];
        double fd = (fp - fm) / (2.0 * h);
        double denom = std::max({std::fabs(g[i]), std::fabs(fd), 1e-12});
        worst = std::max(worst, std::fabs(g[i] - fd) / denom);
    }
    return worst;
}

// ---- printer ----------------------------------------------------------------

namespace {

int precedence(Op op) {
    switch (op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        default: return 5;  // atoms and function calls
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* function_name(Op op) {
    switch (op) {
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Sqrt: return "sqrt";
        case Op::Abs: return "abs";
        case Op::Sgn: return "sgn";
        case Op::Sigmoid: return "sigmoid";
        case Op::Max: return "max";
        case Op::Min: return "min";
        default: return "?";
    }
}

void print_node(const Expr& e, std::int32_t idx, std::string& s, int parent_prec,
                bool right_side) {
    const ExprNode& n = e.nodes[idx];
    int prec = precedence(n.op);
    switch (n.op) {
        case Op::Const: {
            bool neg = n.value < 0.0;
            if (neg && parent_prec > 1) s += '(';
            s += format_number(n.value);
            if (neg && parent_prec > 1) s += ')';
            return;
        }
        case Op::Var:
            s += 'x';
            s += std::to_string(n.var);
            return;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div: {
            bool parens = prec < parent_prec || (prec == parent_prec && right_side);
            char op_ch = n.op == Op::Add ? '+' : n.op == Op::Sub ? '-' : n.op == Op::Mul ? '*' : '/';
            if (parens) s += '(';
            print_node(e, n.a, s, prec, false);
            s += ' ';
            s += op_ch;
            s += ' ';
            print_node(e, n.b, s, prec, true);
            if (parens) s += ')';
            return;
        }
        case Op::Neg: {
            bool parens = prec < parent_prec;
            if (parens) s += '(';
            s += '-';
            print_node(e, n.a, s, prec, true);
            if (parens) s += ')';
            return;
        }
        case Op::Pow: {
            // right-associative: the base needs parens at equal precedence,
            // the exponent does not.
            bool parens = prec < parent_prec || (prec == parent_prec && !right_side);
            if (parens) s += '(';
            print_node(e, n.a, s, prec, false);
            s += '^';
            print_node(e, n.b, s, prec, true);
            if (parens) s += ')';
            return;
        }
        default: {  // function call
            s += function_name(n.op);
            s += '(';
            print_node(e, n.a, s, 0, false);
            if (n.b >= 0) {
                s += ", ";
                print_node(e, n.b, s, 0, false);
            }
            s += ')';
            return;
        }
    }
}

}  // namespace

std::string to_string(const Expr& e) {
    std::string s;
    print_node(e, e.root, s, 0, false);
    return s;
}

namespace {
bool same_node(const Expr& ea, std::int32_t ia, const Expr& eb, std::int32_t ib) {
    const ExprNode& a = ea.nodes[ia];
    const ExprNode& b = eb.nodes[ib];
    if (a.op != b.op) return false;
    if (a.op == Op::Const) return a.value == b.value;
    if (a.op == Op::Var) return a.var == b.var;
    if ((a.a >= 0) != (b.a >= 0) || (a.b >= 0) != (b.b >= 0)) return false;
    if (a.a >= 0 && !same_node(ea, a.a, eb, b.a)) return false;
    if (a.b >= 0 && !same_node(ea, a.b, eb, b.b)) return false;
    return true;
}
}  // namespace

bool same_structure(const Expr& a, const Expr& b) {
    return same_node(a, a.root, b, b.root);
}

// ---- builtins ---------------------------------------------------------------

namespace {
struct BuiltinDef {
    const char* name;
    int dim;
    const char* text;
};

// Reference fields used across the test batteries. The plateau fields are
// written in terms of a = max(|x0|-1, 0), b = max(|x1|-1, 0), which makes the
// whole square [-1,1]^2 exactly stationary under the kink conventions.
//
// fig4_u2 deliberately multiplies the cubic term by x1 so that the second
// player's best response is x0^3 - 2*x0; with an action-independent cubic
// term the response map would be identically zero and the intended
// three-equilibrium structure impossible.
const std::array<BuiltinDef, 7> kBuiltins = {{
    {"quadratic", 2, "x0^2 + x1^2"},
    {"doublewell", 2, "(x0^2 - 1)^2 + x1^2"},
    {"fig1_invex", 2, "sigmoid(x0) * (x1^2 - 1)^2"},
    {"fig3_twosided_pl", 2,
     "max(abs(x0) - 1, 0)^2 + 3*sin(max(abs(x1) - 1, 0))^2 * sin(max(abs(x0) - 1, 0))^2"
     " - 4*max(abs(x1) - 1, 0)^2 - 10*sin(max(abs(x1) - 1, 0))^2"},
    {"appB_exp", 2,
     "max(abs(x0) - 1, 0)^2 * exp(-max(abs(x1) - 1, 0)^2) - max(abs(x1) - 1, 0)^2"},
    {"fig4_u1", 2, "-0.5*x0^2 + x0*x1"},
    {"fig4_u2", 2, "-0.5*x1^2 + x1*(x0^3 - 2*x0)"},
}};
}  // namespace

ScalarField builtin_field(std::string_view name) {
    for (const auto& b : kBuiltins) {
        if (name == b.name) return parse_field(b.text, b.dim);
    }
    throw std::invalid_argument("unknown builtin field '" + std::string(name) + "'");
}

std::vector<std::string> builtin_field_names() {
    std::vector<std::string> names;
    for (const auto& b : kBuiltins) names.emplace_back(b.name);
    return names;
}

ScalarField pin_axes(const ScalarField& f, const std::vector<std::pair<int, double>>& pins) {
    ScalarField out = f;
    for (auto& node : out.expr.nodes) {
        if (node.op != Op::Var) continue;
        for (const auto& [axis, value] : pins) {
            if (node.var == axis) {
                node.op = Op::Const;
                node.value = value;
                node.var_dependent = false;
                break;
            }
        }
    }
    // var_dependent flags upstream of substituted nodes are refreshed.
    for (std::size_t i = 0; i < out.expr.nodes.size(); ++i) {
        ExprNode& n = out.expr.nodes[i];
        if (n.op == Op::Const || n.op == Op::Var) continue;
        bool dep = false;
        if (n.a >= 0) dep = dep || out.expr.nodes[n.a].var_dependent;
        if (n.b >= 0) dep = dep || out.expr.nodes[n.b].var_dependent;
        n.var_dependent = dep;
    }
    out.text = to_string(out.expr);
    return out;
}

}  // namespace invextopo
