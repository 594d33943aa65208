#pragma once

// Forward-mode automatic differentiation scalar. Dual<double> carries one
// derivative channel; Dual<Dual<double>> nests to second-order directional
// derivatives (used for Hessian-vector products in the stationary-point
// solver). All nonsmooth primitives follow the plateau convention described
// in docs/grammar.md: at a kink the propagated derivative is 0.

#include <cmath>

namespace invextopo {

template <class T>
struct Dual {
    T v{};  // value
    T d{};  // derivative channel

    Dual() = default;
    Dual(const T& value) : v(value), d() {}
    Dual(const T& value, const T& deriv) : v(value), d(deriv) {}
};

// Innermost plain value, used for all branching decisions.
inline double real_part(double x) { return x; }
template <class T>
double real_part(const Dual<T>& x) { return real_part(x.v); }

// Structural equality of all channels (used by the max/min tie rule).
inline bool all_channels_equal(double a, double b) { return a == b; }
template <class T>
bool all_channels_equal(const Dual<T>& a, const Dual<T>& b) {
    return all_channels_equal(a.v, b.v) && all_channels_equal(a.d, b.d);
}

// Build a constant of the same nesting depth as T from a double.
template <class T>
struct scalar_maker {
    static T constant(double c) { return c; }
};
template <class T>
struct scalar_maker<Dual<T>> {
    static Dual<T> constant(double c) { return Dual<T>(scalar_maker<T>::constant(c)); }
};
template <class T>
T make_constant(double c) { return scalar_maker<T>::constant(c); }

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T>
Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}

// Mixed double ops (scale/shift by plain constants).
template <class T>
Dual<T> operator*(double c, const Dual<T>& a) { return Dual<T>(make_constant<T>(c)) * a; }
template <class T>
Dual<T> operator*(const Dual<T>& a, double c) { return c * a; }
template <class T>
Dual<T> operator+(double c, const Dual<T>& a) { return Dual<T>(make_constant<T>(c)) + a; }
template <class T>
Dual<T> operator+(const Dual<T>& a, double c) { return c + a; }
template <class T>
Dual<T> operator-(double c, const Dual<T>& a) { return Dual<T>(make_constant<T>(c)) - a; }
template <class T>
Dual<T> operator-(const Dual<T>& a, double c) { return a - Dual<T>(make_constant<T>(c)); }
template <class T>
Dual<T> operator/(double c, const Dual<T>& a) { return Dual<T>(make_constant<T>(c)) / a; }
template <class T>
Dual<T> operator/(const Dual<T>& a, double c) { return a / Dual<T>(make_constant<T>(c)); }

// ---- elementary functions --------------------------------------------------
// double overloads live here so templated code can call them unqualified and
// resolve either the std:: version (via using-declarations) or these.

inline double s_exp(double x) { return std::exp(x); }
inline double s_log(double x) { return std::log(x); }
inline double s_sin(double x) { return std::sin(x); }
inline double s_cos(double x) { return std::cos(x); }
inline double s_sqrt(double x) { return std::sqrt(x); }
inline double s_abs(double x) { return std::fabs(x); }
inline double s_max(double a, double b) { return a > b ? a : b; }
inline double s_min(double a, double b) { return a < b ? a : b; }
inline double s_sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// Overflow-safe logistic function.
inline double s_sigmoid(double x) {
    if (x >= 0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

template <class T>
Dual<T> s_exp(const Dual<T>& x) {
    T e = s_exp(x.v);
    return {e, x.d * e};
}
template <class T>
Dual<T> s_log(const Dual<T>& x) { return {s_log(x.v), x.d / x.v}; }
template <class T>
Dual<T> s_sin(const Dual<T>& x) { return {s_sin(x.v), x.d * s_cos(x.v)}; }
template <class T>
Dual<T> s_cos(const Dual<T>& x) { return {s_cos(x.v), -(x.d * s_sin(x.v))}; }

template <class T>
Dual<T> s_sqrt(const Dual<T>& x) {
    T r = s_sqrt(x.v);
    if (real_part(x.v) == 0.0) return {r, T{}};  // plateau convention at 0
    return {r, x.d / (r + r)};
}

template <class T>
Dual<T> s_abs(const Dual<T>& x) {
    double s = s_sgn(real_part(x.v));
    return {s_abs(x.v), s * x.d};
}

template <class T>
Dual<T> s_sgn(const Dual<T>& x) {
    return {make_constant<T>(s_sgn(real_part(x.v))), T{}};
}

template <class T>
Dual<T> s_max(const Dual<T>& a, const Dual<T>& b) {
    double av = real_part(a), bv = real_part(b);
    if (av > bv) return a;
    if (bv > av) return b;
    // Tie: derivative 0 at the kink unless both branches agree identically.
    return {s_max(a.v, b.v), all_channels_equal(a.d, b.d) ? a.d : T{}};
}

template <class T>
Dual<T> s_min(const Dual<T>& a, const Dual<T>& b) {
    double av = real_part(a), bv = real_part(b);
    if (av < bv) return a;
    if (bv < av) return b;
    return {s_min(a.v, b.v), all_channels_equal(a.d, b.d) ? a.d : T{}};
}

template <class T>
Dual<T> s_sigmoid(const Dual<T>& x) {
    T s = s_sigmoid(x.v);
    T w = s * (make_constant<T>(1.0) - s);  // sigma' = sigma * (1 - sigma)
    return {s, x.d * w};
}

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

}  // namespace invextopo
