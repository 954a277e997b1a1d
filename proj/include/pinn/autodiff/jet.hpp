#pragma once

#include "pinn/error.hpp"

#include <cmath>
#include <initializer_list>
#include <ostream>
#include <span>

namespace pinn::autodiff {

inline double primal(double x) noexcept { return x; }
inline double max_with(double x, double c) noexcept { return x > c ? x : c; }

/// Truncated Taylor jet in the two pricing inputs: value, first and second
/// spot derivatives and first time derivative. Mixed and second time
/// derivatives are dropped; the Black-Scholes operator never needs them.
///
/// The scalar type is either `double` (plain forward mode) or
/// `autodiff::Var` (each component recorded on a parameter tape).
template <typename T>
struct BasicJet {
    T value{};
    T d_dS{};
    T d2_dS2{};
    T d_dt{};

    static BasicJet constant(const T& c) { return {c, T(0.0), T(0.0), T(0.0)}; }
    static BasicJet seed_spot(const T& s) { return {s, T(1.0), T(0.0), T(0.0)}; }
    static BasicJet seed_time(const T& t) { return {t, T(0.0), T(0.0), T(1.0)}; }

    BasicJet operator-() const { return {-value, -d_dS, -d2_dS2, -d_dt}; }

    BasicJet& operator+=(const BasicJet& o)
    {
        value = value + o.value;
        d_dS = d_dS + o.d_dS;
        d2_dS2 = d2_dS2 + o.d2_dS2;
        d_dt = d_dt + o.d_dt;
        return *this;
    }
};

using Jet2 = BasicJet<double>;

template <typename T>
BasicJet<T> operator+(const BasicJet<T>& a, const BasicJet<T>& b)
{
    return {a.value + b.value, a.d_dS + b.d_dS, a.d2_dS2 + b.d2_dS2, a.d_dt + b.d_dt};
}

template <typename T>
BasicJet<T> operator-(const BasicJet<T>& a, const BasicJet<T>& b)
{
    return {a.value - b.value, a.d_dS - b.d_dS, a.d2_dS2 - b.d2_dS2, a.d_dt - b.d_dt};
}

template <typename T>
BasicJet<T> operator*(const BasicJet<T>& a, const BasicJet<T>& b)
{
    return {a.value * b.value,
            a.d_dS * b.value + a.value * b.d_dS,
            a.d2_dS2 * b.value + 2.0 * (a.d_dS * b.d_dS) + a.value * b.d2_dS2,
            a.d_dt * b.value + a.value * b.d_dt};
}

// jet (op) constant
template <typename T>
BasicJet<T> operator+(const BasicJet<T>& a, double c)
{
    return {a.value + c, a.d_dS, a.d2_dS2, a.d_dt};
}
template <typename T>
BasicJet<T> operator+(double c, const BasicJet<T>& a)
{
    return a + c;
}
template <typename T>
BasicJet<T> operator-(const BasicJet<T>& a, double c)
{
    return a + (-c);
}
template <typename T>
BasicJet<T> operator-(double c, const BasicJet<T>& a)
{
    return -a + c;
}
template <typename T>
BasicJet<T> operator*(const BasicJet<T>& a, double c)
{
    return {a.value * c, a.d_dS * c, a.d2_dS2 * c, a.d_dt * c};
}
template <typename T>
BasicJet<T> operator*(double c, const BasicJet<T>& a)
{
    return a * c;
}

/// Applies a scalar function with derivatives f1 = phi'(u), f2 = phi''(u)
/// at u = a.value to the jet a.
template <typename T>
BasicJet<T> chain(const BasicJet<T>& a, const T& f0, const T& f1, const T& f2)
{
    return {f0, f1 * a.d_dS, f1 * a.d2_dS2 + f2 * (a.d_dS * a.d_dS), f1 * a.d_dt};
}

template <typename T>
BasicJet<T> reciprocal(const BasicJet<T>& a)
{
    if (primal(a.value) == 0.0) {
        throw DomainError("jet division by zero");
    }
    const T inv = 1.0 / a.value;
    const T inv2 = inv * inv;
    return chain(a, inv, -inv2, 2.0 * (inv2 * inv));
}

template <typename T>
BasicJet<T> operator/(const BasicJet<T>& a, const BasicJet<T>& b)
{
    if (primal(b.value) == 0.0) {
        throw DomainError("jet division by zero");
    }
    const T q = a.value / b.value;
    const T q_s = (a.d_dS - q * b.d_dS) / b.value;
    const T q_ss = (a.d2_dS2 - 2.0 * (q_s * b.d_dS) - q * b.d2_dS2) / b.value;
    const T q_t = (a.d_dt - q * b.d_dt) / b.value;
    return {q, q_s, q_ss, q_t};
}

template <typename T>
BasicJet<T> operator/(const BasicJet<T>& a, double c)
{
    if (c == 0.0) {
        throw DomainError("jet division by zero");
    }
    return {a.value / c, a.d_dS / c, a.d2_dS2 / c, a.d_dt / c};
}

template <typename T>
BasicJet<T> tanh(const BasicJet<T>& a)
{
    using std::tanh;
    const T h = tanh(a.value);
    const T g1 = 1.0 - h * h;
    const T g2 = -2.0 * (h * g1);
    return chain(a, h, g1, g2);
}

template <typename T>
BasicJet<T> exp(const BasicJet<T>& a)
{
    using std::exp;
    const T e = exp(a.value);
    return chain(a, e, e, e);
}

template <typename T>
BasicJet<T> log(const BasicJet<T>& a)
{
    using std::log;
    if (!(primal(a.value) > 0.0)) {
        throw DomainError("jet ln of non-positive value");
    }
    const T inv = 1.0 / a.value;
    return chain(a, log(a.value), inv, -(inv * inv));
}

/// max(a, c) for a constant c. The kink a.value == c takes the constant
/// branch, i.e. subgradient zero.
template <typename T>
BasicJet<T> max_with(const BasicJet<T>& a, double c)
{
    if (primal(a.value) > c) {
        return a;
    }
    return BasicJet<T>::constant(T(c));
}

template <typename T>
bool is_finite(const BasicJet<T>& a)
{
    return std::isfinite(primal(a.value)) && std::isfinite(primal(a.d_dS)) &&
           std::isfinite(primal(a.d2_dS2)) && std::isfinite(primal(a.d_dt));
}

enum class ElementaryOp { Add, Sub, Mul, Div, Tanh, Exp, Log, MaxWithConstant };

/// Dispatches one elementary operation on plain jets. Binary ops take two
/// arguments, unary ops one; MaxWithConstant takes the jet and reads the
/// constant from `constant`. Domain violations throw DomainError.
Jet2 jet_apply(ElementaryOp op, std::span<const Jet2> args, double constant = 0.0);

inline Jet2 jet_apply(ElementaryOp op, std::initializer_list<Jet2> args, double constant = 0.0)
{
    return jet_apply(op, std::span<const Jet2>(args.begin(), args.size()), constant);
}

inline std::ostream& operator<<(std::ostream& os, const Jet2& j)
{
    return os << '(' << j.value << ", " << j.d_dS << ", " << j.d2_dS2 << ", " << j.d_dt << ')';
}

}  // namespace pinn::autodiff
