#pragma once

// Second-order spatial jets in two dimensions.
//
// A Jet2 carries the value of a scalar field together with its gradient and its two pure second
// derivatives. The mixed partial d2/dxdy is not tracked: every operator in the coupled residual
// reads either first derivatives or the Laplacian (hxx + hyy), and the jet stays closed under the
// arithmetic below for the components it does carry.

#include <cmath>
#include <ostream>
#include <type_traits>

#include "cdnn/errors.hpp"

namespace cdnn {

enum class Axis { x, y };

/// Plain value of a scalar; overloaded for tape variables in tape.hpp.
inline double scalar_value(double v) noexcept { return v; }

template <class T>
struct Jet2 {
    T v{};
    T gx{};
    T gy{};
    T hxx{};
    T hyy{};

    Jet2() = default;
    Jet2(T value, T dx, T dy, T dxx, T dyy) : v(value), gx(dx), gy(dy), hxx(dxx), hyy(dyy) {}

    /// Jet of a constant.
    static Jet2 constant(T c) { return Jet2(c, T(0.0), T(0.0), T(0.0), T(0.0)); }

    T laplacian() const { return hxx + hyy; }

    bool finite() const {
        return std::isfinite(scalar_value(v)) && std::isfinite(scalar_value(gx)) &&
               std::isfinite(scalar_value(gy)) && std::isfinite(scalar_value(hxx)) &&
               std::isfinite(scalar_value(hyy));
    }
};

using Jet = Jet2<double>;

/// Seeds a coordinate input: unit gradient along `axis`, no curvature.
inline Jet jet_var(double value, Axis axis) {
    return axis == Axis::x ? Jet(value, 1.0, 0.0, 0.0, 0.0) : Jet(value, 0.0, 1.0, 0.0, 0.0);
}

template <class T>
Jet2<T> operator-(const Jet2<T>& a) {
    return {-a.v, -a.gx, -a.gy, -a.hxx, -a.hyy};
}

template <class T>
Jet2<T> operator+(const Jet2<T>& a, const Jet2<T>& b) {
    return {a.v + b.v, a.gx + b.gx, a.gy + b.gy, a.hxx + b.hxx, a.hyy + b.hyy};
}

template <class T>
Jet2<T> operator-(const Jet2<T>& a, const Jet2<T>& b) {
    return {a.v - b.v, a.gx - b.gx, a.gy - b.gy, a.hxx - b.hxx, a.hyy - b.hyy};
}

template <class T>
Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b) {
    return {a.v * b.v,
            a.gx * b.v + a.v * b.gx,
            a.gy * b.v + a.v * b.gy,
            a.hxx * b.v + 2.0 * (a.gx * b.gx) + a.v * b.hxx,
            a.hyy * b.v + 2.0 * (a.gy * b.gy) + a.v * b.hyy};
}

template <class T>
Jet2<T> operator/(const Jet2<T>& a, const Jet2<T>& b) {
    if (scalar_value(b.v) == 0.0) throw DomainError("jet division by a jet with zero value");
    // q = a/b; q' = (a' - q b')/b; q'' = (a'' - 2 q' b' - q b'')/b
    const T q = a.v / b.v;
    const T qx = (a.gx - q * b.gx) / b.v;
    const T qy = (a.gy - q * b.gy) / b.v;
    const T qxx = (a.hxx - 2.0 * (qx * b.gx) - q * b.hxx) / b.v;
    const T qyy = (a.hyy - 2.0 * (qy * b.gy) - q * b.hyy) / b.v;
    return {q, qx, qy, qxx, qyy};
}

// Mixed jet/constant arithmetic.

template <class T>
Jet2<T> operator+(const Jet2<T>& a, double c) {
    return {a.v + c, a.gx, a.gy, a.hxx, a.hyy};
}
template <class T>
Jet2<T> operator+(double c, const Jet2<T>& a) {
    return a + c;
}
template <class T>
Jet2<T> operator-(const Jet2<T>& a, double c) {
    return {a.v - c, a.gx, a.gy, a.hxx, a.hyy};
}
template <class T>
Jet2<T> operator-(double c, const Jet2<T>& a) {
    return {c - a.v, -a.gx, -a.gy, -a.hxx, -a.hyy};
}
template <class T>
Jet2<T> operator*(const Jet2<T>& a, double c) {
    return {a.v * c, a.gx * c, a.gy * c, a.hxx * c, a.hyy * c};
}
template <class T>
Jet2<T> operator*(double c, const Jet2<T>& a) {
    return a * c;
}
template <class T>
Jet2<T> operator/(const Jet2<T>& a, double c) {
    if (c == 0.0) throw DomainError("jet division by zero constant");
    return a * (1.0 / c);
}
template <class T>
Jet2<T> operator/(double c, const Jet2<T>& a) {
    return Jet2<T>::constant(T(c)) / a;
}

/// Chain rule for a scalar function given its value and first two derivatives at a.v.
template <class T>
Jet2<T> compose(const Jet2<T>& a, const T& f0, const T& f1, const T& f2) {
    return {f0,
            f1 * a.gx,
            f1 * a.gy,
            f2 * (a.gx * a.gx) + f1 * a.hxx,
            f2 * (a.gy * a.gy) + f1 * a.hyy};
}

template <class T>
Jet2<T> sin(const Jet2<T>& a) {
    using std::cos;
    using std::sin;
    const T s = sin(a.v);
    return compose(a, s, T(cos(a.v)), T(-s));
}

template <class T>
Jet2<T> cos(const Jet2<T>& a) {
    using std::cos;
    using std::sin;
    const T c = cos(a.v);
    return compose(a, c, T(-sin(a.v)), T(-c));
}

template <class T>
Jet2<T> exp(const Jet2<T>& a) {
    using std::exp;
    const T e = exp(a.v);
    return compose(a, e, e, e);
}

template <class T>
Jet2<T> tanh(const Jet2<T>& a) {
    using std::tanh;
    const T t = tanh(a.v);
    const T d1 = 1.0 - t * t;
    return compose(a, t, d1, T(-2.0 * (t * d1)));
}

/// a^k for real k. Non-integer k needs a.v > 0; negative k needs a.v != 0.
template <class T>
Jet2<T> pow(const Jet2<T>& a, double k) {
    using std::pow;
    if (k == 0.0) return Jet2<T>::constant(T(1.0));
    if (k == 1.0) return a;
    const double av = scalar_value(a.v);
    const bool integral = std::floor(k) == k;
    const bool ok = av > 0.0 || (av < 0.0 && integral) || (av == 0.0 && integral && k >= 2.0);
    if (!ok) throw DomainError("jet power undefined or not twice differentiable at this value");
    const T pk2 = pow(a.v, k - 2.0);
    const T pk1 = pk2 * a.v;
    return compose(a, T(pk1 * a.v), T(k * pk1), T((k * (k - 1.0)) * pk2));
}

/// |a|. Defined only away from the kink (or at a constant zero), since |.| is not C1 at 0.
template <class T>
Jet2<T> abs(const Jet2<T>& a) {
    const double av = scalar_value(a.v);
    if (av == 0.0) {
        const bool flat = scalar_value(a.gx) == 0.0 && scalar_value(a.gy) == 0.0 &&
                          scalar_value(a.hxx) == 0.0 && scalar_value(a.hyy) == 0.0;
        if (!flat) throw DomainError("jet abs is not differentiable at zero");
        return a;
    }
    return av > 0.0 ? a : -a;
}

template <class T>
std::ostream& operator<<(std::ostream& os, const Jet2<T>& j) {
    return os << '(' << scalar_value(j.v) << ", " << scalar_value(j.gx) << ", " << scalar_value(j.gy)
              << ", " << scalar_value(j.hxx) << ", " << scalar_value(j.hyy) << ')';
}

}  // namespace cdnn
