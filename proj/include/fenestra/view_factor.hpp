#pragma once

#include <cmath>
#include <numbers>

namespace fenestra::vf {

/// Differential element facing a parallel rectangle whose corner lies on the
/// element's normal; rectangle extents a, b at distance c.
template <typename Scalar>
Scalar parallel_corner(Scalar a, Scalar b, Scalar c) {
    using std::atan;
    using std::sqrt;
    if (a <= 0 || b <= 0) return Scalar(0);
    const Scalar A = a / c, B = b / c;
    const Scalar sa = sqrt(1 + A * A), sb = sqrt(1 + B * B);
    return (A / sa * atan(B / sa) + B / sb * atan(A / sb)) / (2 * std::numbers::pi_v<Scalar>);
}

/// Differential element whose plane is perpendicular to the rectangle. The
/// rectangle edge of length a lies on the element's plane, starting at the
/// foot of the perpendicular from the element; b is its extent away from
/// that plane, c the element-to-rectangle-plane distance.
template <typename Scalar>
Scalar perpendicular_corner(Scalar a, Scalar b, Scalar c) {
    using std::atan;
    using std::sqrt;
    if (a <= 0 || b <= 0) return Scalar(0);
    const Scalar h = sqrt(c * c + b * b);
    return (atan(a / c) - c / h * atan(a / h)) / (2 * std::numbers::pi_v<Scalar>);
}

template <typename Scalar>
Scalar signum(Scalar v) {
    return v > 0 ? Scalar(1) : (v < 0 ? Scalar(-1) : Scalar(0));
}

/// Element at the origin facing +y toward the rectangle [u0,u1] x [w0,w1] in
/// the plane y = c (c > 0), by four-corner superposition.
template <typename Scalar>
Scalar parallel(Scalar u0, Scalar u1, Scalar w0, Scalar w1, Scalar c) {
    auto g = [c](Scalar u, Scalar w) {
        return signum(u) * signum(w) * parallel_corner<Scalar>(std::abs(u), std::abs(w), c);
    };
    return g(u1, w1) - g(u0, w1) - g(u1, w0) + g(u0, w0);
}

/// Element at the origin facing +z toward the rectangle [u0,u1] x [w0,w1] in
/// the plane y = c, where w is height above the element. Only the part above
/// the element's plane is visible.
template <typename Scalar>
Scalar perpendicular(Scalar u0, Scalar u1, Scalar w0, Scalar w1, Scalar c) {
    const Scalar lo = w0 > 0 ? w0 : Scalar(0);
    const Scalar hi = w1 > 0 ? w1 : Scalar(0);
    if (hi <= lo) return Scalar(0);
    auto g = [c](Scalar u, Scalar w) {
        return signum(u) * perpendicular_corner<Scalar>(std::abs(u), w, c);
    };
    return g(u1, hi) - g(u0, hi) - g(u1, lo) + g(u0, lo);
}

}  // namespace fenestra::vf
