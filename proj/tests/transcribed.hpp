#pragma once

// Hand-transcribed closed forms for the one-border 2-D map: 2-cycle solution,
// characteristic polynomials, and bifurcation-curve polynomials. Test-only;
// production evaluates the generic compositions. The dual route guards both
// against transcription slips here and indexing slips there.

#include <Eigen/Dense>

#include "scyfi/oracle2d.hpp"

namespace scyfi::transcribed {

inline double cycle2_den(const Pwl2dParams& p) {
    return (p.a_r * p.d - p.b_r * p.c) * (p.a_l * p.d - p.b_l * p.c) -
           p.c * (p.b_l + p.b_r) - p.d * p.d - p.a_l * p.a_r + 1.0;
}

inline Eigen::Vector2d cycle2_point1(const Pwl2dParams& p) {
    const double den = cycle2_den(p);
    const double common = (1.0 - p.d) * p.h1 + p.c * p.h2;
    const double x = common * (p.a_l + p.d + p.a_l * p.d - p.b_l * p.c + 1.0) / den;
    const double y =
        (p.h2 * (1.0 + p.d - p.a_l * p.a_r - p.b_r * p.c - p.a_l * p.a_r * p.d +
                 p.a_r * p.b_l * p.c) +
         p.h1 * (p.b_l + p.a_r * p.b_l + p.b_r * p.d + p.a_l * p.b_r * p.d -
                 p.b_l * p.b_r * p.c)) /
        den;
    return {x, y};
}

inline Eigen::Vector2d cycle2_point2(const Pwl2dParams& p) {
    const double den = cycle2_den(p);
    const double common = (1.0 - p.d) * p.h1 + p.c * p.h2;
    const double x = common * (p.a_r + p.d + p.a_r * p.d - p.b_r * p.c + 1.0) / den;
    const double y =
        (p.h2 * (1.0 + p.d - p.a_l * p.a_r - p.b_l * p.c - p.a_l * p.a_r * p.d +
                 p.a_l * p.b_r * p.c) +
         p.h1 * (p.b_r + p.a_l * p.b_r + p.b_l * p.d + p.a_r * p.b_l * p.d -
                 p.b_l * p.b_r * p.c)) /
        den;
    return {x, y};
}

inline double cycle2_trace(const Pwl2dParams& p) {
    return p.d * p.d + p.a_l * p.a_r + p.b_l * p.c + p.b_r * p.c;
}

inline double cycle2_det(const Pwl2dParams& p) {
    return (p.a_r * p.d - p.b_r * p.c) * (p.a_l * p.d - p.b_l * p.c);
}

inline std::array<std::complex<double>, 2> cycle2_eigenvalues(const Pwl2dParams& p) {
    const double tr = cycle2_trace(p);
    const double det = cycle2_det(p);
    const std::complex<double> disc = tr * tr - 4.0 * det;
    const std::complex<double> s = std::sqrt(disc);
    std::array<std::complex<double>, 2> ev{(tr + s) / 2.0, (tr - s) / 2.0};
    if (std::abs(ev[1]) > std::abs(ev[0])) std::swap(ev[0], ev[1]);
    return ev;
}

inline double tau_RL(const Pwl2dParams& p) {
    return p.a_l * p.a_r + p.b_l * p.c + p.b_r * p.c + p.d * p.d -
           p.a_l * p.a_r * p.d * p.d - p.b_l * p.b_r * p.c * p.c +
           p.a_l * p.b_r * p.c * p.d + p.a_r * p.b_l * p.c * p.d - 1.0;
}

inline double F_RL(const Pwl2dParams& p) {
    return cycle2_det(p) + p.c * (p.b_l + p.b_r) + p.d * p.d + p.a_l * p.a_r + 1.0;
}

inline double xi1_RL(const Pwl2dParams& p) {
    return p.a_l + p.d + p.a_l * p.d - p.b_l * p.c + 1.0;
}

inline double xi2_RL(const Pwl2dParams& p) {
    return p.a_r + p.d + p.a_r * p.d - p.b_r * p.c + 1.0;
}

// fixed-point curves
inline double tau_fixed(const Pwl2dParams& p, bool right) {
    const double a = right ? p.a_r : p.a_l;
    const double b = right ? p.b_r : p.b_l;
    return 1.0 - a - p.d + a * p.d - b * p.c;
}

inline double F_fixed(const Pwl2dParams& p, bool right) {
    const double a = right ? p.a_r : p.a_l;
    const double b = right ? p.b_r : p.b_l;
    return 1.0 + a + p.d + a * p.d - b * p.c;
}

inline double xi_fixed(const Pwl2dParams& p) { return (1.0 - p.d) * p.h1 + p.c * p.h2; }

// 3-cycle RL^2 machinery
inline double G_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, ar = p.a_r, bl = p.b_l, br = p.b_r, c = p.c, d = p.d;
    return -al * al * ar - d * d * d -
           c * (al * bl + al * br + ar * bl + d * (2.0 * bl + br)) +
           (ar * d - br * c) * (al * d - bl * c) * (al * d - bl * c) + 1.0;
}

inline double G1_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, bl = p.b_l, c = p.c, d = p.d;
    return al * al * d * d + al * al * d + al * al - 2.0 * al * bl * c * d - al * bl * c +
           al * d * d + al * d + al + bl * bl * c * c - bl * c * d + bl * c + d * d + d + 1.0;
}

inline double K1_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, ar = p.a_r, bl = p.b_l, br = p.b_r, c = p.c, d = p.d;
    return ar + d + al * ar + bl * c + ar * d + ar * d * d + d * d + al * ar * d -
           al * br * c - br * c * d + al * ar * d * d + bl * br * c * c - al * br * c * d -
           ar * bl * c * d + 1.0;
}

inline double H1_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, ar = p.a_r, bl = p.b_l, br = p.b_r, c = p.c, d = p.d;
    return al + d + al * ar + al * d + br * c + al * d * d + d * d + al * ar * d -
           ar * bl * c - bl * c * d + al * ar * d * d + bl * br * c * c - al * br * c * d -
           ar * bl * c * d + 1.0;
}

inline double G2_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, ar = p.a_r, bl = p.b_l, br = p.b_r, c = p.c, d = p.d,
                 h1 = p.h1, h2 = p.h2;
    return h2 + bl * h1 + d * h2 + d * d * h2 + al * bl * h1 + bl * c * h2 + bl * d * h1 -
           al * al * ar * h2 + br * d * d * h1 - ar * bl * bl * c * h1 -
           al * al * ar * d * h2 + al * br * d * d * h1 + bl * br * c * c * h2 -
           ar * bl * bl * c * c * h2 - al * al * ar * d * d * h2 + al * al * br * d * d * h1 +
           bl * bl * br * c * c * h1 + al * ar * bl * h1 - al * br * c * h2 -
           ar * bl * c * h2 + ar * bl * d * h1 + bl * br * c * h1 - br * c * d * h2 +
           al * ar * bl * c * h2 + al * ar * bl * d * h1 - al * br * c * d * h2 -
           bl * br * c * d * h1 + 2.0 * al * ar * bl * c * d * h2 -
           2.0 * al * bl * br * c * d * h1;
}

inline double K2_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, ar = p.a_r, bl = p.b_l, br = p.b_r, c = p.c, d = p.d,
                 h1 = p.h1, h2 = p.h2;
    return h2 + br * h1 + d * h2 + d * d * h2 + al * br * h1 + br * c * h2 + bl * d * h1 -
           al * al * ar * h2 + al * al * br * h1 + bl * d * d * h1 + al * al * br * c * h2 +
           ar * bl * d * d * h1 + bl * br * c * c * h2 - al * al * ar * d * d * h2 +
           bl * bl * br * c * c * h1 - al * bl * c * h2 - ar * bl * c * h2 + al * bl * d * h1 +
           bl * br * c * h1 - bl * c * d * h2 + al * ar * bl * d * h1 - al * bl * br * c * h1 -
           ar * bl * c * d * h2 - bl * br * c * d * h1 + al * ar * bl * d * d * h1 -
           al * bl * br * c * c * h2 - ar * bl * bl * c * d * h1 + al * al * br * c * d * h2 +
           al * ar * bl * c * d * h2 - al * bl * br * c * d * h1 - al * al * ar * d * h2;
}

inline double H2_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, ar = p.a_r, bl = p.b_l, br = p.b_r, c = p.c, d = p.d,
                 h1 = p.h1, h2 = p.h2;
    return h2 + bl * h1 + d * h2 + d * d * h2 + bl * bl * c * c * h2 + ar * bl * h1 +
           bl * c * h2 + br * d * h1 - al * al * ar * h2 + bl * bl * c * h1 +
           bl * d * d * h1 - al * al * ar * d * h2 - bl * c * d * h2 + al * bl * d * d * h1 +
           al * al * br * d * h1 - bl * bl * c * d * h1 - al * al * ar * d * d * h2 +
           bl * bl * br * c * c * h1 + al * ar * bl * h1 - al * bl * c * h2 -
           al * br * c * h2 + al * br * d * h1 + al * ar * bl * c * h2 -
           al * bl * br * c * h1 - al * bl * c * d * h2 + al * ar * bl * d * d * h1 -
           al * bl * br * c * c * h2 - ar * bl * bl * c * d * h1 + al * al * br * c * d * h2 +
           al * ar * bl * c * d * h2 - al * bl * br * c * d * h1;
}

inline double tau_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, ar = p.a_r, bl = p.b_l, br = p.b_r, c = p.c, d = p.d;
    return br * al * al * c * d * d - ar * al * al * d * d * d + ar * al * al -
           2.0 * br * al * bl * c * c * d + 2.0 * ar * al * bl * c * d * d + al * bl * c +
           br * al * c + br * bl * bl * c * c * c - ar * bl * bl * c * c * d +
           2.0 * bl * c * d + ar * bl * c + br * c * d + d * d * d - 1.0;
}

inline double F_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, ar = p.a_r, bl = p.b_l, br = p.b_r, c = p.c, d = p.d;
    return -br * al * al * c * d * d + ar * al * al * d * d * d + ar * al * al +
           2.0 * br * al * bl * c * c * d - 2.0 * ar * al * bl * c * d * d + al * bl * c +
           br * al * c - br * bl * bl * c * c * c + ar * bl * bl * c * c * d +
           2.0 * bl * c * d + ar * bl * c + br * c * d + d * d * d + 1.0;
}

inline double cycle3_trace_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, ar = p.a_r, bl = p.b_l, br = p.b_r, c = p.c, d = p.d;
    return al * al * ar + d * d * d + c * (al * bl + al * br + ar * bl + d * (2.0 * bl + br));
}

inline double cycle3_det_RL2(const Pwl2dParams& p) {
    const double al = p.a_l, ar = p.a_r, bl = p.b_l, br = p.b_r, c = p.c, d = p.d;
    return (ar * d - br * c) * (al * d - bl * c) * (al * d - bl * c);
}

}  // namespace scyfi::transcribed
