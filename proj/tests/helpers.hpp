#pragma once

#include "scyfi/plrnn.hpp"
#include "scyfi/rng.hpp"

namespace scyfi::testing {

// 1-D map with left slope a_l and right slope a_r (right-slope offset on the
// coupling entry, which is allowed at M = 1).
inline PwlSystem skew_map_1d(double a_l, double a_r, double h) {
    PlrnnParams p;
    p.a_diag = VectorXd::Constant(1, a_l);
    p.w = MatrixXd::Constant(1, 1, a_r - a_l);
    p.h = VectorXd::Constant(1, h);
    return PwlSystem(std::move(p));
}

inline PwlSystem linear_system(const VectorXd& a, const VectorXd& h) {
    PlrnnParams p;
    p.a_diag = a;
    p.w = MatrixXd::Zero(a.size(), a.size());
    p.h = h;
    return PwlSystem(std::move(p));
}

inline PlrnnParams random_plrnn(int m, Rng& rng, double a_range = 1.2, double w_range = 2.0,
                                double h_range = 1.0) {
    PlrnnParams p;
    p.a_diag.resize(m);
    p.h.resize(m);
    p.w.resize(m, m);
    for (int i = 0; i < m; ++i) {
        p.a_diag[i] = rng.uniform(-a_range, a_range);
        p.h[i] = rng.uniform(-h_range, h_range);
        for (int j = 0; j < m; ++j) p.w(i, j) = i == j ? 0.0 : rng.uniform(-w_range, w_range);
    }
    return p;
}

inline VectorXd random_vector(int m, Rng& rng, double range = 2.0) {
    VectorXd v(m);
    for (int i = 0; i < m; ++i) v[i] = rng.uniform(-range, range);
    return v;
}

}  // namespace scyfi::testing
