#include "scyfi/oracle2d.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "scyfi/parallel.hpp"

namespace scyfi {

Eigen::Matrix2d Pwl2dParams::left_matrix() const {
    Eigen::Matrix2d m;
    m << a_l, c, b_l, d;
    return m;
}

Eigen::Matrix2d Pwl2dParams::right_matrix() const {
    Eigen::Matrix2d m;
    m << a_r, c, b_r, d;
    return m;
}

Eigen::Vector2d apply_pwl2d(const Pwl2dParams& p, const Eigen::Vector2d& z) {
    const Eigen::Matrix2d m = z[0] > 0.0 ? p.right_matrix() : p.left_matrix();
    return m * z + Eigen::Vector2d(p.h1, p.h2);
}

const char* to_string(ObjectKind k) {
    switch (k) {
        case ObjectKind::fixed_L: return "fixed_L";
        case ObjectKind::fixed_R: return "fixed_R";
        case ObjectKind::cycle_RL: return "cycle_RL";
        case ObjectKind::cycle_RL2: return "cycle_RL2";
        case ObjectKind::cycle_R2L: return "cycle_R2L";
    }
    return "?";
}

int object_order(ObjectKind k) {
    switch (k) {
        case ObjectKind::fixed_L:
        case ObjectKind::fixed_R: return 1;
        case ObjectKind::cycle_RL: return 2;
        case ObjectKind::cycle_RL2:
        case ObjectKind::cycle_R2L: return 3;
    }
    return 0;
}

namespace {

constexpr double kSingularTol = 1e-12;

// side that each periodic point is fed to, in orbit order
std::vector<Side> orbit_sides(ObjectKind k) {
    switch (k) {
        case ObjectKind::fixed_L: return {Side::L};
        case ObjectKind::fixed_R: return {Side::R};
        case ObjectKind::cycle_RL: return {Side::R, Side::L};
        case ObjectKind::cycle_RL2: return {Side::R, Side::L, Side::L};
        case ObjectKind::cycle_R2L: return {Side::L, Side::R, Side::R};
    }
    return {};
}

struct Composition {
    Eigen::Matrix2d p = Eigen::Matrix2d::Identity();
    Eigen::Vector2d q = Eigen::Vector2d::Zero();
};

Composition compose_sides(const Pwl2dParams& par, const std::vector<Side>& sides, int start) {
    Composition comp;
    const Eigen::Vector2d h(par.h1, par.h2);
    const int k = static_cast<int>(sides.size());
    for (int i = 0; i < k; ++i) {
        const Side s = sides[(start + i) % k];
        const Eigen::Matrix2d m = s == Side::L ? par.left_matrix() : par.right_matrix();
        comp.p = m * comp.p;
        comp.q = m * comp.q + h;
    }
    return comp;
}

// z1 numerator of the fixed point of the composition started at `start`:
// [adj(I - P) q]_1; proportional to z1 but finite on the DTB locus
double z1_numerator(const Composition& comp) {
    const Eigen::Matrix2d m = Eigen::Matrix2d::Identity() - comp.p;
    return m(1, 1) * comp.q[0] - m(0, 1) * comp.q[1];
}

std::array<std::complex<double>, 2> eigenvalues_2x2(const Eigen::Matrix2d& m) {
    const double tr = m.trace();
    const double det = m.determinant();
    const double disc = tr * tr - 4.0 * det;
    std::array<std::complex<double>, 2> ev;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        ev[0] = {(tr + s) / 2.0, 0.0};
        ev[1] = {(tr - s) / 2.0, 0.0};
    } else {
        const double s = std::sqrt(-disc);
        ev[0] = {tr / 2.0, s / 2.0};
        ev[1] = {tr / 2.0, -s / 2.0};
    }
    if (std::abs(ev[1]) > std::abs(ev[0])) std::swap(ev[0], ev[1]);
    return ev;
}

}  // namespace

RegionVerdict evaluate_object(const Pwl2dParams& par, ObjectKind kind) {
    RegionVerdict v;
    v.kind = kind;
    const auto sides = orbit_sides(kind);
    const int k = static_cast<int>(sides.size());
    const Composition comp = compose_sides(par, sides, 0);

    const Eigen::Matrix2d lhs = Eigen::Matrix2d::Identity() - comp.p;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(lhs, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(1);
    if (smax <= 0.0 || smin / smax < kSingularTol) {
        v.degenerate = true;
        return v;
    }

    v.points.resize(k);
    v.points[0] = svd.solve(comp.q);
    const Eigen::Vector2d h(par.h1, par.h2);
    for (int l = 0; l + 1 < k; ++l) {
        const Eigen::Matrix2d m =
            sides[l] == Side::L ? par.left_matrix() : par.right_matrix();
        v.points[l + 1] = m * v.points[l] + h;
    }

    bool all_strict = true;
    for (int l = 0; l < k; ++l) {
        const double z1 = v.points[l][0];
        if (std::abs(z1) <= kBorderEps) {
            v.on_curve = true;
            all_strict = false;
        } else if ((sides[l] == Side::R) != (z1 > 0.0)) {
            all_strict = false;
        }
    }
    v.exists = all_strict;

    v.eigenvalues = eigenvalues_2x2(comp.p);
    // same classification rule the search uses: strictly inside the unit disc
    // with a 1e-9 marginality band. Equivalent to the Jury conditions
    // P(1) > 0, P(-1) > 0, det < 1, but well-behaved exactly on the loci.
    v.stable = v.exists && std::abs(v.eigenvalues[0]) < 1.0 - 1e-9;
    return v;
}

RegionVerdict fixed_point(const Pwl2dParams& p, Side side) {
    return evaluate_object(p, side == Side::L ? ObjectKind::fixed_L : ObjectKind::fixed_R);
}

RegionVerdict cycle2(const Pwl2dParams& p) { return evaluate_object(p, ObjectKind::cycle_RL); }

RegionVerdict cycle3(const Pwl2dParams& p, ObjectKind kind) {
    if (kind != ObjectKind::cycle_RL2 && kind != ObjectKind::cycle_R2L)
        throw std::invalid_argument("cycle3: kind must be cycle_RL2 or cycle_R2L");
    return evaluate_object(p, kind);
}

CurveValues curve_values(const Pwl2dParams& par, ObjectKind kind) {
    const auto sides = orbit_sides(kind);
    const int k = static_cast<int>(sides.size());
    const Composition comp = compose_sides(par, sides, 0);
    const double tr = comp.p.trace();
    const double det = comp.p.determinant();

    CurveValues cv;
    cv.p_at_1 = 1.0 - tr + det;
    cv.p_at_minus1 = 1.0 + tr + det;
    cv.det_minus_1 = det - 1.0;
    cv.complex_pair = tr * tr < 4.0 * det;

    // each rotation puts a different periodic point first; the BCB curve is
    // the numerator of whichever can reach the border
    double best = std::numeric_limits<double>::infinity();
    for (int start = 0; start < k; ++start) {
        const double numer = z1_numerator(compose_sides(par, sides, start));
        if (std::abs(numer) < std::abs(best)) best = numer;
    }
    cv.border_fn = best;
    return cv;
}

std::vector<ScanCell> multistability_scan(const ScanSpec& spec, int threads) {
    if (spec.n_al < 1 || spec.n_ar < 1) throw std::invalid_argument("scan: grid must be nonempty");
    const std::size_t n = static_cast<std::size_t>(spec.n_al) * spec.n_ar;
    std::vector<ScanCell> cells(n);
    parallel_for(n, threads, [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / spec.n_ar;
        const int j = static_cast<int>(idx) % spec.n_ar;
        ScanCell& cell = cells[idx];
        cell.i = i;
        cell.j = j;
        cell.a_l = spec.n_al == 1 ? spec.al_lo
                                  : spec.al_lo + (spec.al_hi - spec.al_lo) * i / (spec.n_al - 1);
        cell.a_r = spec.n_ar == 1 ? spec.ar_lo
                                  : spec.ar_lo + (spec.ar_hi - spec.ar_lo) * j / (spec.n_ar - 1);
        Pwl2dParams p = spec.base;
        p.a_l = cell.a_l;
        p.a_r = cell.a_r;
        cell.n_stable = 0;
        for (std::size_t ki = 0; ki < kAllObjectKinds.size(); ++ki) {
            cell.verdicts[ki] = evaluate_object(p, kAllObjectKinds[ki]);
            if (cell.verdicts[ki].stable) ++cell.n_stable;
        }
    });
    return cells;
}

std::vector<const ScanCell*> coexistence_cells(const std::vector<ScanCell>& cells) {
    std::vector<const ScanCell*> out;
    for (const auto& c : cells)
        if (c.n_stable >= 2) out.push_back(&c);
    return out;
}

void write_scan_csv(const std::vector<ScanCell>& cells, std::ostream& out) {
    out << "a_l,a_r,object_kind,exists,stable,n_coexisting_stable\n";
    char buf[64];
    for (const auto& c : cells) {
        for (std::size_t ki = 0; ki < kAllObjectKinds.size(); ++ki) {
            const auto& v = c.verdicts[ki];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", c.a_l, c.a_r);
            out << buf << ',' << to_string(v.kind) << ',' << (v.exists ? 1 : 0) << ','
                << (v.stable ? 1 : 0) << ',' << c.n_stable << "\n";
        }
    }
}

void write_scan_csv(const std::vector<ScanCell>& cells, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_scan_csv(cells, out);
}

ObjectKind classify_cycle_kind(int order, const std::vector<std::uint64_t>& codes) {
    int n_right = 0;
    for (const auto c : codes) n_right += static_cast<int>(c & 1ULL);
    switch (order) {
        case 1: return n_right ? ObjectKind::fixed_R : ObjectKind::fixed_L;
        case 2: return ObjectKind::cycle_RL;
        case 3: return n_right == 1 ? ObjectKind::cycle_RL2 : ObjectKind::cycle_R2L;
        default: throw std::invalid_argument("classify_cycle_kind: order must be <= 3");
    }
}

Pwl2dParams pwl2d_from_restricted(double a11, double w11, double w21, double a22, double h1,
                                  double h2) {
    Pwl2dParams p;
    p.a_l = a11;
    p.a_r = a11 + w11;
    p.b_l = 0.0;
    p.b_r = w21;
    p.c = 0.0;
    p.d = a22;
    p.h1 = h1;
    p.h2 = h2;
    return p;
}

Pwl2dParams pwl2d_from_leaky(double a11, double w11, double w12, double w21, double w22,
                             double a22, double alpha, double beta, double h1, double h2) {
    Pwl2dParams p;
    p.a_l = a11 + alpha * w11;
    p.a_r = a11 + w11;
    p.b_l = alpha * w21;
    p.b_r = w21;
    p.c = beta * w12;
    p.d = a22 + beta * w22;
    p.h1 = h1;
    p.h2 = h2;
    return p;
}

PwlSystem pwl2d_to_system(const Pwl2dParams& p) {
    double alpha;
    if (p.b_r != 0.0) {
        alpha = p.b_l / p.b_r;
    } else if (p.b_l == 0.0) {
        alpha = 0.0;
    } else {
        throw std::invalid_argument("pwl2d_to_system: b_r = 0 with b_l != 0 is not representable");
    }
    if (alpha == 1.0)
        throw std::invalid_argument("pwl2d_to_system: b_l = b_r leaves no border on unit 1");

    PlrnnParams params;
    params.a_diag.resize(2);
    params.w.resize(2, 2);
    params.h.resize(2);
    const double w11 = (p.a_r - p.a_l) / (1.0 - alpha);
    params.a_diag << p.a_r - w11, p.d;
    params.w << w11, p.c, p.b_r, 0.0;
    params.h << p.h1, p.h2;
    return PwlSystem(std::move(params), {{alpha, 1.0}, {1.0, 1.0}});
}

}  // namespace scyfi
