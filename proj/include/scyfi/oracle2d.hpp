#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "scyfi/plrnn.hpp"

namespace scyfi {

// One-border piecewise-linear map of the plane: matrix [[a_l,c],[b_l,d]] for
// z1 <= 0, [[a_r,c],[b_r,d]] for z1 >= 0, shared offset (h1,h2); the border is
// the z2-axis.
struct Pwl2dParams {
    double a_l = 0, a_r = 0, b_l = 0, b_r = 0, c = 0, d = 0, h1 = 0, h2 = 0;

    Eigen::Matrix2d left_matrix() const;
    Eigen::Matrix2d right_matrix() const;
};

Eigen::Vector2d apply_pwl2d(const Pwl2dParams& p, const Eigen::Vector2d& z);

enum class ObjectKind { fixed_L, fixed_R, cycle_RL, cycle_RL2, cycle_R2L };
inline constexpr std::array<ObjectKind, 5> kAllObjectKinds = {
    ObjectKind::fixed_L, ObjectKind::fixed_R, ObjectKind::cycle_RL, ObjectKind::cycle_RL2,
    ObjectKind::cycle_R2L};

const char* to_string(ObjectKind k);
int object_order(ObjectKind k);

struct RegionVerdict {
    ObjectKind kind = ObjectKind::fixed_L;
    bool exists = false;
    bool stable = false;
    bool on_curve = false;    // a periodic point sits exactly on the border (BCB locus)
    bool degenerate = false;  // singular solve (DTB locus / continuum)
    std::vector<Eigen::Vector2d> points;
    std::array<std::complex<double>, 2> eigenvalues{};  // of the orbit Jacobian
};

enum class Side { L, R };

RegionVerdict fixed_point(const Pwl2dParams& p, Side side);
RegionVerdict cycle2(const Pwl2dParams& p);
RegionVerdict cycle3(const Pwl2dParams& p, ObjectKind kind);  // cycle_RL2 or cycle_R2L
RegionVerdict evaluate_object(const Pwl2dParams& p, ObjectKind kind);

// Scalar curve functions whose zero sets are the bifurcation manifolds:
// p_at_1 (DTB), p_at_minus1 (DFB), det_minus_1 with complex flag (CB),
// border_fn = the colliding point's z1 numerator (BCB).
struct CurveValues {
    double p_at_1 = 0;
    double p_at_minus1 = 0;
    double det_minus_1 = 0;
    bool complex_pair = false;
    double border_fn = 0;
};

CurveValues curve_values(const Pwl2dParams& p, ObjectKind kind);

// ---- grid scan -------------------------------------------------------------

struct ScanSpec {
    Pwl2dParams base;  // c, d, b_l, b_r, h1, h2 fixed
    double al_lo = -3, al_hi = 1;
    int n_al = 50;
    double ar_lo = -3, ar_hi = 1;
    int n_ar = 50;
};

struct ScanCell {
    int i = 0, j = 0;  // a_l index, a_r index
    double a_l = 0, a_r = 0;
    std::array<RegionVerdict, 5> verdicts;
    int n_stable = 0;
};

std::vector<ScanCell> multistability_scan(const ScanSpec& spec, int threads = 0);

// cells where two or more stable objects coexist (MAB candidate regions)
std::vector<const ScanCell*> coexistence_cells(const std::vector<ScanCell>& cells);

// columns: a_l, a_r, object_kind, exists, stable, n_coexisting_stable
void write_scan_csv(const std::vector<ScanCell>& cells, std::ostream& out);
void write_scan_csv(const std::vector<ScanCell>& cells, const std::string& path);

// ---- comparison with the region-sequence search ------------------------------

struct CycleObject;  // see search.hpp

// maps a found cycle of the one-border 2-D family to the object taxonomy
// (k = 1: side of the border; k = 2: RL; k = 3: RL^2 vs R^2 L)
ObjectKind classify_cycle_kind(int order, const std::vector<std::uint64_t>& codes);

// ---- PLRNN mappings --------------------------------------------------------

// restricted 2-unit PLRNN (w12 = w22 = 0): a_l = a11, a_r = a11 + w11,
// b_r = w21, d = a22, b_l = c = 0
Pwl2dParams pwl2d_from_restricted(double a11, double w11, double w21, double a22, double h1,
                                  double h2);

// leaky/linear-unit variant: a_l = a11 + alpha w11, a_r = a11 + w11,
// b_l = alpha w21, b_r = w21, c = beta w12, d = a22 + beta w22
Pwl2dParams pwl2d_from_leaky(double a11, double w11, double w12, double w21, double w22,
                             double a22, double alpha, double beta, double h1, double h2);

// Reverse embedding used to run the region-sequence search on the 2-D map:
// unit 1 leaky with alpha = b_l / b_r, unit 2 linear. Requires b_r != 0 or
// b_l == b_r == 0.
PwlSystem pwl2d_to_system(const Pwl2dParams& p);

}  // namespace scyfi
