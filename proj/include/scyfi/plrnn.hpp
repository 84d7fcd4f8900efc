#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace scyfi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kBorderEps = 1e-12;
inline constexpr double kDivergenceThreshold = 1e100;

// z_t = A z_{t-1} + W phi(z_{t-1}) + h, A diagonal, W off-diagonal coupling.
struct PlrnnParams {
    VectorXd a_diag;  // diagonal of A
    MatrixXd w;       // coupling matrix; zero diagonal in the standard model
    VectorXd h;       // bias

    int m() const { return static_cast<int>(a_diag.size()); }

    // throws std::invalid_argument on dimension mismatch / bad diagonal
    void validate(bool require_zero_w_diag = true) const;
};

// Per-unit activation, slope s_neg for z <= 0 and s_pos for z > 0.
// ReLU is (0,1); leaky ReLU (alpha,1); a plain linear unit (beta,beta).
struct Activation {
    double s_neg = 0.0;
    double s_pos = 1.0;

    bool has_border() const { return s_neg != s_pos; }
};

// A PLRNN together with its unit activations. Default: all-ReLU, which is the
// standard model; other activations realize the one-border 2-D map family.
struct PwlSystem {
    PlrnnParams params;
    std::vector<Activation> units;  // empty = all ReLU

    PwlSystem() = default;
    PwlSystem(PlrnnParams p) : params(std::move(p)) {}  // NOLINT: implicit by design
    PwlSystem(PlrnnParams p, std::vector<Activation> a) : params(std::move(p)), units(std::move(a)) {}

    int m() const { return params.m(); }
    Activation unit(int i) const { return units.empty() ? Activation{} : units[i]; }

    // bit m set iff flipping d_m can change the step matrix
    std::uint64_t effective_border_mask() const;
};

// Binary region indicator for one state; bit m = 1 iff z_m > 0 (strict).
// Components within border_eps of the switching manifold are flagged.
struct RegionCode {
    std::uint64_t bits = 0;
    std::uint64_t on_border = 0;
    int m = 0;
};

struct RegionSequence {
    std::vector<std::uint64_t> codes;
    int m = 0;

    int order() const { return static_cast<int>(codes.size()); }
    bool is_constant() const;
    // throws std::invalid_argument if empty or (k >= 2 and constant)
    void validate() const;
    // lexicographically smallest cyclic rotation (dedup key)
    RegionSequence canonical() const;
    int canonical_shift() const;
};

bool same_up_to_rotation(const RegionSequence& a, const RegionSequence& b);

// k-step affine composition: applying the per-code steps in order maps
// z to p * z + q. Zero steps = identity / zero.
struct AffineComposition {
    MatrixXd p;
    VectorXd q;
};

struct Trajectory {
    std::vector<VectorXd> states;  // states[0] = z0, length t+1 if finite
    bool diverged = false;
    int last_finite = 0;  // index of last state below the divergence threshold
};

RegionCode region_of(const VectorXd& z, double border_eps = kBorderEps);

// A + W * diag(slopes(code))
MatrixXd step_matrix(const PwlSystem& sys, std::uint64_t code_bits);

// single application of the map
VectorXd apply_map(const PwlSystem& sys, const VectorXd& z);

Trajectory iterate(const PwlSystem& sys, const VectorXd& z0, int t,
                   double divergence_threshold = kDivergenceThreshold);

AffineComposition compose(const PwlSystem& sys, const RegionSequence& seq);

// largest singular value
double spectral_norm(const MatrixXd& a);

// ---- serialization -------------------------------------------------------

// {"M": int, "A": [..], "W": [[..]], "h": [..]} (+ optional "activations").
// Rejects nonzero W diagonal for M >= 2; M = 1 admits w11 (the 1-D
// skew-map family has its right-slope offset there).
PlrnnParams parse_params_json(const std::string& text);
PwlSystem parse_system_json(const std::string& text);
std::string params_to_json(const PlrnnParams& p);
std::string system_to_json(const PwlSystem& s);
PwlSystem load_system_file(const std::string& path);
void save_system_file(const PwlSystem& s, const std::string& path);

}  // namespace scyfi
