#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "scyfi/plrnn.hpp"

namespace scyfi {

// thrown when an exhaustive enumeration would exceed its guard
struct BudgetGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Tolerances {
    double point_tol = 1e-9;     // closure / distinctness
    double singular_tol = 1e-12; // reciprocal condition below which a solve is degenerate
    double stab_tol = 1e-9;      // marginality band around |lambda| = 1
    double border_eps = kBorderEps;
};

enum class Stability { stable, unstable, marginal };

const char* to_string(Stability s);

// A verified k-cycle: points close under the map, codes match the points'
// signs, all points pairwise distinct (k minimal). Stored in canonical
// rotation (lexicographically smallest code sequence).
struct CycleObject {
    int order = 0;
    std::vector<VectorXd> points;
    RegionSequence region_seq;
    Eigen::VectorXcd eigenvalues;  // of the cycle Jacobian, |.| descending
    Stability stability = Stability::marginal;
    double max_abs_eig = 0.0;
};

struct DegenerateRecord {
    int order = 0;
    RegionSequence seq;
    double rcond = 0.0;
};

struct SearchStats {
    std::int64_t sequences_examined = 0;   // linear solves performed at this order
    std::int64_t sequences_until_first = -1;  // examined when the first k-cycle was stored
    std::int64_t draws = 0;                // outer-loop initializations consumed
};

struct CycleLibrary {
    std::map<int, std::vector<CycleObject>> by_order;
    std::vector<DegenerateRecord> degenerate;  // bifurcation-locus solves, kept on the side
    std::map<int, SearchStats> stats;

    int total_count() const;
    const std::vector<CycleObject>& order(int k) const;  // empty if none
    std::int64_t total_sequences_examined() const;
};

struct SearchBudget {
    std::int64_t n_out = 0;  // max initializations since the last find; <=0 selects the default
    std::int64_t n_in = 100; // max inner flip iterations
    std::uint64_t rng_seed = 0;
};

// ceil(ln(eps) / ln(1 - 2^-(M k))): initializations needed so every region
// sequence has been sampled at least once with probability 1 - eps.
std::int64_t required_initializations(int m_dim, int k, double eps);
std::int64_t required_initializations_bits(int bits, double eps);

// default n_out: required initializations at miss probability 1e-3, capped at 1e6
std::int64_t default_n_out(const PwlSystem& sys, int k);

struct CandidateResult {
    bool degenerate = false;
    double rcond = 0.0;
    bool consistent = false;
    std::vector<VectorXd> points;   // empty when degenerate
    RegionSequence observed;        // full sign codes of the solution points
};

// Solves (I - P) z = q for the composition of `seq`, forward-applies the
// per-code steps, and reports the observed sign pattern. Consistency is
// checked on units that actually carry a border.
CandidateResult solve_cycle_candidate(const PwlSystem& sys, const RegionSequence& seq,
                                      const Tolerances& tol = {});

// Builds the verified object (Jacobian eigenvalues, stability) from a
// consistent candidate; nullopt if the points are not pairwise distinct.
std::optional<CycleObject> make_cycle_object(const PwlSystem& sys,
                                             const CandidateResult& cand,
                                             const Tolerances& tol = {});

// Re-checks the stored invariants independently of the search path.
bool verify_cycle(const PwlSystem& sys, const CycleObject& c, const Tolerances& tol = {});

// Inner-loop instrumentation: one record per solve.
struct FlipTraceEntry {
    std::uint64_t draw_index = 0;
    RegionSequence attempted;
    RegionSequence observed;
    bool consistent = false;
    bool degenerate = false;
};

struct SearchOptions {
    Tolerances tol{};
    // invoked on every newly stored cycle; return true to stop the search
    std::function<bool(const CycleObject&)> stop_on_find{};
    std::vector<FlipTraceEntry>* flip_trace = nullptr;
};

// One pass of the heuristic at order k. Requires all orders < k searched
// already (their objects feed the subset filter). Deterministic in
// budget.rng_seed.
void scyfi_find_k(const PwlSystem& sys, int k, CycleLibrary& lib, const SearchBudget& budget,
                  const SearchOptions& opt = {});

CycleLibrary scyfi_find_all(const PwlSystem& sys, int k_max, const SearchBudget& budget,
                            const SearchOptions& opt = {});

// Ground truth: every non-constant region sequence up to cyclic rotation,
// k <= k_max. Guarded: (effective border bits) * k_max <= guard_bits.
CycleLibrary exhaustive_oracle(const PwlSystem& sys, int k_max, int guard_bits = 24,
                               const Tolerances& tol = {});

// Expected / median number of sequence draws (without replacement) an
// exhaustive search needs before hitting one of m existing k-cycles.
struct ExhaustiveMoments {
    double expected = 0.0;
    std::int64_t median = 0;
};
ExhaustiveMoments exhaustive_expectation(int m_dim, int k, std::int64_t m_existing);

// Benchmark constructions ----------------------------------------------------

// ||A|| + ||W|| < 1 by construction; every fixed-point candidate lands in the
// all-positive orthant, so the search needs at most two solves.
PlrnnParams generate_case1_params(int m_dim, double eps, std::uint64_t rng_seed);

// Variant with card_s units pinned positive across all candidate regions,
// confining candidates to 2^(M - card_s) regions.
PlrnnParams generate_case2_params(int m_dim, int card_s, double eps, std::uint64_t rng_seed);

struct EmbedResult {
    PlrnnParams params;
    double residual = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Plants z_star as an exact fixed point of its own region: A, W start uniform
// in (-init_scale, init_scale), then per-row gradient descent on the fixed
// point residual (A kept diagonal, W off-diagonal) until below 1e-8.
EmbedResult embed_fixed_point(const VectorXd& z_star, std::uint64_t rng_seed, double init_scale,
                              int max_iters = 1000);

// Library comparison under cyclic rotation (points and eigenvalues).
bool libraries_match(const CycleLibrary& a, const CycleLibrary& b, double point_tol,
                     double eig_tol);

}  // namespace scyfi
