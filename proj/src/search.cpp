#include "scyfi/search.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "scyfi/rng.hpp"

namespace scyfi {

const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::marginal: return "marginal";
    }
    return "?";
}

int CycleLibrary::total_count() const {
    int n = 0;
    for (const auto& [k, v] : by_order) n += static_cast<int>(v.size());
    return n;
}

const std::vector<CycleObject>& CycleLibrary::order(int k) const {
    static const std::vector<CycleObject> empty;
    auto it = by_order.find(k);
    return it == by_order.end() ? empty : it->second;
}

std::int64_t CycleLibrary::total_sequences_examined() const {
    std::int64_t n = 0;
    for (const auto& [k, s] : stats) n += s.sequences_examined;
    return n;
}

std::int64_t required_initializations_bits(int bits, double eps) {
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("eps must be in (0, 1]");
    if (eps == 1.0) return 0;
    const double p = std::exp2(-static_cast<double>(bits));
    if (p == 0.0) return std::numeric_limits<std::int64_t>::max();
    const double v = std::ceil(std::log(eps) / std::log1p(-p));
    if (!(v < 9e18)) return std::numeric_limits<std::int64_t>::max();
    return static_cast<std::int64_t>(v);
}

std::int64_t required_initializations(int m_dim, int k, double eps) {
    return required_initializations_bits(m_dim * k, eps);
}

std::int64_t default_n_out(const PwlSystem& sys, int k) {
    const int bits = std::popcount(sys.effective_border_mask()) * k;
    const std::int64_t cap = 1000000;
    const std::int64_t r = required_initializations_bits(bits, 1e-3);
    return std::max<std::int64_t>(1, std::min(cap, r));
}

namespace {

std::uint64_t scatter_bits(std::uint64_t value, std::uint64_t mask) {
    std::uint64_t out = 0;
    int vi = 0;
    for (int p = 0; p < 64; ++p) {
        if (!((mask >> p) & 1ULL)) continue;
        if ((value >> vi) & 1ULL) out |= (1ULL << p);
        ++vi;
    }
    return out;
}

std::vector<std::uint64_t> masked_canonical_key(const RegionSequence& seq, std::uint64_t mask) {
    RegionSequence masked = seq;
    for (auto& c : masked.codes) c &= mask;
    return masked.canonical().codes;
}

// pairwise point distance; cycles are tiny so the quadratic scan is fine
double min_pairwise_distance(const std::vector<VectorXd>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            best = std::min(best, (pts[i] - pts[j]).norm());
    return best;
}

// true iff every point of `small` has a point of `big` within tol
bool point_set_subset(const std::vector<VectorXd>& small, const std::vector<VectorXd>& big,
                      double tol) {
    for (const auto& s : small) {
        bool hit = false;
        for (const auto& b : big)
            if ((s - b).norm() <= tol) { hit = true; break; }
        if (!hit) return false;
    }
    return true;
}

// Algorithm 1's acceptance filter: reject duplicates (same sequence up to
// rotation, or same point set) and supersets of stored lower-order cycles.
bool store_cycle(CycleLibrary& lib, const CycleObject& obj, std::uint64_t eff_mask,
                 const Tolerances& tol) {
    const auto key = masked_canonical_key(obj.region_seq, eff_mask);
    for (const auto& [k, cycles] : lib.by_order) {
        if (k > obj.order) break;
        for (const auto& stored : cycles) {
            if (k == obj.order && masked_canonical_key(stored.region_seq, eff_mask) == key)
                return false;
            if (point_set_subset(stored.points, obj.points, tol.point_tol)) return false;
        }
    }
    lib.by_order[obj.order].push_back(obj);
    return true;
}

Eigen::VectorXcd sorted_eigenvalues(const MatrixXd& m) {
    Eigen::EigenSolver<MatrixXd> es(m, /*computeEigenvectors=*/false);
    Eigen::VectorXcd ev = es.eigenvalues();
    std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    for (int i = 0; i < ev.size(); ++i) ev[i] = v[i];
    return ev;
}

}  // namespace

CandidateResult solve_cycle_candidate(const PwlSystem& sys, const RegionSequence& seq,
                                      const Tolerances& tol) {
    const int mm = sys.m();
    const int k = seq.order();
    CandidateResult res;

    std::vector<MatrixXd> steps(k);
    MatrixXd p = MatrixXd::Identity(mm, mm);
    VectorXd q = VectorXd::Zero(mm);
    for (int l = 0; l < k; ++l) {
        steps[l] = step_matrix(sys, seq.codes[l]);
        p = steps[l] * p;
        q = steps[l] * q + sys.params.h;
    }

    const MatrixXd lhs = MatrixXd::Identity(mm, mm) - p;
    Eigen::JacobiSVD<MatrixXd> svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(mm - 1);
    res.rcond = smax > 0.0 ? smin / smax : 0.0;
    if (res.rcond < tol.singular_tol) {
        res.degenerate = true;
        return res;
    }

    res.points.resize(k);
    res.points[0] = svd.solve(q);
    for (int l = 0; l + 1 < k; ++l) res.points[l + 1] = steps[l] * res.points[l] + sys.params.h;

    res.observed.m = mm;
    res.observed.codes.resize(k);
    for (int l = 0; l < k; ++l)
        res.observed.codes[l] = region_of(res.points[l], tol.border_eps).bits;

    const std::uint64_t eff = sys.effective_border_mask();
    res.consistent = true;
    for (int l = 0; l < k; ++l) {
        if ((res.observed.codes[l] & eff) != (seq.codes[l] & eff)) {
            res.consistent = false;
            break;
        }
    }
    return res;
}

std::optional<CycleObject> make_cycle_object(const PwlSystem& sys, const CandidateResult& cand,
                                             const Tolerances& tol) {
    const int k = static_cast<int>(cand.points.size());
    if (k > 1 && min_pairwise_distance(cand.points) <= tol.point_tol) return std::nullopt;

    CycleObject obj;
    obj.order = k;

    // rotate into canonical form so identical cycles found from different
    // rotations store identically
    RegionSequence masked = cand.observed;
    const std::uint64_t eff = sys.effective_border_mask();
    for (auto& c : masked.codes) c &= eff;
    const int shift = masked.canonical_shift();

    obj.points.resize(k);
    obj.region_seq.m = sys.m();
    obj.region_seq.codes.resize(k);
    for (int l = 0; l < k; ++l) {
        obj.points[l] = cand.points[(shift + l) % k];
        obj.region_seq.codes[l] = cand.observed.codes[(shift + l) % k];
    }

    MatrixXd jac = MatrixXd::Identity(sys.m(), sys.m());
    for (int l = 0; l < k; ++l) jac = step_matrix(sys, obj.region_seq.codes[l]) * jac;
    obj.eigenvalues = sorted_eigenvalues(jac);
    obj.max_abs_eig = std::abs(obj.eigenvalues(0));
    if (obj.max_abs_eig < 1.0 - tol.stab_tol)
        obj.stability = Stability::stable;
    else if (obj.max_abs_eig > 1.0 + tol.stab_tol)
        obj.stability = Stability::unstable;
    else
        obj.stability = Stability::marginal;
    return obj;
}

bool verify_cycle(const PwlSystem& sys, const CycleObject& c, const Tolerances& tol) {
    const int k = c.order;
    if (static_cast<int>(c.points.size()) != k || c.region_seq.order() != k) return false;
    const double scale = [&] {
        double s = 1.0;
        for (const auto& p : c.points) s = std::max(s, p.cwiseAbs().maxCoeff());
        return s;
    }();
    for (int l = 0; l < k; ++l) {
        const VectorXd next = apply_map(sys, c.points[l]);
        if ((next - c.points[(l + 1) % k]).norm() > tol.point_tol * scale) return false;
        if (region_of(c.points[l], tol.border_eps).bits != c.region_seq.codes[l]) return false;
    }
    if (k > 1 && min_pairwise_distance(c.points) <= tol.point_tol) return false;
    return true;
}

void scyfi_find_k(const PwlSystem& sys, int k, CycleLibrary& lib, const SearchBudget& budget,
                  const SearchOptions& opt) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    auto& stats = lib.stats[k];
    const std::uint64_t eff = sys.effective_border_mask();
    const int b = std::popcount(eff);

    if (b == 0) {
        // no borders: the map is affine, a single candidate settles k = 1 and
        // no k >= 2 cycle can exist
        if (k != 1) return;
        RegionSequence seq{{0}, sys.m()};
        ++stats.sequences_examined;
        ++stats.draws;
        const auto res = solve_cycle_candidate(sys, seq, opt.tol);
        if (res.degenerate) {
            lib.degenerate.push_back({k, seq, res.rcond});
            return;
        }
        if (auto obj = make_cycle_object(sys, res, opt.tol)) {
            if (store_cycle(lib, *obj, eff, opt.tol) && stats.sequences_until_first < 0)
                stats.sequences_until_first = stats.sequences_examined;
        }
        return;
    }

    const std::int64_t n_out = budget.n_out > 0 ? budget.n_out : default_n_out(sys, k);
    const std::int64_t n_in = std::max<std::int64_t>(1, budget.n_in);
    const std::uint64_t n_codes = 1ULL << b;

    std::int64_t draws_since_find = 0;
    for (std::uint64_t draw_idx = 0; draws_since_find < n_out; ++draw_idx) {
        Rng rng = Rng::from(budget.rng_seed, static_cast<std::uint64_t>(k), draw_idx);
        RegionSequence seq;
        seq.m = sys.m();
        seq.codes.resize(k);
        do {
            for (int l = 0; l < k; ++l) seq.codes[l] = scatter_bits(rng.next_below(n_codes), eff);
        } while (k >= 2 && seq.is_constant());
        ++stats.draws;

        bool found = false;
        std::set<std::vector<std::uint64_t>> visited;
        for (std::int64_t c = 0; c < n_in; ++c) {
            if (!visited.insert(masked_canonical_key(seq, eff)).second) break;  // flip limit cycle
            ++stats.sequences_examined;
            const auto res = solve_cycle_candidate(sys, seq, opt.tol);
            if (opt.flip_trace)
                opt.flip_trace->push_back(
                    {draw_idx, seq, res.observed, res.consistent, res.degenerate});
            if (res.degenerate) {
                lib.degenerate.push_back({k, seq, res.rcond});
                break;  // re-draw; the locus is recorded
            }
            if (res.consistent) {
                if (auto obj = make_cycle_object(sys, res, opt.tol)) {
                    if (store_cycle(lib, *obj, eff, opt.tol)) {
                        found = true;
                        if (stats.sequences_until_first < 0)
                            stats.sequences_until_first = stats.sequences_examined;
                        if (opt.stop_on_find && opt.stop_on_find(*obj)) return;
                    }
                }
                break;  // flipping a consistent sequence would only revisit it
            }
            seq = res.observed;  // re-initialize at the virtual cycle's sign pattern
        }
        draws_since_find = found ? 1 : draws_since_find + 1;
    }
}

CycleLibrary scyfi_find_all(const PwlSystem& sys, int k_max, const SearchBudget& budget,
                            const SearchOptions& opt) {
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    CycleLibrary lib;
    for (int k = 1; k <= k_max; ++k) scyfi_find_k(sys, k, lib, budget, opt);
    return lib;
}

CycleLibrary exhaustive_oracle(const PwlSystem& sys, int k_max, int guard_bits,
                               const Tolerances& tol) {
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    const std::uint64_t eff = sys.effective_border_mask();
    const int b = std::popcount(eff);
    if (b * k_max > guard_bits)
        throw BudgetGuardError("exhaustive search guard exceeded: " + std::to_string(b) + " border bits * k_max " +
                               std::to_string(k_max) + " > " + std::to_string(guard_bits));

    CycleLibrary lib;
    for (int k = 1; k <= k_max; ++k) {
        auto& stats = lib.stats[k];
        const std::uint64_t total = 1ULL << (b * k);
        for (std::uint64_t idx = 0; idx < total; ++idx) {
            RegionSequence seq;
            seq.m = sys.m();
            seq.codes.resize(k);
            for (int l = 0; l < k; ++l)
                seq.codes[l] = scatter_bits((idx >> (l * b)) & ((1ULL << b) - 1), eff);
            if (k >= 2 && seq.is_constant()) continue;
            if (seq.canonical().codes != seq.codes) continue;  // one representative per rotation
            ++stats.sequences_examined;
            const auto res = solve_cycle_candidate(sys, seq, tol);
            if (res.degenerate) {
                lib.degenerate.push_back({k, seq, res.rcond});
                continue;
            }
            if (!res.consistent) continue;
            if (auto obj = make_cycle_object(sys, res, tol)) {
                if (store_cycle(lib, *obj, eff, tol) && stats.sequences_until_first < 0)
                    stats.sequences_until_first = stats.sequences_examined;
            }
        }
    }
    return lib;
}

ExhaustiveMoments exhaustive_expectation(int m_dim, int k, std::int64_t m_existing) {
    const int bits = m_dim * k;
    if (bits < 1 || bits > 62)
        throw std::invalid_argument("exhaustive_expectation: M*k must be in [1, 62]");
    const std::int64_t n_total = 1LL << bits;
    if (m_existing < 1 || m_existing > n_total)
        throw std::invalid_argument("exhaustive_expectation: m out of range [1, 2^(Mk)]");

    ExhaustiveMoments out;
    out.expected = (static_cast<double>(n_total) + 1.0) / (static_cast<double>(m_existing) + 1.0);

    // log C(N-n, m) - log C(N, m) = sum_i log((N-n-i)/(N-i)), exact enough for
    // any N representable here; condition is monotone in n
    const auto log_ratio = [&](std::int64_t n) -> double {
        if (n_total - n < m_existing) return -std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (std::int64_t i = 0; i < m_existing; ++i)
            s += std::log1p(-static_cast<double>(n) / static_cast<double>(n_total - i));
        return s;
    };
    const double target = std::log(0.5);
    std::int64_t lo = 1, hi = n_total;
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (log_ratio(mid) <= target)
            hi = mid;
        else
            lo = mid + 1;
    }
    out.median = lo;
    return out;
}

PlrnnParams generate_case1_params(int m_dim, double eps, std::uint64_t rng_seed) {
    if (m_dim < 1) throw std::invalid_argument("M must be >= 1");
    if (eps <= 0.0) throw std::invalid_argument("eps must be > 0");
    Rng rng = Rng::from(rng_seed, 0xca5e1);
    MatrixXd r(m_dim, m_dim);
    for (int i = 0; i < m_dim; ++i)
        for (int j = 0; j < m_dim; ++j) r(i, j) = rng.next_double();
    const double denom = 2.0 + spectral_norm(r) + eps;

    PlrnnParams p;
    p.a_diag = r.diagonal() / denom;
    p.w = r / denom;
    p.w.diagonal().setZero();
    p.h.resize(m_dim);
    for (int i = 0; i < m_dim; ++i) p.h[i] = 1.0 - rng.next_double();  // (0, 1]
    return p;
}

PlrnnParams generate_case2_params(int m_dim, int card_s, double eps, std::uint64_t rng_seed) {
    if (m_dim < 2) throw std::invalid_argument("M must be >= 2");
    if (card_s < 1 || card_s > m_dim - 1)
        throw std::invalid_argument("card_s must be in [1, M-1]");
    if (eps <= 0.0) throw std::invalid_argument("eps must be > 0");
    Rng rng = Rng::from(rng_seed, 0xca5e2);

    PlrnnParams p;
    p.h.resize(m_dim);
    for (int i = 0; i < m_dim; ++i) p.h[i] = 1.0 - rng.next_double();  // (0, 1]
    const double beta_min = p.h.minCoeff();
    const double beta_max = p.h.maxCoeff();

    MatrixXd r1(m_dim, m_dim);
    for (int i = 0; i < m_dim; ++i)
        for (int j = 0; j < m_dim; ++j) r1(i, j) = -rng.next_double();  // (-1, 0]
    const double r1_norm = spectral_norm(r1);
    p.w = (beta_min / (m_dim + r1_norm + eps)) * r1;
    p.w.diagonal().setZero();
    const double alpha_max = p.w.cwiseAbs().maxCoeff();
    const double r_star = (m_dim - 1) * alpha_max * beta_max / beta_min;

    std::vector<int> perm(m_dim);
    for (int i = 0; i < m_dim; ++i) perm[i] = i;
    for (int i = m_dim - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.next_below(i + 1)]);
    std::vector<bool> in_s(m_dim, false);
    for (int i = 0; i < card_s; ++i) in_s[perm[i]] = true;

    p.a_diag.resize(m_dim);
    for (int i = 0; i < m_dim; ++i) {
        const double r2 = in_s[i] ? rng.uniform(r_star - 1.0, 0.0) : rng.uniform(-1.0, 1.0);
        p.a_diag[i] = r2 / (2.0 + r1_norm + eps);
    }
    return p;
}

EmbedResult embed_fixed_point(const VectorXd& z_star, std::uint64_t rng_seed, double init_scale,
                              int max_iters) {
    const int mm = static_cast<int>(z_star.size());
    Rng rng = Rng::from(rng_seed, 0xe3bed);

    EmbedResult out;
    PlrnnParams& p = out.params;
    MatrixXd r(mm, mm);
    for (int i = 0; i < mm; ++i)
        for (int j = 0; j < mm; ++j) r(i, j) = rng.uniform(-init_scale, init_scale);
    p.a_diag = r.diagonal();
    p.w = r;
    p.w.diagonal().setZero();
    p.h = VectorXd::Zero(mm);

    const VectorXd phi = z_star.cwiseMax(0.0);
    for (int it = 0; it < max_iters; ++it) {
        const VectorXd pred = p.a_diag.cwiseProduct(z_star) + p.w * phi + p.h;
        const VectorXd res = z_star - pred;
        out.residual = res.cwiseAbs().maxCoeff();
        out.iterations = it;
        if (out.residual < 1e-8) {
            out.converged = true;
            return out;
        }
        for (int n = 0; n < mm; ++n) {
            // steepest descent with exact line search per row (the rows are
            // independent least-squares problems)
            double sq = z_star[n] * z_star[n] + 1.0;  // a_nn and h_n features
            for (int m = 0; m < mm; ++m)
                if (m != n) sq += phi[m] * phi[m];
            const double step = res[n] / sq;
            p.a_diag[n] += step * z_star[n];
            p.h[n] += step;
            for (int m = 0; m < mm; ++m)
                if (m != n) p.w(n, m) += step * phi[m];
        }
    }
    const VectorXd pred = p.a_diag.cwiseProduct(z_star) + p.w * phi + p.h;
    out.residual = (z_star - pred).cwiseAbs().maxCoeff();
    out.converged = out.residual < 1e-8;
    return out;
}

namespace {

bool points_match_under_rotation(const std::vector<VectorXd>& a, const std::vector<VectorXd>& b,
                                 double tol) {
    const int k = static_cast<int>(a.size());
    if (static_cast<int>(b.size()) != k) return false;
    for (int s = 0; s < k; ++s) {
        bool ok = true;
        for (int l = 0; l < k && ok; ++l)
            if ((a[l] - b[(l + s) % k]).norm() > tol) ok = false;
        if (ok) return true;
    }
    return false;
}

}  // namespace

bool libraries_match(const CycleLibrary& a, const CycleLibrary& b, double point_tol,
                     double eig_tol) {
    std::set<int> orders;
    for (const auto& [k, v] : a.by_order)
        if (!v.empty()) orders.insert(k);
    for (const auto& [k, v] : b.by_order)
        if (!v.empty()) orders.insert(k);

    for (const int k : orders) {
        const auto& va = a.order(k);
        const auto& vb = b.order(k);
        if (va.size() != vb.size()) return false;
        std::vector<bool> used(vb.size(), false);
        for (const auto& ca : va) {
            bool matched = false;
            for (std::size_t j = 0; j < vb.size(); ++j) {
                if (used[j]) continue;
                if (!same_up_to_rotation(ca.region_seq, vb[j].region_seq)) continue;
                if (!points_match_under_rotation(ca.points, vb[j].points, point_tol)) continue;
                bool eig_ok = ca.eigenvalues.size() == vb[j].eigenvalues.size();
                for (int e = 0; eig_ok && e < ca.eigenvalues.size(); ++e)
                    if (std::abs(ca.eigenvalues[e] - vb[j].eigenvalues[e]) > eig_tol) eig_ok = false;
                if (!eig_ok) continue;
                used[j] = true;
                matched = true;
                break;
            }
            if (!matched) return false;
        }
    }
    return true;
}

}  // namespace scyfi
