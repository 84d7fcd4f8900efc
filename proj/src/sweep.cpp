#include "scyfi/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "scyfi/parallel.hpp"
#include "scyfi/rng.hpp"

namespace scyfi {

double ParamAddress::get(const PlrnnParams& p) const {
    switch (kind) {
        case Kind::A: return p.a_diag[i];
        case Kind::W: return p.w(i, j);
        case Kind::H: return p.h[i];
    }
    return 0;
}

void ParamAddress::set(PlrnnParams& p, double v) const {
    switch (kind) {
        case Kind::A: p.a_diag[i] = v; break;
        case Kind::W: p.w(i, j) = v; break;
        case Kind::H: p.h[i] = v; break;
    }
}

std::string ParamAddress::str() const {
    switch (kind) {
        case Kind::A: return "A[" + std::to_string(i) + "]";
        case Kind::W: return "W[" + std::to_string(i) + "," + std::to_string(j) + "]";
        case Kind::H: return "h[" + std::to_string(i) + "]";
    }
    return "?";
}

ParamAddress ParamAddress::parse(const std::string& s) {
    ParamAddress a;
    char name = 0;
    int i = -1, j = -1;
    if (std::sscanf(s.c_str(), "%c[%d,%d]", &name, &i, &j) == 3) {
        if (name != 'W') throw std::invalid_argument("param address: only W takes two indices: " + s);
        a.kind = Kind::W;
        a.i = i;
        a.j = j;
        return a;
    }
    if (std::sscanf(s.c_str(), "%c[%d]", &name, &i) == 2) {
        if (name == 'A')
            a.kind = Kind::A;
        else if (name == 'h' || name == 'H')
            a.kind = Kind::H;
        else if (name == 'W')
            throw std::invalid_argument("param address: W needs two indices: " + s);
        else
            throw std::invalid_argument("param address: unknown target \"" + s + "\"");
        a.i = i;
        return a;
    }
    throw std::invalid_argument("param address: cannot parse \"" + s + "\" (use A[i], W[i,j], h[i])");
}

void SweepSpec::validate() const {
    if (axes.empty() || axes.size() > 2)
        throw std::invalid_argument("sweep: need 1 or 2 axes");
    for (const auto& ax : axes)
        if (ax.n_steps < 2) throw std::invalid_argument("sweep: n_steps must be >= 2");
    if (axes.size() == 2 && axes[0].target == axes[1].target)
        throw std::invalid_argument("sweep: axis targets must be distinct");
    base.params.validate(false);
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::DTB: return "DTB";
        case EventKind::BCB: return "BCB";
        case EventKind::DFB: return "DFB";
        case EventKind::CB: return "CB";
        case EventKind::appear: return "appear";
        case EventKind::disappear: return "disappear";
        case EventKind::stability_change: return "stability_change";
    }
    return "?";
}

namespace {

double max_point_norm(const CycleObject& c) {
    double v = 0;
    for (const auto& p : c.points) v = std::max(v, p.norm());
    return v;
}

double min_abs_component(const CycleObject& c) {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& p : c.points) v = std::min(v, p.cwiseAbs().minCoeff());
    return v;
}

double point_scale(const CycleObject& c) {
    double v = 1.0;
    for (const auto& p : c.points) v = std::max(v, p.cwiseAbs().maxCoeff());
    return v;
}

std::complex<double> eig_closest_to_unit_circle(const CycleObject& c) {
    std::complex<double> best = c.eigenvalues(0);
    for (int i = 0; i < c.eigenvalues.size(); ++i)
        if (std::abs(std::abs(c.eigenvalues(i)) - 1.0) < std::abs(std::abs(best) - 1.0))
            best = c.eigenvalues(i);
    return best;
}

std::complex<double> eig_closest_to_plus_one(const CycleObject& c) {
    std::complex<double> best = c.eigenvalues(0);
    for (int i = 0; i < c.eigenvalues.size(); ++i)
        if (std::abs(c.eigenvalues(i) - 1.0) < std::abs(best - 1.0)) best = c.eigenvalues(i);
    return best;
}

}  // namespace

EventKind classify_event(const CycleObject* before, const CycleObject* after,
                         const ClassifyThresholds& th) {
    if (!before && !after) throw std::invalid_argument("classify_event: both sides absent");
    if (before && after) {
        // matched object with a stability flip
        const std::complex<double> ea = eig_closest_to_unit_circle(*before);
        const std::complex<double> eb = eig_closest_to_unit_circle(*after);
        const std::complex<double> e =
            std::abs(std::abs(ea) - 1.0) <= std::abs(std::abs(eb) - 1.0) ? ea : eb;
        if (std::abs(e - std::complex<double>(-1.0, 0.0)) < th.eig_tol) return EventKind::DFB;
        if (e.imag() != 0.0 && std::abs(std::abs(e) - 1.0) < th.eig_tol) return EventKind::CB;
        return EventKind::stability_change;
    }
    const CycleObject& s = before ? *before : *after;
    if (max_point_norm(s) > th.dtb_norm_threshold &&
        std::abs(eig_closest_to_plus_one(s) - 1.0) < th.eig_tol)
        return EventKind::DTB;
    if (min_abs_component(s) < th.bcb_tol * point_scale(s)) return EventKind::BCB;
    return before ? EventKind::disappear : EventKind::appear;
}

namespace {

struct DiffContext {
    std::function<PwlSystem(double)> sys_at;  // t in [0,1] from cell a to cell b
    std::uint64_t eff_mask = ~0ULL;
    ClassifyThresholds th;
    int refine_steps = 20;
    Tolerances tol{};
};

struct RawEvent {
    double t = 0.5;
    int order = 0;
    RegionSequence seq;
    EventKind kind = EventKind::appear;
    EventEvidence evidence;
};

std::vector<std::uint64_t> object_key(const CycleObject& c, std::uint64_t mask) {
    RegionSequence masked = c.region_seq;
    for (auto& code : masked.codes) code &= mask;
    return masked.canonical().codes;
}

std::optional<CycleObject> probe(const PwlSystem& sys, const RegionSequence& seq,
                                 const Tolerances& tol) {
    const auto res = solve_cycle_candidate(sys, seq, tol);
    if (res.degenerate || !res.consistent) return std::nullopt;
    return make_cycle_object(sys, res, tol);
}

double cycle_distance(const CycleObject& a, const CycleObject& b) {
    const int k = a.order;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < k; ++s) {
        double worst = 0;
        for (int l = 0; l < k; ++l)
            worst = std::max(worst, (a.points[l] - b.points[(l + s) % k]).norm());
        best = std::min(best, worst);
    }
    return best;
}

EventEvidence evidence_from(const CycleObject& c, const std::complex<double>& eig) {
    EventEvidence ev;
    ev.max_point_norm = max_point_norm(c);
    ev.min_abs_component = min_abs_component(c);
    ev.eig_near = eig;
    return ev;
}

// bisect the interval on presence of the sequence's true cycle; returns the
// locus fraction and the surviving-side object next to it
RawEvent refine_existence(const DiffContext& ctx, const CycleObject& seed, double t_present,
                          double t_absent) {
    RawEvent out;
    out.order = seed.order;
    out.seq = seed.region_seq;
    CycleObject near = seed;
    double lo = t_present, hi = t_absent;
    for (int i = 0; i < ctx.refine_steps; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (auto obj = probe(ctx.sys_at(mid), seed.region_seq, ctx.tol)) {
            near = *obj;
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.t = 0.5 * (lo + hi);
    const CycleObject* before = t_present < t_absent ? &near : nullptr;
    const CycleObject* after = t_present < t_absent ? nullptr : &near;
    out.kind = classify_event(before, after, ctx.th);
    out.evidence = evidence_from(near, out.kind == EventKind::DTB
                                           ? eig_closest_to_plus_one(near)
                                           : eig_closest_to_unit_circle(near));
    return out;
}

// bisect on the stability flag of a matched object
RawEvent refine_stability(const DiffContext& ctx, const CycleObject& obj_a,
                          const CycleObject& obj_b) {
    RawEvent out;
    out.order = obj_a.order;
    out.seq = obj_a.region_seq;
    CycleObject side_a = obj_a, side_b = obj_b;
    const bool stable_a = obj_a.stability == Stability::stable;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < ctx.refine_steps; ++i) {
        const double mid = 0.5 * (lo + hi);
        const auto probed = probe(ctx.sys_at(mid), obj_a.region_seq, ctx.tol);
        if (!probed) break;  // sequence lost mid-interval; classify on what we have
        if ((probed->stability == Stability::stable) == stable_a) {
            side_a = *probed;
            lo = mid;
        } else {
            side_b = *probed;
            hi = mid;
        }
    }
    out.t = 0.5 * (lo + hi);
    out.kind = classify_event(&side_a, &side_b, ctx.th);
    const auto ea = eig_closest_to_unit_circle(side_a);
    const auto eb = eig_closest_to_unit_circle(side_b);
    const auto e = std::abs(std::abs(ea) - 1.0) <= std::abs(std::abs(eb) - 1.0) ? ea : eb;
    out.evidence = evidence_from(side_a, e);
    return out;
}

std::vector<RawEvent> diff_libraries(const CycleLibrary& lib_a, const CycleLibrary& lib_b,
                                     const DiffContext& ctx) {
    std::vector<RawEvent> events;
    std::map<int, bool> orders;
    for (const auto& [k, v] : lib_a.by_order)
        if (!v.empty()) orders[k] = true;
    for (const auto& [k, v] : lib_b.by_order)
        if (!v.empty()) orders[k] = true;

    for (const auto& [k, _] : orders) {
        std::map<std::vector<std::uint64_t>, const CycleObject*> map_a, map_b;
        for (const auto& c : lib_a.order(k)) map_a[object_key(c, ctx.eff_mask)] = &c;
        for (const auto& c : lib_b.order(k)) map_b[object_key(c, ctx.eff_mask)] = &c;

        std::vector<std::pair<const CycleObject*, const CycleObject*>> matched;
        std::vector<const CycleObject*> only_a, only_b;
        for (const auto& [key, ca] : map_a) {
            auto it = map_b.find(key);
            if (it != map_b.end())
                matched.emplace_back(ca, it->second);
            else
                only_a.push_back(ca);
        }
        for (const auto& [key, cb] : map_b)
            if (!map_a.count(key)) only_b.push_back(cb);

        // sequences can change exactly at a BCB while the object persists;
        // pair leftovers by point distance before declaring births/deaths
        std::vector<bool> used_b(only_b.size(), false);
        for (const auto* ca : only_a) {
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t bi = 0; bi < only_b.size(); ++bi) {
                if (used_b[bi]) continue;
                const double d = cycle_distance(*ca, *only_b[bi]);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(bi);
                }
            }
            if (best >= 0 &&
                best_d < 0.2 * (1.0 + std::min(point_scale(*ca), point_scale(*only_b[best])))) {
                matched.emplace_back(ca, only_b[best]);
                used_b[best] = true;
            } else {
                events.push_back(refine_existence(ctx, *ca, 0.0, 1.0));
            }
        }
        for (std::size_t bi = 0; bi < only_b.size(); ++bi)
            if (!used_b[bi]) events.push_back(refine_existence(ctx, *only_b[bi], 1.0, 0.0));

        for (const auto& [ca, cb] : matched) {
            const bool sa = ca->stability == Stability::stable;
            const bool sb = cb->stability == Stability::stable;
            if (sa == sb) continue;  // persists with unchanged stability: no event
            if (object_key(*ca, ctx.eff_mask) == object_key(*cb, ctx.eff_mask)) {
                events.push_back(refine_stability(ctx, *ca, *cb));
            } else {
                RawEvent e;  // flip across a sequence change: classify unrefined
                e.order = k;
                e.seq = ca->region_seq;
                e.kind = classify_event(ca, cb, ctx.th);
                e.evidence = evidence_from(*ca, eig_closest_to_unit_circle(*ca));
                events.push_back(e);
            }
        }
    }
    return events;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, int threads) {
    spec.validate();
    SweepResult result;
    result.axes = spec.axes;
    result.shape = {spec.axes[0].n_steps,
                    spec.axes.size() > 1 ? spec.axes[1].n_steps : 1};

    const auto axis_value = [&](int axis, int idx) {
        const auto& ax = spec.axes[axis];
        return ax.lo + (ax.hi - ax.lo) * idx / (ax.n_steps - 1);
    };
    for (int i = 0; i < result.shape[0]; ++i) result.axis0_values.push_back(axis_value(0, i));
    if (spec.axes.size() > 1)
        for (int j = 0; j < result.shape[1]; ++j) result.axis1_values.push_back(axis_value(1, j));

    const auto sys_at_values = [&](double v0, double v1) {
        PwlSystem sys = spec.base;
        spec.axes[0].target.set(sys.params, v0);
        if (spec.axes.size() > 1) spec.axes[1].target.set(sys.params, v1);
        return sys;
    };

    const std::size_t n_cells = static_cast<std::size_t>(result.shape[0]) * result.shape[1];
    result.cells.resize(n_cells);
    parallel_for(n_cells, threads, [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / result.shape[1];
        const int j = static_cast<int>(idx) % result.shape[1];
        SearchBudget budget = spec.budget;
        budget.rng_seed = rng::mix(spec.budget.rng_seed, idx);
        const PwlSystem sys = sys_at_values(result.axis0_values[i],
                                            spec.axes.size() > 1 ? result.axis1_values[j] : 0.0);
        result.cells[idx] = scyfi_find_all(sys, spec.k_max, budget);
    });

    for (std::size_t idx = 0; idx < n_cells; ++idx) {
        if (!result.cells[idx].degenerate.empty()) {
            const int i = static_cast<int>(idx) / result.shape[1];
            const int j = static_cast<int>(idx) % result.shape[1];
            result.on_manifold_cells.push_back({i, j});
        }
    }

    const std::uint64_t eff = spec.base.effective_border_mask();
    const auto diff_pair = [&](int ia, int ja, int ib, int jb, int axis) {
        DiffContext ctx;
        ctx.eff_mask = eff;
        ctx.th = spec.thresholds;
        ctx.refine_steps = spec.refine_steps;
        const double va0 = result.axis0_values[ia];
        const double vb0 = result.axis0_values[ib];
        const double va1 = spec.axes.size() > 1 ? result.axis1_values[ja] : 0.0;
        const double vb1 = spec.axes.size() > 1 ? result.axis1_values[jb] : 0.0;
        ctx.sys_at = [&, va0, vb0, va1, vb1](double t) {
            return sys_at_values(va0 + t * (vb0 - va0), va1 + t * (vb1 - va1));
        };
        const auto raw = diff_libraries(result.cell(ia, ja), result.cell(ib, jb), ctx);
        for (const auto& r : raw) {
            BifurcationEvent e;
            e.cell_a = {ia, ja};
            e.cell_b = {ib, jb};
            e.axis = axis;
            const double lo = axis == 0 ? va0 : va1;
            const double hi = axis == 0 ? vb0 : vb1;
            e.location = lo + r.t * (hi - lo);
            e.order = r.order;
            e.object_seq = r.seq;
            e.kind = r.kind;
            e.evidence = r.evidence;
            result.events.push_back(e);
        }
    };

    for (int i = 0; i < result.shape[0]; ++i)
        for (int j = 0; j < result.shape[1]; ++j) {
            if (i + 1 < result.shape[0]) diff_pair(i, j, i + 1, j, 0);
            if (j + 1 < result.shape[1]) diff_pair(i, j, i, j + 1, 1);
        }
    return result;
}

std::vector<BifurcationEvent> diff_library_pair(const CycleLibrary& lib_a,
                                                const CycleLibrary& lib_b, const PwlSystem& sys_a,
                                                const PwlSystem& sys_b,
                                                const ClassifyThresholds& th, int refine_steps) {
    DiffContext ctx;
    ctx.eff_mask = sys_a.effective_border_mask() | sys_b.effective_border_mask();
    ctx.th = th;
    ctx.refine_steps = refine_steps;
    ctx.sys_at = [&sys_a, &sys_b](double t) {
        PwlSystem sys = sys_a;
        sys.params.a_diag = (1 - t) * sys_a.params.a_diag + t * sys_b.params.a_diag;
        sys.params.w = (1 - t) * sys_a.params.w + t * sys_b.params.w;
        sys.params.h = (1 - t) * sys_a.params.h + t * sys_b.params.h;
        return sys;
    };
    const auto raw = diff_libraries(lib_a, lib_b, ctx);
    std::vector<BifurcationEvent> events;
    for (const auto& r : raw) {
        BifurcationEvent e;
        e.cell_a = {0, 0};
        e.cell_b = {1, 0};
        e.location = r.t;
        e.order = r.order;
        e.object_seq = r.seq;
        e.kind = r.kind;
        e.evidence = r.evidence;
        events.push_back(e);
    }
    return events;
}

SweepResult run_pwl2d_sweep(const ScanSpec& spec, int k_max, const SearchBudget& budget,
                            const ClassifyThresholds& th, int refine_steps, int threads) {
    if (spec.n_al < 1 || spec.n_ar < 1)
        throw std::invalid_argument("pwl2d sweep: grid must be nonempty");
    SweepResult result;
    result.shape = {spec.n_al, spec.n_ar};
    for (int i = 0; i < spec.n_al; ++i)
        result.axis0_values.push_back(
            spec.n_al == 1 ? spec.al_lo : spec.al_lo + (spec.al_hi - spec.al_lo) * i / (spec.n_al - 1));
    for (int j = 0; j < spec.n_ar; ++j)
        result.axis1_values.push_back(
            spec.n_ar == 1 ? spec.ar_lo : spec.ar_lo + (spec.ar_hi - spec.ar_lo) * j / (spec.n_ar - 1));

    const auto params_at = [&](double a_l, double a_r) {
        Pwl2dParams p = spec.base;
        p.a_l = a_l;
        p.a_r = a_r;
        return p;
    };

    const std::size_t n_cells = static_cast<std::size_t>(spec.n_al) * spec.n_ar;
    result.cells.resize(n_cells);
    parallel_for(n_cells, threads, [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / spec.n_ar;
        const int j = static_cast<int>(idx) % spec.n_ar;
        SearchBudget b = budget;
        b.rng_seed = rng::mix(budget.rng_seed, idx);
        const PwlSystem sys =
            pwl2d_to_system(params_at(result.axis0_values[i], result.axis1_values[j]));
        result.cells[idx] = scyfi_find_all(sys, k_max, b);
    });
    for (std::size_t idx = 0; idx < n_cells; ++idx)
        if (!result.cells[idx].degenerate.empty())
            result.on_manifold_cells.push_back({static_cast<int>(idx) / spec.n_ar,
                                                static_cast<int>(idx) % spec.n_ar});

    const std::uint64_t eff =
        pwl2d_to_system(params_at(result.axis0_values[0], result.axis1_values[0]))
            .effective_border_mask();
    const auto diff_pair = [&](int ia, int ja, int ib, int jb, int axis) {
        DiffContext ctx;
        ctx.eff_mask = eff;
        ctx.th = th;
        ctx.refine_steps = refine_steps;
        const double al_a = result.axis0_values[ia], al_b = result.axis0_values[ib];
        const double ar_a = result.axis1_values[ja], ar_b = result.axis1_values[jb];
        ctx.sys_at = [&, al_a, al_b, ar_a, ar_b](double t) {
            return pwl2d_to_system(
                params_at(al_a + t * (al_b - al_a), ar_a + t * (ar_b - ar_a)));
        };
        const auto raw = diff_libraries(result.cell(ia, ja), result.cell(ib, jb), ctx);
        for (const auto& r : raw) {
            BifurcationEvent e;
            e.cell_a = {ia, ja};
            e.cell_b = {ib, jb};
            e.axis = axis;
            const double lo = axis == 0 ? al_a : ar_a;
            const double hi = axis == 0 ? al_b : ar_b;
            e.location = lo + r.t * (hi - lo);
            e.order = r.order;
            e.object_seq = r.seq;
            e.kind = r.kind;
            e.evidence = r.evidence;
            result.events.push_back(e);
        }
    };
    for (int i = 0; i < spec.n_al; ++i)
        for (int j = 0; j < spec.n_ar; ++j) {
            if (i + 1 < spec.n_al) diff_pair(i, j, i + 1, j, 0);
            if (j + 1 < spec.n_ar) diff_pair(i, j, i, j + 1, 1);
        }
    return result;
}

TraceAnalysis analyze_training_trace(const std::vector<PwlSystem>& snapshots, int k_max,
                                     const SearchBudget& budget, const ClassifyThresholds& th,
                                     int refine_steps, int threads) {
    if (snapshots.size() < 2)
        throw std::invalid_argument("analyze_training_trace: need at least 2 snapshots");
    TraceAnalysis out;
    out.per_epoch.resize(snapshots.size());
    parallel_for(snapshots.size(), threads, [&](std::size_t e) {
        SearchBudget b = budget;
        b.rng_seed = rng::mix(budget.rng_seed, e);
        out.per_epoch[e] = scyfi_find_all(snapshots[e], k_max, b);
    });

    const std::uint64_t eff = snapshots[0].effective_border_mask();
    for (std::size_t e = 0; e + 1 < snapshots.size(); ++e) {
        DiffContext ctx;
        ctx.eff_mask = eff;
        ctx.th = th;
        ctx.refine_steps = refine_steps;
        const PwlSystem& sa = snapshots[e];
        const PwlSystem& sb = snapshots[e + 1];
        ctx.sys_at = [&sa, &sb](double t) {
            PwlSystem sys = sa;
            sys.params.a_diag = (1 - t) * sa.params.a_diag + t * sb.params.a_diag;
            sys.params.w = (1 - t) * sa.params.w + t * sb.params.w;
            sys.params.h = (1 - t) * sa.params.h + t * sb.params.h;
            return sys;
        };
        const auto raw = diff_libraries(out.per_epoch[e], out.per_epoch[e + 1], ctx);
        for (const auto& r : raw) {
            BifurcationEvent ev;
            ev.cell_a = {static_cast<int>(e), 0};
            ev.cell_b = {static_cast<int>(e) + 1, 0};
            ev.axis = 0;
            ev.location = static_cast<double>(e) + r.t;
            ev.order = r.order;
            ev.object_seq = r.seq;
            ev.kind = r.kind;
            ev.evidence = r.evidence;
            out.events.push_back(ev);
        }
    }
    return out;
}

// ---- exports ---------------------------------------------------------------

namespace {

nlohmann::json event_to_json(const BifurcationEvent& e) {
    nlohmann::json j;
    j["loc"] = {{"cell_a", {e.cell_a[0], e.cell_a[1]}},
                {"cell_b", {e.cell_b[0], e.cell_b[1]}},
                {"axis", e.axis},
                {"value", e.location}};
    j["kind"] = to_string(e.kind);
    j["order"] = e.order;
    nlohmann::json codes = nlohmann::json::array();
    for (const auto code : e.object_seq.codes) {
        nlohmann::json bits = nlohmann::json::array();
        for (int m = 0; m < e.object_seq.m; ++m) bits.push_back(static_cast<int>((code >> m) & 1));
        codes.push_back(bits);
    }
    j["codes"] = codes;
    j["evidence"] = {{"max_point_norm", e.evidence.max_point_norm},
                     {"min_abs_component", e.evidence.min_abs_component},
                     {"eig_near", {e.evidence.eig_near.real(), e.evidence.eig_near.imag()}}};
    return j;
}

}  // namespace

void write_events_jsonl(const std::vector<BifurcationEvent>& events, std::ostream& out) {
    for (const auto& e : events) out << event_to_json(e).dump() << "\n";
}

void write_events_jsonl(const std::vector<BifurcationEvent>& events, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_events_jsonl(events, out);
}

namespace {

EventKind event_kind_from_string(const std::string& s) {
    for (const EventKind k : {EventKind::DTB, EventKind::BCB, EventKind::DFB, EventKind::CB,
                              EventKind::appear, EventKind::disappear,
                              EventKind::stability_change})
        if (s == to_string(k)) return k;
    throw std::invalid_argument("events jsonl: unknown kind \"" + s + "\"");
}

}  // namespace

std::vector<BifurcationEvent> read_events_jsonl(std::istream& in) {
    std::vector<BifurcationEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(std::string("events jsonl: parse error: ") + e.what());
        }
        BifurcationEvent e;
        const auto& loc = j.at("loc");
        e.cell_a = {loc.at("cell_a").at(0).get<int>(), loc.at("cell_a").at(1).get<int>()};
        e.cell_b = {loc.at("cell_b").at(0).get<int>(), loc.at("cell_b").at(1).get<int>()};
        e.axis = loc.at("axis").get<int>();
        e.location = loc.at("value").get<double>();
        e.kind = event_kind_from_string(j.at("kind").get<std::string>());
        e.order = j.at("order").get<int>();
        const auto& codes = j.at("codes");
        e.object_seq.codes.resize(codes.size());
        e.object_seq.m = codes.empty() ? 0 : static_cast<int>(codes.at(0).size());
        for (std::size_t l = 0; l < codes.size(); ++l) {
            std::uint64_t bits = 0;
            for (std::size_t m = 0; m < codes.at(l).size(); ++m)
                if (codes.at(l).at(m).get<int>() != 0) bits |= (1ULL << m);
            e.object_seq.codes[l] = bits;
        }
        const auto& ev = j.at("evidence");
        e.evidence.max_point_norm = ev.at("max_point_norm").get<double>();
        e.evidence.min_abs_component = ev.at("min_abs_component").get<double>();
        e.evidence.eig_near = {ev.at("eig_near").at(0).get<double>(),
                               ev.at("eig_near").at(1).get<double>()};
        events.push_back(std::move(e));
    }
    return events;
}

std::vector<BifurcationEvent> read_events_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return read_events_jsonl(in);
}

void write_grid_csv(const SweepResult& result, std::ostream& out) {
    out << "i,j,axis0_value,axis1_value,n_stable,n_unstable,orders\n";
    for (int i = 0; i < result.shape[0]; ++i) {
        for (int j = 0; j < result.shape[1]; ++j) {
            const auto& lib = result.cell(i, j);
            int n_stable = 0, n_unstable = 0;
            std::string orders;
            for (const auto& [k, cycles] : lib.by_order) {
                if (cycles.empty()) continue;
                if (!orders.empty()) orders += ';';
                orders += std::to_string(k);
                for (const auto& c : cycles)
                    (c.stability == Stability::stable ? n_stable : n_unstable) += 1;
            }
            char buf[96];
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,", i, j, result.axis0_values[i],
                          result.axis1_values.empty() ? 0.0 : result.axis1_values[j]);
            out << buf << n_stable << ',' << n_unstable << ',' << orders << "\n";
        }
    }
}

void write_grid_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_grid_csv(result, out);
}

void write_diagram_csv(const std::vector<CycleLibrary>& libraries,
                       const std::vector<double>& x_values, const VectorXd* projection,
                       std::ostream& out) {
    if (libraries.size() != x_values.size())
        throw std::invalid_argument("diagram export: x values must match libraries");
    int m = 0;
    for (const auto& lib : libraries)
        for (const auto& [k, cycles] : lib.by_order)
            if (!cycles.empty()) m = std::max(m, static_cast<int>(cycles[0].points[0].size()));
    out << "x,order,stable,point_index";
    for (int c = 0; c < m; ++c) out << ",z" << c;
    if (projection) out << ",proj";
    out << "\n";
    char buf[64];
    for (std::size_t idx = 0; idx < libraries.size(); ++idx) {
        for (const auto& [k, cycles] : libraries[idx].by_order) {
            for (const auto& cyc : cycles) {
                for (int l = 0; l < cyc.order; ++l) {
                    std::snprintf(buf, sizeof buf, "%.17g", x_values[idx]);
                    out << buf << ',' << k << ',' << (cyc.stability == Stability::stable ? 1 : 0)
                        << ',' << l;
                    for (int c = 0; c < m; ++c) {
                        std::snprintf(buf, sizeof buf, "%.17g",
                                      c < cyc.points[l].size() ? cyc.points[l][c] : 0.0);
                        out << ',' << buf;
                    }
                    if (projection) {
                        std::snprintf(buf, sizeof buf, "%.17g", projection->dot(cyc.points[l]));
                        out << ',' << buf;
                    }
                    out << "\n";
                }
            }
        }
    }
}

void write_diagram_csv(const std::vector<CycleLibrary>& libraries,
                       const std::vector<double>& x_values, const VectorXd* projection,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_diagram_csv(libraries, x_values, projection, out);
}

}  // namespace scyfi
