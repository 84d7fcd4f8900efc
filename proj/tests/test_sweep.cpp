#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "scyfi/sweep.hpp"

using namespace scyfi;
using namespace scyfi::testing;

namespace {

int count_kind(const std::vector<BifurcationEvent>& events, EventKind k) {
    int n = 0;
    for (const auto& e : events)
        if (e.kind == k) ++n;
    return n;
}

}  // namespace

TEST_CASE("param address") {
    PlrnnParams p;
    p.a_diag = (VectorXd(2) << 1, 2).finished();
    p.w = (MatrixXd(2, 2) << 0, 3, 4, 0).finished();
    p.h = (VectorXd(2) << 5, 6).finished();
    CHECK(ParamAddress::parse("A[1]").get(p) == 2);
    CHECK(ParamAddress::parse("W[1,0]").get(p) == 4);
    CHECK(ParamAddress::parse("h[0]").get(p) == 5);
    ParamAddress::parse("W[0,1]").set(p, 9);
    CHECK(p.w(0, 1) == 9);
    CHECK(ParamAddress::parse("A[1]").str() == "A[1]");
    CHECK_THROWS_AS(ParamAddress::parse("W[1]"), std::invalid_argument);
    CHECK_THROWS_AS(ParamAddress::parse("Q[1]"), std::invalid_argument);
}

TEST_CASE("1-D skew-tent sweep finds the DTB and the simultaneous BCB+DFB") {
    // a_r = 0.5 + w; DTB at w = 0.5 (a_r = 1), DFB of the fixed point plus
    // BCB of the 2-cycle at w = -1.5 (a_r = -1)
    SweepSpec spec;
    spec.base = skew_map_1d(0.5, 0.0, 1.0);
    spec.axes = {{ParamAddress::parse("W[0,0]"), -2.0, 1.0, 30}};
    spec.k_max = 2;
    spec.budget = {0, 100, 99};
    const auto result = run_sweep(spec, 2);

    REQUIRE(count_kind(result.events, EventKind::DTB) == 1);
    REQUIRE(count_kind(result.events, EventKind::DFB) == 1);
    REQUIRE(count_kind(result.events, EventKind::BCB) >= 1);
    for (const auto& e : result.events) {
        if (e.kind == EventKind::DTB) {
            CHECK(std::abs(e.location - 0.5) < 1e-6);
            CHECK(e.order == 1);
            CHECK(e.evidence.max_point_norm > 1e6);
        } else if (e.kind == EventKind::DFB) {
            CHECK(std::abs(e.location + 1.5) < 1e-6);
            CHECK(e.order == 1);
            CHECK(std::abs(e.evidence.eig_near - std::complex<double>(-1, 0)) < 5e-2);
        } else if (e.kind == EventKind::BCB) {
            CHECK(std::abs(e.location + 1.5) < 1e-6);
            CHECK(e.order == 2);
            CHECK(e.evidence.min_abs_component < 1e-6);
        } else {
            FAIL("unexpected event kind ", to_string(e.kind), " at ", e.location);
        }
    }
}

TEST_CASE("sweep events are symmetric in direction") {
    SweepSpec fwd;
    fwd.base = skew_map_1d(0.5, 0.0, 1.0);
    fwd.axes = {{ParamAddress::parse("W[0,0]"), -2.0, 1.0, 30}};
    fwd.k_max = 2;
    fwd.budget = {0, 100, 7};
    SweepSpec rev = fwd;
    rev.axes[0].lo = 1.0;
    rev.axes[0].hi = -2.0;

    const auto a = run_sweep(fwd, 2);
    const auto b = run_sweep(rev, 2);
    REQUIRE(a.events.size() == b.events.size());
    auto key = [](const BifurcationEvent& e) {
        return std::to_string(static_cast<int>(e.kind)) + "@" +
               std::to_string(std::round(e.location * 1e4));
    };
    std::multiset<std::string> ka, kb;
    for (const auto& e : a.events) ka.insert(key(e));
    for (const auto& e : b.events) kb.insert(key(e));
    CHECK(ka == kb);
}

TEST_CASE("sweeping a parameter with no effect yields no events") {
    SweepSpec spec;
    spec.base = linear_system((VectorXd(2) << 0.5, -0.3).finished(),
                              (VectorXd(2) << 1, 1).finished());
    spec.axes = {{ParamAddress::parse("h[1]"), -2.0, 2.0, 9}};
    spec.k_max = 2;
    spec.budget = {0, 100, 3};
    const auto result = run_sweep(spec, 1);
    CHECK(result.events.empty());
}

TEST_CASE("classify_event") {
    SUBCASE("escaping fixed point with eigenvalue near one is a DTB") {
        auto sys = skew_map_1d(0.5, 1.0 - 1e-7, 1.0);
        const auto lib = exhaustive_oracle(sys, 1);
        REQUIRE(lib.order(1).size() == 1);
        CHECK(lib.order(1)[0].points[0][0] > 1e6);
        CHECK(classify_event(&lib.order(1)[0], nullptr) == EventKind::DTB);
    }
    SUBCASE("point on the border is a BCB") {
        auto sys = skew_map_1d(0.3, 0.5, 1e-13);
        const auto lib = exhaustive_oracle(sys, 1);
        REQUIRE(lib.order(1).size() == 1);
        CHECK(classify_event(nullptr, &lib.order(1)[0]) == EventKind::BCB);
    }
    SUBCASE("matched complex pair crossing the unit circle is a CB") {
        CycleObject before, after;
        before.order = after.order = 1;
        before.points = {(VectorXd(2) << 0.4, 0.6).finished()};
        after.points = before.points;
        before.eigenvalues.resize(2);
        before.eigenvalues << std::complex<double>(0.3, 0.9495),
            std::complex<double>(0.3, -0.9495);
        after.eigenvalues.resize(2);
        after.eigenvalues << std::complex<double>(0.3, 0.9595),
            std::complex<double>(0.3, -0.9595);
        before.stability = Stability::stable;
        after.stability = Stability::unstable;
        CHECK(classify_event(&before, &after) == EventKind::CB);
    }
    SUBCASE("matched real eigenvalue at minus one is a DFB") {
        CycleObject before, after;
        before.order = after.order = 1;
        before.points = {(VectorXd(1) << 0.5).finished()};
        after.points = before.points;
        before.eigenvalues.resize(1);
        before.eigenvalues << std::complex<double>(-0.99, 0);
        after.eigenvalues.resize(1);
        after.eigenvalues << std::complex<double>(-1.01, 0);
        before.stability = Stability::stable;
        after.stability = Stability::unstable;
        CHECK(classify_event(&before, &after) == EventKind::DFB);
    }
    SUBCASE("both sides absent throws") {
        CHECK_THROWS_AS(classify_event(nullptr, nullptr), std::invalid_argument);
    }
}

TEST_CASE("analyze_training_trace") {
    SUBCASE("constant trace has no events") {
        std::vector<PwlSystem> snaps(4, skew_map_1d(0.5, -1.5, 1.0));
        const auto res = analyze_training_trace(snaps, 2, {0, 100, 5});
        CHECK(res.events.empty());
        CHECK(res.per_epoch.size() == 4);
    }
    SUBCASE("trace crossing the DTB locus is detected at the right epoch") {
        std::vector<PwlSystem> snaps;
        for (const double ar : {0.80, 0.90, 0.95, 1.05, 1.10})
            snaps.push_back(skew_map_1d(0.5, ar, 1.0));
        const auto res = analyze_training_trace(snaps, 1, {0, 100, 5});
        REQUIRE(count_kind(res.events, EventKind::DTB) == 1);
        for (const auto& e : res.events)
            if (e.kind == EventKind::DTB) {
                CHECK(e.cell_a[0] == 2);
                CHECK(e.location == doctest::Approx(2.5).epsilon(1e-4));
            }
    }
    SUBCASE("stability flip at minus one with a simultaneous 2-cycle birth") {
        std::vector<PwlSystem> snaps;
        for (const double ar : {-0.80, -0.95, -1.05, -1.20})
            snaps.push_back(skew_map_1d(0.5, ar, 1.0));
        const auto res = analyze_training_trace(snaps, 2, {0, 100, 5});
        CHECK(count_kind(res.events, EventKind::DFB) == 1);
        CHECK(count_kind(res.events, EventKind::BCB) >= 1);
    }
}

TEST_CASE("pwl2d sweep events match oracle verdict changes along the Fig-1 cross-section") {
    ScanSpec spec;
    spec.base.c = 0.8;
    spec.base.d = 0.2;
    spec.base.b_l = -0.4;
    spec.base.b_r = 0.5;
    spec.base.h1 = 1.0;
    spec.al_lo = spec.al_hi = 0.253;
    spec.n_al = 1;
    spec.ar_lo = -3.0;
    spec.ar_hi = 1.0;
    spec.n_ar = 40;
    const auto sweep = run_pwl2d_sweep(spec, 3, {0, 100, 17}, {}, 20, 2);

    // map each event to the object kind via its sequence signature
    const auto kind_of = [](const BifurcationEvent& e) -> ObjectKind {
        if (e.order == 1) return (e.object_seq.codes[0] & 1) ? ObjectKind::fixed_R : ObjectKind::fixed_L;
        if (e.order == 2) return ObjectKind::cycle_RL;
        int n_right = 0;
        for (const auto c : e.object_seq.codes) n_right += static_cast<int>(c & 1);
        return n_right == 1 ? ObjectKind::cycle_RL2 : ObjectKind::cycle_R2L;
    };

    const auto cells = multistability_scan(spec, 2);
    REQUIRE(static_cast<int>(cells.size()) == 40);
    int verified_pairs = 0;
    for (int j = 0; j + 1 < 40; ++j) {
        for (std::size_t ki = 0; ki < kAllObjectKinds.size(); ++ki) {
            const auto& va = cells[j].verdicts[ki];
            const auto& vb = cells[j + 1].verdicts[ki];
            if (va.on_curve || vb.on_curve || va.degenerate || vb.degenerate) continue;
            const bool differs = va.exists != vb.exists || va.stable != vb.stable;
            int n_events = 0;
            for (const auto& e : sweep.events)
                if (e.cell_a[1] == j && kind_of(e) == kAllObjectKinds[ki]) ++n_events;
            CHECK(n_events == (differs ? 1 : 0));
            ++verified_pairs;
        }
    }
    CHECK(verified_pairs > 150);
}

TEST_CASE("export formats") {
    SweepSpec spec;
    spec.base = skew_map_1d(0.5, 0.0, 1.0);
    spec.axes = {{ParamAddress::parse("W[0,0]"), -2.0, 1.0, 10}};
    spec.k_max = 2;
    spec.budget = {0, 100, 9};
    const auto result = run_sweep(spec, 1);

    std::ostringstream events;
    write_events_jsonl(result.events, events);
    CHECK(events.str().find("\"kind\":") != std::string::npos);
    CHECK(events.str().find("\"evidence\":") != std::string::npos);

    std::ostringstream grid;
    write_grid_csv(result, grid);
    CHECK(grid.str().rfind("i,j,axis0_value", 0) == 0);

    std::ostringstream diagram;
    std::vector<double> xs(result.cells.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = result.axis0_values[i];
    const VectorXd dir = VectorXd::Ones(1);
    write_diagram_csv(result.cells, xs, &dir, diagram);
    CHECK(diagram.str().rfind("x,order,stable,point_index,z0,proj", 0) == 0);
}
