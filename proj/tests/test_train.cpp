#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "scyfi/train.hpp"

using namespace scyfi;
using namespace scyfi::testing;

namespace {

// central finite differences on the loss, one coordinate at a time
VectorXd fd_gradient(const PwlSystem& sys, const VectorXd& z0, const LossSpec& loss,
                     const GtfConfig& gtf, double delta = 1e-6) {
    const int m = sys.m();
    VectorXd g(2 * m + m * m);
    int idx = 0;
    const auto probe = [&](auto&& mutate) {
        PwlSystem plus = sys, minus = sys;
        mutate(plus.params, delta);
        mutate(minus.params, -delta);
        const double lp = bptt_gradient(plus, z0, loss, gtf).loss;
        const double lm = bptt_gradient(minus, z0, loss, gtf).loss;
        return (lp - lm) / (2 * delta);
    };
    for (int i = 0; i < m; ++i)
        g[idx++] = probe([i](PlrnnParams& p, double d) { p.a_diag[i] += d; });
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            g[idx++] = probe([i, j](PlrnnParams& p, double d) { p.w(i, j) += d; });
    for (int i = 0; i < m; ++i)
        g[idx++] = probe([i](PlrnnParams& p, double d) { p.h[i] += d; });
    return g;
}

// contracting system whose trajectory stays clear of the borders
bool draw_off_border_case(Rng& rng, int m, int horizon, PwlSystem& sys_out, VectorXd& z0_out,
                          LossSpec& loss_out) {
    PlrnnParams p = generate_case1_params(m, 0.2, rng.next_u64());
    for (int i = 0; i < m; ++i) p.h[i] = rng.uniform(-1.0, 1.0);
    PwlSystem sys(p);
    const VectorXd z0 = random_vector(m, rng, 1.0);
    LossSpec loss;
    for (int t = 0; t < horizon; ++t) loss.targets.push_back(random_vector(m, rng, 1.0));
    // forced states must stay off the borders for finite differences to hold
    for (const double alpha : {0.0, 0.5}) {
        VectorXd carry = z0;
        for (int t = 0; t < horizon; ++t) {
            if (carry.cwiseAbs().minCoeff() < 1e-3) return false;
            carry = apply_map(sys, carry);
            carry = (1 - alpha) * carry + alpha * loss.targets[t];
        }
    }
    sys_out = sys;
    z0_out = z0;
    loss_out = loss;
    return true;
}

}  // namespace

TEST_CASE("bptt_gradient") {
    SUBCASE("one-step quadratic in h") {
        auto sys = linear_system(VectorXd::Zero(2), (VectorXd(2) << 0.7, -0.4).finished());
        LossSpec loss;
        loss.targets = {sys.params.h, (VectorXd(2) << 0.1, 0.9).finished()};
        const auto g = bptt_gradient(sys, (VectorXd(2) << 3, -3).finished(), loss);
        const VectorXd want = 2.0 * (sys.params.h - loss.targets[1]);
        CHECK((g.grad.h - want).cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.loss == doctest::Approx((sys.params.h - loss.targets[1]).squaredNorm()));
    }
    SUBCASE("matches central finite differences for alpha 0 and 0.5") {
        Rng rng(404);
        int done = 0;
        for (int trial = 0; trial < 200 && done < 20; ++trial) {
            PwlSystem sys;
            VectorXd z0;
            LossSpec loss;
            const int m = 2 + static_cast<int>(rng.next_below(3));
            const int horizon = 5 + static_cast<int>(rng.next_below(26));
            if (!draw_off_border_case(rng, m, horizon, sys, z0, loss)) continue;
            for (const double alpha : {0.0, 0.5}) {
                const GtfConfig gtf{alpha};
                const auto g = bptt_gradient(sys, z0, loss, gtf);
                const VectorXd fd = fd_gradient(sys, z0, loss, gtf);
                const double rel = (g.flatten() - fd).norm() / std::max(1e-12, fd.norm());
                CHECK(rel < 1e-5);
            }
            ++done;
        }
        CHECK(done == 20);
    }
    SUBCASE("alpha = 1 leaves only the immediate partial terms") {
        Rng rng(11);
        PwlSystem sys(random_plrnn(3, rng, 0.8, 1.0));
        const VectorXd z0 = random_vector(3, rng);
        LossSpec loss;
        for (int t = 0; t < 6; ++t) loss.targets.push_back(random_vector(3, rng));
        const auto g = bptt_gradient(sys, z0, loss, {1.0});
        // with the Jacobian product zeroed, d loss / d h = sum_t 2 (z_t - x_t)
        VectorXd carry = z0, acc = VectorXd::Zero(3);
        for (int t = 0; t < 6; ++t) {
            const VectorXd z = apply_map(sys, carry);
            acc += 2.0 * (z - loss.targets[t]);
            carry = loss.targets[t];  // alpha = 1: fully forced
        }
        CHECK((g.grad.h - acc).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("gtf with alpha = 0 is bit-for-bit plain bptt") {
        Rng rng(12);
        PwlSystem sys(random_plrnn(3, rng));
        const VectorXd z0 = random_vector(3, rng);
        LossSpec loss;
        for (int t = 0; t < 8; ++t) loss.targets.push_back(random_vector(3, rng));
        const auto a = bptt_gradient(sys, z0, loss);
        const auto b = bptt_gradient(sys, z0, loss, {0.0});
        CHECK(a.loss == b.loss);
        CHECK((a.flatten() - b.flatten()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("divergence is flagged with the first bad step") {
        auto sys = skew_map_1d(0.0, 3.0, 1.0);
        LossSpec loss;
        for (int t = 0; t < 300; ++t) loss.targets.push_back(VectorXd::Zero(1));
        const auto g = bptt_gradient(sys, VectorXd::Constant(1, 1.0), loss);
        CHECK_FALSE(g.finite);
        CHECK(g.first_bad_step > 0);
        CHECK(std::isinf(g.loss));
    }
}

TEST_CASE("cycle_gradient") {
    SUBCASE("1-D fixed point: dz*/da = z*/(1 - a_r)") {
        for (const double ar : {-0.5, 0.5, 0.9}) {
            auto sys = skew_map_1d(0.2, ar, 1.0);
            const auto lib = exhaustive_oracle(sys, 1);
            REQUIRE(lib.order(1).size() == 1);
            const double zstar = 1.0 / (1.0 - ar);
            const auto ga = cycle_gradient(sys, lib.order(1)[0], ParamAddress::parse("A[0]"));
            REQUIRE_FALSE(ga.at_dtb);
            CHECK(ga.dz[0] == doctest::Approx(zstar / (1.0 - ar)).epsilon(1e-12));
            const auto gw = cycle_gradient(sys, lib.order(1)[0], ParamAddress::parse("W[0,0]"));
            CHECK(gw.dz[0] == doctest::Approx(zstar / (1.0 - ar)).epsilon(1e-12));
        }
    }
    SUBCASE("norm blows up monotonically approaching the DTB locus") {
        double last = 0;
        for (const double ar : {0.9, 0.99, 0.999}) {
            auto sys = skew_map_1d(0.2, ar, 1.0);
            const auto lib = exhaustive_oracle(sys, 1);
            const auto g = cycle_gradient(sys, lib.order(1)[0], ParamAddress::parse("A[0]"));
            CHECK(g.dz.norm() > last);
            last = g.dz.norm();
        }
        CHECK(last > 1e5);
    }
    SUBCASE("immediate partials tied to a colliding component vanish") {
        // fixed point with z*_0 = 0 exactly
        auto sys = linear_system((VectorXd(2) << 0.5, 0.3).finished(),
                                 (VectorXd(2) << 0.0, 1.0).finished());
        const auto lib = exhaustive_oracle(sys, 1);
        REQUIRE(lib.order(1).size() == 1);
        CHECK(lib.order(1)[0].points[0][0] == 0.0);
        const auto ga = cycle_gradient(sys, lib.order(1)[0], ParamAddress::parse("A[0]"));
        CHECK(ga.dz.norm() == 0.0);
        const auto gw = cycle_gradient(sys, lib.order(1)[0], ParamAddress::parse("W[1,0]"));
        CHECK(gw.dz.norm() == 0.0);
        // a coordinate not tied to the collision stays alive
        const auto gh = cycle_gradient(sys, lib.order(1)[0], ParamAddress::parse("h[1]"));
        CHECK(gh.dz.norm() > 0.1);
    }
    SUBCASE("matches finite differences of the cycle point on a 2-cycle") {
        auto sys = skew_map_1d(0.5, -1.5, 1.0);
        const auto lib = exhaustive_oracle(sys, 2);
        REQUIRE(lib.order(2).size() == 1);
        const auto& cyc = lib.order(2)[0];
        const auto g = cycle_gradient(sys, cyc, ParamAddress::parse("h[0]"));
        const double delta = 1e-7;
        auto solve_at = [&](double dh) {
            PwlSystem s2 = sys;
            s2.params.h[0] += dh;
            const auto res = solve_cycle_candidate(s2, cyc.region_seq);
            REQUIRE(res.consistent);
            return res.points[0][0];
        };
        const double fd = (solve_at(delta) - solve_at(-delta)) / (2 * delta);
        CHECK(g.dz[0] == doctest::Approx(fd).epsilon(1e-6));
    }
    SUBCASE("at the DTB locus the solve is flagged") {
        auto sys = skew_map_1d(0.2, 1.0, 1.0);
        CycleObject fake;
        fake.order = 1;
        fake.points = {VectorXd::Constant(1, 1.0)};
        fake.region_seq = {{1}, 1};
        fake.eigenvalues.resize(1);
        const auto g = cycle_gradient(sys, fake, ParamAddress::parse("A[0]"));
        CHECK(g.at_dtb);
    }
}

TEST_CASE("train") {
    SUBCASE("target already produced by the initial parameters: loss stays near zero") {
        auto sys = skew_map_1d(0.5, -1.5, 1.0);
        const auto lib = exhaustive_oracle(sys, 2);
        const auto& cyc = lib.order(2)[0];
        LossSpec loss;
        VectorXd z0 = cyc.points[0];
        for (int t = 0; t < 12; ++t) loss.targets.push_back(cyc.points[(t + 1) % 2]);
        OptimizerConfig opt{1e-3, 40, 0.0};
        const auto trace = train(sys, z0, loss, opt, {}, GtfAnnealing::none,
                                 {ParamAddress::parse("A[0]"), ParamAddress::parse("W[0,0]")});
        REQUIRE_FALSE(trace.truncated);
        for (const double l : trace.losses) CHECK(l < 1e-12);
        CHECK((trace.snapshots.back().a_diag - sys.params.a_diag).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("gradient clipping caps the step") {
        auto sys = skew_map_1d(0.5, 0.97, 1.0);
        LossSpec loss;
        for (int t = 0; t < 10; ++t) loss.targets.push_back(VectorXd::Zero(1));
        OptimizerConfig opt{1e-2, 3, 1.0};
        const auto trace = train(sys, VectorXd::Constant(1, 30.0), loss, opt);
        for (std::size_t e = 1; e < trace.snapshots.size(); ++e) {
            const double da =
                (trace.snapshots[e].a_diag - trace.snapshots[e - 1].a_diag).cwiseAbs().maxCoeff();
            CHECK(da <= opt.lr * opt.grad_clip + 1e-15);
        }
    }
}

TEST_CASE("gtf_alpha_bound") {
    SUBCASE("contracting system needs no forcing") {
        const auto p = generate_case1_params(4, 0.1, 3);
        const auto b = gtf_alpha_bound(p);
        CHECK(b.r < 1.0);
        CHECK(b.alpha_star == 0.0);
    }
    SUBCASE("r = 2 gives alpha_star = 0.5") {
        PlrnnParams p;
        p.a_diag = VectorXd::Constant(1, 2.0);
        p.w = MatrixXd::Zero(1, 1);
        p.h = VectorXd::Zero(1);
        const auto b = gtf_alpha_bound(p);
        CHECK(b.r == doctest::Approx(2.0));
        CHECK(b.alpha_star == doctest::Approx(0.5));
    }
    SUBCASE("above the bound every sampled GTF Jacobian product contracts") {
        Rng rng(2025);
        for (int trial = 0; trial < 3; ++trial) {
            PlrnnParams p = random_plrnn(3, rng, 1.4, 1.2);
            const auto b = gtf_alpha_bound(p);
            if (b.r <= 1.0) continue;
            const double alpha = b.alpha_star + 0.01;
            PwlSystem sys(p);
            double worst = 0;
            for (int s = 0; s < 50; ++s) {
                const int n = 1 + static_cast<int>(rng.next_below(30));
                MatrixXd prod = MatrixXd::Identity(3, 3);
                for (int i = 0; i < n; ++i)
                    prod = (1 - alpha) * step_matrix(sys, rng.next_below(8)) * prod;
                Eigen::EigenSolver<MatrixXd> es(prod, false);
                worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
            }
            CHECK(worst < 1.0);
        }
    }
}

TEST_CASE("lookahead_probe") {
    auto sys = skew_map_1d(0.5, 0.9, 1.0);
    PlrnnParams zero;
    zero.a_diag = VectorXd::Zero(1);
    zero.w = MatrixXd::Zero(1, 1);
    zero.h = VectorXd::Zero(1);

    SUBCASE("zero gradient never bifurcates") {
        const auto r = lookahead_probe(sys, zero, 10.0, 2, {0, 100, 1});
        CHECK_FALSE(r.would_bifurcate);
    }
    SUBCASE("step crossing the DTB locus is caught") {
        PlrnnParams grad = zero;
        grad.w(0, 0) = -0.2;  // params - 10 * grad pushes a_r from 0.9 to 2.9
        const auto r = lookahead_probe(sys, grad, 1.0, 2, {0, 100, 1}, {},
                                       {ParamAddress::parse("W[0,0]")});
        REQUIRE(r.would_bifurcate);
        bool has_dtb = false;
        for (const auto& e : r.events) has_dtb |= e.kind == EventKind::DTB;
        CHECK(has_dtb);
    }
    SUBCASE("step inside the stability region does not fire") {
        PlrnnParams grad = zero;
        grad.w(0, 0) = 0.005;  // a_r 0.9 -> 0.85
        const auto r = lookahead_probe(sys, grad, 1.0, 2, {0, 100, 1}, {},
                                       {ParamAddress::parse("W[0,0]")});
        CHECK_FALSE(r.would_bifurcate);
    }
}
