#include "scyfi/train.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "scyfi/rng.hpp"

namespace scyfi {

void LossSpec::validate(int m) const {
    if (targets.size() < 2) throw std::invalid_argument("loss: need at least 2 targets");
    for (const auto& t : targets)
        if (t.size() != m) throw std::invalid_argument("loss: target dimension mismatch");
}

double GradientResult::grad_norm() const { return flatten().norm(); }

VectorXd GradientResult::flatten() const {
    const int m = grad.m();
    VectorXd v(2 * m + m * m);
    v.head(m) = grad.a_diag;
    for (int i = 0; i < m; ++i) v.segment(m + i * m, m) = grad.w.row(i);
    v.tail(m) = grad.h;
    return v;
}

namespace {

VectorXd activation_output(const PwlSystem& sys, const VectorXd& z) {
    const int m = sys.m();
    VectorXd phi(m);
    for (int i = 0; i < m; ++i) {
        const Activation a = sys.unit(i);
        phi[i] = (z[i] > 0.0 ? a.s_pos : a.s_neg) * z[i];
    }
    return phi;
}

}  // namespace

GradientResult bptt_gradient(const PwlSystem& sys, const VectorXd& z0, const LossSpec& loss,
                             const GtfConfig& gtf, double divergence_threshold) {
    const int m = sys.m();
    loss.validate(m);
    const int horizon = loss.horizon();
    const double alpha = gtf.alpha;

    GradientResult out;
    out.grad.a_diag = VectorXd::Zero(m);
    out.grad.w = MatrixXd::Zero(m, m);
    out.grad.h = VectorXd::Zero(m);

    // forward pass; inputs[t] is the (possibly forced) state fed into step t+1
    std::vector<VectorXd> inputs(horizon), states(horizon);
    VectorXd carry = z0;
    for (int t = 0; t < horizon; ++t) {
        inputs[t] = carry;
        const VectorXd z = apply_map(sys, inputs[t]);
        if (!z.allFinite() || z.cwiseAbs().maxCoeff() > divergence_threshold) {
            out.finite = false;
            out.first_bad_step = t + 1;
            out.loss = std::numeric_limits<double>::infinity();
            return out;
        }
        states[t] = z;
        out.loss += (z - loss.targets[t]).squaredNorm();
        carry = (1.0 - alpha) * z + alpha * loss.targets[t];
    }

    // reverse accumulation; lambda = d loss / d z_t
    VectorXd lambda = VectorXd::Zero(m);
    for (int t = horizon - 1; t >= 0; --t) {
        lambda += 2.0 * (states[t] - loss.targets[t]);
        const VectorXd& u = inputs[t];
        const VectorXd phi = activation_output(sys, u);
        out.grad.a_diag += lambda.cwiseProduct(u);
        out.grad.w += lambda * phi.transpose();
        out.grad.h += lambda;
        if (t > 0) {
            const MatrixXd jac = step_matrix(sys, region_of(u).bits);
            lambda = (1.0 - alpha) * (jac.transpose() * lambda);
        }
    }
    return out;
}

CycleGradient cycle_gradient(const PwlSystem& sys, const CycleObject& cycle,
                             const ParamAddress& theta, const Tolerances& tol) {
    const int m = sys.m();
    const int k = cycle.order;

    // forward-accumulate the immediate partial of the k-step map
    MatrixXd prod = MatrixXd::Identity(m, m);
    VectorXd acc = VectorXd::Zero(m);
    for (int l = 0; l < k; ++l) {
        const MatrixXd step = step_matrix(sys, cycle.region_seq.codes[l]);
        VectorXd immediate = VectorXd::Zero(m);
        const VectorXd& z = cycle.points[l];
        switch (theta.kind) {
            case ParamAddress::Kind::A: immediate[theta.i] = z[theta.i]; break;
            case ParamAddress::Kind::W: {
                const Activation a = sys.unit(theta.j);
                immediate[theta.i] = (z[theta.j] > 0.0 ? a.s_pos : a.s_neg) * z[theta.j];
                break;
            }
            case ParamAddress::Kind::H: immediate[theta.i] = 1.0; break;
        }
        acc = step * acc + immediate;
        prod = step * prod;
    }

    CycleGradient out;
    const MatrixXd lhs = MatrixXd::Identity(m, m) - prod;
    Eigen::JacobiSVD<MatrixXd> svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(m - 1);
    if (smax <= 0.0 || smin / smax < tol.singular_tol) {
        out.at_dtb = true;
        out.dz = VectorXd::Constant(m, std::numeric_limits<double>::infinity());
        return out;
    }
    out.dz = svd.solve(acc);
    return out;
}

namespace {

std::vector<ParamAddress> default_trainable(const PlrnnParams& p) {
    std::vector<ParamAddress> out;
    const int m = p.m();
    for (int i = 0; i < m; ++i) out.push_back({ParamAddress::Kind::A, i, 0});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i != j) out.push_back({ParamAddress::Kind::W, i, j});
    for (int i = 0; i < m; ++i) out.push_back({ParamAddress::Kind::H, i, 0});
    return out;
}

}  // namespace

TrainingTrace train(const PwlSystem& sys0, const VectorXd& z0, const LossSpec& loss,
                    const OptimizerConfig& opt, const GtfConfig& gtf, GtfAnnealing annealing,
                    const std::vector<ParamAddress>& trainable) {
    PwlSystem sys = sys0;
    const auto coords = trainable.empty() ? default_trainable(sys.params) : trainable;

    TrainingTrace trace;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        GtfConfig eff = gtf;
        if (annealing == GtfAnnealing::linear)
            eff.alpha = gtf.alpha * (1.0 - static_cast<double>(epoch) / opt.epochs);
        const GradientResult g = bptt_gradient(sys, z0, loss, eff);
        trace.snapshots.push_back(sys.params);
        trace.losses.push_back(g.loss);
        trace.grad_norms.push_back(g.finite ? g.grad_norm() : std::numeric_limits<double>::infinity());
        if (!g.finite || !std::isfinite(g.loss)) {
            trace.truncated = true;
            trace.diagnostic = "non-finite loss at epoch " + std::to_string(epoch) +
                               " (step " + std::to_string(g.first_bad_step) + ")";
            break;
        }
        double scale = 1.0;
        if (opt.grad_clip > 0.0) {
            const double n = g.grad_norm();
            if (n > opt.grad_clip) scale = opt.grad_clip / n;
        }
        for (const auto& c : coords)
            c.set(sys.params, c.get(sys.params) - opt.lr * scale * c.get(g.grad));
    }
    return trace;
}

AlphaBound gtf_alpha_bound(const PlrnnParams& p) {
    MatrixXd a = MatrixXd::Zero(p.m(), p.m());
    a.diagonal() = p.a_diag;
    AlphaBound out;
    out.r = spectral_norm(a) + spectral_norm(p.w);
    out.alpha_star = out.r > 1.0 ? 1.0 - 1.0 / out.r : 0.0;
    return out;
}

LookaheadResult lookahead_probe(const PwlSystem& sys, const PlrnnParams& gradient, double scale,
                                int k_max, const SearchBudget& budget,
                                const ClassifyThresholds& th,
                                const std::vector<ParamAddress>& trainable) {
    PwlSystem stepped = sys;
    const auto coords = trainable.empty() ? default_trainable(sys.params) : trainable;
    for (const auto& c : coords)
        c.set(stepped.params, c.get(stepped.params) - scale * c.get(gradient));

    SearchBudget b1 = budget, b2 = budget;
    b2.rng_seed = rng::mix(budget.rng_seed, 0x10caULL);
    const CycleLibrary here = scyfi_find_all(sys, k_max, b1);
    const CycleLibrary there = scyfi_find_all(stepped, k_max, b2);

    LookaheadResult out;
    out.events = diff_library_pair(here, there, sys, stepped, th);
    out.would_bifurcate = !out.events.empty();
    return out;
}

void write_trace_jsonl(const TrainingTrace& trace, const std::string& snapshot_prefix,
                       std::ostream& out) {
    for (std::size_t e = 0; e < trace.snapshots.size(); ++e) {
        nlohmann::json j;
        j["epoch"] = e;
        j["loss"] = trace.losses[e];
        j["grad_norm"] = trace.grad_norms[e];
        j["snapshot"] = snapshot_prefix + std::to_string(e) + ".json";
        out << j.dump() << "\n";
    }
}

}  // namespace scyfi
