#pragma once

#include <string>
#include <vector>

#include "scyfi/sweep.hpp"

namespace scyfi {

// full-state targets under the identity observation model; squared error
// summed over time and components
struct LossSpec {
    std::vector<VectorXd> targets;  // compared against z_1..z_T

    int horizon() const { return static_cast<int>(targets.size()); }
    void validate(int m) const;  // T >= 2, dimensions match
};

// teacher forcing with data-inferred states: the forward pass feeds
// (1-alpha) z_t + alpha target_t into the next step, and every Jacobian picks
// up a factor (1-alpha). alpha = 0 is plain BPTT.
struct GtfConfig {
    double alpha = 0.0;
};

struct GradientResult {
    PlrnnParams grad;  // same shapes as the parameters
    double loss = 0.0;
    bool finite = true;
    int first_bad_step = -1;  // step at which the trajectory left the finite range

    double grad_norm() const;
    VectorXd flatten() const;  // a_diag, then W row-major, then h
};

GradientResult bptt_gradient(const PwlSystem& sys, const VectorXd& z0, const LossSpec& loss,
                             const GtfConfig& gtf = {},
                             double divergence_threshold = kDivergenceThreshold);

// d z*_1 / d theta for a verified cycle: (I - prod J)^{-1} times the
// accumulated immediate partial of the k-step map.
struct CycleGradient {
    VectorXd dz;
    bool at_dtb = false;  // (I - prod J) numerically singular
};

CycleGradient cycle_gradient(const PwlSystem& sys, const CycleObject& cycle,
                             const ParamAddress& theta, const Tolerances& tol = {});

// ---- training --------------------------------------------------------------

struct OptimizerConfig {
    double lr = 1e-3;
    int epochs = 100;
    double grad_clip = 0.0;  // 0 disables clipping
};

enum class GtfAnnealing { none, linear };

struct TrainingTrace {
    std::vector<PlrnnParams> snapshots;  // parameters each epoch's gradient was taken at
    std::vector<double> losses;
    std::vector<double> grad_norms;
    bool truncated = false;
    std::string diagnostic;
};

// plain SGD; `trainable` selects the coordinates that move (empty = all of
// a_diag and h plus the off-diagonal of W)
TrainingTrace train(const PwlSystem& sys, const VectorXd& z0, const LossSpec& loss,
                    const OptimizerConfig& opt, const GtfConfig& gtf = {},
                    GtfAnnealing annealing = GtfAnnealing::none,
                    const std::vector<ParamAddress>& trainable = {});

// r = ||A|| + ||W|| and the GTF threshold 1 - 1/r: any alpha above it keeps
// every n-fold GTF Jacobian product strictly inside the unit disc.
struct AlphaBound {
    double r = 0.0;
    double alpha_star = 0.0;
};

AlphaBound gtf_alpha_bound(const PlrnnParams& p);

// probes the library at params and at params - scale * gradient
struct LookaheadResult {
    bool would_bifurcate = false;
    std::vector<BifurcationEvent> events;
};

LookaheadResult lookahead_probe(const PwlSystem& sys, const PlrnnParams& gradient, double scale,
                                int k_max, const SearchBudget& budget,
                                const ClassifyThresholds& th = {},
                                const std::vector<ParamAddress>& trainable = {});

// trace export: one JSON line per epoch {epoch, loss, grad_norm, snapshot}
void write_trace_jsonl(const TrainingTrace& trace, const std::string& snapshot_prefix,
                       std::ostream& out);

}  // namespace scyfi
