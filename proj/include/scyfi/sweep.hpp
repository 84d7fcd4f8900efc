#pragma once

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scyfi/oracle2d.hpp"
#include "scyfi/search.hpp"

namespace scyfi {

// address of one scalar inside (A, W, h)
struct ParamAddress {
    enum class Kind { A, W, H };
    Kind kind = Kind::A;
    int i = 0, j = 0;  // j only for W

    double get(const PlrnnParams& p) const;
    void set(PlrnnParams& p, double v) const;
    std::string str() const;                          // "A[i]", "W[i,j]", "h[i]"
    static ParamAddress parse(const std::string& s);  // throws on bad syntax
    bool operator==(const ParamAddress& o) const {
        return kind == o.kind && i == o.i && j == o.j;
    }
};

struct SweepAxis {
    ParamAddress target;
    double lo = 0, hi = 1;
    int n_steps = 2;
};

struct ClassifyThresholds {
    double dtb_norm_threshold = 1e6;
    double eig_tol = 5e-2;
    double bcb_tol = 1e-6;  // scaled by the local point scale
};

struct SweepSpec {
    PwlSystem base;
    std::vector<SweepAxis> axes;  // 1 or 2, distinct targets
    int k_max = 3;
    SearchBudget budget;
    int refine_steps = 20;  // bisections of a straddling interval before classifying
    ClassifyThresholds thresholds;

    void validate() const;
};

enum class EventKind { DTB, BCB, DFB, CB, appear, disappear, stability_change };
const char* to_string(EventKind k);

struct EventEvidence {
    double max_point_norm = 0;
    double min_abs_component = 0;
    std::complex<double> eig_near{0, 0};
};

struct BifurcationEvent {
    std::array<int, 2> cell_a{0, 0};
    std::array<int, 2> cell_b{0, 0};
    int axis = 0;
    double location = 0;  // refined axis value (epoch fraction for traces)
    int order = 0;
    RegionSequence object_seq;
    EventKind kind = EventKind::appear;
    EventEvidence evidence;
};

struct SweepResult {
    std::vector<SweepAxis> axes;
    std::array<int, 2> shape{1, 1};
    std::vector<double> axis0_values, axis1_values;
    std::vector<CycleLibrary> cells;  // row-major: i * shape[1] + j
    std::vector<BifurcationEvent> events;
    std::vector<std::array<int, 2>> on_manifold_cells;

    const CycleLibrary& cell(int i, int j) const { return cells[i * shape[1] + j]; }
};

SweepResult run_sweep(const SweepSpec& spec, int threads = 0);

// Diffs two libraries computed at two parameter sets, refining along the
// straight segment between them (the machinery behind sweeps and traces).
std::vector<BifurcationEvent> diff_library_pair(const CycleLibrary& lib_a,
                                                const CycleLibrary& lib_b, const PwlSystem& sys_a,
                                                const PwlSystem& sys_b,
                                                const ClassifyThresholds& th = {},
                                                int refine_steps = 20);

// Region-sequence search over a grid of the one-border 2-D family, events via
// the same diff/refine machinery; the axes are (a_l, a_r).
SweepResult run_pwl2d_sweep(const ScanSpec& spec, int k_max, const SearchBudget& budget,
                            const ClassifyThresholds& th = {}, int refine_steps = 20,
                            int threads = 0);

// Classification at the (refined) locus. One side may be absent, not both:
// DTB (escaping norm, eigenvalue at +1) and BCB (component on the border)
// refine appear/disappear; DFB (eigenvalue at -1) and CB (complex pair on the
// unit circle) refine a stability change.
EventKind classify_event(const CycleObject* before, const CycleObject* after,
                         const ClassifyThresholds& th = {});

// ---- training traces -------------------------------------------------------

struct TraceAnalysis {
    std::vector<CycleLibrary> per_epoch;
    std::vector<BifurcationEvent> events;  // cell indices are epoch indices
};

// Epochs form a 1-D sweep; refinement interpolates parameters linearly
// between consecutive snapshots.
TraceAnalysis analyze_training_trace(const std::vector<PwlSystem>& snapshots, int k_max,
                                     const SearchBudget& budget,
                                     const ClassifyThresholds& th = {}, int refine_steps = 20,
                                     int threads = 0);

// ---- exports ---------------------------------------------------------------

void write_events_jsonl(const std::vector<BifurcationEvent>& events, std::ostream& out);
void write_events_jsonl(const std::vector<BifurcationEvent>& events, const std::string& path);
std::vector<BifurcationEvent> read_events_jsonl(std::istream& in);
std::vector<BifurcationEvent> read_events_jsonl(const std::string& path);

// cell coords, n_stable, n_unstable, orders present
void write_grid_csv(const SweepResult& result, std::ostream& out);
void write_grid_csv(const SweepResult& result, const std::string& path);

// one row per (x, object, point): x, order, stable, z components, optional
// projection onto a caller-supplied direction
void write_diagram_csv(const std::vector<CycleLibrary>& libraries,
                       const std::vector<double>& x_values, const VectorXd* projection,
                       std::ostream& out);
void write_diagram_csv(const std::vector<CycleLibrary>& libraries,
                       const std::vector<double>& x_values, const VectorXd* projection,
                       const std::string& path);

}  // namespace scyfi
