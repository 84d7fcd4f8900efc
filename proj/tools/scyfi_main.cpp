// Command-line front end: locate fixed points and cycles, sweep parameter
// grids, validate against the closed-form 2-D oracle, benchmark scaling, and
// run the training demonstrations. All outputs are plain JSONL/CSV files.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scyfi/io.hpp"
#include "scyfi/oracle2d.hpp"
#include "scyfi/parallel.hpp"
#include "scyfi/rng.hpp"
#include "scyfi/search.hpp"
#include "scyfi/sweep.hpp"
#include "scyfi/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scyfi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitGuard = 3;
constexpr int kExitInternal = 4;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("parse error in " + path + ": " + e.what());
    }
    return j;
}

PwlSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open params file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_system_json(ss.str());
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return dir.empty() ? name : (fs::path(dir) / name).string();
}

struct CommonOpts {
    std::string out = ".";
    std::uint64_t seed = 0;
    int threads = 0;
    int k_max = 3;
    std::int64_t n_out = 0;  // 0 = per-order default
    std::int64_t n_in = 100;

    SearchBudget budget() const { return {n_out, n_in, seed}; }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_kmax = true) {
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "rng seed (all randomness derives from it)");
    cmd->add_option("--threads", o.threads, "worker threads (0 = SCYFI_THREADS or hardware)");
    if (with_kmax) cmd->add_option("--kmax", o.k_max, "max cycle order");
    cmd->add_option("--nout", o.n_out, "outer-loop budget (0 = coverage default)");
    cmd->add_option("--nin", o.n_in, "inner flip-loop budget");
}

// ---- find -------------------------------------------------------------------

int cmd_find(const std::string& params_path, const CommonOpts& o) {
    const PwlSystem sys = load_system(params_path);
    const CycleLibrary lib = scyfi_find_all(sys, o.k_max, o.budget());

    ensure_dir(o.out);
    write_library_jsonl(lib, join(o.out, "library.jsonl"));

    int n_fp_stable = 0, n_fp = 0, n_cycles = 0;
    std::printf("order  count  stable  unstable  marginal\n");
    for (const auto& [k, cycles] : lib.by_order) {
        if (cycles.empty()) continue;
        int ns = 0, nu = 0, nm = 0;
        for (const auto& c : cycles) {
            if (c.stability == Stability::stable) ++ns;
            else if (c.stability == Stability::unstable) ++nu;
            else ++nm;
        }
        std::printf("%5d  %5zu  %6d  %8d  %8d\n", k, cycles.size(), ns, nu, nm);
        if (k == 1) {
            n_fp = static_cast<int>(cycles.size());
            n_fp_stable = ns;
        } else {
            n_cycles += static_cast<int>(cycles.size());
        }
    }
    std::printf("%d stable fixed point%s of %d, %d cycle%s of order >= 2\n", n_fp_stable,
                n_fp_stable == 1 ? "" : "s", n_fp, n_cycles, n_cycles == 1 ? "" : "s");
    if (!lib.degenerate.empty())
        std::printf("%zu degenerate solve%s recorded (bifurcation loci)\n", lib.degenerate.size(),
                    lib.degenerate.size() == 1 ? "" : "s");
    std::printf("library written to %s\n", join(o.out, "library.jsonl").c_str());
    return kExitOk;
}

// ---- sweep ------------------------------------------------------------------

ScanSpec scan_spec_from_json(const json& j) {
    ScanSpec spec;
    const auto& map = j.at("map");
    spec.base.c = map.at("c").get<double>();
    spec.base.d = map.at("d").get<double>();
    spec.base.b_l = map.at("b_l").get<double>();
    spec.base.b_r = map.at("b_r").get<double>();
    spec.base.h1 = map.at("h1").get<double>();
    spec.base.h2 = map.value("h2", 0.0);
    spec.al_lo = j.at("al").at("lo").get<double>();
    spec.al_hi = j.at("al").at("hi").get<double>();
    spec.n_al = j.at("al").at("n").get<int>();
    spec.ar_lo = j.at("ar").at("lo").get<double>();
    spec.ar_hi = j.at("ar").at("hi").get<double>();
    spec.n_ar = j.at("ar").at("n").get<int>();
    return spec;
}

// SCYFI inventory of a pwl2d sweep in the oracle-CSV schema
void write_inventory_csv(const SweepResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "a_l,a_r,object_kind,exists,stable,n_coexisting_stable\n";
    char buf[64];
    for (int i = 0; i < res.shape[0]; ++i) {
        for (int j = 0; j < res.shape[1]; ++j) {
            const auto& lib = res.cell(i, j);
            bool exists[5] = {};
            bool stable[5] = {};
            for (const auto& [k, cycles] : lib.by_order) {
                if (k > 3) continue;
                for (const auto& c : cycles) {
                    const int ki = static_cast<int>(classify_cycle_kind(k, c.region_seq.codes));
                    exists[ki] = true;
                    stable[ki] = c.stability == Stability::stable;
                }
            }
            int n_stable = 0;
            for (const bool s : stable) n_stable += s ? 1 : 0;
            for (std::size_t ki = 0; ki < kAllObjectKinds.size(); ++ki) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g", res.axis0_values[i],
                              res.axis1_values[j]);
                out << buf << ',' << to_string(kAllObjectKinds[ki]) << ',' << (exists[ki] ? 1 : 0)
                    << ',' << (stable[ki] ? 1 : 0) << ',' << n_stable << "\n";
            }
        }
    }
}

int cmd_sweep(const std::string& spec_path, const CommonOpts& o) {
    const json j = load_json_file(spec_path);
    const std::string mode = j.value("mode", "params");
    const int k_max = j.value("kmax", o.k_max);
    ensure_dir(o.out);

    if (mode == "pwl2d") {
        const ScanSpec spec = scan_spec_from_json(j);
        const auto res = run_pwl2d_sweep(spec, k_max, o.budget(), {}, 20, o.threads);
        write_events_jsonl(res.events, join(o.out, "events.jsonl"));
        write_grid_csv(res, join(o.out, "grid.csv"));
        write_inventory_csv(res, join(o.out, "inventory.csv"));
        std::printf("%zu cells, %zu events, %zu on-manifold cells\n", res.cells.size(),
                    res.events.size(), res.on_manifold_cells.size());
        return kExitOk;
    }
    if (mode != "params")
        throw std::invalid_argument("sweep spec: unknown mode \"" + mode + "\"");

    SweepSpec spec;
    spec.base = parse_system_json(j.at("params").dump());
    for (const auto& ja : j.at("axes")) {
        SweepAxis ax;
        ax.target = ParamAddress::parse(ja.at("target").get<std::string>());
        ax.lo = ja.at("lo").get<double>();
        ax.hi = ja.at("hi").get<double>();
        ax.n_steps = ja.at("n").get<int>();
        spec.axes.push_back(ax);
    }
    spec.k_max = k_max;
    spec.budget = o.budget();
    const auto res = run_sweep(spec, o.threads);
    write_events_jsonl(res.events, join(o.out, "events.jsonl"));
    write_grid_csv(res, join(o.out, "grid.csv"));
    std::printf("%zu cells, %zu events, %zu on-manifold cells\n", res.cells.size(),
                res.events.size(), res.on_manifold_cells.size());
    for (const auto& e : res.events)
        std::printf("  %s order %d at %s = %.9g\n", to_string(e.kind), e.order,
                    spec.axes[e.axis].target.str().c_str(), e.location);
    return kExitOk;
}

// ---- oracle-check -------------------------------------------------------------

int cmd_oracle_check(const std::string& spec_path, const CommonOpts& o) {
    const json j = load_json_file(spec_path);
    const ScanSpec spec = scan_spec_from_json(j);
    const int k_max = std::min(3, j.value("kmax", o.k_max));
    ensure_dir(o.out);

    const auto cells = multistability_scan(spec, o.threads);
    write_scan_csv(cells, join(o.out, "oracle.csv"));

    const auto sweep = run_pwl2d_sweep(spec, k_max, o.budget(), {}, 20, o.threads);
    write_inventory_csv(sweep, join(o.out, "inventory.csv"));

    // cell-for-cell comparison of the five-object inventory
    int agree = 0, total = 0, straddle_ok = 0;
    std::vector<std::pair<int, int>> bad;
    for (const auto& cell : cells) {
        bool cell_ok = true;
        bool exists[5] = {}, stable[5] = {};
        const auto& lib = sweep.cell(cell.i, cell.j);
        for (const auto& [k, cycles] : lib.by_order) {
            if (k > 3) continue;
            for (const auto& c : cycles) {
                const int ki = static_cast<int>(classify_cycle_kind(k, c.region_seq.codes));
                exists[ki] = true;
                stable[ki] = c.stability == Stability::stable;
            }
        }
        for (std::size_t ki = 0; ki < kAllObjectKinds.size(); ++ki) {
            const auto& v = cell.verdicts[ki];
            if (v.on_curve || v.degenerate) continue;  // the locus itself
            if (v.exists != exists[ki] || v.stable != stable[ki]) cell_ok = false;
        }
        ++total;
        if (cell_ok) {
            ++agree;
        } else {
            // straddling check: does any neighbor's oracle verdict differ?
            bool straddles = false;
            for (const auto& other : cells) {
                if (std::abs(other.i - cell.i) + std::abs(other.j - cell.j) != 1) continue;
                for (std::size_t ki = 0; ki < kAllObjectKinds.size(); ++ki)
                    if (other.verdicts[ki].exists != cell.verdicts[ki].exists ||
                        other.verdicts[ki].stable != cell.verdicts[ki].stable)
                        straddles = true;
            }
            if (straddles) ++straddle_ok;
            bad.emplace_back(cell.i, cell.j);
        }
    }
    std::printf("inventory agreement: %d / %d cells (%.2f%%), %zu disagreements (%d straddling a curve)\n",
                agree, total, 100.0 * agree / std::max(1, total), bad.size(), straddle_ok);
    for (std::size_t b = 0; b < bad.size() && b < 20; ++b)
        std::printf("  disagreement at cell (%d, %d)\n", bad[b].first, bad[b].second);
    return kExitOk;
}

// ---- scaling ------------------------------------------------------------------

// systems of the one-border family carrying cycles of every order <= k_max
std::vector<Pwl2dParams> sample_cycle_rich_systems(int n_systems, int k_max, std::uint64_t seed) {
    std::vector<Pwl2dParams> out;
    Rng rng = Rng::from(seed, 0xbe9c);
    for (int attempt = 0; attempt < 4000 && static_cast<int>(out.size()) < n_systems; ++attempt) {
        Pwl2dParams p;
        p.a_l = rng.uniform(0.3, 0.95);
        p.a_r = rng.uniform(-3.0, -1.2);
        p.c = rng.uniform(-1, 1);
        p.d = rng.uniform(-0.5, 0.5);
        p.b_l = rng.uniform(-1, 1);
        p.b_r = rng.uniform(-1, 1);
        p.h1 = 1.0;
        if (std::abs(p.b_r) < 0.05) continue;
        const auto sys = pwl2d_to_system(p);
        CycleLibrary oracle;
        try {
            oracle = exhaustive_oracle(sys, k_max);
        } catch (const BudgetGuardError&) {
            break;
        }
        bool all = true;
        for (int k = 1; k <= k_max; ++k)
            if (oracle.order(k).empty()) all = false;
        if (all) out.push_back(p);
    }
    if (static_cast<int>(out.size()) < n_systems)
        throw std::runtime_error("could not sample enough cycle-rich systems");
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_scaling(const std::string& mode, int k_max, const std::vector<int>& dims,
                double init_scale, int n_systems, int n_seeds, const CommonOpts& o) {
    ensure_dir(o.out);
    const std::string path = join(o.out, "scaling.csv");
    std::ofstream csv(path);
    if (!csv) throw std::runtime_error("cannot write " + path);
    char buf[128];

    if (mode == "cycle-order") {
        const auto systems = sample_cycle_rich_systems(n_systems, k_max, o.seed);
        csv << "k,median_scyfi,n_measurements,m_existing_median,eq8_expected,eq8_median\n";
        for (int k = 1; k <= k_max; ++k) {
            std::vector<double> counts, ms;
            for (std::size_t s = 0; s < systems.size(); ++s) {
                const auto sys = pwl2d_to_system(systems[s]);
                const auto oracle = exhaustive_oracle(sys, k);
                ms.push_back(static_cast<double>(oracle.order(k).size()));
                std::vector<std::size_t> work(n_seeds);
                std::vector<double> per_seed(n_seeds);
                parallel_for(n_seeds, o.threads, [&](std::size_t seed_i) {
                    SearchBudget b = o.budget();
                    b.rng_seed = rng::mix(rng::mix(o.seed, s), seed_i);
                    CycleLibrary lib;
                    SearchOptions opt;
                    bool found = false;
                    opt.stop_on_find = [&](const CycleObject& c) {
                        if (c.order == k) found = true;
                        return found;
                    };
                    for (int kk = 1; kk <= k && !found; ++kk)
                        scyfi_find_k(sys, kk, lib, b, kk == k ? opt : SearchOptions{});
                    per_seed[seed_i] =
                        found ? static_cast<double>(lib.stats[k].sequences_until_first)
                              : std::numeric_limits<double>::infinity();
                });
                counts.insert(counts.end(), per_seed.begin(), per_seed.end());
            }
            const double m_med = median(ms);
            const auto eq8 = exhaustive_expectation(2, k, std::max<std::int64_t>(1, static_cast<std::int64_t>(m_med)));
            std::snprintf(buf, sizeof buf, "%d,%.17g,%zu,%.17g,%.17g,%lld\n", k, median(counts),
                          counts.size(), m_med, eq8.expected,
                          static_cast<long long>(eq8.median));
            csv << buf;
        }
    } else if (mode == "case1") {
        csv << "M,median_scyfi,n_measurements\n";
        for (const int m : dims) {
            std::vector<double> counts(static_cast<std::size_t>(n_systems) * n_seeds);
            parallel_for(counts.size(), o.threads, [&](std::size_t idx) {
                const std::size_t s = idx / n_seeds, seed_i = idx % n_seeds;
                const auto params = generate_case1_params(m, 0.1, rng::mix(o.seed, 7000 + s));
                PwlSystem sys(params);
                SearchBudget b = o.budget();
                b.rng_seed = rng::mix(rng::mix(o.seed, s), seed_i);
                CycleLibrary lib;
                SearchOptions opt;
                opt.stop_on_find = [](const CycleObject&) { return true; };
                scyfi_find_k(sys, 1, lib, b, opt);
                counts[idx] = lib.order(1).empty()
                                  ? std::numeric_limits<double>::infinity()
                                  : static_cast<double>(lib.stats[1].sequences_until_first);
            });
            std::snprintf(buf, sizeof buf, "%d,%.17g,%zu\n", m, median(counts), counts.size());
            csv << buf;
        }
    } else if (mode == "dimension") {
        csv << "M,init_scale,median_scyfi,n_measurements\n";
        for (const int m : dims) {
            std::vector<double> counts(static_cast<std::size_t>(n_systems) * n_seeds);
            parallel_for(counts.size(), o.threads, [&](std::size_t idx) {
                const std::size_t s = idx / n_seeds, seed_i = idx % n_seeds;
                Rng zr = Rng::from(o.seed, 8800 + s, m);
                VectorXd z_star(m);
                for (int i = 0; i < m; ++i) z_star[i] = zr.uniform(-1.0, 1.0);
                const auto emb =
                    embed_fixed_point(z_star, rng::mix(o.seed, 8900 + s), init_scale);
                if (!emb.converged) {
                    counts[idx] = std::numeric_limits<double>::infinity();
                    return;
                }
                PwlSystem sys(emb.params);
                SearchBudget b = o.budget();
                b.rng_seed = rng::mix(rng::mix(o.seed, s), seed_i);
                CycleLibrary lib;
                SearchOptions opt;
                bool hit = false;
                opt.stop_on_find = [&](const CycleObject& c) {
                    hit = (c.points[0] - z_star).norm() < 1e-6;
                    return hit;
                };
                scyfi_find_k(sys, 1, lib, b, opt);
                counts[idx] = hit ? static_cast<double>(lib.stats[1].sequences_examined)
                                  : std::numeric_limits<double>::infinity();
            });
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%zu\n", m, init_scale, median(counts),
                          counts.size());
            csv << buf;
        }
    } else {
        throw std::invalid_argument("scaling: mode must be cycle-order, case1, or dimension");
    }
    std::printf("scaling table written to %s\n", path.c_str());
    return kExitOk;
}

// ---- train --------------------------------------------------------------------

int cmd_train(const std::string& config_path, const CommonOpts& o) {
    const json j = load_json_file(config_path);
    PwlSystem sys = parse_system_json(j.at("params").dump());
    VectorXd z0(sys.m());
    {
        const auto& jz = j.at("z0");
        if (static_cast<int>(jz.size()) != sys.m())
            throw std::invalid_argument("train config: z0 must have M entries");
        for (int i = 0; i < sys.m(); ++i) z0[i] = jz.at(i).get<double>();
    }
    LossSpec loss;
    for (const auto& jt : j.at("targets")) {
        VectorXd t(sys.m());
        for (int i = 0; i < sys.m(); ++i) t[i] = jt.at(i).get<double>();
        loss.targets.push_back(std::move(t));
    }
    OptimizerConfig opt;
    opt.lr = j.value("lr", 1e-3);
    opt.epochs = j.value("epochs", 100);
    opt.grad_clip = j.value("grad_clip", 0.0);
    GtfConfig gtf{j.value("alpha", 0.0)};
    const GtfAnnealing annealing =
        j.value("annealing", "none") == std::string("linear") ? GtfAnnealing::linear
                                                              : GtfAnnealing::none;
    std::vector<ParamAddress> trainable;
    if (j.contains("trainable"))
        for (const auto& t : j.at("trainable"))
            trainable.push_back(ParamAddress::parse(t.get<std::string>()));

    const auto trace = train(sys, z0, loss, opt, gtf, annealing, trainable);

    ensure_dir(o.out);
    for (std::size_t e = 0; e < trace.snapshots.size(); ++e) {
        PwlSystem snap = sys;
        snap.params = trace.snapshots[e];
        save_system_file(snap, join(o.out, "snapshot_" + std::to_string(e) + ".json"));
    }
    std::ofstream tr(join(o.out, "trace.jsonl"));
    write_trace_jsonl(trace, "snapshot_", tr);
    std::printf("%zu epochs, final loss %.6g%s\n", trace.losses.size(),
                trace.losses.empty() ? 0.0 : trace.losses.back(),
                trace.truncated ? (" (truncated: " + trace.diagnostic + ")").c_str() : "");
    return kExitOk;
}

int cmd_analyze_trace(const std::string& trace_dir, const std::string& project,
                      const CommonOpts& o) {
    // read trace.jsonl for the snapshot order
    std::ifstream in(join(trace_dir, "trace.jsonl"));
    if (!in) throw std::invalid_argument("cannot open " + join(trace_dir, "trace.jsonl"));
    std::vector<PwlSystem> snapshots;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("trace.jsonl: ") + e.what());
        }
        snapshots.push_back(load_system(join(trace_dir, j.at("snapshot").get<std::string>())));
    }
    if (snapshots.size() < 2) throw std::invalid_argument("trace has fewer than 2 snapshots");

    const auto res = analyze_training_trace(snapshots, o.k_max, o.budget(), {}, 20, o.threads);
    ensure_dir(o.out);
    write_events_jsonl(res.events, join(o.out, "events.jsonl"));

    std::vector<double> xs(res.per_epoch.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
    VectorXd dir;
    if (!project.empty()) {
        std::stringstream ss(project);
        std::vector<double> vals;
        for (double v; ss >> v;) {
            vals.push_back(v);
            if (ss.peek() == ',') ss.ignore();
        }
        if (static_cast<int>(vals.size()) != snapshots[0].m())
            throw std::invalid_argument("--project must have M components");
        dir = Eigen::Map<VectorXd>(vals.data(), vals.size());
    }
    write_diagram_csv(res.per_epoch, xs, dir.size() ? &dir : nullptr,
                      join(o.out, "diagram.csv"));
    std::printf("%zu epochs analyzed, %zu events\n", res.per_epoch.size(), res.events.size());
    for (const auto& e : res.events)
        std::printf("  %s order %d between epochs %d and %d (at %.3f)\n", to_string(e.kind),
                    e.order, e.cell_a[0], e.cell_b[0], e.location);
    return kExitOk;
}

int cmd_alpha_bound(const std::string& params_path, const CommonOpts& o) {
    const PwlSystem sys = load_system(params_path);
    const auto b = gtf_alpha_bound(sys.params);
    std::printf("r = %.17g\nalpha_star = %.17g\n", b.r, b.alpha_star);
    ensure_dir(o.out);
    std::ofstream out(join(o.out, "alpha_bound.json"));
    json j;
    j["r"] = b.r;
    j["alpha_star"] = b.alpha_star;
    out << j.dump() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact fixed-point and cycle analysis for piecewise-linear RNNs"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string params_path, spec_path, config_path, trace_dir, project;
    std::string scaling_mode = "cycle-order";
    std::vector<int> dims = {5, 10, 20};
    double init_scale = 0.2;
    int n_systems = 5, n_seeds = 50;

    auto* find = app.add_subcommand("find", "locate all fixed points and cycles");
    find->add_option("--params", params_path, "params JSON file")->required();
    add_common(find, opts);

    auto* sweep = app.add_subcommand("sweep", "grid sweep with bifurcation events");
    sweep->add_option("--spec", spec_path, "sweep spec JSON file")->required();
    add_common(sweep, opts);

    auto* oracle = app.add_subcommand("oracle-check", "compare the search against the 2-D oracle");
    oracle->add_option("--spec", spec_path, "scan spec JSON file")->required();
    add_common(oracle, opts);

    auto* scaling = app.add_subcommand("scaling", "search-effort benchmarks");
    scaling->add_option("--mode", scaling_mode, "cycle-order | case1 | dimension");
    scaling->add_option("--dims", dims, "dimensions for case1/dimension modes");
    scaling->add_option("--init-scale", init_scale, "embedding init scale (dimension mode)");
    scaling->add_option("--systems", n_systems, "number of systems");
    scaling->add_option("--seeds", n_seeds, "seeds per system");
    add_common(scaling, opts);

    auto* tr = app.add_subcommand("train", "SGD training demo producing a trace");
    tr->add_option("--config", config_path, "training config JSON")->required();
    add_common(tr, opts, false);

    auto* an = app.add_subcommand("analyze-trace", "bifurcation analysis of a training trace");
    an->add_option("--trace", trace_dir, "directory containing trace.jsonl + snapshots")
        ->required();
    an->add_option("--project", project, "comma-separated direction for the diagram projection");
    add_common(an, opts);

    auto* ab = app.add_subcommand("alpha-bound", "GTF alpha threshold for a parameter set");
    ab->add_option("--params", params_path, "params JSON file")->required();
    add_common(ab, opts, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (find->parsed()) return cmd_find(params_path, opts);
        if (sweep->parsed()) return cmd_sweep(spec_path, opts);
        if (oracle->parsed()) return cmd_oracle_check(spec_path, opts);
        if (scaling->parsed())
            return cmd_scaling(scaling_mode, opts.k_max, dims, init_scale, n_systems, n_seeds,
                               opts);
        if (tr->parsed()) return cmd_train(config_path, opts);
        if (an->parsed()) return cmd_analyze_trace(trace_dir, project, opts);
        if (ab->parsed()) return cmd_alpha_bound(params_path, opts);
    } catch (const BudgetGuardError& e) {
        std::fprintf(stderr, "budget guard: %s\n", e.what());
        return kExitGuard;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    }
    return kExitOk;
}
