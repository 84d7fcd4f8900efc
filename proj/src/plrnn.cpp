#include "scyfi/plrnn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scyfi {

void PlrnnParams::validate(bool require_zero_w_diag) const {
    const int mm = m();
    if (mm < 1) throw std::invalid_argument("params: M must be >= 1");
    if (mm > 64) throw std::invalid_argument("params: M > 64 not supported");
    if (w.rows() != mm || w.cols() != mm)
        throw std::invalid_argument("params: W must be MxM");
    if (h.size() != mm) throw std::invalid_argument("params: h must have length M");
    if (require_zero_w_diag && mm >= 2) {
        for (int i = 0; i < mm; ++i)
            if (w(i, i) != 0.0)
                throw std::invalid_argument("params: W diagonal must be exactly zero");
    }
}

std::uint64_t PwlSystem::effective_border_mask() const {
    std::uint64_t mask = 0;
    const int mm = m();
    for (int j = 0; j < mm; ++j) {
        if (!unit(j).has_border()) continue;
        bool col_nonzero = false;
        for (int i = 0; i < mm; ++i)
            if (params.w(i, j) != 0.0) { col_nonzero = true; break; }
        if (col_nonzero) mask |= (1ULL << j);
    }
    return mask;
}

bool RegionSequence::is_constant() const {
    for (const auto& c : codes)
        if (c != codes.front()) return false;
    return true;
}

void RegionSequence::validate() const {
    if (codes.empty()) throw std::invalid_argument("region sequence: empty");
    if (codes.size() >= 2 && is_constant())
        throw std::invalid_argument(
            "region sequence: constant sequences admit no k>=2 cycle");
}

int RegionSequence::canonical_shift() const {
    const int k = order();
    int best = 0;
    for (int s = 1; s < k; ++s) {
        for (int i = 0; i < k; ++i) {
            const std::uint64_t a = codes[(s + i) % k];
            const std::uint64_t b = codes[(best + i) % k];
            if (a < b) { best = s; break; }
            if (a > b) break;
        }
    }
    return best;
}

RegionSequence RegionSequence::canonical() const {
    const int k = order();
    const int s = canonical_shift();
    RegionSequence out;
    out.m = m;
    out.codes.resize(k);
    for (int i = 0; i < k; ++i) out.codes[i] = codes[(s + i) % k];
    return out;
}

bool same_up_to_rotation(const RegionSequence& a, const RegionSequence& b) {
    if (a.codes.size() != b.codes.size() || a.m != b.m) return false;
    return a.canonical().codes == b.canonical().codes;
}

RegionCode region_of(const VectorXd& z, double border_eps) {
    RegionCode code;
    code.m = static_cast<int>(z.size());
    for (int i = 0; i < code.m; ++i) {
        if (std::abs(z[i]) <= border_eps)
            code.on_border |= (1ULL << i);
        else if (z[i] > 0.0)
            code.bits |= (1ULL << i);
    }
    return code;
}

MatrixXd step_matrix(const PwlSystem& sys, std::uint64_t code_bits) {
    const int mm = sys.m();
    MatrixXd out = sys.params.w;
    for (int j = 0; j < mm; ++j) {
        const Activation a = sys.unit(j);
        const double slope = (code_bits >> j) & 1ULL ? a.s_pos : a.s_neg;
        out.col(j) *= slope;
    }
    out.diagonal() += sys.params.a_diag;
    return out;
}

VectorXd apply_map(const PwlSystem& sys, const VectorXd& z) {
    const int mm = sys.m();
    VectorXd phi(mm);
    for (int i = 0; i < mm; ++i) {
        const Activation a = sys.unit(i);
        phi[i] = (z[i] > 0.0 ? a.s_pos : a.s_neg) * z[i];
    }
    return sys.params.a_diag.cwiseProduct(z) + sys.params.w * phi + sys.params.h;
}

Trajectory iterate(const PwlSystem& sys, const VectorXd& z0, int t,
                   double divergence_threshold) {
    Trajectory traj;
    traj.states.reserve(t + 1);
    traj.states.push_back(z0);
    VectorXd z = z0;
    for (int i = 1; i <= t; ++i) {
        z = apply_map(sys, z);
        if (!z.allFinite() || z.cwiseAbs().maxCoeff() > divergence_threshold) {
            traj.diverged = true;
            traj.last_finite = i - 1;
            return traj;
        }
        traj.states.push_back(z);
    }
    traj.last_finite = static_cast<int>(traj.states.size()) - 1;
    return traj;
}

AffineComposition compose(const PwlSystem& sys, const RegionSequence& seq) {
    const int mm = sys.m();
    AffineComposition comp;
    comp.p = MatrixXd::Identity(mm, mm);
    comp.q = VectorXd::Zero(mm);
    for (const std::uint64_t code : seq.codes) {
        const MatrixXd step = step_matrix(sys, code);
        comp.p = step * comp.p;
        comp.q = step * comp.q + sys.params.h;
    }
    return comp;
}

double spectral_norm(const MatrixXd& a) {
    return Eigen::JacobiSVD<MatrixXd>(a).singularValues()(0);
}

// ---- serialization -------------------------------------------------------

namespace {

using nlohmann::json;

PlrnnParams params_from_json(const json& j) {
    PlrnnParams p;
    if (!j.contains("M")) throw std::invalid_argument("params json: missing field \"M\"");
    const int mm = j.at("M").get<int>();
    if (mm < 1) throw std::invalid_argument("params json: field \"M\" must be >= 1");
    if (!j.contains("A")) throw std::invalid_argument("params json: missing field \"A\"");
    if (!j.contains("W")) throw std::invalid_argument("params json: missing field \"W\"");
    if (!j.contains("h")) throw std::invalid_argument("params json: missing field \"h\"");

    const auto& ja = j.at("A");
    const auto& jw = j.at("W");
    const auto& jh = j.at("h");
    if (static_cast<int>(ja.size()) != mm)
        throw std::invalid_argument("params json: field \"A\" must have M entries");
    if (static_cast<int>(jw.size()) != mm)
        throw std::invalid_argument("params json: field \"W\" must have M rows");
    if (static_cast<int>(jh.size()) != mm)
        throw std::invalid_argument("params json: field \"h\" must have M entries");

    p.a_diag.resize(mm);
    p.h.resize(mm);
    p.w.resize(mm, mm);
    for (int i = 0; i < mm; ++i) {
        p.a_diag[i] = ja.at(i).get<double>();
        p.h[i] = jh.at(i).get<double>();
        const auto& row = jw.at(i);
        if (static_cast<int>(row.size()) != mm)
            throw std::invalid_argument("params json: field \"W\" rows must have M entries");
        for (int k = 0; k < mm; ++k) p.w(i, k) = row.at(k).get<double>();
    }
    if (mm >= 2) {
        for (int i = 0; i < mm; ++i)
            if (p.w(i, i) != 0.0)
                throw std::invalid_argument("params json: field \"W\" diagonal must be zero");
    }
    return p;
}

json params_to_json_obj(const PlrnnParams& p) {
    json j;
    const int mm = p.m();
    j["M"] = mm;
    j["A"] = std::vector<double>(p.a_diag.data(), p.a_diag.data() + mm);
    j["h"] = std::vector<double>(p.h.data(), p.h.data() + mm);
    json rows = json::array();
    for (int i = 0; i < mm; ++i) {
        json row = json::array();
        for (int k = 0; k < mm; ++k) row.push_back(p.w(i, k));
        rows.push_back(row);
    }
    j["W"] = rows;
    return j;
}

}  // namespace

PlrnnParams parse_params_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("params json: parse error: ") + e.what());
    }
    return params_from_json(j);
}

PwlSystem parse_system_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("params json: parse error: ") + e.what());
    }
    PwlSystem sys(params_from_json(j));
    if (j.contains("activations")) {
        const auto& ja = j.at("activations");
        if (static_cast<int>(ja.size()) != sys.m())
            throw std::invalid_argument("params json: \"activations\" must have M entries");
        sys.units.resize(sys.m());
        for (int i = 0; i < sys.m(); ++i) {
            sys.units[i].s_neg = ja.at(i).at(0).get<double>();
            sys.units[i].s_pos = ja.at(i).at(1).get<double>();
        }
    }
    return sys;
}

std::string params_to_json(const PlrnnParams& p) { return params_to_json_obj(p).dump(); }

std::string system_to_json(const PwlSystem& s) {
    json j = params_to_json_obj(s.params);
    if (!s.units.empty()) {
        json acts = json::array();
        for (const auto& a : s.units) acts.push_back({a.s_neg, a.s_pos});
        j["activations"] = acts;
    }
    return j.dump();
}

PwlSystem load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open params file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_system_json(ss.str());
}

void save_system_file(const PwlSystem& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write params file: " + path);
    out << system_to_json(s) << "\n";
}

}  // namespace scyfi
