#include "scyfi/io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scyfi {

namespace {

using nlohmann::json;

Stability stability_from_string(const std::string& s) {
    if (s == "stable") return Stability::stable;
    if (s == "unstable") return Stability::unstable;
    if (s == "marginal") return Stability::marginal;
    throw std::invalid_argument("library jsonl: unknown stability \"" + s + "\"");
}

}  // namespace

std::string cycle_to_json(const CycleObject& c) {
    json j;
    j["order"] = c.order;
    json pts = json::array();
    for (const auto& p : c.points)
        pts.push_back(std::vector<double>(p.data(), p.data() + p.size()));
    j["points"] = pts;
    json codes = json::array();
    for (const auto code : c.region_seq.codes) {
        json bits = json::array();
        for (int m = 0; m < c.region_seq.m; ++m) bits.push_back(static_cast<int>((code >> m) & 1ULL));
        codes.push_back(bits);
    }
    j["codes"] = codes;
    json eig = json::array();
    for (int i = 0; i < c.eigenvalues.size(); ++i)
        eig.push_back({c.eigenvalues[i].real(), c.eigenvalues[i].imag()});
    j["eigenvalues"] = eig;
    j["stability"] = to_string(c.stability);
    j["max_abs_eig"] = c.max_abs_eig;
    return j.dump();
}

CycleObject cycle_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("library jsonl: parse error: ") + e.what());
    }
    CycleObject c;
    c.order = j.at("order").get<int>();
    for (const auto& jp : j.at("points")) {
        VectorXd p(jp.size());
        for (std::size_t i = 0; i < jp.size(); ++i) p[static_cast<int>(i)] = jp.at(i).get<double>();
        c.points.push_back(std::move(p));
    }
    const auto& jc = j.at("codes");
    c.region_seq.codes.resize(jc.size());
    c.region_seq.m = c.points.empty() ? 0 : static_cast<int>(c.points[0].size());
    for (std::size_t l = 0; l < jc.size(); ++l) {
        std::uint64_t bits = 0;
        for (std::size_t m = 0; m < jc.at(l).size(); ++m)
            if (jc.at(l).at(m).get<int>() != 0) bits |= (1ULL << m);
        c.region_seq.codes[l] = bits;
    }
    const auto& je = j.at("eigenvalues");
    c.eigenvalues.resize(je.size());
    for (std::size_t i = 0; i < je.size(); ++i)
        c.eigenvalues[static_cast<int>(i)] = {je.at(i).at(0).get<double>(), je.at(i).at(1).get<double>()};
    c.stability = stability_from_string(j.at("stability").get<std::string>());
    c.max_abs_eig = j.at("max_abs_eig").get<double>();
    return c;
}

void write_library_jsonl(const CycleLibrary& lib, std::ostream& out) {
    for (const auto& [k, cycles] : lib.by_order)
        for (const auto& c : cycles) out << cycle_to_json(c) << "\n";
}

void write_library_jsonl(const CycleLibrary& lib, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_library_jsonl(lib, out);
}

CycleLibrary read_library_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    CycleLibrary lib;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CycleObject c = cycle_from_json(line);
        lib.by_order[c.order].push_back(std::move(c));
    }
    return lib;
}

}  // namespace scyfi
