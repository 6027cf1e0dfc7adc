#include "vstates/io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "vstates/errors.hpp"

namespace vstates {

using nlohmann::json;

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void RunConfig::validate() const {
    if (m < 3) throw std::domain_error("config: m must be >= 3");
    if (!(b > 0.0 && b < 1.0)) throw std::domain_error("config: b must lie in (0,1)");
    if (modes < 1 || modes > 128) throw std::domain_error("config: modes must lie in [1,128]");
    if (nodes != 0 && nodes < 4 * modes * m)
        throw std::domain_error("config: nodes must be 0 (auto) or >= 4*N*m");
    if (!(newton_tol > 0.0)) throw std::domain_error("config: newton_tol must be positive");
    if (!(ds0 > 0.0)) throw std::domain_error("config: ds0 must be positive");
    if (max_steps < 1) throw std::domain_error("config: max_steps must be positive");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error("malformed config JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw io_error("config JSON must be an object");
    for (const auto& [key, val] : j.items()) {
        try {
            if (key == "m") cfg.m = val.get<int>();
            else if (key == "b") cfg.b = val.get<double>();
            else if (key == "sign") {
                const auto s = val.get<std::string>();
                if (s == "plus") cfg.sign = BranchSign::plus;
                else if (s == "minus") cfg.sign = BranchSign::minus;
                else throw io_error("config: sign must be \"plus\" or \"minus\"");
            } else if (key == "modes") cfg.modes = val.get<int>();
            else if (key == "nodes") cfg.nodes = val.get<int>();
            else if (key == "newton_tol") cfg.newton_tol = val.get<double>();
            else if (key == "ds0") cfg.ds0 = val.get<double>();
            else if (key == "max_steps") cfg.max_steps = val.get<int>();
            else if (key == "lambda") cfg.lambda = val.get<double>();
            else if (key == "t") cfg.t = val.get<double>();
            else if (key == "density") cfg.density = val.get<int>();
            else if (key == "output") cfg.output = val.get<std::string>();
            else if (key == "state_file") cfg.state_file = val.get<std::string>();
            else throw io_error("config: unknown key \"" + key + "\"");
        } catch (const json::exception& e) {
            throw io_error("config key \"" + key + "\": " + e.what());
        }
    }
}

void save_state(const PatchState& state, const std::string& path) {
    json j;
    j["m"] = state.outer.fold;
    j["b"] = state.b;
    j["lambda"] = state.lambda;
    j["omega"] = state.omega();
    j["outer_coeffs"] = state.outer.coeffs;
    j["inner_coeffs"] = state.inner.coeffs;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write state file: " + path);
    out << j.dump(2) << '\n';
}

PatchState load_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open state file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error("malformed state JSON: " + std::string(e.what()));
    }
    PatchState s;
    try {
        const int m = j.at("m").get<int>();
        s.b = j.at("b").get<double>();
        s.lambda = j.at("lambda").get<double>();
        s.outer.fold = m;
        s.outer.lead = 1.0;
        s.outer.coeffs = j.at("outer_coeffs").get<std::vector<double>>();
        s.inner.fold = m;
        s.inner.lead = s.b;
        s.inner.coeffs = j.at("inner_coeffs").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw io_error("state JSON missing/invalid field: " + std::string(e.what()));
    }
    if (s.outer.coeffs.size() != s.inner.coeffs.size())
        throw invalid_state_error("state: coefficient vectors differ in length");
    s.validate();
    return s;
}

void write_branch_csv(const Branch& br, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // binary: LF endings everywhere
    if (!out) throw io_error("cannot write CSV: " + path);
    out << "index,lambda,omega,t,a_1_1,a_2_1,residual_sup\n";
    for (std::size_t i = 0; i < br.points.size(); ++i) {
        const BranchPoint& p = br.points[i];
        out << i << ',' << format_real(p.lambda) << ',' << format_real(p.omega) << ','
            << format_real(p.t) << ',' << format_real(p.coeffs[0]) << ','
            << format_real(p.coeffs[1]) << ',' << format_real(p.residual_sup) << '\n';
    }
}

void write_branch_json(const Branch& br, int modes, int nodes, const std::string& path) {
    json j;
    j["m"] = br.m;
    j["b"] = br.b;
    j["N"] = modes;
    j["M"] = nodes;
    j["sign"] = br.origin_sign == BranchSign::plus ? "plus" : "minus";
    j["closed"] = br.closed;
    j["stop_reason"] = br.stop_reason;
    j["trivial_hits"] = br.trivial_hits;
    json pts = json::array();
    for (const auto& p : br.points) {
        pts.push_back({{"lambda", p.lambda},
                       {"omega", p.omega},
                       {"t", p.t},
                       {"arclength", p.arclength},
                       {"residual_sup", p.residual_sup},
                       {"residual_fine", p.residual_fine},
                       {"coeffs", p.coeffs}});
    }
    j["points"] = std::move(pts);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write branch JSON: " + path);
    out << j.dump(2) << '\n';
}

} // namespace vstates
