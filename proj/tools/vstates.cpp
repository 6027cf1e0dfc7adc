// vstates: doubly connected rotating V-state toolkit.
//
// Exit codes: 0 success; 2 no bifurcation at the requested (m, b);
// 3 trace stalled (partial outputs written); 4 malformed input file;
// 5 stored state violates structural invariants.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vstates/errors.hpp"
#include "vstates/io.hpp"
#include "vstates/reduction.hpp"

using nlohmann::json;
using namespace vstates;

namespace {

json spectrum_report(int m, double b) {
    json j;
    j["m"] = m;
    j["b"] = b;
    const double delta = discriminant(m, b);
    j["delta"] = delta;
    j["bstar"] = find_bstar(m);
    j["bifurcation_condition"] = bifurcation_condition(m, b);
    j["degenerate"] = std::abs(delta) < 1e-12;
    if (delta >= 0.0) {
        const EigenPair e = eigenvalues(m, b);
        j["lambda_minus"] = e.lambda_minus;
        j["lambda_plus"] = e.lambda_plus;
        j["omega_minus"] = e.omega_minus;
        j["omega_plus"] = e.omega_plus;
    }
    return j;
}

json coeffs_report(int m, double b, BranchSign sign) {
    const QuadraticForm q = quadratic_coeffs(m, b, sign);
    json j;
    j["m"] = m;
    j["b"] = b;
    j["sign"] = sign == BranchSign::plus ? "plus" : "minus";
    j["lambda_star"] = q.lambda_star;
    j["omega_star"] = 0.5 * (1.0 - q.lambda_star);
    j["p"] = q.p;
    j["a_m"] = q.a_m;
    j["c_m"] = q.c_m;
    j["d_m"] = q.d_m;
    j["K_m"] = q.K_m;
    j["beta_tilde"] = q.beta_tilde;
    j["alpha_hat"] = q.alpha_hat;
    if (std::abs(q.a_m) < 1e-10) {
        j["warning"] = "degenerate: a_m = 0 (b at the threshold b_m^*), no loop prediction";
    } else if (q.a_m > 0.0) {
        const EllipsePrediction e = ellipse_prediction(q);
        j["ellipse"] = {{"lambda_center", e.lambda_center},
                        {"omega_center", 0.5 * (1.0 - e.lambda_center)},
                        {"semi_lambda", e.semi_lambda},
                        {"semi_t", e.semi_t},
                        {"lambda_low", e.lambda_low()},
                        {"lambda_high", e.lambda_high()}};
    } else {
        j["warning"] = "a_m < 0: quadratic model predicts no loop at this b";
    }
    return j;
}

int run_trace(const RunConfig& cfg, bool quiet = false) {
    ContinuationContext ctx(cfg.m, cfg.b, cfg.sign, cfg.grid(), cfg.newton());
    TraceOptions opts;
    opts.ds0 = cfg.ds0;
    opts.max_steps = cfg.max_steps;
    const Branch br = trace_loop(ctx, opts);
    write_branch_csv(br, cfg.output + ".csv");
    write_branch_json(br, ctx.grid.modes, ctx.grid.nodes, cfg.output + ".json");
    json j;
    j["closed"] = br.closed;
    j["stop_reason"] = br.stop_reason;
    j["points"] = br.points.size();
    j["trivial_hits"] = br.trivial_hits;
    j["csv"] = cfg.output + ".csv";
    if (!quiet) std::cout << j.dump(2) << '\n';
    return (br.closed || br.trivial_hits.size() >= 2) ? 0 : 3;
}

int dispatch(const std::string& cmd, const RunConfig& cfg) {
    if (cmd == "spectrum") {
        if (discriminant(cfg.m, cfg.b) < 0.0) {
            std::cerr << "no bifurcation: Delta_" << cfg.m << "(" << cfg.b
                      << ") < 0 (b exceeds b_m^* = " << find_bstar(cfg.m) << ")\n";
            return 2;
        }
        std::cout << spectrum_report(cfg.m, cfg.b).dump(2) << '\n';
        return 0;
    }
    if (cmd == "bstar") {
        json j;
        j["m"] = cfg.m;
        j["bstar"] = find_bstar(cfg.m);
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    if (cmd == "coeffs") {
        std::cout << coeffs_report(cfg.m, cfg.b, cfg.sign).dump(2) << '\n';
        return 0;
    }
    if (cmd == "solve") {
        ContinuationContext ctx(cfg.m, cfg.b, cfg.sign, cfg.grid(), cfg.newton());
        const double t0 = cfg.t != 0.0 ? cfg.t : cfg.ds0;
        const BranchPoint pt = branch_switch(ctx, t0);
        const PatchState s = make_state(ctx, pt.lambda, pt.coeffs);
        const std::string path = cfg.state_file.empty() ? cfg.output + "_state.json"
                                                        : cfg.state_file;
        save_state(s, path);
        json j;
        j["lambda"] = pt.lambda;
        j["omega"] = pt.omega;
        j["t"] = pt.t;
        j["residual_sup"] = pt.residual_sup;
        j["state"] = path;
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    if (cmd == "trace") return run_trace(cfg);
    if (cmd == "verify") {
        const PatchState s = load_state(cfg.state_file);
        const SpectralGrid grid(cfg.modes, s.outer.fold, cfg.nodes);
        const ResidualVector r = eval_G(s, grid);
        json j;
        j["residual_sup"] = r.sup_norm;
        j["velocity_max_normal"] = velocity_check(s, cfg.density);
        j["lambda"] = s.lambda;
        j["omega"] = s.omega();
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    if (cmd == "sweep") {
        // independent traces over a b-range; each writes its own files
        json results = json::array();
        int worst = 0;
        const double b_lo = cfg.b, b_hi = find_bstar(cfg.m) - 1e-3;
        const int count = 4;
        for (int i = 0; i < count; ++i) {
            RunConfig c = cfg;
            c.b = b_lo + (b_hi - b_lo) * i / (count - 1);
            char tag[32];
            std::snprintf(tag, sizeof tag, "_b%.4f", c.b);
            c.output = cfg.output + tag;
            int rc = 0;
            try {
                rc = run_trace(c, true);
            } catch (const std::exception& e) {
                rc = 2;
                results.push_back({{"b", c.b}, {"error", e.what()}});
                worst = std::max(worst, rc);
                continue;
            }
            results.push_back({{"b", c.b}, {"exit", rc}, {"output", c.output + ".csv"}});
            worst = std::max(worst, rc);
        }
        std::cout << results.dump(2) << '\n';
        return worst;
    }
    std::cerr << "unknown command: " << cmd << '\n';
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"doubly connected rotating V-states: spectra, bifurcation "
                 "coefficients, Newton solves, and loop tracing"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path, sign_str = "plus";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-m,--m", cfg.m, "fold symmetry (>= 3)");
        sub->add_option("-b,--b", cfg.b, "inner radius parameter in (0,1)");
        sub->add_option("--sign", sign_str, "eigenvalue branch: plus|minus");
        sub->add_option("-N,--modes", cfg.modes, "retained sine modes");
        sub->add_option("-M,--nodes", cfg.nodes, "collocation nodes (0 = 4Nm)");
        sub->add_option("--newton-tol", cfg.newton_tol, "Newton residual tolerance");
        sub->add_option("--ds0", cfg.ds0, "initial arclength step");
        sub->add_option("--max-steps", cfg.max_steps, "continuation step budget");
        sub->add_option("--lambda", cfg.lambda, "rotation parameter");
        sub->add_option("-t,--t", cfg.t, "kernel amplitude");
        sub->add_option("--density", cfg.density, "velocity-check cells per direction");
        sub->add_option("-o,--output", cfg.output, "output file prefix");
        sub->add_option("--state", cfg.state_file, "state file path");
        sub->add_option("--config", config_path, "JSON config overriding flags");
    };

    for (const char* name : {"spectrum", "bstar", "coeffs", "solve", "trace", "verify", "sweep"})
        add_common(app.add_subcommand(name));

    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        if (sign_str == "plus") cfg.sign = BranchSign::plus;
        else if (sign_str == "minus") cfg.sign = BranchSign::minus;
        else throw std::domain_error("--sign must be plus or minus");
        if (!config_path.empty()) apply_config_file(cfg, config_path); // config wins over flags
        cfg.validate();
        return dispatch(cmd, cfg);
    } catch (const no_bifurcation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const invalid_state_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    } catch (const geometry_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
