#pragma once

#include <string>

#include "vstates/continuation.hpp"

namespace vstates {

/// Command parameters with the documented defaults; any field can be
/// overridden by flags or by a JSON config file.
struct RunConfig {
    int m = 4;
    double b = 0.63;
    BranchSign sign = BranchSign::plus;
    int modes = 64;   // N
    int nodes = 0;    // M, 0 -> 4 N m
    double newton_tol = 1e-12;
    double ds0 = 1e-3;
    int max_steps = 5000;
    double lambda = 0.0;   // for solve/verify style commands
    double t = 0.0;        // target amplitude for solve
    int density = 400;     // velocity_check grid
    std::string output = "branch";
    std::string state_file;

    void validate() const; // throws std::domain_error
    SpectralGrid grid() const { return SpectralGrid(modes, m, nodes); }
    NewtonOptions newton() const { return NewtonOptions{newton_tol, 40, 1e-7}; }
};

/// Merge a JSON config file into cfg (unknown keys rejected).
/// Throws io_error on unreadable/malformed input.
void apply_config_file(RunConfig& cfg, const std::string& path);

/// 17-significant-digit JSON persistence of a PatchState.
/// load_state throws io_error (malformed) or invalid_state_error /
/// geometry_error (invariant violations) — never returns a bad state.
void save_state(const PatchState& state, const std::string& path);
PatchState load_state(const std::string& path);

/// Branch CSV: header index,lambda,omega,t,a_1_1,a_2_1,residual_sup; one row
/// per accepted point, 17 significant digits, LF endings.
void write_branch_csv(const Branch& br, const std::string& path);

/// JSON sidecar with full coefficient vectors and run metadata; the layout is
/// published in schemas/branch.schema.json.
void write_branch_json(const Branch& br, int modes, int nodes, const std::string& path);

std::string format_real(double x); // shortest-round-trip style %.17g

} // namespace vstates
