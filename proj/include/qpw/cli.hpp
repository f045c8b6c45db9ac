#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpw/dynamics.hpp"
#include "qpw/series.hpp"
#include "qpw/trig.hpp"
#include "qpw/verify.hpp"

namespace qpw {

// Configuration-driven driver.  JSON schema is strict: unknown keys are
// rejected, defaults are materialized and echoed next to the outputs.

struct RunConfig {
    // problem
    int d = 1;
    std::vector<double> g_coeffs = {0.0, 0.0, 1.0};
    std::vector<std::pair<Mode, Complex>> f_modes = {
        {{0}, 1.0}, {{1}, 1.0}, {{-1}, 1.0}};
    std::vector<double> omega = {1.0};
    double c0_guess = 1.0;
    // series
    int K = 10;
    TruncPolicy trunc;
    // resum
    int L = 4, M = 4;
    double resum_eps = 0.05;
    double t0 = 50.0, t1 = 70.0, dt = 0.25;
    double quad_abs_tol = 1e-13, quad_rel_tol = 1e-12, pole_guard = 0.05;
    double rem_t = 0.0;
    int rem_N_min = 2, rem_N_max = 8, rem_eps_count = 8;
    double rem_eps_min = 1e-3, rem_eps_max = 3e-2;
    // freq
    int n_max = 12;
    double tau = 1.0;
    int dioph_N = 100;
    int check_range = 1 << 10;
    // dynamics
    double dyn_eps = 0.05;
    double T = 100.0, transient = 50.0, sample_dt = 0.5;
    IntegratorConfig integ;
    ProbeConfig probe;
    // diagrams
    int k_max = 7;
    // verify
    VerifyOptions verify;
    // output
    std::string output_dir = "out";
};

RunConfig load_config(const std::string& path);
// Parse from JSON text (used by tests); throws ConfigError on violations.
RunConfig parse_config(const std::string& json_text);
std::string dump_config(const RunConfig& cfg);  // fully resolved echo

TrigSeries forcing_series(const RunConfig& cfg);
FrequencyVector frequency(const RunConfig& cfg);

int cmd_series(const RunConfig& cfg);
int cmd_bryuno(const RunConfig& cfg);
int cmd_resum(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);

// Exit codes: 0 success, 2 validation, 3 numerical failure, 4 invariant
// failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace qpw
