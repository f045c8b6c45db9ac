#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "qpw/freq.hpp"
#include "qpw/trig.hpp"

namespace qpw {

// Ground-truth oracle: stiff integration of eps x'' + x' + eps g(x) =
// eps f(omega t), attractor identification and local-attractivity probes.

struct OdeState {
    double t = 0.0;
    double x = 0.0;
    double v = 0.0;
};

struct IntegratorConfig {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 1e-3;
    double h_min = 1e-13;
    double h_max = 1.0;
    long long max_steps = 200000000;
};

struct Trajectory {
    std::vector<OdeState> samples;
    long long steps = 0;
    long long rejected = 0;
};

// TR-BDF2 (one-step, two implicit stages with shared diagonal, stiffly
// accurate, L-stable, order 2 with an embedded third-order error
// estimate).  Steps are clipped so requested sample times are hit exactly.
Trajectory integrate(const Nonlinearity& g, const TrigSeries& f,
                     const FrequencyVector& omega, double eps, double x0,
                     double v0, double T, const IntegratorConfig& cfg,
                     double sample_dt);

// sup over samples with t >= T0 of |x(t) - reference(t)|.
double attractor_distance(const Trajectory& traj,
                          const std::function<double(double)>& reference,
                          double T0);

struct ProbeSample {
    double dx0 = 0.0, dv0 = 0.0;
    bool converged = false;
    bool integration_failed = false;
    double tail_distance = 0.0;   // sup |x - x_ref| over the trailing window
    double decay_exponent = 0.0;  // log-linear fit on the phase-space norm
};

struct AttractorReport {
    bool applicable = false;  // g'(c0) > 0 hypothesis
    double gprime_c0 = 0.0;
    double lambda_slow = 0.0;
    double lambda_fast = 0.0;
    int n_samples = 0;
    int n_converged = 0;
    int n_failed = 0;
    double worst_tail_distance = 0.0;
    double mean_decay_exponent = 0.0;
    double T_end = 0.0;
    double converge_tol = 0.0;
    std::vector<ProbeSample> samples;
};

struct ProbeConfig {
    double radius = 0.1;
    int n_samples = 20;
    std::uint64_t seed = 1;
    double T_end = 0.0;          // 0 => 100/eps
    double converge_tol = 1e-6;  // tail-distance threshold
    double sample_dt = 0.5;
    IntegratorConfig integ;
};

// Integrates seeded perturbations of (x0, v0) and compares against the
// trajectory from (x0, v0) itself at shared sample times.  Convergence is
// judged on the trailing 20% of the run; the decay exponent comes from a
// log-linear fit of the phase-space distance on the window
// [100*atol, radius/10].
AttractorReport attractivity_probe(const Nonlinearity& g, const TrigSeries& f,
                                   const FrequencyVector& omega, double eps,
                                   double x0, double v0, double gprime_c0,
                                   const ProbeConfig& cfg);

// Roots of eps*lambda^2 + lambda + eps*g'(c0) = 0, slow (largest real
// part) first.
std::pair<std::complex<double>, std::complex<double>> linearized_decay(
    double eps, double gprime_c0);

}  // namespace qpw
