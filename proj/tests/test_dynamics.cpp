#include <doctest.h>

#include <cmath>

#include "qpw/dynamics.hpp"
#include "qpw/series.hpp"
#include "qpw/verify.hpp"

using namespace qpw;

TEST_SUITE_BEGIN("dynamics");

TEST_CASE("constant forcing holds the equilibrium") {
    Nonlinearity sq = Nonlinearity::polynomial({0, 0, 1});
    TrigSeries fconst(1);
    fconst.set({0}, 1.0);
    FrequencyVector omega({1.0});
    IntegratorConfig cfg;
    cfg.h_max = 10.0;
    Trajectory traj =
        integrate(sq, fconst, omega, 0.05, 1.0, 0.0, 1000.0, cfg, 5.0);
    double worst = attractor_distance(traj, [](double) { return 1.0; }, 0.0);
    CHECK(worst <= cfg.atol);
}

TEST_CASE("linear closed form g=0, f=0") {
    Nonlinearity zero = Nonlinearity::polynomial({0.0});
    TrigSeries fzero(1);
    FrequencyVector omega({1.0});
    const double eps = 0.07;
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    Trajectory traj =
        integrate(zero, fzero, omega, eps, 0.0, 1.0, 2.0, cfg, 0.1);
    double worst = 0.0;
    for (const OdeState& s : traj.samples) {
        double vexact = std::exp(-s.t / eps);
        double xexact = eps * (1.0 - vexact);
        worst = std::max(worst, std::abs(s.v - vexact));
        worst = std::max(worst, std::abs(s.x - xexact));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("self-convergence under tolerance halving") {
    CanonicalProblem p = canonical_d1();
    IntegratorConfig cfg;
    cfg.rtol = 1e-8;
    cfg.atol = 1e-10;
    Trajectory a = integrate(p.g, p.f, p.omega, 0.05, 1.3, 0.0, 30.0, cfg,
                             0.5);
    IntegratorConfig half = cfg;
    half.rtol /= 2.0;
    half.atol /= 2.0;
    Trajectory b = integrate(p.g, p.f, p.omega, 0.05, 1.3, 0.0, 30.0, half,
                             0.5);
    REQUIRE(a.samples.size() == b.samples.size());
    double worst = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i)
        worst = std::max(worst, std::abs(a.samples[i].x - b.samples[i].x));
    CHECK(worst <= 10.0 * cfg.rtol);
}

TEST_CASE("long varactor run approaches a periodic orbit") {
    CanonicalProblem p = canonical_d1();
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    Trajectory traj =
        integrate(p.g, p.f, p.omega, 0.05, 1.2, 0.1, 100.0, cfg, 0.25);
    // compare x(t) against x(t + 2 pi) on the tail
    const double period = 2.0 * M_PI;
    double worst = 0.0;
    for (const OdeState& s : traj.samples) {
        if (s.t < 60.0 || s.t + period > traj.samples.back().t) continue;
        // find the sample at t + period (grid step 0.25 divides nothing of
        // 2 pi, so interpolate linearly between neighbours)
        double target = s.t + period;
        for (size_t i = 1; i < traj.samples.size(); ++i) {
            if (traj.samples[i].t >= target) {
                const OdeState& lo = traj.samples[i - 1];
                const OdeState& hi = traj.samples[i];
                double w = (target - lo.t) / (hi.t - lo.t);
                double xi = lo.x + w * (hi.x - lo.x);
                worst = std::max(worst, std::abs(xi - s.x));
                break;
            }
        }
    }
    CHECK(worst <= 1e-3);  // linear interpolation limits the floor
}

TEST_CASE("attractor_distance guards") {
    Nonlinearity sq = Nonlinearity::polynomial({0, 0, 1});
    TrigSeries fconst(1);
    fconst.set({0}, 1.0);
    FrequencyVector omega({1.0});
    IntegratorConfig cfg;
    Trajectory traj =
        integrate(sq, fconst, omega, 0.05, 1.0, 0.0, 10.0, cfg, 1.0);
    CHECK(attractor_distance(traj, [&](double t) {
              for (const OdeState& s : traj.samples)
                  if (std::abs(s.t - t) < 1e-12) return s.x;
              return 1.0;
          }, 0.0) == 0.0);
    CHECK_THROWS_AS(attractor_distance(traj, [](double) { return 0.0; },
                                       50.0),
                    std::domain_error);
}

TEST_CASE("linearized_decay examples") {
    auto [slow, fast] = linearized_decay(0.1, 2.0);
    CHECK(slow.real() == doctest::Approx(-0.204168).epsilon(1e-5));
    CHECK(fast.real() == doctest::Approx(-9.795832).epsilon(1e-5));

    auto [s2, f2] = linearized_decay(1e-3, 2.0);
    CHECK(s2.real() == doctest::Approx(-1e-3 * 2.0).epsilon(0.01));
    CHECK(f2.real() == doctest::Approx(-1.0 / 1e-3).epsilon(0.01));

    auto [s3, f3] = linearized_decay(0.05, 0.0);
    CHECK(s3.real() == 0.0);
    CHECK(f3.real() == doctest::Approx(-20.0).epsilon(1e-12));
}

TEST_CASE("probe: constant forcing converges at the linear rate") {
    Nonlinearity sq = Nonlinearity::polynomial({0, 0, 1});
    TrigSeries fconst(1);
    fconst.set({0}, 1.0);
    FrequencyVector omega({1.0});
    ProbeConfig cfg;
    cfg.n_samples = 6;
    cfg.seed = 99;
    cfg.radius = 0.1;
    cfg.T_end = 100.0 / 0.05;
    cfg.integ.rtol = 1e-11;
    cfg.integ.atol = 1e-13;
    AttractorReport rep =
        attractivity_probe(sq, fconst, omega, 0.05, 1.0, 0.0, 2.0, cfg);
    CHECK(rep.applicable);
    CHECK(rep.n_converged == cfg.n_samples);
    auto [slow, fast] = linearized_decay(0.05, 2.0);
    CHECK(rep.mean_decay_exponent ==
          doctest::Approx(slow.real()).epsilon(0.05));
}

TEST_CASE("probe: negative g'(c0) branch is not applicable") {
    Nonlinearity sq = Nonlinearity::polynomial({0, 0, 1});
    TrigSeries fconst(1);
    fconst.set({0}, 1.0);
    FrequencyVector omega({1.0});
    ProbeConfig cfg;
    cfg.n_samples = 3;
    // c0 = -1 solves g(c0) = 1 with g'(c0) = -2 < 0
    AttractorReport rep =
        attractivity_probe(sq, fconst, omega, 0.05, -1.0, 0.0, -2.0, cfg);
    CHECK_FALSE(rep.applicable);
    CHECK(rep.samples.empty());
}

TEST_CASE("probe: varactor samples converge, report frozen fields") {
    CanonicalProblem p = canonical_d1();
    PerturbationSeries s = compute_series(p.g, p.f, p.omega, 6, {}, 1.0);
    ProbeConfig cfg;
    cfg.n_samples = 5;
    cfg.seed = 2024;
    cfg.T_end = 400.0;
    cfg.integ.rtol = 1e-11;
    cfg.integ.atol = 1e-13;
    double x0 = evaluate(s, 0.05, 0.0);
    double v0 = evaluate_velocity(s, 0.05, 0.0);
    AttractorReport rep = attractivity_probe(p.g, p.f, p.omega, 0.05, x0, v0,
                                             2.0, cfg);
    CHECK(rep.applicable);
    CHECK(rep.n_converged == 5);
    CHECK(rep.n_failed == 0);
    CHECK(rep.worst_tail_distance <= 1e-6);
    // deterministic seeded sampling: same seed, same draw
    AttractorReport rep2 = attractivity_probe(p.g, p.f, p.omega, 0.05, x0,
                                              v0, 2.0, cfg);
    REQUIRE(rep2.samples.size() == rep.samples.size());
    for (size_t i = 0; i < rep.samples.size(); ++i) {
        CHECK(rep.samples[i].dx0 == rep2.samples[i].dx0);
        CHECK(rep.samples[i].tail_distance == rep2.samples[i].tail_distance);
    }
}

TEST_SUITE_END();
