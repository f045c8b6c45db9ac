#include <doctest.h>

#include <cmath>
#include <random>

#include "qpw/borel.hpp"
#include "qpw/verify.hpp"

using namespace qpw;

TEST_SUITE_BEGIN("borel");

TEST_CASE("borel_coeffs basic shapes") {
    // a_n = (n-1)! -> b_n = 1, radius 1
    std::vector<Complex> a;
    double f = 1.0;
    for (int n = 1; n <= 12; ++n) {
        if (n >= 3) f *= (n - 1);
        a.push_back(n == 1 ? 1.0 : f);
    }
    BorelTable t = borel_coeffs(a);
    for (const Complex& b : t.b) CHECK(std::abs(b - Complex(1.0)) <= 1e-12);
    CHECK(t.radius_est == doctest::Approx(1.0).epsilon(0.2));

    // a_n = 1 -> b_n = 1/(n-1)! (entire transform e^p)
    std::vector<Complex> ones(12, 1.0);
    BorelTable t2 = borel_coeffs(ones);
    double fact = 1.0;
    for (size_t i = 0; i < t2.b.size(); ++i) {
        if (i >= 2) fact *= i;
        CHECK(std::abs(t2.b[i] - 1.0 / fact) <= 1e-15);
    }
    CHECK_THROWS_AS(borel_coeffs({}), std::domain_error);
}

TEST_CASE("propagator transform is exact termwise") {
    // convention pin: under b_n = a_n/(n-1)! the transform of the
    // propagator series is e^{-ipx}/(ix) termwise; under a_n/n! it fails
    // at every order past n=1 (the two coincide there, 0! = 1!)
    const double x = 1.0;
    std::vector<Complex> a = propagator_eps_series(x, 20);
    BorelTable t = borel_coeffs(a);
    Complex num(1.0);
    double fact = 1.0;
    double worst_good = 0.0, best_bad = 1e300;
    for (int j = 0; j < 20; ++j) {
        if (j > 0) {
            num *= Complex(0.0, -x);
            fact *= j;
        }
        Complex want = num / (fact * Complex(0.0, x));
        worst_good = std::max(worst_good, std::abs(t.b[j] - want));
        if (j >= 1) {
            Complex alt = a[j] / (fact * (j + 1.0));  // a_n/n! convention
            double rel = std::abs(alt - want) / std::abs(want);
            best_bad = std::min(best_bad, rel);
        }
    }
    CHECK(worst_good <= 1e-10);
    CHECK(best_bad > 1e-3);
}

TEST_CASE("propagator_borel_exact point values") {
    CHECK(std::abs(propagator_borel_exact(1.0, 0.0) - Complex(0, -1)) <=
          1e-15);
    CHECK(std::abs(propagator_borel_exact(1.0, M_PI) - Complex(0, 1)) <=
          1e-14);
    for (double p : {0.0, 0.7, 2.0})
        CHECK(std::abs(propagator_borel_exact(2.5, p)) ==
              doctest::Approx(1.0 / 2.5).epsilon(1e-14));
    CHECK_THROWS_AS(propagator_borel_exact(0.0, 1.0), std::domain_error);
}

TEST_CASE("propagator transform modulus bound on a complex grid") {
    for (double x : {0.7, 1.0, -2.3}) {
        for (double re = -3.0; re <= 3.0; re += 0.5)
            for (double im = -2.0; im <= 2.0; im += 0.4) {
                Complex p(re, im);
                double lhs = std::abs(propagator_borel_exact(x, p));
                double rhs =
                    std::exp(std::abs(im) * std::abs(x)) / std::abs(x);
                CHECK(lhs <= rhs * (1.0 + 1e-12));
            }
    }
}

TEST_CASE("g0 series matches its closed-form transform") {
    CheckResult r = checks::borel_g0();
    CHECK(r.pass);
}

TEST_CASE("g0_eval consistency with its eps series") {
    const double x = 1.3, c0 = 0.8, psi0 = 1.0, eps = 0.02;
    std::vector<Complex> a = g0_eps_series(x, c0, 25, psi0);
    Complex partial = 0.0;
    double ek = 1.0;
    for (const Complex& an : a) {
        ek *= eps;
        partial += an * ek;
    }
    CHECK(std::abs(partial - g0_eval(x, eps, c0, psi0)) <= 1e-14);
}

TEST_CASE("pade exact geometric series") {
    // B(p) = 1/(1-p): b coefficients all 1
    std::vector<Complex> a;
    double fact = 1.0;
    for (int n = 1; n <= 6; ++n) {
        if (n >= 3) fact *= (n - 1);
        a.push_back(fact);
    }
    BorelTable t = borel_coeffs(a);
    PadeApprox ap = pade(t, 0, 1);
    REQUIRE(ap.poles.size() == 1);
    CHECK(std::abs(ap.poles[0].location - Complex(1.0)) <= 1e-12);
    CHECK(std::abs(ap.eval(Complex(0.3)) - Complex(1.0 / 0.7)) <= 1e-12);
    CHECK(ap.cond.taylor_match_rel <= 1e-10);
}

TEST_CASE("diagonal pade of the propagator transform converges") {
    const double x = 1.0;
    std::vector<Complex> a = propagator_eps_series(x, 25);
    BorelTable t = borel_coeffs(a);
    PadeApprox ap = pade(t, 10, 10);
    double worst = 0.0;
    for (double p = 0.0; p <= 5.0; p += 0.2)
        worst = std::max(worst, std::abs(ap.eval(Complex(p)) -
                                         propagator_borel_exact(x, p)));
    CHECK(worst <= 1e-8);
    CHECK(ap.cond.taylor_match_rel <= 1e-8);
}

TEST_CASE("pade conditioning degrades monotonically under perturbation") {
    const double x = 1.0;
    std::vector<Complex> base = propagator_eps_series(x, 12);
    double prev = -1.0;
    for (double noise : {0.0, 1e0, 1e3, 1e6}) {
        std::vector<Complex> a = base;
        // inconsistent coefficient just beyond the matched [4/4] window
        a[9] += noise * Complex(1.0, -0.5);
        BorelTable t = borel_coeffs(a);
        PadeApprox ap = pade(t, 4, 4);
        CHECK(ap.cond.taylor_match_rel <= 1e-8);
        CHECK(ap.cond.extrapolation_defect >= prev);
        prev = ap.cond.extrapolation_defect;
    }
}

TEST_CASE("laplace_sum reproduces Gamma integrals") {
    for (double eps : {0.05, 0.3, 1.0}) {
        LaplaceResult one = laplace_sum([](double) { return Complex(1.0); },
                                        eps);
        CHECK(std::abs(one.value - Complex(eps)) <= 1e-12 * eps + 1e-14);
        for (int n : {2, 3, 5}) {
            double fact = 1.0;
            for (int j = 2; j < n; ++j) fact *= j;
            LaplaceResult r = laplace_sum(
                [&](double p) {
                    return Complex(std::pow(p, n - 1) / fact);
                },
                eps);
            CHECK(std::abs(r.value - std::pow(eps, n)) <=
                  1e-11 * std::pow(eps, n) + 1e-15);
        }
    }
}

TEST_CASE("laplace_sum round trip for the propagator") {
    const double x = 1.0;
    for (double eps : {0.05, 0.2, 1.0}) {
        LaplaceResult r = laplace_sum(
            [&](double p) { return propagator_borel_exact(x, p); }, eps);
        Complex closed =
            eps / (Complex(0, x) * (1.0 + Complex(0, eps * x)));
        CHECK(std::abs(r.value - closed) <= 1e-10);
        CHECK(r.err_est <= 1e-9);
    }
}

TEST_CASE("laplace_sum pole screening") {
    std::vector<PoleInfo> on_path = {{Complex(1.0, 0.0), Complex(1.0), false}};
    CHECK_THROWS_AS(laplace_sum([](double) { return Complex(1.0); }, 0.1,
                                {}, on_path),
                    SummabilityError);
    std::vector<PoleInfo> nearby = {{Complex(1.0, 0.02), Complex(1.0), false}};
    LaplaceResult r =
        laplace_sum([](double) { return Complex(1.0); }, 0.1, {}, nearby);
    CHECK(r.pole_warning);
    // froissart-pruned poles are ignored by the guards
    std::vector<PoleInfo> pruned = {{Complex(1.0, 0.0), Complex(1e-15), true}};
    CHECK_NOTHROW(laplace_sum([](double) { return Complex(1.0); }, 0.1, {},
                              pruned));
}

TEST_CASE("laplace/borel round trip for polynomial transforms") {
    std::mt19937_64 rng(7);
    const auto u = [&]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    };
    for (int rep = 0; rep < 4; ++rep) {
        std::vector<Complex> a;
        for (int n = 1; n <= 8; ++n) a.push_back(Complex(u(), 0.0));
        BorelTable t = borel_coeffs(a);
        for (double eps : {0.05, 0.4, 1.0}) {
            double want = 0.0, ek = 1.0;
            for (const Complex& an : a) {
                ek *= eps;
                want += an.real() * ek;
            }
            LaplaceResult r = laplace_sum(
                [&](double p) {
                    Complex acc = 0.0;
                    double pk = 1.0;
                    for (const Complex& b : t.b) {
                        acc += b * pk;
                        pk *= p;
                    }
                    return acc;
                },
                eps);
            CHECK(std::abs(r.value - Complex(want)) <= 1e-10);
        }
    }
}

TEST_CASE("convolve_borel basics and the product rule") {
    CHECK(std::abs(convolve_borel([](double) { return Complex(1.0); },
                                  [](double) { return Complex(1.0); },
                                  2.5) -
                   Complex(2.5)) <= 1e-10);
    CHECK(std::abs(convolve_borel([](double) { return Complex(1.0); },
                                  [](double p) { return Complex(p); },
                                  2.0) -
                   Complex(2.0)) <= 1e-10);
    CheckResult conv = checks::borel_convolution();
    CHECK(conv.pass);
}

TEST_CASE("resum_solution constant forcing returns c0") {
    Nonlinearity sq = Nonlinearity::polynomial({0, 0, 1});
    TrigSeries fconst(1);
    fconst.set({0}, 1.0);
    FrequencyVector omega({1.0});
    PerturbationSeries s = compute_series(sq, fconst, omega, 10, {}, 1.0);
    std::vector<ResumPoint> pts = resum_solution(s, 0.05, {0.0, 1.0, 5.0},
                                                 4, 4);
    for (const ResumPoint& p : pts)
        CHECK(std::abs(p.resummed - 1.0) <= 1e-12);
}

TEST_CASE("resum agrees with truncation as eps -> 0") {
    CanonicalProblem p = canonical_d1();
    PerturbationSeries s = compute_series(p.g, p.f, p.omega, 10, {}, 1.0);
    std::vector<ResumPoint> pts = resum_solution(s, 1e-3, {0.7}, 4, 4);
    // both values sit within quadrature noise of each other at this eps
    CHECK(std::abs(pts[0].resummed - pts[0].truncated) <= 1e-9);
}

TEST_CASE("cutoff family plateaus and partition") {
    CheckResult r = checks::cutoff_partition();
    CHECK(r.pass);
    CHECK_THROWS_AS(CutoffFamily::diophantine(-1.0, 4), std::domain_error);
    // telescoping identity is exact algebra
    CutoffFamily fam = CutoffFamily::diophantine(0.7, 12);
    for (double u : {0.05, 0.21, 0.9, 3.0})
        for (int N : {0, 2, 7, 12}) {
            double lhs = 1.0 - fam.partition_tail(u, N);
            double rhs = fam.partition_partial(u, N);
            CHECK(std::abs(lhs - rhs) <= 1e-14);
        }
}

TEST_CASE("bryuno cutoff scaling sits at or above the sharp scale") {
    CanonicalProblem p = canonical_d2();
    BrunoSummary bs = bryuno_sum(p.omega, 16);
    CutoffFamily fam = CutoffFamily::bryuno(bs.alphas);
    for (const Mode& nu : std::vector<Mode>{{1, 0}, {1, -1}, {2, -3}, {3, -5},
                                            {-8, 13}, {13, -21}}) {
        double u = std::abs(p.omega.dot(nu));
        // sharp scale per the alpha_{n+1}/8 band rule
        int sharp = 16;
        for (int n = 0; n + 1 <= 16; ++n)
            if (u > bs.alphas[n + 1] / 8.0) {
                sharp = n;
                break;
            }
        // first level whose psi_n support contains u
        int supp = -1;
        for (int n = 0; n < fam.levels(); ++n)
            if (fam.psi_n(n, u) > 0.0) {
                supp = n;
                break;
            }
        REQUIRE(supp >= 0);
        CHECK(supp >= sharp);
    }
}

TEST_CASE("remainder_scan basics") {
    CanonicalProblem p = canonical_d1();
    PerturbationSeries s = compute_series(p.g, p.f, p.omega, 10, {}, 1.0);
    // constant forcing: remainders vanish identically
    Nonlinearity sq = Nonlinearity::polynomial({0, 0, 1});
    TrigSeries fconst(1);
    fconst.set({0}, 1.0);
    PerturbationSeries zero =
        compute_series(sq, fconst, p.omega, 10, {}, 1.0);
    RemainderScan flat = remainder_scan(
        zero, [](double) { return 1.0; }, 0.0, {1, 2, 3}, {1e-3, 1e-2});
    for (const RemainderRow& r : flat.rows) CHECK(r.remainder <= 1e-15);

    // R_1(eps)/eps -> x^(1)(t) as eps -> 0 at a point where x^(1) != 0
    const double t = M_PI / 2.0;
    const auto reference = [&](double eps) {
        return resum_solution(s, eps, {t}, 4, 4)[0].resummed;
    };
    double x1t = s.order(1).evaluate_real(p.omega, t);
    for (double eps : {1e-3, 1e-4}) {
        double R1 = reference(eps) - 1.0;  // subtract the k=0 partial sum
        CHECK(R1 / eps == doctest::Approx(x1t).epsilon(50 * eps));
    }
}

TEST_SUITE_END();
