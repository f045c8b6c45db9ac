#include <doctest.h>

#include <cmath>
#include <random>

#include "qpw/series.hpp"
#include "qpw/verify.hpp"

using namespace qpw;

namespace {

// Sampling oracle: multiply two series on a uniform torus grid and project
// back onto one Fourier mode by direct summation.
Complex sampled_product_coeff(const TrigSeries& a, const TrigSeries& b,
                              const Mode& nu, int grid) {
    int d = a.dim();
    Complex acc = 0.0;
    std::vector<int> idx(d, 0);
    long long total = 1;
    for (int i = 0; i < d; ++i) total *= grid;
    for (long long flat = 0; flat < total; ++flat) {
        long long r = flat;
        std::vector<double> psi(d);
        for (int i = 0; i < d; ++i) {
            psi[i] = 2.0 * M_PI * (r % grid) / grid;
            r /= grid;
        }
        double phase = 0.0;
        for (int i = 0; i < d; ++i) phase += nu[i] * psi[i];
        acc += a.evaluate_angle(psi) * b.evaluate_angle(psi) *
               std::polar(1.0, -phase);
    }
    return acc / static_cast<double>(total);
}

}  // namespace

TEST_SUITE_BEGIN("qpseries");

TEST_CASE("solve_c0 examples") {
    Nonlinearity sq = Nonlinearity::polynomial({0, 0, 1});
    EquilibriumData e1 = solve_c0(sq, 1.0, 0.5);
    CHECK(e1.c0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e1.gprime_c0 == doctest::Approx(2.0).epsilon(1e-14));

    EquilibriumData e2 = solve_c0(sq, 4.0, 3.0);
    CHECK(e2.c0 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(e2.gprime_c0 == doctest::Approx(4.0).epsilon(1e-14));

    Nonlinearity cubic = Nonlinearity::polynomial({0, -1, 0, 1});  // x^3 - x
    EquilibriumData e3 = solve_c0(cubic, 0.0, 1.2);
    CHECK(e3.c0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e3.gprime_c0 == doctest::Approx(2.0).epsilon(1e-12));

    // g' = 0 at the root x=0 of x^2 = 0
    CHECK_THROWS_AS(solve_c0(sq, 0.0, 0.2), DegenerateEquilibriumError);
}

TEST_CASE("nonlinearity derivative vs finite differences") {
    Nonlinearity g = Nonlinearity::polynomial({0.3, -1.2, 0.8, 2.0});
    for (double x : {-1.4, -0.2, 0.9, 2.3}) {
        double h = 1e-6;
        double fd = (g.eval(x + h) - g.eval(x - h)) / (2 * h);
        CHECK(g.deriv(x) == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("convolve identity and binomial") {
    TrigSeries delta = TrigSeries::constant(1, 1.0);
    TrigSeries s(1);
    s.set({0}, 0.5);
    s.set_pair({1}, Complex(0.25, -0.3));
    TrigSeries prod = convolve(delta, s);
    for (const auto& [nu, v] : s.coeffs()) CHECK(prod.at(nu) == v);

    TrigSeries cospair(1);
    cospair.set({1}, 1.0);
    cospair.set({-1}, 1.0);
    TrigSeries sq = convolve(cospair, cospair);
    CHECK(sq.at({2}) == Complex(1.0));
    CHECK(sq.at({0}) == Complex(2.0));
    CHECK(sq.at({-2}) == Complex(1.0));

    TrigSeries wrong(2);
    CHECK_THROWS_AS(convolve(s, wrong), std::domain_error);
}

TEST_CASE("convolve matches sampling oracle") {
    std::mt19937_64 rng(42);
    const auto u = [&]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    };
    for (int d : {1, 2}) {
        TrigSeries a(d, false), b(d, false);
        std::vector<Mode> modes;
        if (d == 1)
            modes = {{0}, {1}, {-2}, {3}};
        else
            modes = {{0, 0}, {1, 0}, {0, -1}, {2, 1}};
        for (const Mode& m : modes) {
            a.set(m, Complex(u(), u()));
            b.set(m, Complex(u(), u()));
        }
        TrigSeries prod = convolve(a, b);
        for (const auto& [nu, v] : prod.coeffs()) {
            Complex want = sampled_product_coeff(a, b, nu, 16);
            CHECK(std::abs(v - want) <= 1e-12);
        }
    }
}

TEST_CASE("g_order low orders") {
    CanonicalProblem p = canonical_d1();
    std::vector<TrigSeries> orders;
    orders.push_back(TrigSeries::constant(1, 1.0));  // c0 = 1
    TrigSeries x1(1);
    x1.set_pair({1}, Complex(0.0, -1.0));
    orders.push_back(x1);

    TrigSeries g0 = g_order(p.g, orders, 0);
    CHECK(g0.at({0}) == Complex(1.0));  // c0^2

    TrigSeries g1 = g_order(p.g, orders, 1);
    CHECK(g1.at({1}) == Complex(0.0, -2.0));  // 2 c0 x^(1)

    Nonlinearity cube = Nonlinearity::polynomial({0, 0, 0, 1});
    TrigSeries c1 = g_order(cube, orders, 1);  // 3 c0^2 x^(1)
    CHECK(c1.at({1}) == Complex(0.0, -3.0));
    // sampling oracle for the same coefficient: d/deps [x(eps)^3] at eps=0
    // equals 3 x0^2 x1 pointwise; compare one Fourier projection
    TrigSeries x0sq = convolve(orders[0], orders[0]);
    TrigSeries expect = convolve(x0sq, x1).scaled(3.0);
    CHECK(std::abs(c1.at({1}) - expect.at({1})) <= 1e-14);

    CHECK_THROWS_AS(g_order(p.g, orders, 5), std::domain_error);
}

TEST_CASE("next_order reproduces hand-derived varactor orders") {
    CanonicalProblem p = canonical_d1();
    PerturbationSeries s = compute_series(p.g, p.f, p.omega, 2, {}, 1.0);
    CHECK(s.order(1).at({1}) == Complex(0.0, -1.0));
    CHECK(s.order(1).at({-1}) == Complex(0.0, 1.0));
    CHECK(s.order(1).at({0}) == Complex(0.0));
    CHECK(std::abs(s.order(2).at({0}) - Complex(-1.0)) <= 1e-14);
    CHECK(std::abs(s.order(2).at({1}) - Complex(1.0)) <= 1e-14);
    CHECK(std::abs(s.order(2).at({2})) <= 1e-14);
}

TEST_CASE("frozen higher-order varactor coefficients") {
    // derived once by hand from the two-phase recursion
    CanonicalProblem p = canonical_d1();
    PerturbationSeries s = compute_series(p.g, p.f, p.omega, 4, {}, 1.0);
    CHECK(std::abs(s.order(3).at({1}) - Complex(0.0, 1.0)) <= 1e-13);
    CHECK(std::abs(s.order(3).at({2}) - Complex(0.0, -0.5)) <= 1e-13);
    CHECK(std::abs(s.order(3).at({0})) <= 1e-13);
    CHECK(std::abs(s.order(4).at({1}) - Complex(-3.0)) <= 1e-13);
    CHECK(std::abs(s.order(4).at({2}) - Complex(0.5)) <= 1e-13);
    CHECK(std::abs(s.order(4).at({0}) - Complex(0.5)) <= 1e-13);
}

TEST_CASE("constant forcing gives the exact equilibrium") {
    Nonlinearity sq = Nonlinearity::polynomial({0, 0, 1});
    TrigSeries fconst(1);
    fconst.set({0}, 1.0);
    FrequencyVector omega({1.0});
    PerturbationSeries s = compute_series(sq, fconst, omega, 10, {}, 0.5);
    for (int k = 1; k <= 10; ++k) CHECK(s.order(k).max_abs() <= 1e-14);
}

TEST_CASE("d=2 first order is direct division") {
    CanonicalProblem p = canonical_d2();
    PerturbationSeries s = compute_series(p.g, p.f, p.omega, 1, {}, 1.0);
    const double golden = p.omega.components()[1];
    CHECK(std::abs(s.order(1).at({1, 0}) - Complex(0.0, -1.0)) <= 1e-14);
    CHECK(std::abs(s.order(1).at({0, 1}) - Complex(0.0, -1.0 / golden)) <=
          1e-14);
    CHECK(std::abs(s.order(1).at({0, -1}) - Complex(0.0, 1.0 / golden)) <=
          1e-14);
}

TEST_CASE("series invariants: reality, zero-mode balance, support") {
    for (int dim : {1, 2}) {
        CanonicalProblem p = dim == 1 ? canonical_d1() : canonical_d2();
        PerturbationSeries s = compute_series(p.g, p.f, p.omega, 6, {}, 1.0);
        for (int k = 0; k <= 6; ++k) {
            CHECK(s.order(k).reality_defect() <= 1e-14);
            CHECK(s.order(k).max_l1_mode() <= k);  // N_f = 1
        }
        for (int k = 1; k <= 6; ++k) {
            TrigSeries gk = g_order(p.g, s.orders(), k);
            CHECK(std::abs(gk.at(Mode(dim, 0))) <= 1e-12);
        }
    }
}

TEST_CASE("evaluate examples") {
    CanonicalProblem p = canonical_d1();
    PerturbationSeries s = compute_series(p.g, p.f, p.omega, 2, {}, 1.0);
    CHECK(evaluate(s, 0.0, 1.7) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(evaluate(s, 0.1, 0.0) == doctest::Approx(1.01).epsilon(1e-14));
    // linearity of the K=1 truncation in eps
    PerturbationSeries s1 = compute_series(p.g, p.f, p.omega, 1, {}, 1.0);
    double base = evaluate(s1, 0.01, 0.6) - 1.0;
    for (double eps : {0.02, 0.04}) {
        double diff = evaluate(s1, eps, 0.6) - 1.0;
        CHECK(diff == doctest::Approx(base * eps / 0.01).epsilon(1e-12));
    }
}

TEST_CASE("residual is exact for constant forcing") {
    Nonlinearity sq = Nonlinearity::polynomial({0, 0, 1});
    TrigSeries fconst(1);
    fconst.set({0}, 1.0);
    FrequencyVector omega({1.0});
    PerturbationSeries s = compute_series(sq, fconst, omega, 4, {}, 1.0);
    std::vector<double> grid = {0.0, 0.4, 1.1, 3.3};
    for (double eps : {0.01, 0.1, 0.5})
        CHECK(residual(s, fconst, eps, grid) <= 1e-14);
}

TEST_CASE("residual drops with truncation order") {
    CanonicalProblem p = canonical_d1();
    PerturbationSeries s1 = compute_series(p.g, p.f, p.omega, 1, {}, 1.0);
    PerturbationSeries s2 = compute_series(p.g, p.f, p.omega, 2, {}, 1.0);
    std::vector<double> grid;
    for (int i = 0; i < 32; ++i) grid.push_back(2.0 * M_PI * i / 32);
    CHECK(residual(s2, p.f, 0.05, grid) < residual(s1, p.f, 0.05, grid));
}

TEST_CASE("growth_fit exact synthetic data") {
    // sup_nu |x^(k)_nu| = k! 2^k  ->  eps2 = 1/2, A1 = 1, zero slack
    CanonicalProblem p = canonical_d1();
    EquilibriumData eq{1.0, 2.0, 1.0};
    PerturbationSeries s(p.omega, eq, p.g);
    double fact = 1.0;
    for (int k = 0; k <= 6; ++k) {
        if (k > 0) fact *= k;
        TrigSeries o(1);
        if (k > 0) o.set({0}, fact * std::pow(2.0, k));
        else o.set({0}, 1.0);
        s.push_order(o);
    }
    GrowthFit fit = growth_fit(s);
    CHECK(fit.eps2 == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(fit.A1 == doctest::Approx(1.0).epsilon(1e-10));
    for (double sl : fit.slacks) CHECK(std::abs(sl) <= 1e-10);
}

TEST_CASE("growth_fit degenerate and certified on computed data") {
    Nonlinearity sq = Nonlinearity::polynomial({0, 0, 1});
    TrigSeries fconst(1);
    fconst.set({0}, 1.0);
    FrequencyVector omega({1.0});
    PerturbationSeries zero = compute_series(sq, fconst, omega, 6, {}, 1.0);
    CHECK_THROWS_AS(growth_fit(zero), std::domain_error);

    CanonicalProblem p = canonical_d1();
    PerturbationSeries s = compute_series(p.g, p.f, p.omega, 10, {}, 1.0);
    GrowthFit fit = growth_fit(s);
    for (double sl : fit.slacks) CHECK(sl >= -1e-12);
    CHECK(fit.eps2 > 0.0);
}

TEST_CASE("tail-cut policy records dropped mass") {
    CanonicalProblem p = canonical_d1();
    TruncPolicy pol;
    pol.kind = TruncPolicy::Kind::tail_cut;
    pol.tail_eps_rel = 1e-16;
    PerturbationSeries s = compute_series(p.g, p.f, p.omega, 6, pol, 1.0);
    for (int k = 1; k <= 6; ++k) CHECK(s.dropped_mass()[k] >= 0.0);
    // trig-polynomial forcing: nothing above the floor gets cut
    PerturbationSeries ex = compute_series(p.g, p.f, p.omega, 6, {}, 1.0);
    for (int k = 1; k <= 6; ++k)
        CHECK(std::abs(s.order(k).max_abs() - ex.order(k).max_abs()) <=
              1e-14);
}

TEST_SUITE_END();
