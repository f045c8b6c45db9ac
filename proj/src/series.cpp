#include "qpw/series.hpp"

#include <cmath>

namespace qpw {

EquilibriumData solve_c0(const Nonlinearity& g, double f0, double guess,
                         double tol, int max_iter, double gprime_floor) {
    double x = guess;
    bool converged = false;
    for (int i = 0; i < max_iter; ++i) {
        double r = g.eval(x) - f0;
        if (std::abs(r) <= tol) {
            converged = true;
            break;
        }
        double gp = g.deriv(x);
        if (gp == 0.0)
            throw NewtonError("solve_c0: zero derivative at iterate");
        x -= r / gp;
        if (!std::isfinite(x)) throw NewtonError("solve_c0: iterate diverged");
    }
    if (!converged)
        throw NewtonError("solve_c0: no convergence in max iterations");
    // polish beyond tol while the residual still improves; a multiple root
    // keeps improving linearly and drives g' under the floor, which is
    // exactly the degeneracy we must reject
    double r = std::abs(g.eval(x) - f0);
    for (int i = 0; i < 80 && r > 0.0; ++i) {
        double gp = g.deriv(x);
        if (gp == 0.0) break;
        double xn = x - (g.eval(x) - f0) / gp;
        if (!std::isfinite(xn)) break;
        double rn = std::abs(g.eval(xn) - f0);
        if (rn >= r) break;
        x = xn;
        r = rn;
    }
    double gp = g.deriv(x);
    if (std::abs(gp) < gprime_floor)
        throw DegenerateEquilibriumError(
            "solve_c0: |g'(c0)| below degeneracy threshold");
    return {x, gp, f0};
}

TrigSeries g_order(const Nonlinearity& g,
                   const std::vector<TrigSeries>& orders, int k) {
    if (static_cast<int>(orders.size()) <= k)
        throw std::domain_error("g_order: orders 0..k required");
    const int d = orders[0].dim();
    const int deg = g.degree();
    // pw[m] = eps-order-m coefficient of x^j, built up over powers j
    std::vector<TrigSeries> pw;
    pw.reserve(k + 1);
    for (int m = 0; m <= k; ++m) pw.push_back(orders[m]);

    TrigSeries out(d);
    const auto& gc = g.coeffs();
    if (!gc.empty() && gc[0] != 0.0 && k == 0)
        out.add_scaled(TrigSeries::constant(d, gc[0]), 1.0);
    if (gc.size() > 1 && gc[1] != 0.0) out.add_scaled(pw[k], gc[1]);
    for (int j = 2; j <= deg; ++j) {
        std::vector<TrigSeries> next;
        next.reserve(k + 1);
        for (int m = 0; m <= k; ++m) {
            TrigSeries acc(d);
            for (int a = 0; a <= m; ++a)
                acc.add_scaled(convolve(pw[a], orders[m - a]), 1.0);
            next.push_back(std::move(acc));
        }
        pw = std::move(next);
        if (gc[j] != 0.0) out.add_scaled(pw[k], gc[j]);
    }
    return out;
}

TrigSeries next_order(const PerturbationSeries& series, const TrigSeries& f,
                      int k) {
    if (k < 1) throw std::domain_error("next_order: k >= 1");
    if (series.max_order() != k - 1)
        throw std::domain_error("next_order: orders 0..k-1 required");
    const FrequencyVector& omega = series.omega();
    const int d = omega.dim();
    const double floor = omega.degeneracy_floor();
    const EquilibriumData& eq = series.equilibrium();

    if (k == 1) {
        // order-1 solvability: <f> must equal g(c0)
        double f0 = f.at(Mode(d, 0)).real();
        if (std::abs(f0 - series.g().eval(eq.c0)) > 1e-10)
            throw DegenerateEquilibriumError(
                "next_order: <f> != g(c0); equilibrium inconsistent");
    }

    TrigSeries gk = g_order(series.g(), series.orders(), k - 1);
    const TrigSeries& prev = series.order(k - 1);

    // Phase A: order-k balance for nonzero modes.  The recursion preserves
    // reality; conjugate pairs are averaged so rounding cannot break it.
    TrigSeries xk(d);
    TrigSeries rhs(d);
    if (k == 1) rhs.add_scaled(f, 1.0);
    rhs.add_scaled(prev.derivative(omega, 2), -1.0);
    rhs.add_scaled(gk, -1.0);
    for (const auto& [nu, v] : rhs.coeffs()) {
        if (is_zero(nu)) continue;
        Mode neg = negate(nu);
        if (nu < neg && rhs.coeffs().count(neg)) continue;
        Complex sym = 0.5 * (v + std::conj(rhs.at(neg)));
        double x = omega.dot(nu);
        if (std::abs(x) < floor)
            throw SmallDivisorError(
                "next_order: |omega.nu| below degeneracy floor");
        Complex c = sym / Complex(0.0, x);
        xk.set(nu, c);
        xk.set(neg, std::conj(c));
    }

    // Phase B: zero mode of the order-(k+1) balance; the zero mode of
    // [g(x)]^(k) computed with x^(k)_0 = 0 must be cancelled through
    // g'(c0) x^(k)_0.
    std::vector<TrigSeries> ext = series.orders();
    ext.push_back(xk);
    TrigSeries gk1 = g_order(series.g(), ext, k);
    Complex R = gk1.at(Mode(d, 0));
    if (std::abs(eq.gprime_c0) < 1e-8)
        throw DegenerateEquilibriumError("next_order: degenerate g'(c0)");
    xk.set(Mode(d, 0), Complex(-R.real() / eq.gprime_c0, 0.0));
    return xk;
}

PerturbationSeries compute_series(const Nonlinearity& g, const TrigSeries& f,
                                  const FrequencyVector& omega, int K,
                                  TruncPolicy policy, double c0_guess) {
    const int d = omega.dim();
    if (f.dim() != d)
        throw std::domain_error("compute_series: f dimension mismatch");
    double f0 = f.at(Mode(d, 0)).real();
    EquilibriumData eq = solve_c0(g, f0, c0_guess);
    PerturbationSeries series(omega, eq, g);
    series.push_order(TrigSeries::constant(d, eq.c0));
    for (int k = 1; k <= K; ++k) {
        TrigSeries xk = next_order(series, f, k);
        double dropped = 0.0;
        if (policy.kind == TruncPolicy::Kind::tail_cut)
            dropped = xk.prune(policy.tail_eps_rel * xk.max_abs());
        series.push_order(std::move(xk), dropped);
    }
    return series;
}

double evaluate(const PerturbationSeries& series, double eps, double t) {
    double acc = 0.0;
    double ek = 1.0;
    for (int k = 0; k <= series.max_order(); ++k) {
        acc += ek * series.order(k).evaluate_real(series.omega(), t);
        ek *= eps;
    }
    return acc;
}

std::vector<double> evaluate(const PerturbationSeries& series, double eps,
                             const std::vector<double>& t_grid) {
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) out.push_back(evaluate(series, eps, t));
    return out;
}

double evaluate_velocity(const PerturbationSeries& series, double eps,
                         double t) {
    double acc = 0.0;
    double ek = 1.0;
    for (int k = 0; k <= series.max_order(); ++k) {
        acc += ek * series.order(k)
                        .derivative(series.omega())
                        .evaluate_real(series.omega(), t);
        ek *= eps;
    }
    return acc;
}

double residual(const PerturbationSeries& series, const TrigSeries& f,
                double eps, const std::vector<double>& t_grid) {
    // The defect eps x'' + x' + eps g(x) - eps f of the truncated series is
    // an exact polynomial in eps with trig-series coefficients.  Evaluating
    // it termwise sidesteps the catastrophic cancellation of the direct
    // pointwise balance (the true residual is O(eps^{K+1})).  Orders <= K
    // cancel by construction of the recursion; that cancellation is checked
    // at coefficient precision and such orders only re-enter the sum if the
    // check fails, so a broken recursion still surfaces.
    const FrequencyVector& omega = series.omega();
    const int K = series.max_order();
    const int d = series.dim();
    const int deg = std::max(series.g().degree(), 1);
    const int m_top = std::max(deg * K, K + 1) + 1;

    std::vector<TrigSeries> ext = series.orders();
    for (int k = K + 1; k < m_top; ++k) ext.push_back(TrigSeries(d));

    double input_mass = 1.0;
    for (int k = 0; k <= K; ++k) {
        double m = 0.0;
        for (const auto& [nu, c] : series.order(k).coeffs())
            m += std::abs(c);
        input_mass = std::max(input_mass, m);
    }

    std::vector<TrigSeries> terms;
    for (int m = 0; m <= m_top; ++m) {
        TrigSeries rm(d);
        if (m >= 1 && m - 1 <= K)
            rm.add_scaled(series.order(m - 1).derivative(omega, 2), 1.0);
        if (m <= K) rm.add_scaled(series.order(m).derivative(omega, 1), 1.0);
        if (m >= 1 && m - 1 < static_cast<int>(ext.size()))
            rm.add_scaled(g_order(series.g(), ext, m - 1), 1.0);
        if (m == 1) rm.add_scaled(f, -1.0);
        if (m <= K) {
            double mass = 0.0;
            for (const auto& [nu, c] : rm.coeffs()) mass += std::abs(c);
            if (mass <= 1e-9 * input_mass) rm = TrigSeries(d);
        }
        terms.push_back(std::move(rm));
    }

    double worst = 0.0;
    for (double t : t_grid) {
        Complex r = 0.0;
        double em = 1.0;
        for (int m = 0; m <= m_top; ++m) {
            if (!terms[m].empty()) r += em * terms[m].evaluate(omega, t);
            em *= eps;
        }
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

GrowthFit growth_fit(const PerturbationSeries& series) {
    if (series.max_order() < 4)
        throw std::domain_error("growth_fit: need K >= 4");
    std::vector<double> ys;
    std::vector<int> ks;
    double lfact = 0.0;
    for (int k = 1; k <= series.max_order(); ++k) {
        lfact += std::log(static_cast<double>(k));
        double s = series.order(k).max_abs();
        if (s > 0.0) {
            ks.push_back(k);
            ys.push_back(std::log(s) - lfact);
        }
    }
    if (ks.size() < 2)
        throw std::domain_error("growth_fit: degenerate fit (orders vanish)");
    // least squares y = logA1 - k log(eps2)
    double n = static_cast<double>(ks.size());
    double sk = 0, sy = 0, skk = 0, sky = 0;
    for (size_t i = 0; i < ks.size(); ++i) {
        sk += ks[i];
        sy += ys[i];
        skk += static_cast<double>(ks[i]) * ks[i];
        sky += ks[i] * ys[i];
    }
    double slope = (n * sky - sk * sy) / (n * skk - sk * sk);
    double inter = (sy - slope * sk) / n;
    GrowthFit fit;
    fit.eps2 = std::exp(-slope);
    // inflate A1 until every computed order sits below the bound
    // log bound_k = log A1 + slope * k
    double logA = inter;
    for (size_t i = 0; i < ks.size(); ++i)
        logA = std::max(logA, ys[i] - ks[i] * slope);
    fit.A1 = std::exp(logA);
    fit.ks = ks;
    for (size_t i = 0; i < ks.size(); ++i)
        fit.slacks.push_back(logA + ks[i] * slope - ys[i]);
    return fit;
}

}  // namespace qpw
