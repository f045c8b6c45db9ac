#include "qpw/borel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace qpw {

BorelTable borel_coeffs(const std::vector<Complex>& a, std::string anchor) {
    if (a.empty()) throw std::domain_error("borel_coeffs: empty input");
    BorelTable t;
    t.a = a;
    t.anchor = std::move(anchor);
    t.b.resize(a.size());
    double fact = 1.0;  // (n-1)!
    for (size_t i = 0; i < a.size(); ++i) {
        if (i >= 2) fact *= static_cast<double>(i);
        t.b[i] = a[i] / fact;
    }
    // root test on b: 1/limsup |b_n|^{1/n}, crude but reported as such
    double est = 0.0;
    int used = 0;
    for (size_t i = 1; i < t.b.size(); ++i) {
        double m = std::abs(t.b[i]);
        if (m > 0.0) {
            est += std::log(m) / static_cast<double>(i + 1);
            ++used;
        }
    }
    t.radius_est = used ? std::exp(-est / used) : 0.0;
    return t;
}

std::vector<Complex> propagator_eps_series(double x, int n) {
    if (x == 0.0) throw std::domain_error("propagator series: x = 0");
    std::vector<Complex> a(n);
    Complex c = 1.0 / Complex(0.0, x);
    for (int j = 0; j < n; ++j) {
        a[j] = c;  // a_{j+1}
        c *= Complex(0.0, -x);
    }
    return a;
}

Complex propagator_borel_exact(double x, Complex p) {
    if (x == 0.0) throw std::domain_error("propagator_borel_exact: x = 0");
    return std::exp(Complex(0.0, -x) * p) / Complex(0.0, x);
}

Complex g0_eval(double x, double eps, double c0, double psi0) {
    if (x == 0.0) throw std::domain_error("g0_eval: x = 0");
    Complex den = Complex(0.0, x) * (1.0 + Complex(0.0, eps * x)) +
                  2.0 * eps * c0;
    return eps * psi0 / den;
}

std::vector<Complex> g0_eps_series(double x, double c0, int n, double psi0) {
    if (x == 0.0) throw std::domain_error("g0_eps_series: x = 0");
    // eps psi0/(ix (1 + i eps y)), y = x - 2 c0/x
    double y = x - 2.0 * c0 / x;
    std::vector<Complex> a(n);
    Complex c = psi0 / Complex(0.0, x);
    for (int j = 0; j < n; ++j) {
        a[j] = c;
        c *= Complex(0.0, -y);
    }
    return a;
}

Complex g0_borel_exact(double x, Complex p, double c0, double psi0) {
    if (x == 0.0) throw std::domain_error("g0_borel_exact: x = 0");
    double y = x - 2.0 * c0 / x;
    return psi0 * std::exp(Complex(0.0, -y) * p) / Complex(0.0, x);
}

// ---------------------------------------------------------------------------
// Pade

Complex PadeApprox::eval(Complex p) const {
    Complex nu = 0.0, de = 0.0;
    for (size_t i = num.size(); i-- > 0;) nu = nu * p + num[i];
    for (size_t i = den.size(); i-- > 0;) de = de * p + den[i];
    return nu / de;
}

PadeApprox pade(const BorelTable& table, int L, int M, PadeOptions opts) {
    if (L < 0 || M < 0) throw std::domain_error("pade: L, M >= 0");
    const int need = L + M + 1;
    if (static_cast<int>(table.b.size()) < need)
        throw std::domain_error("pade: L+M+1 coefficients required");
    // beta_j = coefficient of p^j in B(p)
    std::vector<Complex> beta(table.b.begin(), table.b.end());
    const auto bcoef = [&](int j) -> Complex {
        return (j < 0 || j >= static_cast<int>(beta.size())) ? Complex(0.0)
                                                             : beta[j];
    };

    PadeApprox ap;
    ap.L = L;
    ap.M = M;
    ap.den.assign(M + 1, Complex(0.0));
    ap.den[0] = 1.0;

    bool window_zero = true;
    for (int k = 0; k < need; ++k)
        if (bcoef(k) != Complex(0.0)) window_zero = false;
    if (window_zero) return ap;  // zero function, zero approximant

    if (M > 0) {
        Eigen::MatrixXcd A(M, M);
        Eigen::VectorXcd rhs(M);
        for (int i = 1; i <= M; ++i) {
            for (int j = 1; j <= M; ++j) A(i - 1, j - 1) = bcoef(L + i - j);
            rhs(i - 1) = -bcoef(L + i);
        }
        // column equilibration: coefficient magnitudes fall factorially,
        // which otherwise wrecks the SVD truncation
        Eigen::VectorXd colscale(M);
        for (int j = 0; j < M; ++j) {
            double s = A.col(j).cwiseAbs().maxCoeff();
            colscale(j) = s > 0.0 ? s : 1.0;
            A.col(j) /= colscale(j);
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
            A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        double smax = sv.size() ? sv(0) : 0.0;
        if (smax == 0.0)
            throw ConditioningError(
                "pade: singular system beyond regularization");
        if (opts.svd_trunc > 0.0) svd.setThreshold(opts.svd_trunc);
        Eigen::VectorXcd q = svd.solve(rhs);
        ap.cond.sv_ratio = sv(sv.size() - 1) / smax;
        ap.cond.fit_residual = (A * q - rhs).norm() /
                               std::max(1.0, rhs.norm());
        for (int j = 1; j <= M; ++j) ap.den[j] = q(j - 1) / colscale(j - 1);
    }
    ap.num.assign(L + 1, Complex(0.0));
    for (int i = 0; i <= L; ++i) {
        Complex s = bcoef(i);
        for (int j = 1; j <= std::min(i, M); ++j)
            s += ap.den[j] * bcoef(i - j);
        ap.num[i] = s;
    }

    // re-expansion check: P/Q matches beta_0..beta_{L+M}; coefficients
    // beyond that window measure how consistent the unused tail is
    {
        const int avail = static_cast<int>(beta.size());
        std::vector<Complex> c(avail, Complex(0.0));
        double worst = 0.0, defect = 0.0;
        double scale = 0.0;
        for (int k = 0; k < avail; ++k)
            scale = std::max(scale, std::abs(bcoef(k)));
        for (int k = 0; k < avail; ++k) {
            Complex s = k <= L ? ap.num[k] : Complex(0.0);
            for (int j = 1; j <= std::min(k, M); ++j)
                s -= ap.den[j] * c[k - j];
            c[k] = s;
            double err = std::abs(c[k] - bcoef(k)) / std::max(scale, 1e-300);
            if (k < need)
                worst = std::max(worst, err);
            else
                defect = std::max(defect, err);
        }
        ap.cond.taylor_match_rel = worst;
        ap.cond.extrapolation_defect = defect;
    }

    // poles: roots of the denominator via the companion matrix
    int deg = M;
    double dmax = 0.0;
    for (int j = 0; j <= M; ++j) dmax = std::max(dmax, std::abs(ap.den[j]));
    while (deg > 0 && std::abs(ap.den[deg]) < 1e-14 * dmax) --deg;
    if (deg > 0) {
        Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
        for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
        for (int i = 0; i < deg; ++i) C(i, deg - 1) = -ap.den[i] / ap.den[deg];
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
        for (int i = 0; i < deg; ++i) {
            PoleInfo pi;
            pi.location = es.eigenvalues()(i);
            // residue P(z)/Q'(z)
            Complex nu = 0.0, dq = 0.0;
            for (size_t j = ap.num.size(); j-- > 0;)
                nu = nu * pi.location + ap.num[j];
            for (size_t j = ap.den.size(); j-- > 1;)
                dq = dq * pi.location +
                     ap.den[j] * static_cast<double>(j);
            pi.residue = (dq == Complex(0.0)) ? Complex(0.0) : nu / dq;
            pi.froissart = std::abs(pi.residue) < opts.froissart_residue;
            ap.poles.push_back(pi);
        }
    }
    return ap;
}

// ---------------------------------------------------------------------------
// Gauss-Laguerre nodes (Golub-Welsch on the Jacobi matrix)

namespace {

struct GLRule {
    std::vector<double> nodes, weights;
};

const GLRule& laguerre_rule(int n) {
    static std::map<int, GLRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    Eigen::VectorXd diag(n), sub(n - 1);
    for (int i = 0; i < n; ++i) diag(i) = 2.0 * i + 1.0;
    for (int i = 1; i < n; ++i) sub(i - 1) = static_cast<double>(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    GLRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;  // mu_0 = int_0^inf e^{-s} ds = 1
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

double screen_poles(const std::vector<PoleInfo>& poles, double eps,
                    const LaplaceOptions& opts, bool& warn) {
    double extra_err = 0.0;
    for (const PoleInfo& p : poles) {
        if (p.froissart) continue;
        double re = p.location.real();
        double dist = re >= 0.0 ? std::abs(p.location.imag())
                                : std::abs(p.location);
        if (dist >= opts.pole_guard) continue;
        // a pole only obstructs the integral where the e^{-p/eps} weight
        // still carries mass; far-out approximant artifacts are harmless
        double damage =
            std::abs(p.residue) * std::exp(-std::max(re, 0.0) / eps);
        if (damage <= opts.abs_tol) continue;
        if (dist < opts.on_path_tol && damage > opts.pole_error_tol)
            throw SummabilityError(
                "laplace_sum: pole on the integration path");
        warn = true;
        extra_err += damage;
    }
    return extra_err;
}

}  // namespace

LaplaceResult laplace_sum(const std::function<Complex(double)>& transform,
                          double eps, LaplaceOptions opts,
                          const std::vector<PoleInfo>& poles) {
    if (!(eps > 0.0)) throw std::domain_error("laplace_sum: eps > 0");
    LaplaceResult out;
    double pole_err = screen_poles(poles, eps, opts, out.pole_warning);

    // substitute p = eps s: eps * int e^{-s} B(eps s) ds
    Complex prev = 0.0;
    bool have_prev = false;
    for (int n = opts.min_nodes; n <= opts.max_nodes; n *= 2) {
        const GLRule& rule = laguerre_rule(n);
        Complex acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += rule.weights[i] * transform(eps * rule.nodes[i]);
        acc *= eps;
        if (have_prev) {
            double err = std::abs(acc - prev);
            out.value = acc;
            out.err_est = err + pole_err;
            out.nodes = n;
            if (err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(acc)))
                return out;
        }
        prev = acc;
        have_prev = true;
    }
    return out;  // best effort; err_est reports the last disagreement
}

LaplaceResult laplace_sum(const PadeApprox& approx, double eps,
                          LaplaceOptions opts) {
    return laplace_sum(
        [&](double p) { return approx.eval(Complex(p, 0.0)); }, eps, opts,
        approx.poles);
}

std::vector<ResumPoint> resum_solution(const PerturbationSeries& series,
                                       double eps,
                                       const std::vector<double>& t_grid,
                                       int L, int M, LaplaceOptions opts) {
    const int K = series.max_order();
    if (K < L + M + 1)
        throw std::domain_error("resum_solution: K >= L+M+1 required");
    const double c0 = series.equilibrium().c0;
    std::vector<ResumPoint> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        std::vector<Complex> a(K);
        for (int k = 1; k <= K; ++k)
            a[k - 1] = series.order(k).evaluate_real(series.omega(), t);
        BorelTable table = borel_coeffs(a, "t=" + std::to_string(t));
        PadeApprox ap = pade(table, L, M);
        LaplaceResult lr = laplace_sum(ap, eps, opts);
        ResumPoint pt;
        pt.t = t;
        pt.truncated = evaluate(series, eps, t);
        pt.resummed = c0 + lr.value.real();
        pt.quad_err = lr.err_est + std::abs(lr.value.imag());
        pt.pole_warning = lr.pole_warning;
        out.push_back(pt);
    }
    return out;
}

namespace {

Complex adaptive_simpson(const std::function<Complex(double)>& f, double a,
                         double b, Complex fa, Complex fm, Complex fb,
                         Complex whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    Complex flm = f(lm), frm = f(rm);
    Complex left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    Complex right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    Complex delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0,
                            depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0,
                            depth - 1);
}

}  // namespace

Complex convolve_borel(const std::function<Complex(double)>& B1,
                       const std::function<Complex(double)>& B2, double p,
                       double tol) {
    if (p < 0.0) throw std::domain_error("convolve_borel: p >= 0");
    if (p == 0.0) return 0.0;
    const auto f = [&](double s) { return B1(s) * B2(p - s); };
    Complex fa = f(0.0), fb = f(p), fm = f(0.5 * p);
    Complex whole = p / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, 0.0, p, fa, fm, fb, whole, tol, 40);
}

// ---------------------------------------------------------------------------
// Cutoff family

CutoffFamily::CutoffFamily(std::vector<double> scale)
    : scale_(std::move(scale)) {
    for (double c : scale_)
        if (!(c > 0.0))
            throw std::domain_error("cutoff_family: non-positive scaling");
}

CutoffFamily CutoffFamily::diophantine(double C0, int n_max) {
    if (!(C0 > 0.0)) throw std::domain_error("cutoff_family: C0 > 0");
    std::vector<double> s;
    for (int n = 0; n <= n_max; ++n) s.push_back(std::ldexp(1.0, n) / (4.0 * C0));
    return CutoffFamily(std::move(s));
}

CutoffFamily CutoffFamily::bryuno(const std::vector<double>& alphas) {
    std::vector<double> s;
    for (double a : alphas) {
        if (!(a > 0.0)) throw std::domain_error("cutoff_family: alpha > 0");
        s.push_back(1.0 / (4.0 * a));
    }
    return CutoffFamily(std::move(s));
}

double CutoffFamily::psi(double u) const {
    // C^inf ramp from 0 at u=1/2 to 1 at u=1 built from s(v) = e^{-1/v}
    if (u <= 0.5) return 0.0;
    if (u >= 1.0) return 1.0;
    double v = 2.0 * u - 1.0;
    double s1 = std::exp(-1.0 / v);
    double s2 = std::exp(-1.0 / (1.0 - v));
    return s1 / (s1 + s2);
}

double CutoffFamily::partition_partial(double u, int N) const {
    double acc = 0.0;
    double prod = 1.0;  // chi_0 ... chi_{n-1}
    for (int n = 0; n <= N && n < levels(); ++n) {
        acc += prod * psi_n(n, u);
        prod *= chi_n(n, u);
    }
    return acc;
}

double CutoffFamily::partition_tail(double u, int N) const {
    double prod = 1.0;
    for (int n = 0; n <= N && n < levels(); ++n) prod *= chi_n(n, u);
    return prod;
}

// ---------------------------------------------------------------------------
// Remainder diagnostics

RemainderScan remainder_scan(const PerturbationSeries& series,
                             const std::function<double(double)>& reference,
                             double t, const std::vector<int>& N_values,
                             const std::vector<double>& eps_values) {
    RemainderScan out;
    // per-order values at t
    std::vector<double> xt;
    for (int k = 0; k <= series.max_order(); ++k)
        xt.push_back(series.order(k).evaluate_real(series.omega(), t));

    std::vector<double> ys;  // log|R| - log N! - N log eps
    std::vector<int> ns;
    for (int N : N_values) {
        if (N < 1 || N > series.max_order() + 1)
            throw std::domain_error("remainder_scan: N out of range");
        double lfact = 0.0;
        for (int j = 2; j < N; ++j) lfact += std::log(static_cast<double>(j));
        // log (N-1)! accumulated; add log N below when needed
        for (double eps : eps_values) {
            double partial = 0.0, ek = 1.0;
            for (int k = 0; k < N; ++k) {
                partial += ek * xt[k];
                ek *= eps;
            }
            double R = reference(eps) - partial;
            RemainderRow row;
            row.N = N;
            row.eps = eps;
            row.remainder = std::abs(R);
            double logNfact = lfact + (N >= 2 ? std::log(double(N)) : 0.0);
            // q_N = (|R| / (N! eps^N))^{1/N}
            double lq = (std::log(std::max(row.remainder, 1e-300)) -
                         logNfact - N * std::log(eps)) /
                        N;
            row.qN = std::exp(lq);
            out.rows.push_back(row);
            out.max_q = std::max(out.max_q, row.qN);
            if (row.remainder > 0.0) {
                ys.push_back(std::log(row.remainder) - logNfact -
                             N * std::log(eps));
                ns.push_back(N);
            }
        }
    }
    if (ys.size() >= 2) {
        double n = static_cast<double>(ys.size());
        double sk = 0, sy = 0, skk = 0, sky = 0;
        for (size_t i = 0; i < ys.size(); ++i) {
            sk += ns[i];
            sy += ys[i];
            skk += static_cast<double>(ns[i]) * ns[i];
            sky += ns[i] * ys[i];
        }
        double denom = n * skk - sk * sk;
        double slope = denom != 0.0 ? (n * sky - sk * sy) / denom : 0.0;
        double inter = (sy - slope * sk) / n;
        for (size_t i = 0; i < ys.size(); ++i)
            inter = std::max(inter, ys[i] - slope * ns[i]);
        out.B_fit = std::exp(slope);
        out.A_fit = std::exp(inter);
    }
    return out;
}

}  // namespace qpw
