#include "qpw/dynamics.hpp"

#include <cmath>
#include <random>

namespace qpw {

namespace {

// Real-form forcing evaluator; the coefficient scan is done once so the
// per-step cost is a handful of trig calls.
struct Forcing {
    struct Term {
        double freq;  // omega . nu
        double re, im;
    };
    double constant = 0.0;
    std::vector<Term> terms;  // one per mode pair (nu, -nu), nu > 0

    Forcing(const TrigSeries& f, const FrequencyVector& omega) {
        for (const auto& [nu, c] : f.coeffs()) {
            if (is_zero(nu)) {
                constant += c.real();
                continue;
            }
            // keep the lexicographically positive representative
            Mode neg = negate(nu);
            if (nu < neg) continue;
            terms.push_back({omega.dot(nu), c.real(), c.imag()});
        }
    }

    double eval(double t) const {
        double s = constant;
        for (const Term& tm : terms) {
            double ph = tm.freq * t;
            // c e^{i ph} + conj(c) e^{-i ph} = 2(re cos - im sin)
            s += 2.0 * (tm.re * std::cos(ph) - tm.im * std::sin(ph));
        }
        return s;
    }
};

struct Rhs {
    const Nonlinearity* g;
    const Forcing* f;
    double eps;

    // x' = v, v' = (-v - eps g(x) + eps f(t)) / eps
    void eval(double t, double x, double v, double& dx, double& dv) const {
        dx = v;
        dv = (-v - eps * g->eval(x) + eps * f->eval(t)) / eps;
    }
};

// One implicit stage: solve Y - d*h*F(ts, Y) = rx, rv by Newton with the
// analytic 2x2 Jacobian.
bool solve_stage(const Rhs& rhs, double ts, double d, double h, double rx,
                 double rv, double& x, double& v, double atol) {
    const double ft = rhs.f->eval(ts);
    for (int it = 0; it < 12; ++it) {
        double gx = rhs.g->eval(x);
        double fx = v;
        double fv = (-v - rhs.eps * gx + rhs.eps * ft) / rhs.eps;
        double Gx = x - d * h * fx - rx;
        double Gv = v - d * h * fv - rv;
        // J = I - d h dF; dF = [[0,1],[-g'(x), -1/eps]]
        double gp = rhs.g->deriv(x);
        double a11 = 1.0, a12 = -d * h;
        double a21 = d * h * gp, a22 = 1.0 + d * h / rhs.eps;
        double det = a11 * a22 - a12 * a21;
        if (det == 0.0 || !std::isfinite(det)) return false;
        double ddx = (Gx * a22 - Gv * a12) / det;
        double ddv = (Gv * a11 - Gx * a21) / det;
        x -= ddx;
        v -= ddv;
        if (!std::isfinite(x) || !std::isfinite(v)) return false;
        if (std::abs(ddx) + std::abs(ddv) <
            1e-3 * atol + 1e-14 * (std::abs(x) + std::abs(v)))
            return true;
    }
    return false;
}

}  // namespace

Trajectory integrate(const Nonlinearity& g, const TrigSeries& f,
                     const FrequencyVector& omega, double eps, double x0,
                     double v0, double T, const IntegratorConfig& cfg,
                     double sample_dt) {
    if (!(eps > 0.0)) throw std::domain_error("integrate: eps > 0");
    if (f.reality_defect() > 1e-12)
        throw std::domain_error("integrate: forcing must be a real series");
    Forcing fo(f, omega);
    Rhs rhs{&g, &fo, eps};

    const double gamma = 2.0 - std::sqrt(2.0);
    const double d = gamma / 2.0;
    // embedded third-order weights (c = 0, gamma, 1)
    const double bh1 = 1.0 / (6.0 * gamma * (1.0 - gamma));
    const double bh2 = (0.5 - gamma * bh1);
    const double bh0 = 1.0 - bh1 - bh2;
    const double b0 = std::sqrt(2.0) / 4.0, b1 = b0, b2 = d;

    Trajectory out;
    double t = 0.0, x = x0, v = v0;
    out.samples.push_back({t, x, v});
    double next_sample = sample_dt;
    double h = std::min(cfg.h_init, cfg.h_max);  // controller state

    while (t < T - 1e-12 * std::max(1.0, T)) {
        if (out.steps++ > cfg.max_steps)
            throw IntegrationError("integrate: max step count exceeded");
        double target = std::min(T, next_sample);
        bool clipped = t + h >= target;
        double hs = clipped ? target - t : h;  // step actually taken
        if (hs < cfg.h_min)
            throw IntegrationError("integrate: step size underflow");

        double k0x, k0v;
        rhs.eval(t, x, v, k0x, k0v);
        // TR stage to t + gamma h
        double xa = x, va = v;
        bool ok = solve_stage(rhs, t + gamma * hs, d, hs, x + d * hs * k0x,
                              v + d * hs * k0v, xa, va, cfg.atol);
        double k1x = 0, k1v = 0, k2x = 0, k2v = 0;
        double x1 = 0, v1 = 0;
        if (ok) {
            rhs.eval(t + gamma * hs, xa, va, k1x, k1v);
            // BDF2 stage to t + h
            const double c1 = 1.0 / (gamma * (2.0 - gamma));
            const double c2 = (1.0 - gamma) * (1.0 - gamma) /
                              (gamma * (2.0 - gamma));
            double rx = c1 * xa - c2 * x;
            double rv = c1 * va - c2 * v;
            x1 = xa;
            v1 = va;
            ok = solve_stage(rhs, t + hs, d, hs, rx, rv, x1, v1, cfg.atol);
            if (ok) rhs.eval(t + hs, x1, v1, k2x, k2v);
        }

        if (!ok) {
            ++out.rejected;
            h = hs * 0.25;
            if (h < cfg.h_min)
                throw IntegrationError(
                    "integrate: nonlinear solver failure at minimal step");
            continue;
        }

        // embedded error, filtered through (I - d h J) for stiffness
        double ex = hs * ((bh0 - b0) * k0x + (bh1 - b1) * k1x +
                          (bh2 - b2) * k2x);
        double ev = hs * ((bh0 - b0) * k0v + (bh1 - b1) * k1v +
                          (bh2 - b2) * k2v);
        double gp = g.deriv(x1);
        double a12 = -d * hs;
        double a21 = d * hs * gp, a22 = 1.0 + d * hs / eps;
        double det = a22 - a12 * a21;
        double fx = (ex * a22 - ev * a12) / det;
        double fv = (ev - ex * a21) / det;
        // internal deflation: local control at tol/10 keeps the accumulated
        // error of the order-2 method within the advertised tolerances on
        // the target problems (global error scales like tol^{2/3})
        const double defl = 0.1;
        double sx = defl * (cfg.atol +
                            cfg.rtol * std::max(std::abs(x), std::abs(x1)));
        double sv = defl * (cfg.atol +
                            cfg.rtol * std::max(std::abs(v), std::abs(v1)));
        double err = std::sqrt(0.5 * ((fx / sx) * (fx / sx) +
                                      (fv / sv) * (fv / sv)));
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0);
        fac = std::min(5.0, std::max(0.2, fac));
        if (err <= 1.0) {
            t += hs;
            x = x1;
            v = v1;
            double hc = std::min(cfg.h_max, hs * fac);
            h = clipped ? std::max(h, hc) : hc;
            if (std::abs(t - next_sample) <=
                1e-9 * std::max(1.0, next_sample)) {
                out.samples.push_back({t, x, v});
                next_sample += sample_dt;
            }
        } else {
            ++out.rejected;
            h = hs * fac;
        }
    }
    if (out.samples.back().t < t) out.samples.push_back({t, x, v});
    return out;
}

double attractor_distance(const Trajectory& traj,
                          const std::function<double(double)>& reference,
                          double T0) {
    if (traj.samples.empty() || traj.samples.back().t < T0)
        throw std::domain_error("attractor_distance: T0 beyond trajectory");
    double worst = 0.0;
    for (const OdeState& s : traj.samples)
        if (s.t >= T0)
            worst = std::max(worst, std::abs(s.x - reference(s.t)));
    return worst;
}

std::pair<std::complex<double>, std::complex<double>> linearized_decay(
    double eps, double gprime_c0) {
    if (!(eps > 0.0)) throw std::domain_error("linearized_decay: eps > 0");
    std::complex<double> disc =
        std::sqrt(std::complex<double>(1.0 - 4.0 * eps * eps * gprime_c0, 0.0));
    std::complex<double> l1 = (-1.0 + disc) / (2.0 * eps);
    std::complex<double> l2 = (-1.0 - disc) / (2.0 * eps);
    if (l1.real() < l2.real()) std::swap(l1, l2);
    return {l1, l2};
}

AttractorReport attractivity_probe(const Nonlinearity& g, const TrigSeries& f,
                                   const FrequencyVector& omega, double eps,
                                   double x0, double v0, double gprime_c0,
                                   const ProbeConfig& cfg) {
    AttractorReport rep;
    rep.gprime_c0 = gprime_c0;
    auto [ls, lf] = linearized_decay(eps, gprime_c0);
    rep.lambda_slow = ls.real();
    rep.lambda_fast = lf.real();
    rep.n_samples = cfg.n_samples;
    rep.T_end = cfg.T_end > 0.0 ? cfg.T_end : 100.0 / eps;
    rep.converge_tol = cfg.converge_tol;
    if (!(gprime_c0 > 0.0)) {
        rep.applicable = false;  // attractivity hypothesis not met
        return rep;
    }
    rep.applicable = true;

    Trajectory ref = integrate(g, f, omega, eps, x0, v0, rep.T_end,
                               cfg.integ, cfg.sample_dt);

    std::mt19937_64 rng(cfg.seed);
    const auto uniform01 = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };

    const double tail_start = 0.8 * rep.T_end;
    const double fit_lo = 100.0 * cfg.integ.atol;
    const double fit_hi = cfg.radius / 10.0;

    double exp_sum = 0.0;
    int exp_count = 0;
    for (int i = 0; i < cfg.n_samples; ++i) {
        // uniform in the disk of given radius
        double r = cfg.radius * std::sqrt(uniform01());
        double th = 2.0 * M_PI * uniform01();
        ProbeSample ps;
        ps.dx0 = r * std::cos(th);
        ps.dv0 = r * std::sin(th);
        Trajectory traj;
        try {
            traj = integrate(g, f, omega, eps, x0 + ps.dx0, v0 + ps.dv0,
                             rep.T_end, cfg.integ, cfg.sample_dt);
        } catch (const IntegrationError&) {
            ps.integration_failed = true;
            rep.samples.push_back(ps);
            ++rep.n_failed;
            continue;
        }
        size_t n = std::min(traj.samples.size(), ref.samples.size());
        double tail = 0.0, tail_floor = 0.0;
        std::vector<double> all_t, all_d;
        for (size_t j = 0; j < n; ++j) {
            const OdeState& a = traj.samples[j];
            const OdeState& b = ref.samples[j];
            double dist = std::hypot(a.x - b.x, a.v - b.v);
            all_t.push_back(a.t);
            all_d.push_back(dist);
            if (a.t >= tail_start) {
                tail = std::max(tail, std::abs(a.x - b.x));
                tail_floor = std::max(tail_floor, dist);
            }
        }
        ps.tail_distance = tail;
        ps.converged = tail <= cfg.converge_tol;
        // regression window: below radius/10 (skips the initial layer) and
        // safely above both 100*atol and the numerical floor the pair of
        // trajectories settles at; if the run is too short to have reached
        // a floor the plain window applies
        std::vector<double> ts, ys;
        for (double lo : {std::max(fit_lo, 30.0 * tail_floor), fit_lo}) {
            ts.clear();
            ys.clear();
            for (size_t j = 0; j < all_t.size(); ++j)
                if (all_d[j] > lo && all_d[j] < fit_hi) {
                    ts.push_back(all_t[j]);
                    ys.push_back(std::log(all_d[j]));
                }
            if (ts.size() >= 8) break;
        }
        if (ts.size() >= 8) {
            double m = static_cast<double>(ts.size());
            double st = 0, sy = 0, stt = 0, sty = 0;
            for (size_t j = 0; j < ts.size(); ++j) {
                st += ts[j];
                sy += ys[j];
                stt += ts[j] * ts[j];
                sty += ts[j] * ys[j];
            }
            double denom = m * stt - st * st;
            if (denom > 0.0) {
                ps.decay_exponent = (m * sty - st * sy) / denom;
                exp_sum += ps.decay_exponent;
                ++exp_count;
            }
        }
        if (ps.converged) ++rep.n_converged;
        rep.worst_tail_distance =
            std::max(rep.worst_tail_distance, ps.tail_distance);
        rep.samples.push_back(ps);
    }
    rep.mean_decay_exponent = exp_count ? exp_sum / exp_count : 0.0;
    return rep;
}

}  // namespace qpw
