#include "qpw/freq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

namespace qpw {

using boost::multiprecision::cpp_int;

namespace {

// Exact rational num/den representing a positive double.
void to_rational(double x, cpp_int& num, cpp_int& den) {
    int e = 0;
    double fr = std::frexp(x, &e);  // x = fr * 2^e, fr in [0.5, 1)
    long long m = static_cast<long long>(std::ldexp(fr, 53));
    num = m;
    den = 1;
    int shift = 53 - e;
    if (shift >= 0)
        den <<= shift;
    else
        num <<= -shift;
}

struct RawExpansion {
    std::vector<long long> quotients;
    bool exact_end = false;     // remainder hit zero
    cpp_int final_den = 0;      // reduced denominator when exact_end
};

// Euclid on the exact rational of gamma in (0,1).  Quotients can become
// astronomically large near an exact termination; cap them for storage.
RawExpansion expand_exact(double gamma, int max_terms) {
    RawExpansion out;
    cpp_int n, d;
    to_rational(gamma, n, d);
    cpp_int g = gcd(n, d);
    n /= g;
    d /= g;
    out.final_den = d;
    // state: x = n/d in (0,1); quotient a = floor(d/n)
    for (int i = 0; i < max_terms; ++i) {
        if (n == 0) {
            out.exact_end = true;
            break;
        }
        cpp_int a = d / n;
        cpp_int r = d % n;
        long long aval = a > cpp_int(std::numeric_limits<long long>::max())
                             ? std::numeric_limits<long long>::max()
                             : static_cast<long long>(a);
        out.quotients.push_back(aval);
        d = n;
        n = r;
    }
    if (n == 0) out.exact_end = true;
    return out;
}

// Common prefix length of two quotient streams.  When one stream ends
// exactly at the mismatch position the last quotient of a terminating
// expansion may legally split ([...,a] == [...,a-1,1]); back off one term.
size_t common_prefix(const RawExpansion& a, const RawExpansion& b) {
    size_t m = std::min(a.quotients.size(), b.quotients.size());
    size_t i = 0;
    while (i < m && a.quotients[i] == b.quotients[i]) ++i;
    if (i == m && (a.exact_end || b.exact_end) && i > 0) --i;
    return i;
}

void append_convergent(std::vector<Convergent>& cs, long long a) {
    // p_k = a p_{k-1} + p_{k-2}, q_k likewise; seeds p_0=0,q_0=1, p_-1=1,q_-1=0
    long long pm1 = 0, qm1 = 1, pm2 = 1, qm2 = 0;
    if (cs.size() >= 1) {
        pm1 = cs.back().p;
        qm1 = cs.back().q;
    }
    if (cs.size() >= 2) {
        pm2 = cs[cs.size() - 2].p;
        qm2 = cs[cs.size() - 2].q;
    } else if (cs.size() == 1) {
        pm2 = 0;
        qm2 = 1;
    }
    cs.push_back({a * pm1 + pm2, a * qm1 + qm2});
}

// A rational with denominator this small is treated as a genuinely
// rational input rather than float noise (a double carries 53 bits; a
// clean rational uses far fewer).
const cpp_int kRationalDenCap = cpp_int(1) << 26;

constexpr long long kConvergentCap = (1LL << 62);

}  // namespace

ContinuedFraction cf_expand(double gamma, int n_terms) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::domain_error("cf_expand: gamma must lie in (0,1)");
    if (n_terms < 1) throw std::domain_error("cf_expand: n_terms >= 1");

    const int cap = n_terms + 2;
    RawExpansion mid = expand_exact(gamma, cap);

    ContinuedFraction cf;
    size_t keep;
    if (mid.exact_end && mid.final_den <= kRationalDenCap) {
        cf.terminated = true;
        keep = std::min<size_t>(mid.quotients.size(), n_terms);
    } else {
        RawExpansion lo = expand_exact(std::nextafter(gamma, 0.0), cap);
        RawExpansion hi = expand_exact(std::nextafter(gamma, 1.0), cap);
        keep = std::min(common_prefix(mid, lo), common_prefix(mid, hi));
        keep = std::min<size_t>(keep, n_terms);
    }
    for (size_t i = 0; i < keep; ++i) {
        cf.quotients.push_back(mid.quotients[i]);
        if (cf.convergents.empty()
                ? mid.quotients[i] > kConvergentCap
                : cf.convergents.back().q > kConvergentCap / (mid.quotients[i] + 1))
            break;  // integer overflow guard; quotients beyond are unusable anyway
        append_convergent(cf.convergents, mid.quotients[i]);
    }
    cf.quotients.resize(cf.convergents.size());
    return cf;
}

ConstantTypeReport is_constant_type(double gamma, int n_terms,
                                    long long bound) {
    ContinuedFraction cf = cf_expand(gamma, n_terms);
    if (cf.terminated)
        throw RationalInputError(
            "is_constant_type: terminating (rational) expansion");
    if (cf.quotients.empty())
        throw RationalInputError(
            "is_constant_type: no quotient certifiable at machine precision");
    ConstantTypeReport rep;
    rep.terms_examined = static_cast<int>(cf.quotients.size());
    rep.max_quotient =
        *std::max_element(cf.quotients.begin(), cf.quotients.end());
    rep.constant_type = rep.max_quotient <= bound;
    return rep;
}

// ---------------------------------------------------------------------------

FrequencyVector::FrequencyVector(std::vector<double> components,
                                 FrequencyOptions opts)
    : w_(std::move(components)), opts_(opts) {
    if (w_.empty()) throw std::domain_error("FrequencyVector: empty");
    for (double c : w_)
        if (std::abs(c) < opts_.degeneracy_floor)
            throw DegenerateFrequencyError(
                "FrequencyVector: component below degeneracy floor");
    if (dim() >= 2 && opts_.check_range > 0) {
        // Exact minimum of |omega.nu| over 0 < |nu|_1 <= check_range.  For
        // each tail (nu_2..nu_d) only the rounded choices of nu_1 can attain
        // the minimum, which keeps the scan O(range^{d-1}).
        double best = std::numeric_limits<double>::infinity();
        const int N = opts_.check_range;
        std::vector<int> nu(w_.size(), 0);
        const auto consider = [&](int budget) {
            double rest = 0.0;
            for (size_t i = 1; i < w_.size(); ++i) rest += w_[i] * nu[i];
            double target = -rest / w_[0];
            long long r = std::llround(target);
            for (long long c : {r - 1, r, r + 1}) {
                if (std::abs(static_cast<double>(c)) > budget) {
                    c = c < 0 ? -budget : budget;
                }
                nu[0] = static_cast<int>(c);
                bool zero = true;
                for (int v : nu)
                    if (v != 0) zero = false;
                if (zero) continue;
                best = std::min(best, std::abs(dot(nu)));
            }
        };
        // recursive tail enumeration with l1 budget
        const auto rec = [&](auto&& self, size_t coord, int budget) -> void {
            if (coord == w_.size()) {
                consider(budget);
                return;
            }
            for (int v = -budget; v <= budget; ++v) {
                nu[coord] = v;
                self(self, coord + 1, budget - std::abs(v));
            }
            nu[coord] = 0;
        };
        rec(rec, 1, N);
        if (best < opts_.degeneracy_floor)
            throw DegenerateFrequencyError(
                "FrequencyVector: rational dependence within checked range");
    }
}

double FrequencyVector::dot(const Mode& nu) const {
    double s = 0.0;
    for (size_t i = 0; i < w_.size(); ++i) s += w_[i] * nu[i];
    return s;
}

namespace {

// Canonical half-space enumeration of 0 < |nu|_1 <= N (first nonzero
// coordinate positive); fn receives each mode.
template <typename F>
void for_each_halfspace_mode(int d, int N, F&& fn) {
    Mode nu(d, 0);
    const auto rec = [&](auto&& self, int coord, int budget,
                         bool lead_zero) -> void {
        if (coord == d) {
            if (!lead_zero) fn(nu);
            return;
        }
        int lo = lead_zero ? 0 : -budget;
        for (int v = lo; v <= budget; ++v) {
            nu[coord] = v;
            self(self, coord + 1, budget - std::abs(v), lead_zero && v == 0);
        }
        nu[coord] = 0;
    };
    rec(rec, 0, N, true);
}

double alpha_brute(const FrequencyVector& omega, int n) {
    const int N = 1 << n;
    double best = std::numeric_limits<double>::infinity();
    for_each_halfspace_mode(omega.dim(), N, [&](const Mode& nu) {
        double v = std::abs(omega.dot(nu));
        if (v < best) best = v;
    });
    return best;
}

struct RatioExpansion {
    std::vector<Convergent> cs;
    // true when every certified quotient was consumed without reaching the
    // requested range: deeper approximations exist but the double cannot
    // resolve them.
    bool precision_exhausted = false;
};

// Continued-fraction expansion of an arbitrary positive ratio mu (exact
// quotients, certified against the two neighbouring doubles).
RatioExpansion ratio_convergents(double mu, long long q_cap) {
    // reuse cf_expand by splitting off the integer part
    long long a0 = static_cast<long long>(std::floor(mu));
    double frac = mu - static_cast<double>(a0);
    RatioExpansion out;
    // convergents of [a0; a1, a2, ...]: seeds h_-1=1,k_-1=0, h_0=a0,k_0=1
    long long pm1 = 1, qm1 = 0, p = a0, q = 1;
    out.cs.push_back({p, q});
    if (frac <= 0.0) return out;
    ContinuedFraction tail;
    try {
        tail = cf_expand(frac, 60);
    } catch (const std::domain_error&) {
        out.precision_exhausted = true;
        return out;
    }
    bool capped = false;
    for (long long a : tail.quotients) {
        if (a > 0 &&
            (p > (kConvergentCap - pm1) / std::max<long long>(a, 1) ||
             q > (kConvergentCap - qm1) / std::max<long long>(a, 1))) {
            capped = true;
            break;
        }
        long long pn = a * p + pm1;
        long long qn = a * q + qm1;
        pm1 = p;
        qm1 = q;
        p = pn;
        q = qn;
        out.cs.push_back({p, q});
        if (q > q_cap) {
            capped = true;
            break;
        }
    }
    out.precision_exhausted = !capped && !tail.terminated;
    return out;
}

double alpha_convergent(const FrequencyVector& omega, int n) {
    if (omega.dim() != 2)
        throw std::domain_error("alpha_n: convergent method requires d = 2");
    const long long N = 1LL << n;
    const double w1 = omega.components()[0];
    const double w2 = omega.components()[1];
    const double rho = w2 / w1;
    const double mu = std::abs(rho);
    const int s2 = rho >= 0 ? 1 : -1;

    double best = std::numeric_limits<double>::infinity();
    const auto consider = [&](long long p, long long q) {
        // candidate nu = (-s2 * p, q); feasibility in the l1 ball
        if (q < 1 || p < 0) return;
        if (p + q > N) return;
        if (p > std::numeric_limits<int>::max() ||
            q > std::numeric_limits<int>::max())
            return;
        Mode nu = {static_cast<int>(-s2 * p), static_cast<int>(q)};
        best = std::min(best, std::abs(omega.dot(nu)));
    };

    consider(1, 1);  // covered below too; harmless
    {  // nu = (1, 0)
        Mode nu = {1, 0};
        best = std::min(best, std::abs(omega.dot(nu)));
    }
    // small denominators directly
    const long long direct = std::min<long long>(N, 64);
    for (long long q = 1; q <= direct; ++q) {
        double t = mu * static_cast<double>(q);
        long long f = static_cast<long long>(std::floor(t));
        for (long long p : {f, f + 1}) {
            long long pc = std::min(p, N - q);  // clamp into the ball
            if (pc >= 0) consider(pc, q);
        }
    }
    // exact convergents of the ratio, plus boundary semiconvergents
    RatioExpansion re = ratio_convergents(mu, N);
    const std::vector<Convergent>& cs = re.cs;
    if (re.precision_exhausted && !cs.empty() && cs.back().p + cs.back().q <= N)
        throw std::domain_error(
            "alpha_n: convergent method exhausted machine precision of the "
            "ratio before covering the requested range");
    for (const Convergent& c : cs) consider(c.p, c.q);
    // intermediate fractions p_{k-1} + j p_k, q_{k-1} + j q_k near the
    // feasibility boundary
    for (size_t k = 1; k < cs.size(); ++k) {
        const Convergent& a = cs[k - 1];
        const Convergent& b = cs[k];
        long long denom = b.p + b.q;
        long long room = N - (a.p + a.q);
        if (denom <= 0 || room <= 0) continue;
        long long jmax = room / denom;
        for (long long j = std::max<long long>(1, jmax - 1); j <= jmax; ++j)
            consider(a.p + j * b.p, a.q + j * b.q);
    }
    return best;
}

}  // namespace

double alpha_brute_reference(const FrequencyVector& omega, int range) {
    double best = std::numeric_limits<double>::infinity();
    for_each_halfspace_mode(omega.dim(), range, [&](const Mode& nu) {
        double v = std::abs(omega.dot(nu));
        if (v < best) best = v;
    });
    return best;
}

double alpha_n(const FrequencyVector& omega, int n, AlphaMethod method) {
    if (n < 0) throw std::domain_error("alpha_n: n >= 0 required");
    double value;
    if (omega.dim() == 1) {
        value = std::abs(omega.components()[0]);
    } else {
        AlphaMethod m = method;
        if (m == AlphaMethod::automatic)
            m = (omega.dim() == 2 && n > 12) ? AlphaMethod::convergent
                                             : AlphaMethod::brute;
        value = (m == AlphaMethod::convergent) ? alpha_convergent(omega, n)
                                               : alpha_brute(omega, n);
    }
    if (value < omega.degeneracy_floor())
        throw DegenerateFrequencyError(
            "alpha_n: small divisor below degeneracy floor");
    return value;
}

BrunoSummary bryuno_sum(const FrequencyVector& omega, int n_max,
                        AlphaMethod method) {
    if (n_max < 0) throw std::domain_error("bryuno_sum: n_max >= 0");
    BrunoSummary s;
    s.n_max = n_max;
    double acc = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        AlphaMethod m = method;
        if (m == AlphaMethod::automatic)
            m = (omega.dim() == 2 && n > 12) ? AlphaMethod::convergent
                                             : AlphaMethod::brute;
        if (omega.dim() == 1) m = AlphaMethod::brute;
        double a = alpha_n(omega, n, m);
        double inc = std::ldexp(std::log(1.0 / a), -n);
        acc += inc;
        s.alphas.push_back(a);
        s.increments.push_back(inc);
        s.partial_sums.push_back(acc);
        s.methods.push_back(m == AlphaMethod::convergent ? "convergent"
                                                         : "brute");
    }
    return s;
}

DiophantineWitness diophantine_fit(const FrequencyVector& omega, double tau,
                                   int N) {
    if (N < 1 || tau <= 0.0)
        throw std::domain_error("diophantine_fit: need N >= 1, tau > 0");
    DiophantineWitness w;
    w.tau = tau;
    w.N_checked = N;
    double best = std::numeric_limits<double>::infinity();
    for_each_halfspace_mode(omega.dim(), N, [&](const Mode& nu) {
        double div = std::abs(omega.dot(nu));
        if (div < omega.degeneracy_floor())
            throw DegenerateFrequencyError(
                "diophantine_fit: degenerate frequency");
        double v = div * std::pow(static_cast<double>(l1_norm(nu)), tau);
        if (v < best) {
            best = v;
            w.argmin = nu;
        }
    });
    w.C0 = best;
    return w;
}

bool check_witness(const FrequencyVector& omega,
                   const DiophantineWitness& witness) {
    bool ok = true;
    for_each_halfspace_mode(omega.dim(), witness.N_checked,
                            [&](const Mode& nu) {
        double lhs = std::abs(omega.dot(nu));
        double rhs = witness.C0 *
                     std::pow(static_cast<double>(l1_norm(nu)), -witness.tau);
        if (lhs < rhs * (1.0 - 1e-14)) ok = false;
    });
    return ok;
}

}  // namespace qpw
