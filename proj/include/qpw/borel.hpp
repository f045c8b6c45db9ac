#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qpw/series.hpp"
#include "qpw/trig.hpp"

namespace qpw {

// Borel machinery: Borel coefficients b_n = a_n/(n-1)!, Pade approximation
// of the transform, weighted Laplace quadrature, closed-form propagator
// transforms, cutoff families and remainder diagnostics.
//
// Convention: for a series sum_{n>=1} a_n eps^n the transform is
// B(p) = sum_{n>=1} b_n p^{n-1} with b_n = a_n/(n-1)!, so that
// int_0^inf e^{-p/eps} B(p) dp reproduces the series termwise.

struct BorelTable {
    std::vector<Complex> a;  // a[0] holds a_1
    std::vector<Complex> b;  // b[0] holds b_1
    double radius_est = 0.0;
    std::string anchor;
};

BorelTable borel_coeffs(const std::vector<Complex>& a,
                        std::string anchor = "");

// eps-expansion of the plain propagator eps/(ix(1+i eps x)); n terms.
std::vector<Complex> propagator_eps_series(double x, int n);

// Closed-form Borel transform e^{-ipx}/(ix) of the plain propagator.
Complex propagator_borel_exact(double x, Complex p);

// Resummed zero-scale propagator (zero-mode pair summed into the
// denominator): eps psi0 / (ix(1+i eps x) + 2 eps c0).
Complex g0_eval(double x, double eps, double c0, double psi0);
std::vector<Complex> g0_eps_series(double x, double c0, int n, double psi0);
// Its Borel transform (psi0/(ix)) exp(-ip(x - 2 c0/x)).
Complex g0_borel_exact(double x, Complex p, double c0, double psi0);

struct PoleInfo {
    Complex location;
    Complex residue;
    bool froissart = false;  // spurious pole/zero pair, pruned from guards
};

struct PadeConditioning {
    double sv_ratio = 0.0;          // sigma_min / sigma_max of the system
    double fit_residual = 0.0;      // normal-equation residual norm
    double taylor_match_rel = 0.0;  // re-expansion mismatch on the window
    // mismatch of the re-expansion against coefficients beyond the matched
    // L+M+1 window; grows when the input tail is inconsistent
    double extrapolation_defect = 0.0;
};

struct PadeApprox {
    int L = 0, M = 0;
    std::vector<Complex> num;  // degree L
    std::vector<Complex> den;  // degree M, den[0] = 1
    std::vector<PoleInfo> poles;
    PadeConditioning cond;

    Complex eval(Complex p) const;
};

struct PadeOptions {
    // relative singular-value cutoff; 0 keeps the solver's machine-level
    // default (Pade systems of entire functions are near-singular by
    // nature and harsher cutoffs destroy real information)
    double svd_trunc = 0.0;
    double froissart_residue = 1e-12;
};

// [L/M] approximant of B(p) = sum_j b_{j+1} p^j; needs L+M+1 coefficients.
PadeApprox pade(const BorelTable& table, int L, int M, PadeOptions opts = {});

struct LaplaceOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-12;
    int min_nodes = 32;
    int max_nodes = 1024;
    double pole_guard = 0.05;   // distance to R+ that triggers a warning
    double on_path_tol = 1e-9;  // distance treated as "on the path"
    // an on-path pole is a summability failure once its weighted residue
    // |res| e^{-Re p/eps} exceeds this; smaller ones are absorbed into the
    // error estimate and flagged
    double pole_error_tol = 1e-8;
};

struct LaplaceResult {
    Complex value;
    double err_est = 0.0;   // disagreement of the last two refinements
    bool pole_warning = false;
    int nodes = 0;
};

// int_0^inf e^{-p/eps} B(p) dp by Gauss-Laguerre quadrature with node
// doubling until two refinements agree.  Non-spurious poles within
// on_path_tol of R+ raise SummabilityError.
LaplaceResult laplace_sum(const std::function<Complex(double)>& transform,
                          double eps, LaplaceOptions opts = {},
                          const std::vector<PoleInfo>& poles = {});
LaplaceResult laplace_sum(const PadeApprox& approx, double eps,
                          LaplaceOptions opts = {});

struct ResumPoint {
    double t = 0.0;
    double truncated = 0.0;
    double resummed = 0.0;
    double quad_err = 0.0;
    bool pole_warning = false;
};

// Per grid point: a_k = x^(k)(t) -> Borel -> Pade[L/M] -> Laplace, plus the
// k=0 offset c0.
std::vector<ResumPoint> resum_solution(const PerturbationSeries& series,
                                       double eps,
                                       const std::vector<double>& t_grid,
                                       int L, int M,
                                       LaplaceOptions opts = {});

// int_0^p B1(p') B2(p-p') dp' by adaptive Simpson quadrature.
Complex convolve_borel(const std::function<Complex(double)>& B1,
                       const std::function<Complex(double)>& B2, double p,
                       double tol = 1e-10);

// Smooth step psi (=0 below 1/2, =1 above 1, C^inf monotone) and the scaled
// families chi_n/psi_n used in the multiscale decomposition.
class CutoffFamily {
  public:
    enum class Scaling { diophantine, bryuno };

    static CutoffFamily diophantine(double C0, int n_max);
    static CutoffFamily bryuno(const std::vector<double>& alphas);

    double psi(double u) const;
    double chi(double u) const { return 1.0 - psi(u); }
    double psi_n(int n, double u) const { return psi(scale_[n] * u); }
    double chi_n(int n, double u) const { return 1.0 - psi_n(n, u); }
    int levels() const { return static_cast<int>(scale_.size()); }

    // psi_0 + sum_{1<=n<=N} chi_0...chi_{n-1} psi_n, and the tail product
    // prod_{n<=N} chi_n (their sum is 1 identically).
    double partition_partial(double u, int N) const;
    double partition_tail(double u, int N) const;

  private:
    explicit CutoffFamily(std::vector<double> scale);
    std::vector<double> scale_;  // multiplier applied to u at level n
};

struct RemainderRow {
    int N = 0;
    double eps = 0.0;
    double remainder = 0.0;  // |R_N(eps)|
    double qN = 0.0;         // (|R_N| / (N! eps^N))^{1/N}
};

struct RemainderScan {
    std::vector<RemainderRow> rows;
    double A_fit = 0.0;  // certified |R_N| <= A_fit B_fit^N N! eps^N
    double B_fit = 0.0;
    double max_q = 0.0;
};

// R_N(eps) = reference(eps) - sum_{k<N} eps^k x^(k)(t).
RemainderScan remainder_scan(const PerturbationSeries& series,
                             const std::function<double(double)>& reference,
                             double t, const std::vector<int>& N_values,
                             const std::vector<double>& eps_values);

}  // namespace qpw
