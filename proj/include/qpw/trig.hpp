#pragma once

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "qpw/errors.hpp"
#include "qpw/freq.hpp"
#include "qpw/mode.hpp"

namespace qpw {

using Complex = std::complex<double>;

// A truncated quasi-periodic function sum_nu c_nu e^{i nu.psi} over Z^d.
// Coefficients live in an ordered map so every reduction over the support
// runs in a fixed (sorted-by-mode) order.
class TrigSeries {
  public:
    explicit TrigSeries(int d, bool real_flag = true)
        : d_(d), real_flag_(real_flag) {}

    static TrigSeries constant(int d, double value, bool real_flag = true);

    int dim() const { return d_; }
    bool real_flag() const { return real_flag_; }
    const std::map<Mode, Complex>& coeffs() const { return c_; }
    bool empty() const { return c_.empty(); }

    Complex at(const Mode& nu) const;
    // Inserts/overwrites one coefficient (dropping exact zeros).
    void set(const Mode& nu, Complex v);
    // set(nu, v) and set(-nu, conj(v)) in one call.
    void set_pair(const Mode& nu, Complex v);

    void add_scaled(const TrigSeries& other, Complex factor);
    TrigSeries scaled(Complex factor) const;

    // Largest |c_nu| over the support (0 for empty).
    double max_abs() const;
    // max over the support of |c_{-nu} - conj(c_nu)|.
    double reality_defect() const;
    int max_l1_mode() const;

    // Drops coefficients with |c_nu| < cut; returns the dropped mass.
    double prune(double cut);

    // Value at angle psi = omega*t; exact spectral sum.
    Complex evaluate_angle(const std::vector<double>& psi) const;
    Complex evaluate(const FrequencyVector& omega, double t) const;
    // Real-part evaluation; throws if the imaginary residue exceeds tol.
    double evaluate_real(const FrequencyVector& omega, double t,
                         double imag_tol = 1e-12) const;

    // Termwise multiplication by (i omega.nu)^order (spectral derivative).
    TrigSeries derivative(const FrequencyVector& omega, int order = 1) const;

    std::optional<double> decay_xi;  // documented decay rate, if any

  private:
    int d_;
    std::map<Mode, Complex> c_;
    bool real_flag_;
};

TrigSeries operator+(const TrigSeries& a, const TrigSeries& b);
TrigSeries operator-(const TrigSeries& a, const TrigSeries& b);

// Exact product series on the union support; bilinear and commutative.
TrigSeries convolve(const TrigSeries& a, const TrigSeries& b);

// Analytic nonlinearity g(x) as a polynomial coefficient list
// (coeffs[j] multiplies x^j).
class Nonlinearity {
  public:
    explicit Nonlinearity(std::vector<double> coeffs);
    static Nonlinearity polynomial(std::vector<double> coeffs) {
        return Nonlinearity(std::move(coeffs));
    }

    double eval(double x) const;
    double deriv(double x) const;
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coeffs() const { return coeffs_; }

  private:
    std::vector<double> coeffs_;
};

}  // namespace qpw
