#pragma once

#include <vector>

#include "qpw/freq.hpp"
#include "qpw/trig.hpp"

namespace qpw {

// Order-by-order construction of the formal power series
// x(t;eps) = sum_k eps^k x^(k)(t) solving eps x'' + x' + eps g(x) = eps f.

struct EquilibriumData {
    double c0 = 0.0;
    double gprime_c0 = 0.0;
    double f0 = 0.0;
};

// Newton iteration for g(c0) = f0 starting from `guess`.  Throws
// NewtonError on non-convergence and DegenerateEquilibriumError when
// |g'(c0)| falls below gprime_floor.
EquilibriumData solve_c0(const Nonlinearity& g, double f0, double guess,
                         double tol = 1e-12, int max_iter = 100,
                         double gprime_floor = 1e-8);

struct TruncPolicy {
    enum class Kind { exact, tail_cut };
    Kind kind = Kind::exact;
    // tail_cut drops |c_nu| < tail_eps_rel * (max coefficient of the order).
    double tail_eps_rel = 1e-16;
};

class PerturbationSeries {
  public:
    PerturbationSeries(FrequencyVector omega, EquilibriumData eq,
                       Nonlinearity g)
        : omega_(std::move(omega)), eq_(eq), g_(std::move(g)) {}

    const FrequencyVector& omega() const { return omega_; }
    const EquilibriumData& equilibrium() const { return eq_; }
    const Nonlinearity& g() const { return g_; }
    int dim() const { return omega_.dim(); }
    int max_order() const { return static_cast<int>(orders_.size()) - 1; }

    const TrigSeries& order(int k) const { return orders_.at(k); }
    const std::vector<TrigSeries>& orders() const { return orders_; }
    const std::vector<double>& dropped_mass() const { return dropped_; }

    void push_order(TrigSeries s, double dropped = 0.0) {
        orders_.push_back(std::move(s));
        dropped_.push_back(dropped);
    }

  private:
    FrequencyVector omega_;
    EquilibriumData eq_;
    Nonlinearity g_;
    std::vector<TrigSeries> orders_;
    std::vector<double> dropped_;
};

// k-th epsilon-order of g(x(t;eps)) given the orders x^(0..k).
TrigSeries g_order(const Nonlinearity& g,
                   const std::vector<TrigSeries>& orders, int k);

// One step of the recursion: orders 0..k-1 of `series` must be complete.
// Phase A fixes the nonzero modes of x^(k) from the order-k balance;
// phase B fixes x^(k)_0 from the zero mode of the order-(k+1) balance.
TrigSeries next_order(const PerturbationSeries& series, const TrigSeries& f,
                      int k);

PerturbationSeries compute_series(const Nonlinearity& g, const TrigSeries& f,
                                  const FrequencyVector& omega, int K,
                                  TruncPolicy policy = {},
                                  double c0_guess = 1.0);

// Truncated sum at one time, sum_{k<=K} eps^k x^(k)(t).
double evaluate(const PerturbationSeries& series, double eps, double t);
std::vector<double> evaluate(const PerturbationSeries& series, double eps,
                             const std::vector<double>& t_grid);
// Spectral time derivative of the truncated sum (for ODE initial data).
double evaluate_velocity(const PerturbationSeries& series, double eps,
                         double t);

// max over the grid of |eps x'' + x' + eps g(x) - eps f(omega t)| for the
// truncated sum; derivatives are spectral, g is evaluated pointwise.
double residual(const PerturbationSeries& series, const TrigSeries& f,
                double eps, const std::vector<double>& t_grid);

struct GrowthFit {
    double A1 = 0.0;    // certified prefactor
    double eps2 = 0.0;  // fitted radius-type constant
    std::vector<double> slacks;  // log bound - log sup, per usable order
    std::vector<int> ks;         // orders entering the fit
};

// Least-squares fit of log(sup_nu |x^(k)_nu| / k!) = log(A1) - k log(eps2),
// then A1 inflated so every computed order satisfies the bound.
GrowthFit growth_fit(const PerturbationSeries& series);

}  // namespace qpw
