#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpw/errors.hpp"
#include "qpw/mode.hpp"

namespace qpw {

// Exact and floating-point arithmetic of frequency vectors: continued
// fractions, small divisors alpha_n(omega), Bryuno partial sums and
// Diophantine constant fitting.  All norms on modes are |nu|_1.

struct FrequencyOptions {
    double degeneracy_floor = 1e-12;
    // Brute-force range for the rational-dependence check at construction
    // (d >= 2).  Scans all 0 < |nu|_1 <= check_range.
    int check_range = 1 << 10;
};

class FrequencyVector {
  public:
    FrequencyVector(std::vector<double> components,
                    FrequencyOptions opts = {});

    int dim() const { return static_cast<int>(w_.size()); }
    const std::vector<double>& components() const { return w_; }
    double degeneracy_floor() const { return opts_.degeneracy_floor; }
    int checked_range() const { return opts_.check_range; }

    // Scalar product omega . nu, summed in index order (bit-stable).
    double dot(const Mode& nu) const;

  private:
    std::vector<double> w_;
    FrequencyOptions opts_;
};

struct Convergent {
    long long p = 0;
    long long q = 1;
};

// Certified continued-fraction expansion of a double.  Quotients are
// produced by exact integer arithmetic on the rational the double
// represents, and kept only while the two neighbouring doubles share the
// same expansion (so the quotients are a property of the real number the
// input approximates, not of its last bits).
struct ContinuedFraction {
    std::vector<long long> quotients;    // a_1, a_2, ... (gamma in (0,1))
    std::vector<Convergent> convergents; // p_k/q_k, same indexing
    bool terminated = false;             // exact rational input
};

// gamma must lie in (0,1); n_terms >= 1.
ContinuedFraction cf_expand(double gamma, int n_terms);

struct ConstantTypeReport {
    bool constant_type = false;
    long long max_quotient = 0;
    int terms_examined = 0;
};

// Reports the maximum certified partial quotient among the first n_terms
// (or as many as can be certified) and whether it stays below `bound`.
ConstantTypeReport is_constant_type(double gamma, int n_terms,
                                    long long bound = 1000);

enum class AlphaMethod { brute, convergent, automatic };

// alpha_n(omega) = inf over 0 < |nu|_1 <= 2^n of |omega . nu|.
// The convergent method requires d = 2 and uses exact integer convergents
// of the component ratio; it re-evaluates candidates through the same dot
// product as the brute scan so the two methods agree bit-for-bit on the
// minimizer.  Throws DegenerateFrequencyError if the infimum falls below
// the degeneracy floor.
double alpha_n(const FrequencyVector& omega, int n,
               AlphaMethod method = AlphaMethod::automatic);

struct BrunoSummary {
    int n_max = 0;
    std::vector<double> alphas;        // alpha_0 ... alpha_{n_max}
    std::vector<double> increments;    // 2^{-n} log(1/alpha_n)
    std::vector<double> partial_sums;  // B_n = sum_{m<=n} increments
    std::vector<std::string> methods;  // "brute" | "convergent" per entry
};

BrunoSummary bryuno_sum(const FrequencyVector& omega, int n_max,
                        AlphaMethod method = AlphaMethod::automatic);

struct DiophantineWitness {
    double C0 = 0.0;
    double tau = 0.0;
    int N_checked = 0;
    Mode argmin;  // nu attaining the minimum of |omega.nu| |nu|^tau
};

// C0 = min over 0 < |nu|_1 <= N of |omega . nu| * |nu|_1^tau.  The witness
// certifies |omega.nu| >= C0 |nu|^{-tau} on the checked range only.
DiophantineWitness diophantine_fit(const FrequencyVector& omega, double tau,
                                   int N);

// Independent re-check of a witness by a plain exhaustive scan.
bool check_witness(const FrequencyVector& omega,
                   const DiophantineWitness& witness);

// Brute-force oracle shared by tests: plain scan over the whole ball.
double alpha_brute_reference(const FrequencyVector& omega, int range);

}  // namespace qpw
