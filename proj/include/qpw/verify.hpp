#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpw/series.hpp"
#include "qpw/trig.hpp"

namespace qpw {

// Canonical test problems: g(x) = x^2 with trig-polynomial forcing.
struct CanonicalProblem {
    Nonlinearity g;
    TrigSeries f;
    FrequencyVector omega;
};

// d=1: omega = 1, f = 1 + 2 cos psi.
CanonicalProblem canonical_d1();
// d=2: omega = (1, (sqrt(5)-1)/2), f = 1 + 2 cos psi1 + 2 cos psi2.
CanonicalProblem canonical_d2();

struct CheckResult {
    std::string name;
    bool pass = false;
    double metric = 0.0;  // the quantity compared against tol
    double tol = 0.0;
    std::string detail;
};

namespace checks {

// Numbered after the acceptance criteria they implement.
CheckResult exact_equilibrium();                       // 1
CheckResult hand_orders();                             // 2
CheckResult residual_order();                          // 3
// 4; vertex_factor != -1 plants a wrong node factor (mutation hook),
// k_max below the closure order surfaces the incomplete-cover error.
CheckResult tree_oracle(int dim, int k_max = 7, double vertex_factor = -1.0);
CheckResult eps2_decomposition();                      // 4 (sign/ordering)
CheckResult borel_propagator();                        // 5
CheckResult borel_convolution();                       // 6
CheckResult borel_g0();                                // 7
CheckResult summability(int dim);                      // 8 (d=1), 9 (d=2)
CheckResult remainder_factorial();                     // 10
CheckResult small_divisors();                          // 11
CheckResult counting_lemma();                          // 12
CheckResult attractivity(int dim, std::uint64_t seed = 12345);  // 13
CheckResult cutoff_partition();                        // invariant extra

}  // namespace checks

struct VerifyOptions {
    std::vector<std::string> names = {"all"};  // subset or "all"
    int tree_k_max = 7;
    double vertex_factor = -1.0;  // mutation hook
    std::uint64_t seed = 12345;
    bool heavy = true;  // include the long-running dynamics checks
};

std::vector<CheckResult> run_verification(const VerifyOptions& opts);

}  // namespace qpw
