#pragma once

#include <stdexcept>
#include <string>

namespace qpw {

// Error taxonomy shared by all modules.  The CLI maps these onto exit codes:
// config/validation problems -> 2, numerical failures -> 3, failed
// verification checks -> 4.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Frequency vector is rationally dependent (or below the degeneracy floor)
// within the checked range.
struct DegenerateFrequencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// g'(c0) below threshold, or Newton failed to locate c0.
struct DegenerateEquilibriumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NewtonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// |omega . nu| fell below the floor while dividing in the series recursion.
struct SmallDivisorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A rational input where an irrational was required (continued fractions).
struct RationalInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pole on the Laplace path: condition 3 of Borel summability fails.
struct SummabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pade linear system unusable even after regularization.
struct ConditioningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Stiff integrator: step-size underflow or Newton failure in a stage.
struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested tree order beyond the supported range.
struct ScopeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// k_max too small to cover every tree contributing to the requested
// epsilon power.
struct IncompleteCoverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qpw
