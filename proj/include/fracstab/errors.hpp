#ifndef FRACSTAB_ERRORS_HPP
#define FRACSTAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fracstab {

// Base for every library error.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input / parameters that fail validation before any computation.
// CLI maps these to exit code 2; everything else numeric maps to exit 1.
struct ValidationError : Error {
    using Error::Error;
};

// Series did not converge within the term cap.
struct NonConvergence : Error {
    using Error::Error;
};

// Eigenvalue supplied to the wrong sector expansion.
struct SectorError : Error {
    using Error::Error;
};

// Argument outside the operation's domain (e.g. lambda = 0).
struct DomainError : Error {
    using Error::Error;
};

// Eigenvalue on the sector boundary |arg lambda| = p*pi/2.
struct NonHyperbolic : ValidationError {
    using ValidationError::ValidationError;
};

// Tail envelope cannot certify the requested tolerance at any feasible cut.
struct TailNotDecaying : Error {
    using Error::Error;
};

// Picard iteration shows no contraction.
struct NoContraction : Error {
    using Error::Error;
};

// A trajectory node left the trust region during the fixed-point iteration.
struct DivergedTrajectory : Error {
    using Error::Error;
};

// PECE trajectory escaped; carries the escape time.
struct StepOverflow : Error {
    double escape_time;
    StepOverflow(const std::string& msg, double t) : Error(msg), escape_time(t) {}
};

}  // namespace fracstab

#endif
