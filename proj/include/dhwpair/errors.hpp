#ifndef DHWPAIR_ERRORS_HPP
#define DHWPAIR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dhwpair {

// Base of all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration or malformed input file.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A solver failed to produce a result.
struct SolverError : Error {
    explicit SolverError(const std::string& msg) : Error(msg) {}
};

struct StepLimitExceeded : SolverError {
    explicit StepLimitExceeded(const std::string& msg) : SolverError(msg) {}
};

// State became NaN/Inf; signals a tolerance or model-interpretation bug.
struct NonFiniteState : SolverError {
    explicit NonFiniteState(const std::string& msg) : SolverError(msg) {}
};

// The quantum Vlasov solver only supports delta = 0.
struct NotLinearlyPolarized : ConfigError {
    explicit NotLinearlyPolarized(const std::string& msg) : ConfigError(msg) {}
};

// Requested photon ring lies below the multiphoton threshold.
struct RingAbsent : Error {
    explicit RingAbsent(const std::string& msg) : Error(msg) {}
};

// Analysis errors.
struct GridTooSmall : Error {
    explicit GridTooSmall(const std::string& msg) : Error(msg) {}
};
struct NoRingsFound : Error {
    explicit NoRingsFound(const std::string& msg) : Error(msg) {}
};
struct RingOutsideGrid : Error {
    explicit RingOutsideGrid(const std::string& msg) : Error(msg) {}
};
struct InsufficientNodes : Error {
    explicit InsufficientNodes(const std::string& msg) : Error(msg) {}
};
struct NoPeaks : Error {
    explicit NoPeaks(const std::string& msg) : Error(msg) {}
};

// Checkpoint file does not belong to the requested sweep.
struct ChecksumMismatch : Error {
    explicit ChecksumMismatch(const std::string& msg) : Error(msg) {}
};

}  // namespace dhwpair

#endif
