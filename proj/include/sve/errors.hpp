#pragma once

#include <stdexcept>
#include <string>

namespace sve {

// Base class for all library errors that are not plain precondition
// violations (those use std::invalid_argument / std::domain_error).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Quadrature failed to reach the requested tolerance; carries the best
// estimate achieved so callers can decide whether to accept it.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& msg, double value, double achieved_error)
        : Error(msg), value(value), achieved_error(achieved_error) {}
    double value;
    double achieved_error;
};

// Series iteration cap exceeded; reports the partial sum and a bound on
// the discarded tail.
class IterationCapError : public Error {
public:
    IterationCapError(const std::string& msg, double partial_sum, double tail_bound)
        : Error(msg), partial_sum(partial_sum), tail_bound(tail_bound) {}
    double partial_sum;
    double tail_bound;
};

// Operation not defined for this kernel kind (e.g. asymptotics of a
// tabulated kernel).
class UnsupportedKindError : public Error {
public:
    using Error::Error;
};

// Volterra solver hit a (numerically) singular diagonal block; the step
// size must change, silent regularization is never applied.
class StepSizeError : public Error {
public:
    using Error::Error;
};

// A parameter search ran out of candidates; carries the best margin seen.
class SearchExhaustedError : public Error {
public:
    SearchExhaustedError(const std::string& msg, double best_margin)
        : Error(msg), best_margin(best_margin) {}
    double best_margin;
};

// An observation covariance block is numerically singular (duplicated or
// collinear observations); conditioning refuses to proceed.
class SingularBlockError : public Error {
public:
    using Error::Error;
};

// Conditional estimation had too few paths satisfying the conditioning.
class InsufficientMassError : public Error {
public:
    InsufficientMassError(const std::string& msg, long n_effective)
        : Error(msg), n_effective(n_effective) {}
    long n_effective;
};

// Path simulation exceeded the state-norm guard.
class OverflowError : public Error {
public:
    using Error::Error;
};

// Config file parsing / validation failure; message carries line and key
// diagnostics.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace sve
