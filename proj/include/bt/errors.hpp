#pragma once

#include <stdexcept>
#include <string>

namespace bt {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DivisionByZero : Error {
    explicit DivisionByZero(const std::string& what = "division by zero") : Error(what) {}
};

/// Raised when additive cancellation (or an explicit digit request) leaves no
/// guaranteed digits. Callers retry at higher precision; silent rounding is
/// never an option.
struct PrecisionExhausted : Error {
    explicit PrecisionExhausted(const std::string& what = "precision exhausted") : Error(what) {}
};

struct IndistinguishableEnds : Error {
    explicit IndistinguishableEnds(const std::string& what = "ends indistinguishable at stored precision")
        : Error(what) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& what = "hull shapes do not match") : Error(what) {}
};

struct DomainViolation : Error {
    explicit DomainViolation(const std::string& what = "argument outside domain") : Error(what) {}
};

struct NotContained : Error {
    explicit NotContained(const std::string& what = "order not contained in target") : Error(what) {}
};

struct UnsupportedKind : Error {
    explicit UnsupportedKind(const std::string& what = "order kind not supported here") : Error(what) {}
};

struct NotStabilized : Error {
    explicit NotStabilized(const std::string& what = "orbit counts did not stabilize across precisions")
        : Error(what) {}
};

struct OrbitBudgetExceeded : Error {
    explicit OrbitBudgetExceeded(const std::string& what = "orbit enumeration budget exceeded")
        : Error(what) {}
};

} // namespace bt
