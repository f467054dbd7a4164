#pragma once

#include <stdexcept>
#include <string>

namespace dualforge {

// Resource limits fail loudly; mathematical preconditions have their own types
// so callers (and the CLI exit-code mapping) can tell them apart.

struct SizeCapExceeded : std::runtime_error {
    explicit SizeCapExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct BudgetExceeded : std::runtime_error {
    long long partial_count;
    BudgetExceeded(const std::string& what, long long partial)
        : std::runtime_error(what), partial_count(partial) {}
};

struct SignatureMismatch : std::runtime_error {
    explicit SignatureMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct CarrierMismatch : std::runtime_error {
    explicit CarrierMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyGeneration : std::runtime_error {
    explicit EmptyGeneration(const std::string& what) : std::runtime_error(what) {}
};

struct NotInPrevariety : std::runtime_error {
    explicit NotInPrevariety(const std::string& what) : std::runtime_error(what) {}
};

struct NotCompatible : std::runtime_error {
    explicit NotCompatible(const std::string& what) : std::runtime_error(what) {}
};

struct NotAPoset : std::runtime_error {
    explicit NotAPoset(const std::string& what) : std::runtime_error(what) {}
};

struct NotASemilattice : std::runtime_error {
    explicit NotASemilattice(const std::string& what) : std::runtime_error(what) {}
};

struct NotALattice : std::runtime_error {
    explicit NotALattice(const std::string& what) : std::runtime_error(what) {}
};

struct NotOdd : std::runtime_error {
    explicit NotOdd(const std::string& what) : std::runtime_error(what) {}
};

struct GNotOrderReversing : std::runtime_error {
    explicit GNotOrderReversing(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownClassTag : std::runtime_error {
    explicit UnknownClassTag(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationFailed : std::runtime_error {
    explicit ValidationFailed(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a certified invariant is observed to fail at runtime, e.g. a
// pointwise operation escaping a hom-set despite a passing compatibility
// certificate. Always a bug in this library, never a user error.
struct InternalInvariantViolation : std::logic_error {
    explicit InternalInvariantViolation(const std::string& what) : std::logic_error(what) {}
};

} // namespace dualforge
