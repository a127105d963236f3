// errors.hpp: Exception types shared by all hopdyn modules

#pragma once

#include <stdexcept>
#include <string>

namespace hopdyn {

/// Invalid or inconsistent user configuration (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A site that is not part of the realization / Fock space was referenced.
class SiteError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operands live on different Fock spaces or have incompatible shapes.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Problem size above a configured cap.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Argument outside the mathematical domain (negative time, non-state, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Two independent computation routes disagree beyond tolerance.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Normalization sum is empty (realized-origin Z without occupied sites).
class DegenerateNormalization : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A convergence-bound weight sum diverges for the requested decay rate.
class BoundDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative numerics (optimizer bracketing, eigensolver) failed.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AxiomFailure : public std::runtime_error {
public:
    AxiomFailure(std::string axiom, const std::string& what)
        : std::runtime_error(axiom + ": " + what), axiom_(std::move(axiom)) {}
    const std::string& axiom() const noexcept { return axiom_; }

private:
    std::string axiom_;
};

} // namespace hopdyn
