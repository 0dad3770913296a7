#pragma once

#include <stdexcept>
#include <string>

namespace spqm {

/// Truncation dimension below the smallest meaningful Fock space.
class InvalidDimension : public std::invalid_argument {
public:
    explicit InvalidDimension(const std::string& what) : std::invalid_argument(what) {}
};

/// Non-finite input, overflow, or a factorization that should not fail.
class NumericalDomainError : public std::domain_error {
public:
    explicit NumericalDomainError(const std::string& what) : std::domain_error(what) {}
};

/// The Cartan chart is singular at r = 0.
class SingularChartError : public std::domain_error {
public:
    explicit SingularChartError(const std::string& what) : std::domain_error(what) {}
};

/// Kernel parameters outside the regime where M is positive definite.
class RegimeError : public std::domain_error {
public:
    explicit RegimeError(const std::string& what) : std::domain_error(what) {}
};

/// Caller broke a documented precondition (e.g. off-shell ruler value).
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operator support reached the truncation boundary.
class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spqm
