#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sectoral {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Problems with the operator data itself (CLI exit code 2).
class SpecError : public Error {
  public:
    using Error::Error;
};

class DimensionError : public SpecError {
  public:
    using SpecError::SpecError;
};

class NonDifferentiableError : public SpecError {
  public:
    using SpecError::SpecError;
};

class AngleRangeError : public SpecError {
  public:
    using SpecError::SpecError;
};

class ParameterError : public SpecError {
  public:
    using SpecError::SpecError;
};

class SignatureInvalid : public Error {
  public:
    using Error::Error;
};

class DivergentXiIntegral : public Error {
  public:
    using Error::Error;
};

class NoAnalyticSector : public Error {
  public:
    using Error::Error;
};

// Budget and convergence failures of the numerical kernels (CLI exit code 3).
class NumericError : public Error {
  public:
    using Error::Error;
};

class BudgetError : public NumericError {
  public:
    using NumericError::NumericError;
};

class SingularShift : public NumericError {
  public:
    using NumericError::NumericError;
};

class WindowError : public NumericError {
  public:
    using NumericError::NumericError;
};

class EigNoConverge : public NumericError {
  public:
    EigNoConverge(const std::string& what, std::vector<std::complex<double>> partial)
        : NumericError(what), partial_(std::move(partial)) {}

    /// Eigenvalues that did converge before the iteration cap was hit.
    const std::vector<std::complex<double>>& partial() const noexcept { return partial_; }

  private:
    std::vector<std::complex<double>> partial_;
};

} // namespace sectoral
