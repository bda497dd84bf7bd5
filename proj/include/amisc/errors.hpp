#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace amisc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied data was violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A univariate rule has repeated or otherwise unusable nodes.
class InvalidRuleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An object was used before its data was populated.
class NotReadyError : public Error {
 public:
  using Error::Error;
};

/// Sobol indices requested for a QoI with zero variance.
class UndefinedIndicesError : public Error {
 public:
  using Error::Error;
};

/// A statistic was requested from samples with no spread.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

/// A model evaluation failed; carries the offending discretization and input.
class ModelEvaluationError : public Error {
 public:
  ModelEvaluationError(std::vector<int> alpha, std::vector<double> z, const std::string& what)
      : Error(format(alpha, z, what)), alpha_(std::move(alpha)), z_(std::move(z)) {}

  const std::vector<int>& alpha() const noexcept { return alpha_; }
  const std::vector<double>& z() const noexcept { return z_; }

 private:
  static std::string format(const std::vector<int>& alpha, const std::vector<double>& z,
                            const std::string& what) {
    std::ostringstream os;
    os.precision(17);
    os << "model evaluation failed at alpha=(";
    for (std::size_t i = 0; i < alpha.size(); ++i) os << (i ? "," : "") << alpha[i];
    os << ") z=(";
    for (std::size_t i = 0; i < z.size(); ++i) os << (i ? "," : "") << z[i];
    os << "): " << what;
    return os.str();
  }

  std::vector<int> alpha_;
  std::vector<double> z_;
};

}  // namespace amisc
