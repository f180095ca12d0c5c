#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace porous {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied data was violated (bad shape, bad range,
/// malformed configuration).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative or direct solve did not reach its tolerance.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, std::vector<double> residual_history = {})
      : Error(what), residual_history_(std::move(residual_history)) {}

  const std::vector<double>& residual_history() const noexcept { return residual_history_; }

 private:
  std::vector<double> residual_history_;
};

}  // namespace porous
