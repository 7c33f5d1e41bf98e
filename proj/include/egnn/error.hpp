#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace egnn {

/// Malformed or inconsistent input: bad indices, dimension mismatches, missing
/// files, invalid hyperparameters.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced non-finite values or failed to converge.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, std::optional<double> last_estimate = std::nullopt)
      : std::runtime_error(what), last_estimate_(last_estimate) {}

  /// Last iterate of an iterative estimate, when one exists.
  std::optional<double> last_estimate() const { return last_estimate_; }

 private:
  std::optional<double> last_estimate_;
};

}  // namespace egnn
