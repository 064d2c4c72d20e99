#pragma once

#include <stdexcept>
#include <string>

namespace ringmodel {

/// Failure of a numerical procedure (blow-up, Newton divergence, singular
/// system). Input validation problems use std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ringmodel
