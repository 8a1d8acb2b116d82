#pragma once

#include <stdexcept>
#include <string>

namespace dgsqp {

// Caller broke a documented precondition (dimension, sign, index range).
struct ContractViolation : std::logic_error {
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Evaluation left the model's validity region (singular denominators etc).
struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dgsqp
