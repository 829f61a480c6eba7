#pragma once

#include <stdexcept>
#include <string>

namespace baht {

// Broad error classes; the CLI maps Usage -> exit 2 and Numerical -> exit 3.
enum class ErrorClass { Usage, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

 private:
  ErrorClass cls_;
};

struct RoleError : Error {
  explicit RoleError(const std::string& w) : Error(ErrorClass::Numerical, w) {}
};

struct BranchCutError : Error {
  explicit BranchCutError(const std::string& w) : Error(ErrorClass::Numerical, w) {}
};

struct BudgetError : Error {
  explicit BudgetError(const std::string& w) : Error(ErrorClass::Numerical, w) {}
};

struct LinearityError : Error {
  explicit LinearityError(const std::string& w) : Error(ErrorClass::Numerical, w) {}
};

struct CommensurabilityError : Error {
  explicit CommensurabilityError(const std::string& w) : Error(ErrorClass::Numerical, w) {}
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error(ErrorClass::Usage, w) {}
};

}  // namespace baht
