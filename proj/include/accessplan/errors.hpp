#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace accessplan {

/// Bad input: malformed files, out-of-range parameters, violated preconditions.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
  ValidationError(const std::string& what, std::vector<std::string> details)
      : std::runtime_error(what), details_(std::move(details))
  {
  }

  const std::vector<std::string>& details() const { return details_; }

 private:
  std::vector<std::string> details_;
};

/// Inputs were valid but the model cannot produce a result (zero built area, no housing, ...).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace accessplan
