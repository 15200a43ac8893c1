#pragma once
#include <stdexcept>
#include <string>

namespace horo {

// Invalid or malformed input: bad measure, parse failure, domain violation.
// Maps to status/exit code 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Problem exceeds a configured resource cap (e.g. LP size). Maps to code 3.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace horo
