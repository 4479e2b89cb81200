#pragma once

#include <stdexcept>
#include <string>

namespace panoforge {

// Exit-code mapping: 0 success, 1 usage, 2 data error, 3 external service.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ServiceError : std::runtime_error {
  explicit ServiceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace panoforge
