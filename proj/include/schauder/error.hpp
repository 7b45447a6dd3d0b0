#pragma once

#include <stdexcept>
#include <string>

namespace schauder {

// Raised for violated preconditions and failed numerical contracts.
class LabError : public std::runtime_error {
 public:
  explicit LabError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw LabError(message);
}

}  // namespace schauder
