#pragma once

#include <stdexcept>
#include <string>

namespace ssp {

// Invalid instance, policy, or run configuration. Maps to CLI exit code 2.
class config_error : public std::invalid_argument {
public:
  explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite value encountered during a computation. Maps to CLI exit code 3.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Request exceeds the enumeration budget (oracle scenario sizes).
class resource_error : public std::length_error {
public:
  explicit resource_error(const std::string& what) : std::length_error(what) {}
};

}  // namespace ssp
