#pragma once

#include <stdexcept>
#include <string>

namespace spinheat {

// Bad user input: malformed lattice spec, out-of-range N, negative mu, ...
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A configured ceiling was exceeded: basis above the amplitude memory limit,
// Krylov subspace at max dimension without reaching its tolerance, ...
class resource_error : public std::runtime_error {
 public:
  explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spinheat
