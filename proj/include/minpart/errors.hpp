#pragma once

#include <stdexcept>
#include <string>

namespace minpart {

/// A caller violated an operation's precondition (bad k, b out of range, empty mask, ...).
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure failed to deliver its contract (no convergence, degenerate partition,
/// truncation too small).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace minpart
