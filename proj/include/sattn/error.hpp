#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sattn {

/// Shapes of two operands disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter is outside its documented domain (w > n, n = 0, odd d_h, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A mask row has no unmasked entry; softmax over it is undefined.
class FullyMaskedRowError : public std::domain_error {
 public:
  explicit FullyMaskedRowError(std::size_t row)
      : std::domain_error("mask row " + std::to_string(row) + " is fully masked"), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Graph metric requested on a disconnected graph.
class DisconnectedGraphError : public std::domain_error {
 public:
  DisconnectedGraphError(std::size_t reached_from, std::size_t unreachable)
      : std::domain_error("graph is disconnected: vertex " + std::to_string(unreachable) +
                          " is unreachable from vertex " + std::to_string(reached_from)),
        representative_(unreachable) {}

  /// A vertex outside the component of vertex 0.
  std::size_t representative() const noexcept { return representative_; }

 private:
  std::size_t representative_;
};

/// Non-finite value produced or supplied where finiteness is required.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace sattn
