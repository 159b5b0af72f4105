#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace lowrank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// All randomness in the library flows through an explicitly passed engine;
/// there is no ambient global RNG state.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Thrown when an argument violates an operation's precondition or a
/// value violates its type invariant.
class InvalidInput : public std::invalid_argument {
public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown by the text-format readers; carries the offending position
/// (1-based line, 1-based field within the line).
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        line(line), column(column) {}
  int line;
  int column;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidInput(msg);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

} // namespace lowrank
