#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mgps {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Diffusion step index (0 = data, n = noise).
using Step = int;

/// Invalid argument values, shapes or ranges.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Diffusion step indices out of order or out of range.
class IndexError : public std::out_of_range {
 public:
  explicit IndexError(const std::string& what) : std::out_of_range(what) {}
};

/// Non-finite or otherwise unusable numerical result.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// (S + S^T) / 2, evaluated into a fresh matrix so it can be assigned back to S.
inline Matrix symmetrize(const Matrix& S) { return 0.5 * (S + S.transpose()); }

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ParameterError(message);
}

}  // namespace mgps
