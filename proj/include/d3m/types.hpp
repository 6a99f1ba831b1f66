#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace d3m {

using Index = std::ptrdiff_t;
using cplx = std::complex<double>;

using DenseMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using DenseVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kJ{0.0, 1.0};

// Every failure the library reports derives from Error. `stage` names the
// pipeline stage so the CLI can surface it.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class AssemblyError : public Error {
 public:
  explicit AssemblyError(const std::string& what) : Error("assembly", what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error("state", what) {}
};

// A dense diagonal block whose best 1x1 and 2x2 pivot candidates are both
// below the pivot tolerance. `column` is the block column in elimination
// order (or -1 for a standalone dense factorization); `step` is the local
// elimination step at which the breakdown occurred.
class SingularBlock : public Error {
 public:
  SingularBlock(Index column, Index step, const std::string& what)
      : Error("factorization", what), column_(column), step_(step) {}
  Index column() const noexcept { return column_; }
  Index step() const noexcept { return step_; }

 private:
  Index column_;
  Index step_;
};

class SingularDomain : public Error {
 public:
  SingularDomain(Index domain, const std::string& what)
      : Error("reduction", what), domain_(domain) {}
  Index domain() const noexcept { return domain_; }

 private:
  Index domain_;
};

// The numeric factorization tried to touch a block that the symbolic plan
// did not allocate.
class StructureError : public Error {
 public:
  explicit StructureError(const std::string& what) : Error("structure", what) {}
};

}  // namespace d3m
