#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace enclosure {

template <typename Scalar> using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec3 = Vector3<double>;
using Mat3 = Matrix3<double>;
using Mat2 = Matrix2<double>;
using Mat32 = Eigen::Matrix<double, 3, 2>;

enum class ErrorCode {
  AmbiguousProjection,
  ContinuumReflector,
  OutsideCollar,
  NotExterior,
  OutOfWindow,
  Overlap,
  InsideBall,
  DomainTooSmall,
  ResolutionTooCoarse,
  NumericBlowup,
  DegenerateQuadrature,
  NoPositiveWindow,
  Divergent,
  DegenerateHessian,
  QuadratureNotConverged,
  HypothesisViolated,
  SingularSystem,
  StepTooLarge,
  MissingArtifact,
  InvalidConfig,
  InvalidArgument,
  IoError,
};

const char* to_string(ErrorCode code);

// Every failure carries a stable code plus the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace enclosure
