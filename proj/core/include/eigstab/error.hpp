#pragma once

#include <stdexcept>
#include <string>

namespace eigstab {

enum class ErrorKind {
  InvalidArgument,
  Config,
  SelfIntersecting,
  NonConvex,
  DegenerateTriangle,
  NodeOutsideMacro,
  InvertedElement,
  NonConformingMesh,
  OutsideDomain,
  DimensionMismatch,
  MeshMismatch,
  NoConvergence,
  NotPositiveDefinite,
  SingularN,
  ZeroPerturbation,
  RankDeficientBasis,
  ComplexQuotients,
  ZeroFunction,
  IndexOutOfRange,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so that
/// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

  /// Input/configuration problems as opposed to numerical failures.
  bool is_usage_error() const noexcept {
    return kind_ == ErrorKind::InvalidArgument || kind_ == ErrorKind::Config;
  }

 private:
  ErrorKind kind_;
};

}  // namespace eigstab
