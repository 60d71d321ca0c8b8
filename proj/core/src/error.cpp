#include "eigstab/error.hpp"

namespace eigstab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
    case ErrorKind::SelfIntersecting: return "SelfIntersecting";
    case ErrorKind::NonConvex: return "NonConvex";
    case ErrorKind::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorKind::NodeOutsideMacro: return "NodeOutsideMacro";
    case ErrorKind::InvertedElement: return "InvertedElement";
    case ErrorKind::NonConformingMesh: return "NonConformingMesh";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MeshMismatch: return "MeshMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::SingularN: return "SingularN";
    case ErrorKind::ZeroPerturbation: return "ZeroPerturbation";
    case ErrorKind::RankDeficientBasis: return "RankDeficientBasis";
    case ErrorKind::ComplexQuotients: return "ComplexQuotients";
    case ErrorKind::ZeroFunction: return "ZeroFunction";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace eigstab
