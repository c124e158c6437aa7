#pragma once

#include <stdexcept>
#include <string>

namespace multisym {

enum class Errc {
  RewriteDepthExceeded,
  UnknownSymbol,
  UnboundSymbol,
  DivisionByZero,
  NonMonomialDivision,
  DuplicateFieldName,
  ZeroDimensionalBase,
  CircularConstraint,
  UnknownCoordinate,
  ChartMismatch,
  DegreeMismatch,
  WrongSpace,
  IncompleteMap,
  IndexArityMismatch,
  NotProjectable,
  LiftNotTangent,
  NonlinearInversion,
  NoHamiltonianFound,
  IterationCapExceeded,
  InconsistentSystem,
  UnsolvedCoefficient,
  NotExactSymmetry,
  ParseError,
  Internal,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::RewriteDepthExceeded: return "RewriteDepthExceeded";
    case Errc::UnknownSymbol: return "UnknownSymbol";
    case Errc::UnboundSymbol: return "UnboundSymbol";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::NonMonomialDivision: return "NonMonomialDivision";
    case Errc::DuplicateFieldName: return "DuplicateFieldName";
    case Errc::ZeroDimensionalBase: return "ZeroDimensionalBase";
    case Errc::CircularConstraint: return "CircularConstraint";
    case Errc::UnknownCoordinate: return "UnknownCoordinate";
    case Errc::ChartMismatch: return "ChartMismatch";
    case Errc::DegreeMismatch: return "DegreeMismatch";
    case Errc::WrongSpace: return "WrongSpace";
    case Errc::IncompleteMap: return "IncompleteMap";
    case Errc::IndexArityMismatch: return "IndexArityMismatch";
    case Errc::NotProjectable: return "NotProjectable";
    case Errc::LiftNotTangent: return "LiftNotTangent";
    case Errc::NonlinearInversion: return "NonlinearInversion";
    case Errc::NoHamiltonianFound: return "NoHamiltonianFound";
    case Errc::IterationCapExceeded: return "IterationCapExceeded";
    case Errc::InconsistentSystem: return "InconsistentSystem";
    case Errc::UnsolvedCoefficient: return "UnsolvedCoefficient";
    case Errc::NotExactSymmetry: return "NotExactSymmetry";
    case Errc::ParseError: return "ParseError";
    case Errc::Internal: return "Internal";
  }
  return "?";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace multisym
