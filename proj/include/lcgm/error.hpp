#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lcgm {

/// Classification of every failure the library reports.
enum class ErrorKind {
  ParseError,
  ValidationError,
  DimensionMismatch,
  EmptyCoordinateSet,
  NotChordal,
  TooLarge,
  DegenerateDomain,
  DegenerateSimplex,
  DegenerateSupport,
  LowerDimensionalSupport,
  PointOutsideSupport,
  InsufficientSample,
  GraphViolation,
  NotPSD,
  BlockStructureViolation,
  MaxIterations,
  Unbounded,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyCoordinateSet: return "EmptyCoordinateSet";
    case ErrorKind::NotChordal: return "NotChordal";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::DegenerateDomain: return "DegenerateDomain";
    case ErrorKind::DegenerateSimplex: return "DegenerateSimplex";
    case ErrorKind::DegenerateSupport: return "DegenerateSupport";
    case ErrorKind::LowerDimensionalSupport: return "LowerDimensionalSupport";
    case ErrorKind::PointOutsideSupport: return "PointOutsideSupport";
    case ErrorKind::InsufficientSample: return "InsufficientSample";
    case ErrorKind::GraphViolation: return "GraphViolation";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::BlockStructureViolation: return "BlockStructureViolation";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::Unbounded: return "Unbounded";
  }
  return "Unknown";
}

/// True for errors caused by the numbers rather than by malformed input.
inline bool is_numerical(ErrorKind k) {
  switch (k) {
    case ErrorKind::DegenerateSimplex:
    case ErrorKind::DegenerateSupport:
    case ErrorKind::LowerDimensionalSupport:
    case ErrorKind::NotPSD:
    case ErrorKind::MaxIterations:
    case ErrorKind::Unbounded:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace lcgm
