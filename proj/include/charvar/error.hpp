#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace charvar {

enum class ErrorCode {
  InvalidDimension,
  WrongDimension,
  DimensionMismatch,
  IndexOutOfRange,
  InvalidPair,
  DegeneratePair,
  DegenerateTriple,
  DegenerateQuadruple,
  NotGeneric,
  NoConvergence,
  LemmaHypothesisFailure,
  NumericalFailure,
  NotFound,
  GaussMismatch,
  SelectionDegenerate,
  ConsistencyFailure,
  InvalidCurvature,
  HNotInvertible,
  IllConditionedFrame,
  ParseError,
  Usage,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::WrongDimension: return "wrong-dimension";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::IndexOutOfRange: return "index-out-of-range";
    case ErrorCode::InvalidPair: return "invalid-pair";
    case ErrorCode::DegeneratePair: return "degenerate-pair";
    case ErrorCode::DegenerateTriple: return "degenerate-triple";
    case ErrorCode::DegenerateQuadruple: return "degenerate-quadruple";
    case ErrorCode::NotGeneric: return "not-generic";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::LemmaHypothesisFailure: return "lemma-hypothesis-failure";
    case ErrorCode::NumericalFailure: return "numerical-failure";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::GaussMismatch: return "gauss-mismatch";
    case ErrorCode::SelectionDegenerate: return "selection-degenerate";
    case ErrorCode::ConsistencyFailure: return "consistency-failure";
    case ErrorCode::InvalidCurvature: return "invalid-curvature";
    case ErrorCode::HNotInvertible: return "H-not-invertible";
    case ErrorCode::IllConditionedFrame: return "ill-conditioned-frame";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::Usage: return "usage";
  }
  return "unknown";
}

/// True for failures caused by a non-generic parameter draw rather than by
/// bad input. The CLI maps these to exit status 2.
inline bool is_degeneracy(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegeneratePair:
    case ErrorCode::DegenerateTriple:
    case ErrorCode::DegenerateQuadruple:
    case ErrorCode::NotGeneric:
    case ErrorCode::NoConvergence:
    case ErrorCode::LemmaHypothesisFailure:
    case ErrorCode::NotFound:
    case ErrorCode::GaussMismatch:
    case ErrorCode::SelectionDegenerate:
    case ErrorCode::ConsistencyFailure:
    case ErrorCode::HNotInvertible:
    case ErrorCode::IllConditionedFrame:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace charvar
