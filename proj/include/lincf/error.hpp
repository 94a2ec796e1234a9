#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lincf {

enum class ErrorCode {
  // model / input validation
  DuplicateName,
  UnknownVariable,
  SelfLoop,
  DuplicateEdge,
  ZeroCoefficientEdge,
  AsymmetricDistCov,
  NonPsdDistCov,
  NonZeroDistMean,
  FNotDescendant,
  WIsDescendant,
  YNotInS,
  OverlappingSets,
  EmptyTreatments,
  InvalidInterval,
  DimensionMismatch,
  InvalidTable,
  InvalidConfig,
  ParseError,
  // numerical
  EigenFailure,
  Unstable,
  NotStable,
  SingularSystem,
  PlanUnstable,
  SingularFeedback,
  InadmissibleGain,
  AcceptanceTooLow,
  UnsupportedFamily,
  UnreachableTarget,
  ZeroMassRegion,
  InternalInconsistency,
};

enum class ErrorKind { Validation, Numerical };

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::ZeroCoefficientEdge: return "ZeroCoefficientEdge";
    case ErrorCode::AsymmetricDistCov: return "AsymmetricDistCov";
    case ErrorCode::NonPsdDistCov: return "NonPsdDistCov";
    case ErrorCode::NonZeroDistMean: return "NonZeroDistMean";
    case ErrorCode::FNotDescendant: return "FNotDescendant";
    case ErrorCode::WIsDescendant: return "WIsDescendant";
    case ErrorCode::YNotInS: return "YNotInS";
    case ErrorCode::OverlappingSets: return "OverlappingSets";
    case ErrorCode::EmptyTreatments: return "EmptyTreatments";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidTable: return "InvalidTable";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::NotStable: return "NotStable";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::PlanUnstable: return "PlanUnstable";
    case ErrorCode::SingularFeedback: return "SingularFeedback";
    case ErrorCode::InadmissibleGain: return "InadmissibleGain";
    case ErrorCode::AcceptanceTooLow: return "AcceptanceTooLow";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::UnreachableTarget: return "UnreachableTarget";
    case ErrorCode::ZeroMassRegion: return "ZeroMassRegion";
    case ErrorCode::InternalInconsistency: return "InternalInconsistency";
  }
  return "Unknown";
}

constexpr ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::EigenFailure:
    case ErrorCode::Unstable:
    case ErrorCode::NotStable:
    case ErrorCode::SingularSystem:
    case ErrorCode::PlanUnstable:
    case ErrorCode::SingularFeedback:
    case ErrorCode::InadmissibleGain:
    case ErrorCode::AcceptanceTooLow:
    case ErrorCode::UnsupportedFamily:
    case ErrorCode::UnreachableTarget:
    case ErrorCode::ZeroMassRegion:
    case ErrorCode::InternalInconsistency:
      return ErrorKind::Numerical;
    default:
      return ErrorKind::Validation;
  }
}

/// Library error. `entity()` names the offending variable, entry or block.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string entity, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        entity_(std::move(entity)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& entity() const noexcept { return entity_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
  std::string entity_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string entity, const std::string& message) {
  throw Error(code, std::move(entity), message);
}

using Warnings = std::vector<std::string>;

}  // namespace lincf
