#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace graphpot {

enum class ErrorKind {
  PartitionViolation,
  UnknownNode,
  Disconnected,
  NonPositiveConductance,
  SelfEdge,
  DuplicateEdge,
  FractionOutOfRange,
  LatticeTooSmall,
  FactorizationFailure,
  SourceOnB,
  DimensionMismatch,
  HypothesisViolated,
  HDisagreement,
  IncompatibleData,
  InteriorDisconnected,
  ExteriorDisconnected,
  RepresentationMismatch,
  SingularInteriorBlock,
  AnomalyOutsideInterior,
  AnomalyTouchesCloak,
  NoAbsorption,
  ZeroReference,
  InvalidInput,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PartitionViolation: return "PartitionViolation";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::NonPositiveConductance: return "NonPositiveConductance";
    case ErrorKind::SelfEdge: return "SelfEdge";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::FractionOutOfRange: return "FractionOutOfRange";
    case ErrorKind::LatticeTooSmall: return "LatticeTooSmall";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::SourceOnB: return "SourceOnB";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::HDisagreement: return "HDisagreement";
    case ErrorKind::IncompatibleData: return "IncompatibleData";
    case ErrorKind::InteriorDisconnected: return "InteriorDisconnected";
    case ErrorKind::ExteriorDisconnected: return "ExteriorDisconnected";
    case ErrorKind::RepresentationMismatch: return "RepresentationMismatch";
    case ErrorKind::SingularInteriorBlock: return "SingularInteriorBlock";
    case ErrorKind::AnomalyOutsideInterior: return "AnomalyOutsideInterior";
    case ErrorKind::AnomalyTouchesCloak: return "AnomalyTouchesCloak";
    case ErrorKind::NoAbsorption: return "NoAbsorption";
    case ErrorKind::ZeroReference: return "ZeroReference";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the kinds above so
// callers (and tests) can dispatch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace graphpot
