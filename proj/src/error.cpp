#include "sevo/error.hpp"

namespace sevo {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ConditionsUnmet: return "ConditionsUnmet";
    case ErrorCode::NotSubcritical: return "NotSubcritical";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::FitUnstable: return "FitUnstable";
    case ErrorCode::DataLeakage: return "DataLeakage";
    case ErrorCode::ConditionViolated: return "ConditionViolated";
    case ErrorCode::InsufficientSnapshots: return "InsufficientSnapshots";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::NonPositiveValues: return "NonPositiveValues";
    case ErrorCode::NoBlowUpAtCap: return "NoBlowUpAtCap";
    case ErrorCode::BlowUpDuringDecayExperiment: return "BlowUpDuringDecayExperiment";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::Cancelled: return "Cancelled";
  }
  return "Unknown";
}

}  // namespace sevo
