#include "xisub/error.hpp"

namespace xisub {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NotNormal: return "NotNormal";
    case ErrorCode::BadOffset: return "BadOffset";
    case ErrorCode::UnsupportedSpec: return "UnsupportedSpec";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NotXiSubmanifold: return "NotXiSubmanifold";
    case ErrorCode::NoParallelFrame: return "NoParallelFrame";
    case ErrorCode::IllConditionedBasis: return "IllConditionedBasis";
    case ErrorCode::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::FrenetDegenerate: return "FrenetDegenerate";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace xisub
