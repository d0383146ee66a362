#include "buyerlearn/types.hpp"

namespace buyerlearn {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument:
        return "InvalidArgument";
    case ErrorCode::ZeroDirection:
        return "ZeroDirection";
    case ErrorCode::CutTooShallow:
        return "CutTooShallow";
    case ErrorCode::EmptyIntersection:
        return "EmptyIntersection";
    case ErrorCode::DimensionTooSmall:
        return "DimensionTooSmall";
    case ErrorCode::NotPositiveDefinite:
        return "NotPositiveDefinite";
    case ErrorCode::UnrealisticPrice:
        return "UnrealisticPrice";
    case ErrorCode::SolverFailure:
        return "SolverFailure";
    case ErrorCode::NegativeBundle:
        return "NegativeBundle";
    case ErrorCode::ProjectionFailure:
        return "ProjectionFailure";
    case ErrorCode::DegeneratePriceSpace:
        return "DegeneratePriceSpace";
    case ErrorCode::BetaOutOfRange:
        return "BetaOutOfRange";
    case ErrorCode::InfeasibleBudget:
        return "InfeasibleBudget";
    case ErrorCode::InfeasibleParameters:
        return "InfeasibleParameters";
    case ErrorCode::IterationCapExceeded:
        return "IterationCapExceeded";
    case ErrorCode::GridTooLarge:
        return "GridTooLarge";
    case ErrorCode::IoFailure:
        return "IoFailure";
    }
    return "Unknown";
}

} // namespace buyerlearn
