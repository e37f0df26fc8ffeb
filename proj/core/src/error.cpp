#include "ocp/error.hpp"

namespace ocp {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::UnparseableValue: return "UnparseableValue";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::InvalidTimestamps: return "InvalidTimestamps";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::WindowTooShort: return "WindowTooShort";
        case ErrorCode::WrongLagCount: return "WrongLagCount";
        case ErrorCode::UnfittedModel: return "UnfittedModel";
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::WeightsNotSimplex: return "WeightsNotSimplex";
        case ErrorCode::NonPositiveSlope: return "NonPositiveSlope";
        case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
        case ErrorCode::EmptyTrace: return "EmptyTrace";
        case ErrorCode::UnknownMethod: return "UnknownMethod";
        case ErrorCode::UnknownRegressor: return "UnknownRegressor";
        case ErrorCode::UnknownDataset: return "UnknownDataset";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::AssertionFailed: return "AssertionFailed";
    }
    return "Unknown";
}

}  // namespace ocp
