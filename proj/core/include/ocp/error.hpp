#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ocp {

enum class ErrorCode {
    // series data
    FileNotFound,
    MissingColumn,
    UnparseableValue,
    EmptySeries,
    InvalidTimestamps,
    SeriesTooShort,
    // forecasters
    RankDeficient,
    WindowTooShort,
    WrongLagCount,
    UnfittedModel,
    InvalidParameter,
    // relevance
    WeightsNotSimplex,
    NonPositiveSlope,
    AlphaOutOfRange,
    // evaluation / runner
    EmptyTrace,
    UnknownMethod,
    UnknownRegressor,
    UnknownDataset,
    InvalidConfig,
    AssertionFailed,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable code. `row()` is set for
/// per-row CSV failures (1-based data row, header excluded).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::size_t row = 0)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), row_(row) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    ErrorCode code_;
    std::size_t row_;
};

}  // namespace ocp
