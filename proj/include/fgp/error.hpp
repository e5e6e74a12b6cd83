#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fgp {

enum class ErrorKind {
    NonPositiveCap,
    EmptyDay,
    DegenerateConfig,
    MalformedRow,
    DuplicateStockDay,
    BadParameter,
    DimensionMismatch,
    RankOnlyFamily,
    NonPositiveG,
    TotalLoss,
    FamilyNotOpenMarketAdmissible,
    InvalidArgument,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::NonPositiveCap: return "NonPositiveCap";
    case ErrorKind::EmptyDay: return "EmptyDay";
    case ErrorKind::DegenerateConfig: return "DegenerateConfig";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DuplicateStockDay: return "DuplicateStockDay";
    case ErrorKind::BadParameter: return "BadParameter";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankOnlyFamily: return "RankOnlyFamily";
    case ErrorKind::NonPositiveG: return "NonPositiveG";
    case ErrorKind::TotalLoss: return "TotalLoss";
    case ErrorKind::FamilyNotOpenMarketAdmissible: return "FamilyNotOpenMarketAdmissible";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace fgp
