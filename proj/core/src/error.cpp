#include "hetmg/error.hpp"

namespace hetmg {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyGroups: return "EmptyGroups";
    case Errc::NonPositiveRatio: return "NonPositiveRatio";
    case Errc::ImpactTooSmall: return "ImpactTooSmall";
    case Errc::NonPositiveAlpha: return "NonPositiveAlpha";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::Lambda1OutOfRange: return "Lambda1OutOfRange";
    case Errc::Impact1OutOfRange: return "Impact1OutOfRange";
    case Errc::NonErgodic: return "NonErgodic";
    case Errc::NoBracket: return "NoBracket";
    case Errc::ResidualTooLarge: return "ResidualTooLarge";
    case Errc::NoPositiveRoot: return "NoPositiveRoot";
    case Errc::GroupEmptyAtThisN: return "GroupEmptyAtThisN";
    case Errc::InvalidSimConfig: return "InvalidSimConfig";
    case Errc::NonPositiveImpact: return "NonPositiveImpact";
    case Errc::InvalidUtility: return "InvalidUtility";
    case Errc::InvalidSweep: return "InvalidSweep";
    case Errc::AllNonErgodic: return "AllNonErgodic";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::NonRectangularGrid: return "NonRectangularGrid";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace hetmg
