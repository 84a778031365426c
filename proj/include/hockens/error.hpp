#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hockens {

enum class Errc {
  Disjoint,
  Contained,
  CoincidentCenters,
  DegenerateSegment,
  TooFewVertices,
  SingularConfiguration,
  RodTooShort,
  EmptyBand,
  InvalidArgument,
  OutOfStroke,
  DegeneratePath,
  InfeasibleCell,
  InsufficientData,
  NearSingularity,
  TransmissionSingularity,
  Config,
};

constexpr std::string_view to_string(Errc e) noexcept {
  switch (e) {
    case Errc::Disjoint: return "Disjoint";
    case Errc::Contained: return "Contained";
    case Errc::CoincidentCenters: return "CoincidentCenters";
    case Errc::DegenerateSegment: return "DegenerateSegment";
    case Errc::TooFewVertices: return "TooFewVertices";
    case Errc::SingularConfiguration: return "SingularConfiguration";
    case Errc::RodTooShort: return "RodTooShort";
    case Errc::EmptyBand: return "EmptyBand";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::OutOfStroke: return "OutOfStroke";
    case Errc::DegeneratePath: return "DegeneratePath";
    case Errc::InfeasibleCell: return "InfeasibleCell";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::NearSingularity: return "NearSingularity";
    case Errc::TransmissionSingularity: return "TransmissionSingularity";
    case Errc::Config: return "Config";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable error kind.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hockens
