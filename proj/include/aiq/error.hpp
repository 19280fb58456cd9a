#pragma once

#include <stdexcept>
#include <string>

namespace aiq {

enum class ErrorKind {
  NotHermitian,
  NoConvergence,
  NotPositive,
  SingularIterate,
  DimMismatch,
  NotCP,
  NotIdempotent,
  DecompositionFailed,
  NotClosed,
  InvalidGamma,
  SolverStall,
  Infeasible,
  EtaTooLarge,
  IllConditionedSpectralGap,
  NewtonDiverged,
  SearchExhausted,
  SignDiverged,
  MembershipViolation,
  DegenerateGram,
  SingularGram,
  AmbiguousRank,
  TermExplosion,
  Diverged,
  CrossTalk,
  ImproveFailed,
  StageFailed,
  NotBijective,
  NormalizationSingular,
  RjNotFactorizable,
  BadSpec,
  ParseError,
  NotUCP,
};

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::SingularIterate: return "SingularIterate";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NotCP: return "NotCP";
    case ErrorKind::NotIdempotent: return "NotIdempotent";
    case ErrorKind::DecompositionFailed: return "DecompositionFailed";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::InvalidGamma: return "InvalidGamma";
    case ErrorKind::SolverStall: return "SolverStall";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::EtaTooLarge: return "EtaTooLarge";
    case ErrorKind::IllConditionedSpectralGap: return "IllConditionedSpectralGap";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::SearchExhausted: return "SearchExhausted";
    case ErrorKind::SignDiverged: return "SignDiverged";
    case ErrorKind::MembershipViolation: return "MembershipViolation";
    case ErrorKind::DegenerateGram: return "DegenerateGram";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::AmbiguousRank: return "AmbiguousRank";
    case ErrorKind::TermExplosion: return "TermExplosion";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::CrossTalk: return "CrossTalk";
    case ErrorKind::ImproveFailed: return "ImproveFailed";
    case ErrorKind::StageFailed: return "StageFailed";
    case ErrorKind::NotBijective: return "NotBijective";
    case ErrorKind::NormalizationSingular: return "NormalizationSingular";
    case ErrorKind::RjNotFactorizable: return "RjNotFactorizable";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NotUCP: return "NotUCP";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace aiq
