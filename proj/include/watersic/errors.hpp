// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace watersic {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define WATERSIC_DEFINE_ERROR(NAME)                              \
  class NAME : public Error {                                    \
   public:                                                       \
    explicit NAME(const std::string& what) : Error(what) {}      \
  }

WATERSIC_DEFINE_ERROR(DimensionMismatch);
WATERSIC_DEFINE_ERROR(NotPositiveDefinite);
WATERSIC_DEFINE_ERROR(AllDead);
WATERSIC_DEFINE_ERROR(NonPositiveScale);
WATERSIC_DEFINE_ERROR(CodeOverflow);
WATERSIC_DEFINE_ERROR(SingularSystem);
WATERSIC_DEFINE_ERROR(DegenerateRow);
WATERSIC_DEFINE_ERROR(InvalidBracket);
WATERSIC_DEFINE_ERROR(EmptySamples);
WATERSIC_DEFINE_ERROR(EmptyHistogram);
WATERSIC_DEFINE_ERROR(UnknownSymbol);
WATERSIC_DEFINE_ERROR(TruncatedStream);
WATERSIC_DEFINE_ERROR(InvalidCode);
WATERSIC_DEFINE_ERROR(BracketMiss);
WATERSIC_DEFINE_ERROR(ExhaustedBudget);
WATERSIC_DEFINE_ERROR(DistortionOutOfRange);
WATERSIC_DEFINE_ERROR(PreconditionViolated);
WATERSIC_DEFINE_ERROR(BadMagic);
WATERSIC_DEFINE_ERROR(VersionMismatch);
WATERSIC_DEFINE_ERROR(ChecksumFailure);
WATERSIC_DEFINE_ERROR(IoError);
WATERSIC_DEFINE_ERROR(InvalidArgument);

#undef WATERSIC_DEFINE_ERROR

}  // namespace watersic
