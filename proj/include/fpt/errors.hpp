#pragma once

#include <stdexcept>
#include <string>

namespace fpt {

/// Base class for every failure raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FPT_DEFINE_ERROR(Name) \
  class Name : public Error {  \
   public:                     \
    using Error::Error;        \
  }

FPT_DEFINE_ERROR(InvalidLaw);
FPT_DEFINE_ERROR(NonConvergence);
FPT_DEFINE_ERROR(WindowOverflow);
FPT_DEFINE_ERROR(DefectTooLarge);
FPT_DEFINE_ERROR(AtomTooLarge);
FPT_DEFINE_ERROR(QuadratureFailure);
FPT_DEFINE_ERROR(NormalizationUnavailable);
FPT_DEFINE_ERROR(SingularIntegrand);
FPT_DEFINE_ERROR(ResolutionTooCoarse);
FPT_DEFINE_ERROR(PreconditionViolated);
FPT_DEFINE_ERROR(ConfigError);

#undef FPT_DEFINE_ERROR

}  // namespace fpt
