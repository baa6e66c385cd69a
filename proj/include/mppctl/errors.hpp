#pragma once

#include <stdexcept>
#include <string>

namespace mppctl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MPPCTL_DEFINE_ERROR(Name)             \
    class Name : public Error {               \
    public:                                   \
        using Error::Error;                   \
    }

MPPCTL_DEFINE_ERROR(BoundViolation);
MPPCTL_DEFINE_ERROR(MalformedDistribution);
MPPCTL_DEFINE_ERROR(BadGrid);
MPPCTL_DEFINE_ERROR(ShapeMismatch);
MPPCTL_DEFINE_ERROR(NoRoot);
MPPCTL_DEFINE_ERROR(OutOfHorizon);
MPPCTL_DEFINE_ERROR(OutOfRange);
MPPCTL_DEFINE_ERROR(StepTooLarge);
MPPCTL_DEFINE_ERROR(NoConvergence);
MPPCTL_DEFINE_ERROR(BetaTooSmall);
MPPCTL_DEFINE_ERROR(TooManyPolicies);
MPPCTL_DEFINE_ERROR(ParseError);

#undef MPPCTL_DEFINE_ERROR

}  // namespace mppctl
