#pragma once

#include <stdexcept>
#include <string>

namespace bsgaps {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidParameter : Error { using Error::Error; };
struct InvalidMetric : Error { using Error::Error; };
struct InvalidPotential : Error { using Error::Error; };
struct InvalidArity : Error { using Error::Error; };
struct InvalidInput : Error { using Error::Error; };
struct DependentInput : Error { using Error::Error; };
struct InternalError : Error { using Error::Error; };
struct BasisTooLarge : Error { using Error::Error; };
struct EigenFailure : Error { using Error::Error; };
struct EnumerationTooLarge : Error { using Error::Error; };
struct OutsideAnnulus : Error { using Error::Error; };
struct NotResonant : Error { using Error::Error; };
struct ResonantDenominator : Error { using Error::Error; };
struct InadmissibleInstance : Error { using Error::Error; };
struct GenerationFailed : Error { using Error::Error; };
struct Uncertified : Error { using Error::Error; };

} // namespace bsgaps
