#pragma once

#include <stdexcept>
#include <string>

namespace sqdyn {

// Error taxonomy shared across the library.  Builders throw on invalid
// specs; evaluators throw on domain violations.  The CLI maps these to
// exit code 1 (build errors) while failed verifications exit with 2.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error {
    using Error::Error;
};

struct InvalidInputError : Error {
    using Error::Error;
};

struct MarginError : Error {
    using Error::Error;
};

struct ResolutionError : Error {
    using Error::Error;
};

struct PlacementError : Error {
    using Error::Error;
};

struct EnumerationDepthError : Error {
    using Error::Error;
};

struct NotInvertibleError : Error {
    using Error::Error;
};

struct NearSingularError : Error {
    using Error::Error;
};

struct InternalError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace sqdyn
