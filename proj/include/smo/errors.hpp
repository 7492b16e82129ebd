#pragma once

#include <stdexcept>
#include <string>

namespace smo {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidSpace : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct InvalidFitness : Error { using Error::Error; };
struct NonFiniteObjective : Error { using Error::Error; };
struct ObjectiveFailure : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct InvalidEpsilon : Error { using Error::Error; };
struct EmptyMask : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };
struct InvalidInput : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct DecodeError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct MissingPair : Error { using Error::Error; };

}  // namespace smo
