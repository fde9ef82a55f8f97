#pragma once

#include <stdexcept>
#include <string>

namespace tsr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite coordinates, inverted corners, bad box values.
struct GeometryError : Error {
    using Error::Error;
};

// Malformed input text/binary; message carries file/line where known.
struct ParseError : Error {
    using Error::Error;
};

// Inconsistent configuration (tensor shape mismatch, layer C disagreement, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Argument outside its documented domain.
struct DomainError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace tsr
