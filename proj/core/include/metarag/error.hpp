#pragma once

#include <stdexcept>
#include <string>

namespace metarag {

// Base of every exception the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (bad argument, empty input).
class InputError : public Error {
public:
    using Error::Error;
};

// Invalid or inconsistent configuration (unknown role, k > candidate pool, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Network or provider failure after retries were exhausted.
class TransportError : public Error {
public:
    using Error::Error;
};

// The model reply could not be parsed or validated against the requested schema.
class StructuredOutputError : public Error {
public:
    using Error::Error;
};

// On-disk index missing, truncated or inconsistent.
class IndexError : public Error {
public:
    using Error::Error;
};

} // namespace metarag
