#pragma once

#include <stdexcept>
#include <string>

namespace inkscore {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad inputs: manifests, configs, out-of-range scores. CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

// External service failures (embedding/caption endpoints). CLI exit code 3.
class ProviderError : public Error {
public:
    using Error::Error;
};

} // namespace inkscore
