#ifndef SALNET_ERROR_HPP
#define SALNET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace salnet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: missing files, malformed rows, shape mismatches. CLI exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

// Corrupt on-disk artifacts: bad magic, checksum, truncation. CLI exit code 2.
class FormatError : public InputError {
public:
    using InputError::InputError;
};

// Non-finite loss during training. CLI exit code 3.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace salnet

#endif
