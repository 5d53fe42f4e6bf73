#pragma once

#include <stdexcept>
#include <string>

namespace vatscope {

// Malformed or out-of-contract input. CLI exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numeric failure (degenerate histogram, eigensolver breakdown). CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failure; the message carries the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vatscope
