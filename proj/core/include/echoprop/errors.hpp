#pragma once

#include <stdexcept>
#include <string>

namespace echoprop {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A window or flow was asked for entries outside the data it holds.
class HorizonError : public Error {
public:
    using Error::Error;
};

// Unknown catalog names, bad parameters, unreadable or malformed files.
class ConfigError : public Error {
public:
    using Error::Error;
};

// An implication diagram references nodes that do not exist.
class DiagramError : public Error {
public:
    using Error::Error;
};

// A runtime self-check failed; the CLI maps this to exit code 2.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace echoprop
