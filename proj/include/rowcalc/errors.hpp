#pragma once

#include <stdexcept>
#include <string>

namespace rowcalc {

// Every failure the library raises derives from Error. The three category
// classes map onto the CLI exit codes (1, 2 and 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad definitions, job files, formulas or control tables.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A record (or the data around it) violates the job's contract.
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// A configured hard cap (rows processed, control-table entries) was hit.
class LimitExceeded : public ConfigError {
public:
    using ConfigError::ConfigError;
};

}  // namespace rowcalc
