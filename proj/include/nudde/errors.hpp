#pragma once

#include <stdexcept>
#include <string>

namespace nudde {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed data: non-finite samples, bad grids, bad tables, bad specs.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// A shift with positive offset reads the future.
class NonCausalOperator : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class NotAContraction : public Error {
public:
    using Error::Error;
};

/// No weight up to the search limit makes the bound drop below the target.
class NotEventuallyContracting : public Error {
public:
    using Error::Error;
};

class Divergence : public Error {
public:
    using Error::Error;
};

} // namespace nudde
