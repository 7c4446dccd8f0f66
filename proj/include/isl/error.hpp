#pragma once

#include <stdexcept>
#include <string>

namespace isl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input is structurally valid but larger than an exact routine supports.
struct SizeExceeded : Error {
    using Error::Error;
};

// Enumeration would produce more items than the caller allowed.
struct TooMany : Error {
    using Error::Error;
};

struct BadPlacement : Error {
    using Error::Error;
};

struct BadInputs : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct EmptyWitness : Error {
    using Error::Error;
};

struct QuadratureFail : Error {
    using Error::Error;
};

struct UnknownSuite : Error {
    using Error::Error;
};

struct NoUncoveredGraph : Error {
    using Error::Error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw BadInputs(what);
}

}  // namespace isl
