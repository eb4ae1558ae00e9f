#pragma once

#include <stdexcept>
#include <string>

namespace fedq {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mixed dimensions, undeclared symbols, incompatible rings.
struct StructureError : Error {
    using Error::Error;
};

// Missing assignment or division by zero during point evaluation.
struct EvalError : Error {
    using Error::Error;
};

// Bad degree bookkeeping inside a recursion; always an implementation bug.
struct InternalError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& what, std::size_t pos)
        : Error(what + " at column " + std::to_string(pos + 1)), position(pos) {}
    std::size_t position;
};

} // namespace fedq
