#pragma once

#include <stdexcept>
#include <string>

namespace geex {

// Every error the library raises carries one of these kinds so callers
// (and the CLI exit-code mapping) can dispatch without string matching.
enum class ErrorKind {
    ShapeMismatch,
    AlphaOutOfRange,
    NotTwoDimensional,
    EvenKernel,
    OddWithMirror,
    BadBudget,
    BudgetNotDivisible,
    BudgetTooSmall,
    BadBudgetList,
    NonFiniteInput,
    NotWhiteBox,
    BadClass,
    BadArch,
    EmptyDataset,
    BadCount,
    ParseError,
    VersionMismatch,
    ZeroConfidence,
    BadLength,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace geex
