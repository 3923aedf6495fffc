#pragma once

#include <stdexcept>
#include <string>

namespace ratobs {

struct Error : std::runtime_error {
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

struct DivisionByZero : Error {
    DivisionByZero() : Error("division by zero rational function") {}
};

struct ZeroDenominatorAfterSubstitution : Error {
    ZeroDenominatorAfterSubstitution()
        : Error("substitution made a denominator identically zero") {}
};

struct SyntaxError : Error {
    int line, column;
    SyntaxError(int l, int c, const std::string &what)
        : Error("syntax error at " + std::to_string(l) + ":" + std::to_string(c) + ": " + what),
          line(l), column(c) {}
};

struct UndefinedSymbol : Error {
    explicit UndefinedSymbol(const std::string &name) : Error("undefined symbol: " + name) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string &what) : Error("dimension mismatch: " + what) {}
};

struct DenominatorZeroAtX0 : Error {
    explicit DenominatorZeroAtX0(const std::string &what)
        : Error("denominator vanishes at the initial state: " + what) {}
};

struct ResourceExceeded : Error {
    explicit ResourceExceeded(const std::string &what) : Error("resource budget exceeded: " + what) {}
};

struct NonPolynomialMap : Error {
    NonPolynomialMap() : Error("map has a nontrivial denominator") {}
};

struct UnobservablePair : Error {
    UnobservablePair() : Error("(A, C) is not an observable pair") {}
};

struct UndefinedAtPoint : Error {
    explicit UndefinedAtPoint(const std::string &what)
        : Error("expression undefined at evaluation point: " + what) {}
};

struct NoConvergence : Error {
    explicit NoConvergence(const std::string &what) : Error("iteration did not converge: " + what) {}
};

struct ShiftStructureViolation : Error {
    explicit ShiftStructureViolation(const std::string &what)
        : Error("realization shift structure violated: " + what) {}
};

struct NoStableCandidate : Error {
    NoStableCandidate() : Error("no gain candidate produced a finite run") {}
};

} // namespace ratobs
