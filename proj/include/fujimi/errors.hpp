#pragma once

#include <stdexcept>
#include <string>

namespace fujimi {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- model construction / validation ---

struct RowSumError : Error {
    std::size_t state;
    RowSumError(std::size_t s, double sum)
        : Error("row sum of state " + std::to_string(s) + " is " +
                std::to_string(sum) + ", expected 1"),
          state(s) {}
};

struct IndexError : Error {
    explicit IndexError(const std::string& msg) : Error(msg) {}
};

struct DuplicateEdgeError : Error {
    DuplicateEdgeError(std::size_t src, std::size_t dst)
        : Error("duplicate edge (" + std::to_string(src) + ", " +
                std::to_string(dst) + ")") {}
};

struct NonPositiveProbabilityError : Error {
    NonPositiveProbabilityError(std::size_t src, std::size_t dst, double p)
        : Error("probability " + std::to_string(p) + " on edge (" +
                std::to_string(src) + ", " + std::to_string(dst) +
                ") is outside (0, 1]") {}
};

// --- numerical solvers ---

struct SolverDivergence : Error {
    explicit SolverDivergence(const std::string& msg) : Error(msg) {}
};

struct ZeroDenominator : Error {
    ZeroDenominator() : Error("denominator reward has zero steady-state mass") {}
};

// --- formulas ---

struct ParseError : Error {
    std::size_t position;
    ParseError(std::size_t pos, const std::string& expected)
        : Error("parse error at position " + std::to_string(pos) + ": expected " +
                expected),
          position(pos) {}
};

struct UnknownLabel : Error {
    explicit UnknownLabel(const std::string& name)
        : Error("unknown label '" + name + "'") {}
};

// --- model building / configuration ---

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct CycleTooShort : ConfigError {
    explicit CycleTooShort(const std::string& msg) : ConfigError(msg) {}
};

struct StateSpaceLimit : Error {
    explicit StateSpaceLimit(std::size_t cap)
        : Error("reachable state space exceeds cap of " + std::to_string(cap)) {}
};

// --- simulation ---

struct ScriptExhausted : Error {
    ScriptExhausted()
        : Error("noise script ran out of detection outcomes at a corrupt NMI check") {}
};

struct IoError : Error {
    IoError(const std::string& file, const std::string& what)
        : Error(file + ": " + what) {}
};

}  // namespace fujimi
