#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace junctionc {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A state-space product does not fit in 64 bits (or exceeds a configured cap).
class ModelTooLargeError : public Error {
public:
    using Error::Error;
};

// Raised by operations that require a triangulated graph. Carries a
// chordless cycle of length >= 4 as evidence.
class NotChordalError : public Error {
public:
    NotChordalError(const std::string& msg, std::vector<int> cycle)
        : Error(msg), witness_cycle(std::move(cycle)) {}
    std::vector<int> witness_cycle;
};

// Input graph must be connected; carries the connected components found.
class DisconnectedGraphError : public Error {
public:
    DisconnectedGraphError(const std::string& msg, std::vector<std::vector<int>> comps)
        : Error(msg), components(std::move(comps)) {}
    std::vector<std::vector<int>> components;
};

// A directed input contains a cycle.
class CycleError : public Error {
public:
    using Error::Error;
};

// An exhaustive routine was asked to run above its size bound.
class BoundExceededError : public Error {
public:
    using Error::Error;
};

// Positive mass divided by zero: a configuration previously ruled out
// acquired mass, which means the model state is inconsistent.
class InconsistencyError : public Error {
public:
    InconsistencyError(const std::string& msg, std::size_t config)
        : Error(msg), config_index(config) {}
    std::size_t config_index = 0;
};

// Evidence drives the joint to all zeros.
class ImpossibleEvidenceError : public Error {
public:
    using Error::Error;
};

// Model file could not be parsed at all.
class ParseError : public Error {
public:
    using Error::Error;
};

// Model file parsed but violates a semantic rule (table lengths, names, ...).
class SemanticError : public Error {
public:
    using Error::Error;
};

}  // namespace junctionc
