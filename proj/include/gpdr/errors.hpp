#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gpdr {

/// Raised when a caller violates a documented precondition (shapes, ranges, arities).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative numeric routine failed to converge or produced non-finite values.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CSV ingestion failures; the message names the offending row and/or column.
class IngestionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A distance target with no positive pairwise distance.
class DegenerateTarget : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Neural training diverged even after the learning-rate retry.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmbeddingRankError : public std::runtime_error {
public:
    EmbeddingRankError(const std::string& what, std::size_t usable_k)
        : std::runtime_error(what), usable_k_(usable_k) {}

    std::size_t usable_k() const noexcept { return usable_k_; }

private:
    std::size_t usable_k_;
};

class LookupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gpdr
