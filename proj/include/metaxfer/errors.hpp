#pragma once

#include <stdexcept>
#include <string>

namespace metaxfer {

struct MalformedArff : std::runtime_error {
    MalformedArff(size_t line, const std::string& reason)
        : std::runtime_error("malformed ARFF at line " + std::to_string(line) + ": " + reason),
          line(line) {}
    size_t line;
};

struct MissingKey : std::runtime_error {
    explicit MissingKey(const std::string& key)
        : std::runtime_error("missing required key: " + key) {}
};

struct UnparsableValue : std::runtime_error {
    explicit UnparsableValue(const std::string& what) : std::runtime_error(what) {}
};

struct InconsistentScenario : std::runtime_error {
    explicit InconsistentScenario(const std::string& what) : std::runtime_error(what) {}
};

struct NetworkError : std::runtime_error {
    explicit NetworkError(const std::string& what) : std::runtime_error(what) {}
};

struct IncompleteScenario : std::runtime_error {
    explicit IncompleteScenario(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateDataset : std::runtime_error {
    explicit DegenerateDataset(const std::string& what) : std::runtime_error(what) {}
};

struct KTooLarge : std::runtime_error {
    explicit KTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientGroups : std::runtime_error {
    explicit InsufficientGroups(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyCollection : std::runtime_error {
    explicit EmptyCollection(const std::string& what) : std::runtime_error(what) {}
};

struct ClassTooSmall : std::runtime_error {
    explicit ClassTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace metaxfer
