#pragma once

#include <stdexcept>
#include <string>

namespace qct {

/// Input data violates a structural or metric precondition.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A file could not be parsed into the expected schema.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// No certified local embedding was found within the allowed dimensions.
struct EmbeddingFailure : std::runtime_error {
  explicit EmbeddingFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qct
