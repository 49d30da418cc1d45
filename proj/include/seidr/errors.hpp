#pragma once

#include <stdexcept>
#include <string>

namespace seidr {

// Invalid or inconsistent search configuration. The message names the
// offending field.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An index argument outside its documented range.
struct RangeError : std::runtime_error {
  explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

// A prompt template referenced a slot with no value, or could not be rendered.
struct TemplateError : std::runtime_error {
  explicit TemplateError(const std::string& what) : std::runtime_error(what) {}
};

// Model backend failure (network, HTTP status, malformed reply) after the
// retry budget is exhausted.
struct BackendError : std::runtime_error {
  explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

// A model request exceeded its per-request deadline on every attempt.
struct TimeoutError : std::runtime_error {
  explicit TimeoutError(const std::string& what) : std::runtime_error(what) {}
};

// The execution harness itself failed (missing toolchain, scratch dir not
// writable). Distinct from a candidate failing its tests.
struct SandboxError : std::runtime_error {
  explicit SandboxError(const std::string& what) : std::runtime_error(what) {}
};

// Benchmark data missing, malformed, or insufficient.
struct DatasetError : std::runtime_error {
  explicit DatasetError(const std::string& what) : std::runtime_error(what) {}
};

// An aggregated test function contained no assertion to split out.
struct SplitError : std::runtime_error {
  explicit SplitError(const std::string& what) : std::runtime_error(what) {}
};

// Selection was asked to pick parents from an empty population.
struct EmptyPopulation : std::runtime_error {
  explicit EmptyPopulation(const std::string& what) : std::runtime_error(what) {}
};

// Candidates passed to lexicase selection carry score vectors of unequal
// length (or none at all).
struct ScoreLengthMismatch : std::runtime_error {
  explicit ScoreLengthMismatch(const std::string& what) : std::runtime_error(what) {}
};

// A metric was requested over an empty score list.
struct EmptyScores : std::runtime_error {
  explicit EmptyScores(const std::string& what) : std::runtime_error(what) {}
};

// A report was requested over runs from different datasets.
struct MixedDatasetError : std::runtime_error {
  explicit MixedDatasetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seidr
