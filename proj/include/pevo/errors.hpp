// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pevo {

// Error classes map one-to-one onto CLI exit codes.
enum class ErrorClass { config = 2, provider = 3, data = 4, internal = 5 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string msg)
      : std::runtime_error(std::move(msg)), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

struct ConfigError : Error {
  explicit ConfigError(std::string msg) : Error(ErrorClass::config, std::move(msg)) {}
};

// Bad call arguments (empty lists, out-of-range fractions, n_new > n, ...).
struct InvalidArgument : ConfigError {
  explicit InvalidArgument(std::string msg) : ConfigError(std::move(msg)) {}
};

struct InvalidState : Error {
  explicit InvalidState(std::string msg) : Error(ErrorClass::internal, std::move(msg)) {}
};

struct DataError : Error {
  explicit DataError(std::string msg) : Error(ErrorClass::data, std::move(msg)) {}
};

struct ProviderError : Error {
  explicit ProviderError(std::string msg) : Error(ErrorClass::provider, std::move(msg)) {}
};

// Transient-retry attempt cap exhausted.
struct ProviderExhausted : ProviderError {
  explicit ProviderExhausted(std::string msg) : ProviderError(std::move(msg)) {}
};

// A scripted provider ran out of canned responses (or no rule matched).
struct ScriptExhausted : ProviderError {
  explicit ScriptExhausted(std::string msg) : ProviderError(std::move(msg)) {}
};

// Model output did not contain the demanded tag.
struct ExtractionError : ProviderError {
  explicit ExtractionError(std::string msg) : ProviderError(std::move(msg)) {}
};

struct InternalError : Error {
  explicit InternalError(std::string msg) : Error(ErrorClass::internal, std::move(msg)) {}
};

}  // namespace pevo
