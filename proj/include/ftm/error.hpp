#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ftm {

// Coarse classification used by the CLI to pick exit codes and message prefixes.
enum class ErrorCategory { Config, Ingest, Provider, Io, Contract, Internal };

const char* to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

/// Thrown when a function is called with arguments outside its documented domain.
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& message) : Error(ErrorCategory::Contract, message) {}
};

class PredicateAbsent : public Error {
 public:
  explicit PredicateAbsent(const std::string& predicate)
      : Error(ErrorCategory::Ingest, "predicate absent: " + predicate), predicate_(predicate) {}

  const std::string& predicate() const { return predicate_; }

 private:
  std::string predicate_;
};

/// Syntax error in an RDF document. Line is 1-based, offset is the byte offset from the start of input.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t byte_offset, const std::string& message)
      : Error(ErrorCategory::Ingest, "line " + std::to_string(line) + " (byte " + std::to_string(byte_offset) +
                                         "): " + message),
        line_(line),
        byte_offset_(byte_offset) {}

  std::size_t line() const { return line_; }
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t line_;
  std::size_t byte_offset_;
};

/// SPARQL endpoint failure after all retries were spent. Status 0 means no HTTP response was received.
class EndpointError : public Error {
 public:
  EndpointError(int status, int attempts, const std::string& message)
      : Error(ErrorCategory::Ingest, message + " (status " + std::to_string(status) + ", after " +
                                         std::to_string(attempts) + " attempts)"),
        status_(status),
        attempts_(attempts) {}

  int status() const { return status_; }
  int attempts() const { return attempts_; }

 private:
  int status_;
  int attempts_;
};

class SnapshotError : public Error {
 public:
  enum class Kind { Version, Checksum, Format };

  SnapshotError(Kind kind, const std::string& message) : Error(ErrorCategory::Io, message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ProviderError : public Error {
 public:
  ProviderError(int status, int attempts, const std::string& message)
      : Error(ErrorCategory::Provider, message + " (status " + std::to_string(status) + ", attempt " +
                                           std::to_string(attempts) + ")"),
        status_(status),
        attempts_(attempts) {}

  int status() const { return status_; }
  int attempts() const { return attempts_; }

 private:
  int status_;
  int attempts_;
};

}  // namespace ftm
