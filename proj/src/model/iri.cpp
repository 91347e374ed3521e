#include "ftm/iri.hpp"

#include <cctype>

#include "ftm/error.hpp"

namespace ftm {

Iri::Iri(std::string value) : value_(std::move(value)) {
  if (value_.empty()) throw ContractViolation("IRI must not be empty");
  for (char c : value_) {
    if (std::isspace(static_cast<unsigned char>(c))) throw ContractViolation("IRI contains whitespace: " + value_);
  }
}

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config:
      return "config";
    case ErrorCategory::Ingest:
      return "ingest";
    case ErrorCategory::Provider:
      return "provider";
    case ErrorCategory::Io:
      return "io";
    case ErrorCategory::Contract:
      return "contract";
    case ErrorCategory::Internal:
      return "internal";
  }
  return "internal";
}

}  // namespace ftm
