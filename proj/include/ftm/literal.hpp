#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ftm/iri.hpp"

namespace ftm {

enum class LiteralKind { Text, Number, DateTime };

const char* to_string(LiteralKind kind);

/// A typed RDF literal. `raw` is the lexical form exactly as it appeared in the source.
struct LiteralValue {
  std::string raw;
  LiteralKind kind = LiteralKind::Text;
  std::optional<double> number;
  /// Seconds since 1970-01-01T00:00:00Z.
  std::optional<std::int64_t> timestamp;
  /// False for date-only values; those denote UTC midnight.
  bool has_time_of_day = false;
  std::optional<Iri> datatype;
  std::optional<std::string> language;

  /// RDF term identity: lexical form, datatype and language tag. Parsed fields do not participate.
  friend bool operator==(const LiteralValue& a, const LiteralValue& b) {
    return a.raw == b.raw && a.datatype == b.datatype && a.language == b.language;
  }
};

struct ParsedDate {
  std::int64_t timestamp = 0;
  bool has_time_of_day = false;
};

/// Days between 1970-01-01 and the given proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t year, unsigned month, unsigned day);

/// Whole-string number parse: integer, decimal, scientific notation, or comma-grouped thousands
/// ("1,234,567.5"). Surrounding whitespace is ignored.
std::optional<double> parse_number(std::string_view text);

/// Whole-string date parse. Accepts ISO-8601 date and dateTime (with optional fraction and zone),
/// "March 12, 2009", "Mar 12 2009" and "12 March 2009". Values without a zone are UTC.
std::optional<ParsedDate> parse_date(std::string_view text);

/// Finds the first date embedded anywhere in free text.
std::optional<ParsedDate> find_date(std::string_view text);

bool is_numeric_datatype(std::string_view datatype_iri);
bool is_date_datatype(std::string_view datatype_iri);

LiteralValue classify_literal(std::string raw, std::optional<Iri> datatype = std::nullopt,
                              std::optional<std::string> language = std::nullopt);

}  // namespace ftm
