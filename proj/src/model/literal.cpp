#include "ftm/literal.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include "ftm/error.hpp"

namespace ftm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!is_digit(c)) return false;
  return true;
}

int to_int(std::string_view s) {
  int value = 0;
  std::from_chars(s.data(), s.data() + s.size(), value);
  return value;
}

bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(std::int64_t year, unsigned month) {
  static constexpr std::array<unsigned, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap(year)) return 29;
  return kDays[month - 1];
}

bool valid_ymd(std::int64_t year, unsigned month, unsigned day) {
  return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

std::int64_t midnight(std::int64_t year, unsigned month, unsigned day) {
  return days_from_civil(year, month, day) * 86400;
}

// Parses a zone designator ("Z", "+02:00", "-0530"); returns the offset east of UTC in seconds.
std::optional<std::int64_t> parse_zone(std::string_view z) {
  if (z == "Z" || z == "z") return 0;
  if (z.size() < 5 || (z[0] != '+' && z[0] != '-')) return std::nullopt;
  std::string_view hh = z.substr(1, 2);
  std::string_view mm;
  if (z.size() == 6 && z[3] == ':') {
    mm = z.substr(4, 2);
  } else if (z.size() == 5) {
    mm = z.substr(3, 2);
  } else {
    return std::nullopt;
  }
  if (!all_digits(hh) || !all_digits(mm)) return std::nullopt;
  std::int64_t offset = to_int(hh) * 3600 + to_int(mm) * 60;
  return z[0] == '-' ? -offset : offset;
}

std::optional<ParsedDate> parse_iso(std::string_view s) {
  if (s.size() < 10 || !all_digits(s.substr(0, 4)) || s[4] != '-' || !all_digits(s.substr(5, 2)) || s[7] != '-' ||
      !all_digits(s.substr(8, 2)))
    return std::nullopt;
  const std::int64_t year = to_int(s.substr(0, 4));
  const unsigned month = static_cast<unsigned>(to_int(s.substr(5, 2)));
  const unsigned day = static_cast<unsigned>(to_int(s.substr(8, 2)));
  if (!valid_ymd(year, month, day)) return std::nullopt;
  ParsedDate out{midnight(year, month, day), false};
  std::string_view rest = s.substr(10);
  if (rest.empty()) return out;
  if (rest[0] != 'T' && rest[0] != ' ') {
    // xsd:date may carry a zone; date-only values stay at UTC midnight.
    if (parse_zone(rest)) return out;
    return std::nullopt;
  }
  rest.remove_prefix(1);
  if (rest.size() < 5 || !all_digits(rest.substr(0, 2)) || rest[2] != ':' || !all_digits(rest.substr(3, 2)))
    return std::nullopt;
  int hour = to_int(rest.substr(0, 2));
  int minute = to_int(rest.substr(3, 2));
  int second = 0;
  rest.remove_prefix(5);
  if (!rest.empty() && rest[0] == ':') {
    if (rest.size() < 3 || !all_digits(rest.substr(1, 2))) return std::nullopt;
    second = to_int(rest.substr(1, 2));
    rest.remove_prefix(3);
    if (!rest.empty() && rest[0] == '.') {
      std::size_t i = 1;
      while (i < rest.size() && is_digit(rest[i])) ++i;
      if (i == 1) return std::nullopt;
      rest.remove_prefix(i);
    }
  }
  if (hour > 24 || minute > 59 || second > 60 || (hour == 24 && (minute != 0 || second != 0))) return std::nullopt;
  std::int64_t offset = 0;
  if (!rest.empty()) {
    auto zone = parse_zone(rest);
    if (!zone) return std::nullopt;
    offset = *zone;
  }
  out.timestamp += hour * 3600 + minute * 60 + second - offset;
  out.has_time_of_day = true;
  return out;
}

std::optional<unsigned> month_from_name(std::string_view word) {
  static constexpr std::array<std::string_view, 12> kNames = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  if (!word.empty() && word.back() == '.') word.remove_suffix(1);
  if (word.size() < 3) return std::nullopt;
  std::string lower;
  for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (unsigned i = 0; i < kNames.size(); ++i) {
    if (lower == kNames[i]) return i + 1;
    if (lower.size() == 3 && kNames[i].substr(0, 3) == lower) return i + 1;
  }
  if (lower == "sept") return 9u;
  return std::nullopt;
}

std::optional<unsigned> day_from_token(std::string_view token) {
  if (token.size() > 2) {
    std::string_view suffix = token.substr(token.size() - 2);
    if (suffix == "st" || suffix == "nd" || suffix == "rd" || suffix == "th") token.remove_suffix(2);
  }
  if (token.empty() || token.size() > 2 || !all_digits(token)) return std::nullopt;
  return static_cast<unsigned>(to_int(token));
}

std::optional<ParsedDate> date_from_words(std::string_view a, std::string_view b, std::string_view c) {
  if (c.size() != 4 || !all_digits(c)) return std::nullopt;
  const std::int64_t year = to_int(c);
  std::optional<unsigned> month = month_from_name(a);
  std::optional<unsigned> day = day_from_token(b);
  if (!month || !day) {
    month = month_from_name(b);
    day = day_from_token(a);
  }
  if (!month || !day || !valid_ymd(year, *month, *day)) return std::nullopt;
  return ParsedDate{midnight(year, *month, *day), false};
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',')) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != ',') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace

const char* to_string(LiteralKind kind) {
  switch (kind) {
    case LiteralKind::Text:
      return "text";
    case LiteralKind::Number:
      return "number";
    case LiteralKind::DateTime:
      return "datetime";
  }
  return "?";
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::optional<double> parse_number(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) return std::nullopt;
  bool negative = false;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  if (s.empty() || !(is_digit(s[0]) || s[0] == '.')) return std::nullopt;

  std::string digits;
  if (s.find(',') != std::string_view::npos) {
    // Thousands separators: 1-3 leading digits, then groups of exactly three.
    std::size_t i = 0;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i == 0 || i > 3) return std::nullopt;
    digits.append(s.substr(0, i));
    bool grouped = false;
    while (i < s.size() && s[i] == ',') {
      std::string_view group = s.substr(i + 1, 3);
      if (group.size() != 3 || !all_digits(group)) return std::nullopt;
      digits.append(group);
      i += 4;
      grouped = true;
    }
    if (!grouped) return std::nullopt;
    if (i < s.size()) {
      if (s[i] != '.' || i + 1 >= s.size() || !all_digits(s.substr(i + 1))) return std::nullopt;
      digits.append(s.substr(i));
    }
  } else {
    for (char c : s) {
      if (!(is_digit(c) || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-')) return std::nullopt;
    }
    digits.assign(s);
  }

  double value = 0.0;
  const char* begin = digits.data();
  const char* end = begin + digits.size();
  auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::general);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return negative ? -value : value;
}

std::optional<ParsedDate> parse_date(std::string_view text) {
  std::string_view s = trim(text);
  if (s.size() < 8 || s.size() > 40) return std::nullopt;
  if (auto iso = parse_iso(s)) return iso;
  auto w = words(s);
  if (w.size() == 3) return date_from_words(w[0], w[1], w[2]);
  return std::nullopt;
}

std::optional<ParsedDate> find_date(std::string_view text) {
  for (std::size_t i = 0; i + 10 <= text.size(); ++i) {
    if (i > 0 && is_digit(text[i - 1])) continue;
    if (!is_digit(text[i])) continue;
    std::size_t end = i + 10;
    if (end < text.size() && is_digit(text[end])) continue;
    std::string_view candidate = text.substr(i, 10);
    if (auto iso = parse_iso(candidate)) return iso;
  }
  auto w = words(text);
  for (std::size_t i = 0; i + 3 <= w.size(); ++i) {
    if (auto d = date_from_words(w[i], w[i + 1], w[i + 2])) return d;
  }
  return std::nullopt;
}

bool is_numeric_datatype(std::string_view dt) {
  if (dt.substr(0, vocab::kXsd.size()) != vocab::kXsd) return false;
  static constexpr std::array<std::string_view, 16> kNumeric = {
      "integer", "decimal",         "float",           "double",          "int",          "long",
      "short",   "byte",            "nonNegativeInteger", "positiveInteger", "negativeInteger", "nonPositiveInteger",
      "unsignedInt", "unsignedLong", "unsignedShort",   "unsignedByte"};
  std::string_view local = dt.substr(vocab::kXsd.size());
  for (auto name : kNumeric)
    if (local == name) return true;
  return false;
}

bool is_date_datatype(std::string_view dt) {
  if (dt.substr(0, vocab::kXsd.size()) != vocab::kXsd) return false;
  std::string_view local = dt.substr(vocab::kXsd.size());
  return local == "date" || local == "dateTime" || local == "dateTimeStamp" || local == "gYear" ||
         local == "gYearMonth";
}

LiteralValue classify_literal(std::string raw, std::optional<Iri> datatype, std::optional<std::string> language) {
  LiteralValue out;
  out.raw = std::move(raw);
  out.datatype = std::move(datatype);
  out.language = std::move(language);

  auto set_number = [&out](double v) {
    out.kind = LiteralKind::Number;
    out.number = v;
  };
  auto set_date = [&out](const ParsedDate& d) {
    out.kind = LiteralKind::DateTime;
    out.timestamp = d.timestamp;
    out.has_time_of_day = d.has_time_of_day;
  };

  if (out.datatype) {
    const std::string& dt = out.datatype->str();
    if (is_numeric_datatype(dt)) {
      if (auto v = parse_number(out.raw)) {
        set_number(*v);
        return out;
      }
    } else if (is_date_datatype(dt)) {
      std::string_view local = std::string_view(dt).substr(vocab::kXsd.size());
      std::string_view s = trim(out.raw);
      if (local == "gYear" && s.size() >= 4 && all_digits(s.substr(0, 4))) {
        set_date({midnight(to_int(s.substr(0, 4)), 1, 1), false});
        return out;
      }
      if (local == "gYearMonth" && s.size() >= 7 && all_digits(s.substr(0, 4)) && s[4] == '-' &&
          all_digits(s.substr(5, 2))) {
        unsigned month = static_cast<unsigned>(to_int(s.substr(5, 2)));
        if (month >= 1 && month <= 12) {
          set_date({midnight(to_int(s.substr(0, 4)), month, 1), false});
          return out;
        }
      }
      if (auto d = parse_date(out.raw)) {
        set_date(*d);
        return out;
      }
    }
  }
  if (auto v = parse_number(out.raw)) {
    set_number(*v);
  } else if (auto d = parse_date(out.raw)) {
    set_date(*d);
  }
  return out;
}

}  // namespace ftm
