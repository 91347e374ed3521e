#pragma once

// UTF-8 helpers shared by label normalization, fuzzy matching and the trigram embedder.

#include <string>
#include <string_view>

namespace ftm {

/// Decodes UTF-8; each invalid byte becomes U+FFFD.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);

/// Simple case folding for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic capitals.
char32_t to_lower(char32_t c);
bool is_upper(char32_t c);
bool is_digit(char32_t c);
bool is_space(char32_t c);
/// ASCII punctuation plus the General Punctuation block and common Latin-1 marks.
bool is_punct(char32_t c);
bool is_letter(char32_t c);

std::string lowercase(std::string_view text);

}  // namespace ftm
