#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nesum::utf8 {

/// Decodes UTF-8 into codepoints. Invalid byte sequences decode to U+FFFD,
/// one replacement per bad byte, so decode never throws and encode(decode(s))
/// preserves length bookkeeping for well-formed input.
std::vector<char32_t> decode(std::string_view s);

void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

/// Unicode whitespace as used by the tokenizer (ASCII space/tab/newlines,
/// NEL, NBSP, the general-punctuation spaces, line/paragraph separators,
/// narrow NBSP, ideographic space).
bool is_space(char32_t cp);

/// Letter classification restricted to the Latin ranges Czech text uses
/// (ASCII, Latin-1 supplement, Latin Extended-A).
bool is_alpha(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
char32_t to_upper(char32_t cp);
char32_t to_lower(char32_t cp);

/// Lowercases a UTF-8 string codepoint by codepoint (Latin ranges only).
std::string lower(std::string_view s);

/// First codepoint of a UTF-8 string, or U+0000 for the empty string.
char32_t first_codepoint(std::string_view s);

/// Number of codepoints.
std::size_t length(std::string_view s);

}  // namespace nesum::utf8
