#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "porter.hpp"
#include "stopwords.hpp"

namespace rtl {

enum class Stemmer { Porter, None };

struct PreprocessConfig {
    StopwordSet stopword_list = default_stopwords();
    Stemmer stemmer = Stemmer::Porter;
    std::size_t min_token_length = 1;

    void validate() const
    {
        detail::require(min_token_length >= 1, ErrorKind::Parameter, "min_token_length must be >= 1");
    }
};

namespace utf8 {

inline constexpr char32_t replacement = 0xFFFD;

/// Decodes one code point starting at s[pos] and advances pos. Malformed
/// sequences decode to U+FFFD and consume a single byte.
inline char32_t decode(std::string_view s, std::size_t& pos)
{
    const auto lead = static_cast<unsigned char>(s[pos]);
    if (lead < 0x80) {
        ++pos;
        return lead;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) { extra = 1; cp = lead & 0x1F; }
    else if ((lead & 0xF0) == 0xE0) { extra = 2; cp = lead & 0x0F; }
    else if ((lead & 0xF8) == 0xF0) { extra = 3; cp = lead & 0x07; }
    else {
        ++pos;
        return replacement;
    }
    if (pos + static_cast<std::size_t>(extra) >= s.size()) {
        ++pos;
        return replacement;
    }
    for (int i = 1; i <= extra; ++i) {
        const auto cont = static_cast<unsigned char>(s[pos + static_cast<std::size_t>(i)]);
        if ((cont & 0xC0) != 0x80) {
            ++pos;
            return replacement;
        }
        cp = (cp << 6) | (cont & 0x3F);
    }
    pos += static_cast<std::size_t>(extra) + 1;
    return cp;
}

inline void encode(char32_t cp, std::string& out)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

} // namespace utf8

namespace detail {

// Simple case folding for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
constexpr char32_t to_lower(char32_t c) noexcept
{
    if (c >= U'A' && c <= U'Z') return c + 32;
    if (c < 0x80) return c;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
    if (c >= 0x100 && c <= 0x17F && c != 0x130 && c != 0x138 && c != 0x149 && c != 0x17F) {
        // Pairs are even/odd except in the 0x139..0x148 and 0x179..0x17E runs.
        const bool odd_upper = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
        if (odd_upper) return (c % 2 == 1) ? c + 1 : c;
        if (c == 0x178) return 0xFF;
        return (c % 2 == 0) ? c + 1 : c;
    }
    if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
    if (c >= 0x410 && c <= 0x42F) return c + 32;
    if (c >= 0x400 && c <= 0x40F) return c + 80;
    return c;
}

constexpr bool is_space(char32_t c) noexcept
{
    return c == U' ' || (c >= 0x09 && c <= 0x0D) || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
           c == 0x205F || c == 0x3000;
}

constexpr bool is_punct(char32_t c) noexcept
{
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
               (c >= 0x7B && c <= 0x7E);
    }
    if (c >= 0xA1 && c <= 0xBF) return c != 0xAA && c != 0xB5 && c != 0xBA;
    if (c == 0xD7 || c == 0xF7) return true;
    if (c >= 0x2010 && c <= 0x2027) return true;
    if (c >= 0x2030 && c <= 0x205E) return true;
    if (c >= 0x3001 && c <= 0x303F) return true;
    if (c >= 0xFF01 && c <= 0xFF0F) return true;
    if (c == utf8::replacement) return true;
    // control characters
    return c < 0x20 || c == 0x7F || (c >= 0x80 && c < 0xA0 && c != 0x85);
}

} // namespace detail

/// Lowercases and replaces every punctuation code point with a space.
inline std::string normalize_text(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char32_t cp = detail::to_lower(utf8::decode(text, pos));
        if (detail::is_punct(cp) || detail::is_space(cp)) out.push_back(' ');
        else utf8::encode(cp, out);
    }
    return out;
}

inline std::size_t codepoint_length(std::string_view token)
{
    std::size_t count = 0;
    for (unsigned char ch : token)
        if ((ch & 0xC0) != 0x80) ++count;
    return count;
}

/// lowercase -> strip punctuation -> whitespace tokenization -> stop words ->
/// minimum length -> stemming.
inline std::vector<std::string> preprocess(std::string_view text, const PreprocessConfig& config)
{
    const std::string normalized = normalize_text(text);
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < normalized.size()) {
        while (pos < normalized.size() && normalized[pos] == ' ') ++pos;
        std::size_t end = normalized.find(' ', pos);
        if (end == std::string::npos) end = normalized.size();
        if (end > pos) {
            std::string token = normalized.substr(pos, end - pos);
            if (!config.stopword_list.contains(token) && codepoint_length(token) >= config.min_token_length) {
                if (config.stemmer == Stemmer::Porter) token = porter_stem(token);
                tokens.push_back(std::move(token));
            }
        }
        pos = end;
    }
    return tokens;
}

} // namespace rtl
