#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lea {

// UTF-8 decoding that never fails: malformed bytes decode as their raw
// byte value.
inline std::u32string codepoints_raw(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    while (i < s.size()) {
        unsigned char b0 = byte(i);
        char32_t cp = b0;
        std::size_t len = 1;
        if (b0 < 0x80) {
            len = 1;
        } else if ((b0 & 0xe0) == 0xc0 && i + 1 < s.size() &&
                   (byte(i + 1) & 0xc0) == 0x80) {
            cp = ((b0 & 0x1fu) << 6) | (byte(i + 1) & 0x3fu);
            len = 2;
        } else if ((b0 & 0xf0) == 0xe0 && i + 2 < s.size() &&
                   (byte(i + 1) & 0xc0) == 0x80 && (byte(i + 2) & 0xc0) == 0x80) {
            cp = ((b0 & 0x0fu) << 12) | ((byte(i + 1) & 0x3fu) << 6) |
                 (byte(i + 2) & 0x3fu);
            len = 3;
        } else if ((b0 & 0xf8) == 0xf0 && i + 3 < s.size() &&
                   (byte(i + 1) & 0xc0) == 0x80 && (byte(i + 2) & 0xc0) == 0x80 &&
                   (byte(i + 3) & 0xc0) == 0x80) {
            cp = ((b0 & 0x07u) << 18) | ((byte(i + 1) & 0x3fu) << 12) |
                 ((byte(i + 2) & 0x3fu) << 6) | (byte(i + 3) & 0x3fu);
            len = 4;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

// ASCII letters lowercased; other scalars pass through untouched (no
// accent stripping).
inline std::u32string codepoints_lower(std::string_view s) {
    std::u32string out = codepoints_raw(s);
    for (char32_t& cp : out)
        if (cp >= U'A' && cp <= U'Z') cp += 32;
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline std::string encode_utf8(const std::u32string& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

inline std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c += 32;
    return out;
}

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
}

// Whitespace-delimited words.
inline std::vector<std::string_view> split_words(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

inline std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

} // namespace lea
