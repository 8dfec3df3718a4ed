#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lea/data.hpp"
#include "lea/rng.hpp"
#include "lea/text.hpp"

namespace lea::noise {

enum class TypoOp { insertion, deletion, substitution, swap, keyboard };

inline constexpr TypoOp kAllOps[] = {TypoOp::insertion, TypoOp::deletion,
                                     TypoOp::substitution, TypoOp::swap,
                                     TypoOp::keyboard};

inline const char* to_string(TypoOp op) {
    switch (op) {
        case TypoOp::insertion: return "insertion";
        case TypoOp::deletion: return "deletion";
        case TypoOp::substitution: return "substitution";
        case TypoOp::swap: return "swap";
        case TypoOp::keyboard: return "keyboard";
    }
    return "?";
}

struct NoiseConfig {
    double p_word = 0.20;
    double p_sentence = 1.0;        // 1.0 for test corruption, 0.5 for DA
    std::size_t min_word_len_exclusive = 3;
    std::uint64_t seed = 0;
};

// QWERTY adjacency over the three letter rows. Horizontal neighbors are
// the same-row keys at c-1 and c+1. Vertical neighbors follow the
// half-key stagger: the home row is offset half a key to the left of the
// top and bottom rows, so a top- or bottom-row key at column c straddles
// home-row columns c and c+1, and a home-row key at column c straddles
// columns c-1 and c of the outer rows. Non-letters have no neighbors.
// Returned sorted.
inline std::string keyboard_neighbors(char32_t c) {
    static constexpr std::array<std::string_view, 3> rows = {
        "qwertyuiop", "asdfghjkl", "zxcvbnm"};
    int row = -1, col = -1;
    for (int r = 0; r < 3 && row < 0; ++r) {
        for (int k = 0; k < static_cast<int>(rows[r].size()); ++k) {
            if (static_cast<char32_t>(rows[r][k]) == c) {
                row = r;
                col = k;
                break;
            }
        }
    }
    if (row < 0) return {};
    std::string out;
    auto add = [&](int r, int k) {
        if (r < 0 || r > 2) return;
        if (k < 0 || k >= static_cast<int>(rows[r].size())) return;
        out.push_back(rows[r][k]);
    };
    add(row, col - 1);
    add(row, col + 1);
    if (row == 0) {
        add(1, col);
        add(1, col + 1);
    } else if (row == 1) {
        add(0, col - 1);
        add(0, col);
        add(2, col - 1);
        add(2, col);
    } else {
        add(1, col);
        add(1, col + 1);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

inline char32_t ascii_lower(char32_t c) {
    return (c >= U'A' && c <= U'Z') ? c + 32 : c;
}

// Uniform over a-z excluding `old`, so the edit always changes the word.
inline char32_t random_letter_excluding(SplitMix64& rng, char32_t old) {
    if (old >= U'a' && old <= U'z') {
        std::uint64_t k = rng.next_below(25);
        if (k >= static_cast<std::uint64_t>(old - U'a')) ++k;
        return U'a' + static_cast<char32_t>(k);
    }
    return U'a' + static_cast<char32_t>(rng.next_below(26));
}

} // namespace detail

// Applies exactly one edit of the given kind. Works on Unicode scalar
// values; inserted and substituted characters are drawn from a-z.
inline std::string corrupt_word(std::string_view word, TypoOp op,
                                SplitMix64& rng) {
    std::u32string w = codepoints_raw(word);
    const std::size_t n = w.size();
    switch (op) {
        case TypoOp::insertion: {
            std::size_t pos = rng.next_below(n + 1);
            char32_t ch = U'a' + static_cast<char32_t>(rng.next_below(26));
            w.insert(w.begin() + static_cast<std::ptrdiff_t>(pos), ch);
            break;
        }
        case TypoOp::deletion: {
            if (n <= 1) return std::string(word); // never empty the word
            std::size_t pos = rng.next_below(n);
            w.erase(w.begin() + static_cast<std::ptrdiff_t>(pos));
            break;
        }
        case TypoOp::substitution: {
            if (n == 0) return std::string(word);
            std::size_t pos = rng.next_below(n);
            w[pos] = detail::random_letter_excluding(rng, w[pos]);
            break;
        }
        case TypoOp::swap: {
            std::vector<std::size_t> spots;
            for (std::size_t i = 0; i + 1 < n; ++i)
                if (w[i] != w[i + 1]) spots.push_back(i);
            if (spots.empty()) return std::string(word);
            std::size_t i = spots[rng.next_below(spots.size())];
            std::swap(w[i], w[i + 1]);
            break;
        }
        case TypoOp::keyboard: {
            if (n == 0) return std::string(word);
            std::size_t pos = rng.next_below(n);
            std::string nb = keyboard_neighbors(detail::ascii_lower(w[pos]));
            if (nb.empty()) {
                w[pos] = detail::random_letter_excluding(rng, w[pos]);
            } else {
                w[pos] = static_cast<char32_t>(
                    static_cast<unsigned char>(nb[rng.next_below(nb.size())]));
            }
            break;
        }
    }
    return encode_utf8(w);
}

namespace detail {

inline constexpr std::uint64_t kSentenceSlot = ~0ULL;

} // namespace detail

// One word has one substream keyed by (seed, pair, side, word index), so
// corrupting a word never perturbs another word's draws. The sentence
// gate has its own slot. Whitespace runs are preserved byte for byte.
inline std::string corrupt_sentence(std::string_view s, const NoiseConfig& cfg,
                                    std::uint64_t pair_index,
                                    std::uint32_t side) {
    SplitMix64 gate =
        substream(cfg.seed, {pair_index, side, detail::kSentenceSlot});
    if (gate.next_unit() >= cfg.p_sentence) return std::string(s);

    std::string out;
    out.reserve(s.size() + 4);
    std::size_t i = 0;
    std::uint64_t word_index = 0;
    while (i < s.size()) {
        if (is_space(s[i])) {
            out.push_back(s[i]);
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        std::string_view word = s.substr(start, i - start);
        SplitMix64 rng = substream(cfg.seed, {pair_index, side, word_index});
        ++word_index;
        bool eligible =
            codepoints_raw(word).size() > cfg.min_word_len_exclusive;
        if (eligible && rng.next_unit() < cfg.p_word) {
            TypoOp op = kAllOps[rng.next_below(5)];
            out += corrupt_word(word, op, rng);
        } else {
            out += word;
        }
    }
    return out;
}

// Both sides of every pair, pair index = record position.
inline data::PairDataset corrupt_dataset(const data::PairDataset& ds,
                                         const NoiseConfig& cfg) {
    data::PairDataset out;
    out.split = ds.split;
    out.records.reserve(ds.records.size());
    for (std::size_t p = 0; p < ds.records.size(); ++p) {
        const auto& r = ds.records[p];
        out.records.push_back({r.id, corrupt_sentence(r.left, cfg, p, 0),
                               corrupt_sentence(r.right, cfg, p, 1), r.label});
    }
    return out;
}

// Test-split corruption: `replicas` copies under seeds seed+0..seed+k-1,
// every sentence processed (p_sentence forced to 1).
inline std::vector<data::PairDataset> corrupt_split(const data::PairDataset& ds,
                                                    NoiseConfig cfg,
                                                    std::size_t replicas) {
    cfg.p_sentence = 1.0;
    std::vector<data::PairDataset> out;
    out.reserve(replicas);
    std::uint64_t base = cfg.seed;
    for (std::size_t k = 0; k < replicas; ++k) {
        cfg.seed = base + k;
        out.push_back(corrupt_dataset(ds, cfg));
    }
    return out;
}

} // namespace lea::noise
